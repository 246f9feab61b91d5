"""How close does column generation with heuristic pricing get to the true
optimum?  On small graphs the exact answer is available by dynamic
programming over node subsets, so the two can be compared directly.

    python demos/heuristic_vs_exact.py
"""
from bncg import PipelineConfig, PricingConfig, ScoreConfig, SimSpec, exact_bnsl, random_dag, run, simulate_gaussian

print(f"{'n':>2} {'d':>4} {'seed':>4} {'learned':>12} {'optimum':>12}  match")
for n in (4, 5, 6):
    for degree in (0.5, 1.0):
        for seed in range(3):
            spec = SimSpec(n, 1000, degree, seed=seed)
            sim = simulate_gaussian(random_dag(spec), spec)
            report = run(sim.data, PipelineConfig(pricing=PricingConfig(seed=seed)))
            best = exact_bnsl(sim.data, ScoreConfig.bic(1000)).score
            match = abs(report.score - best) <= 1e-6 * abs(best)
            print(f"{n:>2} {degree:>4} {seed:>4} {report.score:>12.3f} {best:>12.3f}  {'yes' if match else 'no'}")
