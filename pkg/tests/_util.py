"""Shared builders and brute-force references for the test suite."""
import itertools

import numpy as np

from bncg.datagen import SimSpec, random_dag, simulate_gaussian
from bncg.model import ClusterSet, Dag, Dataset, DualSolution, NodeSet
from bncg.submodular import SetFunctionOracle


def gaussian_instance(n, N=1000, degree=1.0, seed=0):
    spec = SimSpec(n, N, degree, seed=seed)
    return simulate_gaussian(random_dag(spec), spec)


def binary_data(n, N=500, seed=0, flip=0.15):
    """Binary codes along a random chain-like structure: X_k copies a noisy parent."""
    rng = np.random.default_rng(seed)
    X = np.zeros((N, n), dtype=int)
    X[:, 0] = rng.integers(0, 2, N)
    for k in range(1, n):
        parent = X[:, rng.integers(0, k)]
        noise = rng.random(N) < flip
        X[:, k] = np.where(noise, 1 - parent, parent)
    return Dataset(X, arities=(2,) * n)


def ternary_data(n, N=100, seed=0):
    rng = np.random.default_rng(seed)
    return Dataset(rng.integers(0, 3, (N, n)), arities=(3,) * n)


def all_dags(n):
    """Every DAG on ``n`` nodes (each unordered pair: absent, forward, backward)."""
    pairs = list(itertools.combinations(range(n), 2))
    out = []
    for marks in itertools.product((0, 1, 2), repeat=len(pairs)):
        parents = [0] * n
        for (u, v), m in zip(pairs, marks):
            if m == 1:
                parents[v] |= 1 << u
            elif m == 2:
                parents[u] |= 1 << v
        try:
            out.append(Dag(tuple(NodeSet(p) for p in parents)))
        except ValueError:
            pass
    return out


def skeleton_and_vstructures(dag):
    adj = dag.adjacency()
    skel = adj | adj.T
    vs = set()
    for b in range(dag.n):
        pa = sorted(dag.parents[b])
        for a, c in itertools.combinations(pa, 2):
            if not skel[a, c]:
                vs.add((a, b, c))
    return skel.tobytes(), frozenset(vs)


def equivalence_classes(dags):
    classes = {}
    for g in dags:
        classes.setdefault(skeleton_and_vstructures(g), []).append(g)
    return classes


def cpdag_by_enumeration(members):
    """Orientation intersection over an equivalence class: an edge is directed
    iff every member orients it the same way."""
    adjs = [g.adjacency() for g in members]
    out = np.zeros_like(adjs[0])
    skel = adjs[0] | adjs[0].T
    n = out.shape[0]
    for u in range(n):
        for v in range(n):
            if not skel[u, v]:
                continue
            if all(a[u, v] for a in adjs):
                out[u, v] = True
            elif not all(a[v, u] for a in adjs):
                out[u, v] = True  # orientation varies: undirected
    return out


def random_dag_from_order(rng, n, p=0.4):
    order = rng.permutation(n)
    edges = [(int(order[a]), int(order[b])) for a in range(n) for b in range(a + 1, n) if rng.random() < p]
    return Dag.from_edges(n, edges)


def subsets(n, exclude=None):
    for J in range(1 << n):
        if exclude is not None and (J >> exclude) & 1:
            continue
        yield J


def cardinality(d):
    return SetFunctionOracle(d, lambda m: float(m.bit_count()))


def random_submodular(d, seed):
    """Concave-of-modular plus coverage: submodular by construction."""
    rng = np.random.default_rng(seed)
    w = rng.uniform(0, 2, d)
    cover = rng.integers(0, 2, (d, 5)).astype(bool)
    cw = rng.uniform(0, 1, 5)
    lin = rng.normal(size=d)

    def h(mask):
        members = [k for k in range(d) if (mask >> k) & 1]
        covered = np.any(cover[members], axis=0) if members else np.zeros(5, bool)
        return float(np.sqrt(w[members].sum()) + cw[covered].sum() + lin[members].sum())

    return SetFunctionOracle(d, h)


def lp_certificate_errors(prog, sol, tol=1e-6):
    """Violations of primal/dual feasibility, strong duality and complementary
    slackness for an optimal solution; an empty list means all hold."""
    s = 1.0 if prog.maximize else -1.0
    c, y = s * prog.c, s * sol.duals  # as a maximization
    A, b, x = prog.A, prog.b, sol.x
    lo, hi = prog.lower, prog.upper
    errs = []
    scale = 1.0 + np.abs(x).max(initial=0.0)
    if np.any(x < lo - 1e-7 * scale) or np.any(x > hi + 1e-7 * scale):
        errs.append("bounds")
    lhs = A @ x
    slack = b - lhs
    for r, sense in enumerate(prog.senses):
        if (sense == "<=" and slack[r] < -1e-7 * scale) or (sense == ">=" and slack[r] > 1e-7 * scale) \
                or (sense == "=" and abs(slack[r]) > 1e-7 * scale):
            errs.append(f"row {r} infeasible")
        if (sense == "<=" and y[r] < -tol) or (sense == ">=" and y[r] > tol):
            errs.append(f"row {r} dual sign")
        if abs(y[r] * slack[r]) > tol * (1 + abs(y[r])):
            errs.append(f"row {r} slackness")
    d = c - A.T @ y
    for j in range(len(c)):
        if d[j] > tol and not np.isfinite(hi[j]):
            errs.append(f"var {j} dual infeasible (up)")
        if d[j] < -tol and not np.isfinite(lo[j]):
            errs.append(f"var {j} dual infeasible (down)")
        interior = x[j] > lo[j] + 1e-6 and x[j] < hi[j] - 1e-6
        if interior and abs(d[j]) > tol:
            errs.append(f"var {j} slackness")
    dual_obj = b @ y + sum(d[j] * (hi[j] if d[j] > 0 else lo[j]) for j in range(len(c)) if abs(d[j]) > 1e-12)
    primal = c @ x
    if abs(primal - dual_obj) > tol * (1 + abs(primal)):
        errs.append(f"duality gap {primal - dual_obj}")
    return errs


def random_lp(rng, n_vars, n_rows, boxed=True, feasible=False):
    """Small random LP; with ``feasible`` the right-hand side is built around a point inside the bounds."""
    from bncg.lp import LinearProgram

    A = rng.integers(-3, 4, (n_rows, n_vars)).astype(float)
    lower = np.where(rng.random(n_vars) < 0.2, -np.inf, rng.uniform(-2, 0, n_vars))
    upper = np.where(rng.random(n_vars) < 0.2, np.inf, rng.uniform(1, 3, n_vars))
    if boxed:
        lower, upper = rng.uniform(-2, 0, n_vars), rng.uniform(1, 3, n_vars)
    x_feas = np.clip(rng.uniform(-1, 2, n_vars), lower, upper)
    senses = list(rng.choice(["<=", ">=", "="], n_rows, p=[0.5, 0.3, 0.2]))
    b = A @ x_feas
    # slack in the direction of each inequality keeps x_feas feasible
    b += np.select([np.array(senses) == "<=", np.array(senses) == ">="], [1.0, -1.0], 0.0) * rng.uniform(0, 1, n_rows)
    if not feasible:
        # sometimes shift the right-hand side so the program may become infeasible
        b += rng.choice([0.0, 0.0, 1.0], n_rows) * rng.normal(0, 3, n_rows)
    c = rng.integers(-5, 6, n_vars).astype(float)
    return LinearProgram(c, A, senses, b, lower, upper, maximize=bool(rng.random() < 0.5))


def vertex_enumeration(prog):
    """Best objective over all basic solutions of a boxed program, or None if infeasible."""
    n = prog.n_vars
    rows = [(prog.A[r], prog.b[r]) for r in range(prog.n_rows)]
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        rows += [(e, prog.lower[j]), (e, prog.upper[j])]
    best = None
    for combo in itertools.combinations(range(len(rows)), n):
        M = np.array([rows[k][0] for k in combo])
        if abs(np.linalg.det(M)) < 1e-9:
            continue
        x = np.linalg.solve(M, np.array([rows[k][1] for k in combo]))
        if np.any(x < prog.lower - 1e-7) or np.any(x > prog.upper + 1e-7):
            continue
        lhs = prog.A @ x
        ok = all((s == "<=" and a <= bb + 1e-7) or (s == ">=" and a >= bb - 1e-7) or (s == "=" and abs(a - bb) <= 1e-7)
                 for a, s, bb in zip(lhs, prog.senses, prog.b))
        if not ok:
            continue
        v = float(prog.c @ x)
        if best is None or (v > best if prog.maximize else v < best):
            best = v
    return best


def random_binary_milp(rng, k):
    """Random pure-binary program and its optimum by enumeration (None if infeasible)."""
    from bncg.lp import LinearProgram
    from bncg.milp import MilpProblem

    m = int(rng.integers(1, 5))
    A = rng.integers(-4, 7, (m, k)).astype(float)
    b = rng.uniform(0, 2, m) * np.abs(A).sum(axis=1) / 2 - rng.uniform(0, 2, m)
    senses = list(rng.choice(["<=", ">="], m, p=[0.8, 0.2]))
    c = rng.integers(-5, 10, k).astype(float)
    maximize = bool(rng.random() < 0.7)
    prog = LinearProgram(c, A, senses, b, np.zeros(k), np.ones(k), maximize=maximize)
    best = None
    pts = np.array(list(itertools.product((0.0, 1.0), repeat=k)))
    lhs = pts @ A.T
    ok = np.ones(len(pts), bool)
    for r, s in enumerate(senses):
        ok &= lhs[:, r] <= b[r] + 1e-9 if s == "<=" else lhs[:, r] >= b[r] - 1e-9
    if ok.any():
        vals = pts[ok] @ c
        best = float(vals.max() if maximize else vals.min())
    return MilpProblem(prog, range(k)), best


def full_pool(scorer):
    """Pool holding every parent set of every node."""
    from bncg.model import Column, ColumnPool

    n = scorer.n
    pool = ColumnPool([scorer.local_score(i, 0) for i in range(n)])
    for i in range(n):
        for J in range(1, 1 << n):
            if not (J >> i) & 1:
                pool.add(Column(i, NodeSet(J), scorer.local_score(i, J)))
    return pool


def max_cluster_violation(primal, n):
    """Largest ``lhs(C) - (|C| - 1)`` over clusters of two or more nodes, by plain loops."""
    best = -np.inf
    for C in range(1, 1 << n):
        size = bin(C).count("1")
        if size < 2:
            continue
        lhs = sum(v for (i, J), v in primal.items() if (C >> i) & 1 and int(J) & C)
        best = max(best, lhs - (size - 1))
    return best


def random_fractional_primal(rng, n):
    """Convex combination of a few random parent sets per node."""
    primal = {}
    for i in range(n):
        others = [j for j in range(n) if j != i]
        k = int(rng.integers(1, 4))
        w = rng.dirichlet(np.ones(k))
        for t in range(k):
            J = 0
            for j in others:
                if rng.random() < 0.4:
                    J |= 1 << j
            primal[(i, J)] = primal.get((i, J), 0.0) + float(w[t])
    return primal


def random_duals(n, clusters, seed):
    rng = np.random.default_rng(seed)
    return DualSolution(rng.normal(0, 50, n), rng.uniform(0, 30, len(clusters)))


def random_clusters(n, seed, k=3):
    rng = np.random.default_rng(seed)
    cs = ClusterSet()
    while len(cs) < k:
        size = int(rng.integers(2, n + 1))
        cs.add(NodeSet(rng.choice(n, size, replace=False).tolist()))
    return cs


# criterion number -> (passed, detail), filled by the acceptance suite
ACCEPTANCE = {}


def record_criterion(k, passed, detail):
    ACCEPTANCE[k] = (passed, detail)
    print(f"criterion {k}: {'PASS' if passed else 'FAIL'} ({detail})")
