"""End-to-end acceptance suite; each test prints one pass/fail line.

Run with ``pytest -s tests/test_acceptance.py`` to see the summary lines.
"""

import math
import time

import numpy as np
import pytest

import lipreg
from lipreg import pcsolver, spanner as spn
from lipreg.bounds import BoundParams, fat_dim_bound, invert_eps, stratified_penalty
from lipreg.experiment import ExperimentConfig, run_consistency_experiment
from lipreg.extension import build_predictor, exact_extension
from lipreg.metric import Dataset, normalize_diameter
from lipreg.srm import Hypothesis, empirical_risk, search_L, search_r, smooth_certificate

PER_SEC = {}


def report(num, name, ok, detail=""):
    tag = "PASS" if ok else "FAIL"
    print(f"\n[PRIMARY #{num}] {name}: {tag}" + (f"  ({detail})" if detail else ""))
    assert ok, f"criterion {num} ({name}) failed: {detail}"


def planar_dataset(n, seed):
    rng = np.random.default_rng(seed)
    return normalize_diameter(
        Dataset.from_points(rng.random((n, 2)), rng.random(n), metric="l2"))


def cycle_dataset(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.random(n)
    diff = np.abs(x[:, None] - x[None, :])
    dm = np.minimum(diff, 1 - diff)
    return normalize_diameter(
        Dataset.from_matrix(dm, rng.random(n), exhaustive_check=False))


# --- 1: spanner stretch / hops / degree ------------------------------------

DEGREE_CAPS = {  # calibrated over the acceptance seeds, small headroom
    ("planar", 0.1): 256,
    ("planar", 0.25): 256,
    ("cycle", 0.1): 200,
    ("cycle", 0.25): 150,
}


def test_01_spanner_correctness():
    worst = ""
    ok = True
    for family, make in (("planar", planar_dataset), ("cycle", cycle_dataset)):
        for delta in (0.1, 0.25):
            for seed in range(5):
                t0 = time.time()
                d = make(256, seed)
                g = spn.build_spanner(d, delta)
                hop_cap = math.ceil(8 * math.log2(256 + 1))
                W = spn.hop_bounded_distances(g.weight_matrix(), hop_cap)
                elapsed = time.time() - t0
                mask = ~np.eye(256, dtype=bool)
                stretch = float(np.max(W[mask] - (1 + delta) * d.dmatrix[mask]))
                if stretch > 1e-9:
                    ok, worst = False, f"stretch slack {stretch} ({family},{delta},{seed})"
                if g.max_degree > DEGREE_CAPS[(family, delta)]:
                    ok, worst = False, f"degree {g.max_degree} ({family},{delta})"
                if elapsed > 10:
                    ok, worst = False, f"runtime {elapsed:.1f}s"
    report(1, "spanner stretch/hops/degree", ok, worst)


# --- 2: path-DAG and tree-augmentation hop bounds --------------------------

def _dag_hops_to_head(dag):
    adj = [[] for _ in range(dag.n)]
    for a, b in dag.edges:
        adj[a].append(b)
    hops = np.zeros(dag.n, dtype=int)
    for v in range(1, dag.n):
        hops[v] = 1 + min(hops[u] for u in adj[v])
    return hops


def _ancestor_hops_ok(parent, edges, bound):
    import collections
    n = len(parent)
    out = [[] for _ in range(n)]
    for a, b in edges:
        out[a].append(b)
    for s in range(n):
        dist = {s: 0}
        dq = collections.deque([s])
        while dq:
            v = dq.popleft()
            for u in out[v]:
                if u not in dist:
                    dist[u] = dist[v] + 1
                    dq.append(u)
        anc = []
        v = parent[s]
        while v >= 0:
            anc.append(int(v))
            v = parent[v]
        for t in anc:
            if t not in dist or dist[t] > bound:
                return False
    return True


def test_02_dag_hop_bounds():
    ok = True
    detail = ""
    n = 1000
    bound = 4 * math.log2(n + 1)
    for seed in range(10):
        rng = np.random.default_rng(seed)
        parent = np.full(n, -1)
        for i in range(1, n):
            parent[i] = int(rng.integers(0, i))
        aug = spn.augment_tree(parent)
        edges = [(i, int(p)) for i, p in enumerate(parent) if p >= 0] + aug.shortcut_edges
        deg = np.zeros(n, dtype=int)
        for a, b in edges:
            deg[a] += 1
            deg[b] += 1
        children = np.bincount(parent[parent >= 0], minlength=n)
        p_tree = int((children + (parent >= 0)).max())
        if deg.max() > p_tree + 3:
            ok, detail = False, f"degree {deg.max()} > p+3 = {p_tree + 3}"
        if not _ancestor_hops_ok(parent, edges, bound):
            ok, detail = False, f"ancestor hops exceed {bound:.1f} (seed {seed})"
        # biased path DAG bound on random weights
        w = rng.random(200) * 10 + 0.01
        dag = spn.build_path_dag(w)
        hops = _dag_hops_to_head(dag)
        cap = 4 * (1 + np.log2(w.sum() / w))
        if np.any(hops > cap):
            ok, detail = False, f"path DAG hops exceed 4(1+log2(W/w)) (seed {seed})"
    report(2, "hop-bounded DAG structures", ok, detail)


# --- 3: solver contract -----------------------------------------------------

def test_03_solver_contract():
    import scipy.sparse as sp
    ok = True
    detail = ""
    t0 = time.time()
    count = 0
    for beta in (0.05, 0.1):
        for seed in range(50):
            rng = np.random.default_rng(1000 * int(beta * 100) + seed)
            nv = int(rng.integers(2, 60))
            mp = int(rng.integers(1, 250))
            mc = int(rng.integers(1, 250))
            x0 = rng.random(nv)
            P = sp.random(mp, nv, density=0.2, random_state=rng,
                          data_rvs=lambda k: rng.random(k)).tocsr()
            C = sp.random(mc, nv, density=0.2, random_state=rng,
                          data_rvs=lambda k: rng.random(k)).tocsr()
            p = np.asarray(P @ x0).ravel() + rng.random(mp) * 0.5 + 1e-6
            c = np.maximum(0.0, np.asarray(C @ x0).ravel() * (1 - rng.random(mc) * 0.2))
            prog = pcsolver.PackingCoveringProgram(P=P, p=p, C=C, c=c, beta=beta)
            out = pcsolver.solve(prog)
            count += 1
            if out.status != "feasible-solution":
                ok, detail = False, f"planted-feasible reported {out.status}"
                break
            x = out.x
            if np.any(x < 0) or \
                    np.any(np.asarray(P @ x).ravel() > (1 + beta) * p + 1e-9) or \
                    np.any(np.asarray(C @ x).ravel() < c - 1e-9):
                ok, detail = False, "re-verification failed"
                break
    elapsed = time.time() - t0
    if elapsed > 60:
        ok, detail = False, f"runtime {elapsed:.1f}s"
    report(3, "packing/covering solver contract", ok,
           detail or f"{count} instances in {elapsed:.1f}s")


# --- 4: ERM factor-2 versus exhaustive oracle -------------------------------

def _oracle_min_risk(d, L, q, step=1e-3):
    """Exact-at-grid minimizer of mean |y-f|^q over L-Lipschitz f, by
    coordinate descent with tight-component block moves plus a local
    perturbation certificate."""
    n = d.n
    y = d.labels
    rho = d.dmatrix

    def feasible(f):
        gap = np.abs(f[:, None] - f[None, :]) - L * rho
        return np.all(gap <= 1e-9)

    def risk(f):
        return float(np.mean(np.abs(y - f) ** q))

    f = np.full(n, round(float(np.median(y)) / step) * step)  # always feasible
    cur = risk(f)
    moves_sizes = [0.1, 0.02, step]
    for sz in moves_sizes:
        improved = True
        while improved:
            improved = False
            # single-coordinate moves
            for i in range(n):
                for sign in (1, -1):
                    g = f.copy()
                    g[i] = min(1.0, max(0.0, g[i] + sign * sz))
                    if feasible(g):
                        r = risk(g)
                        if r < cur - 1e-15:
                            f, cur, improved = g, r, True
            # block moves on connected components of tight constraints
            tight = np.abs(np.abs(f[:, None] - f[None, :]) - L * rho) <= 1e-9
            np.fill_diagonal(tight, False)
            comp = np.full(n, -1)
            cid = 0
            for s in range(n):
                if comp[s] >= 0:
                    continue
                stack = [s]
                while stack:
                    v = stack.pop()
                    if comp[v] >= 0:
                        continue
                    comp[v] = cid
                    stack.extend(np.where(tight[v])[0])
                cid += 1
            for k in range(cid):
                members = comp == k
                for sign in (1, -1):
                    g = f.copy()
                    g[members] = np.clip(g[members] + sign * sz, 0.0, 1.0)
                    if feasible(g):
                        r = risk(g)
                        if r < cur - 1e-15:
                            f, cur, improved = g, r, True
    # perturbation certificate at the finest step
    for i in range(n):
        for sign in (1, -1):
            g = f.copy()
            g[i] = min(1.0, max(0.0, g[i] + sign * step))
            if feasible(g):
                assert risk(g) >= cur - 1e-12, "oracle not locally optimal"
    return cur


def _oracle_total(d, q, eta, delta_conf, ddim):
    best = math.inf
    k = 0
    while True:
        L = k * eta
        r = _oracle_min_risk(d, L, q)
        _, eps = stratified_penalty(
            BoundParams(n=d.n, L=L, q=q, ddim=ddim, delta_conf=delta_conf, eta=eta),
            eta)
        best = min(best, r + eps)
        if r <= 1e-12 or k > 400:
            break
        k += 1
    return best


def test_04_erm_oracle_equivalence():
    ok = True
    detail = ""
    eta, delta_conf = 0.05, 0.05
    t0 = time.time()
    for case in range(30):
        rng = np.random.default_rng(100 + case)
        n = int(rng.integers(4, 13))
        q = 1 if case % 2 == 0 else 2
        d = normalize_diameter(
            Dataset.from_points(rng.random((n, 1)), rng.random(n), metric="l2"))
        g = spn.build_spanner(d, eta)
        ddim = lipreg.estimate_ddim(d)
        h = search_L(d, g, q, eta, delta_conf, ddim)
        impl = empirical_risk(h.values, d.labels, q) + h.risk_report.penalty_eps
        oracle = _oracle_total(d, q, eta, delta_conf, ddim)
        if impl > 2 * oracle + 1e-9:
            ok, detail = False, f"case {case}: {impl} > 2*{oracle}"
            break
    elapsed = time.time() - t0
    if elapsed > 600:
        ok, detail = False, f"runtime {elapsed:.0f}s"
    report(4, "ERM within factor 2 of oracle", ok, detail or f"{elapsed:.1f}s")


# --- 5: perturbation certificates -------------------------------------------

def test_05_perturbation_certificates():
    ok = True
    detail = ""
    eta = 0.1
    for seed in range(20):
        d = planar_dataset(100, 200 + seed)
        g = spn.build_spanner(d, eta)
        if seed % 2 == 0:
            h = search_L(d, g, 1, eta, 0.05, lipreg.estimate_ddim(d))
        else:
            L = (0.5, 1.0, 2.0)[seed % 3]
            _, vals = search_r(d, g, L, 1, eta)
            h = Hypothesis(values=vals, lipschitz_budget=L, eta=eta, q=1)
        _, sup = smooth_certificate(h, d)
        if sup > eta + 1e-9:
            ok, detail = False, f"seed {seed}: certificate sup {sup:.4f} > {eta}"
            break
        L = h.lipschitz_budget
        bound = eta**2 / 24 + (1 + 2 * eta) * L * d.dmatrix
        gap = np.abs(h.values[:, None] - h.values[None, :])
        slack = float(np.max(gap - bound))
        if slack > 1e-7:
            ok, detail = False, f"seed {seed}: multi-hop slack {slack}"
            break
    report(5, "smoothness certificates", ok, detail)


# --- 6: extension approximation ----------------------------------------------

def test_06_extension_approximation():
    ok = True
    detail = ""
    for seed in range(10):
        eta = 0.05 if seed % 2 == 0 else 0.1
        rng = np.random.default_rng(300 + seed)
        d = planar_dataset(500, 300 + seed)
        h = Hypothesis(values=rng.random(500), lipschitz_budget=1.0, eta=eta, q=1)
        p = build_predictor(h, d, eta)
        worst = 0.0
        for _ in range(100):
            x = rng.random(2) * d.scale
            worst = max(worst, abs(p.predict(x) - exact_extension(h, d, x)))
        if worst > eta + 1e-9:
            ok, detail = False, f"seed {seed}: error {worst:.4f} > {eta}"
            break
    report(6, "approximate extension within eta", ok, detail)


# --- 7: ANN guarantee ---------------------------------------------------------

def test_07_ann_guarantee():
    ok = True
    detail = ""
    queries_done = 0
    for seed in range(20):
        eps = 0.05 if seed % 2 == 0 else 0.25
        rng = np.random.default_rng(400 + seed)
        n = int(rng.integers(100, 2001))
        d = Dataset.from_points(rng.random((n, 2)), rng.random(n), metric="l2")
        ix = lipreg.build_index(d, np.arange(n), eps)
        for _ in range(50):
            x = rng.random(2)
            _, dist = ix.query(x)
            exact = float(d.query_dists(x).min())
            queries_done += 1
            ratio = 1.0 if exact == 0 else dist / exact
            if ratio > 1 + eps + 1e-9:
                ok, detail = False, f"ratio {ratio:.4f} > 1+{eps}"
                break
        if not ok:
            break
    report(7, "ANN approximation ratio", ok, detail or f"{queries_done} queries")


# --- 8: bound arithmetic ------------------------------------------------------

def test_08_bound_arithmetic():
    ok = True
    detail = ""
    p1 = BoundParams(n=10, L=1, q=1, ddim=1, delta_conf=0.1)
    p2 = BoundParams(n=10, L=1, q=2, ddim=0, delta_conf=0.1)
    if abs(fat_dim_bound(p1, 0.5) - 12) > 1e-12:
        ok, detail = False, "fat bound at (1, 1/2, 1, 1) != 12"
    if abs(fat_dim_bound(p2, 0.25) - 72) > 1e-9:
        ok, detail = False, "fat bound at (1, 1/4, 2, 0) != 72"
    prev = 2.0
    for n in np.logspace(2, 12, 10):
        n = int(n)
        p = BoundParams(n=n, L=1, q=1, ddim=1, delta_conf=0.1)
        v = invert_eps(p)
        if v < math.sqrt(2 / n) - 1e-15:
            ok, detail = False, f"invert_eps below sqrt(2/n) at n={n}"
        if v > prev + 1e-15:
            ok, detail = False, f"invert_eps not monotone at n={n}"
        prev = v
    report(8, "bound hand-values and monotonicity", ok, detail)


# --- 9: sampled inequality properties ----------------------------------------

def test_09_inequality_properties():
    rng = np.random.default_rng(0)
    m = 10**5
    gamma = rng.random(m) * 0.5
    u = rng.random(m)
    v = rng.random(m)
    r = gamma + (1 - 2 * gamma) * np.minimum(u, v)
    rp = gamma + (1 - 2 * gamma) * np.maximum(u, v)
    lhs = np.sqrt(rp + gamma) - np.sqrt(r - gamma)
    viol1 = int(np.sum(lhs < 2 * gamma**1.5 - 1e-12))

    a = rng.random(m)
    ap = rng.random(m)
    b = rng.random(m)
    q = rng.integers(1, 3, size=m)
    lhs2 = np.abs(np.abs(a - b) ** q - np.abs(ap - b) ** q)
    viol2 = int(np.sum(lhs2 > q * np.abs(a - ap) + 1e-12))
    report(9, "square-root gap and power-loss inequalities",
           viol1 == 0 and viol2 == 0, f"violations {viol1}/{viol2}")


# --- 10: consistency trend ----------------------------------------------------

def test_10_consistency_trend():
    t0 = time.time()
    risks = {n: [] for n in (50, 100, 200, 400, 800)}
    for seed in range(5):
        cfg = ExperimentConfig(generator="cube-l2", dim=2,
                               n_schedule=(50, 100, 200, 400, 800), seed=seed,
                               test_draws=2000, eta=0.02, q=1, target="linear")
        for row in run_consistency_experiment(cfg).rows:
            risks[row.n].append(row.test_risk)
    med = {n: float(np.median(v)) for n, v in risks.items()}

    noise_cfg = ExperimentConfig(generator="cube-l2", dim=1, n_schedule=(800,),
                                 seed=0, test_draws=2000, eta=0.05, q=2,
                                 target="noise")
    noise_risk = run_consistency_experiment(noise_cfg).rows[0].test_risk
    elapsed = time.time() - t0

    ok = med[800] < med[50] and med[800] < 0.05 \
        and abs(noise_risk - 1 / 12) <= 0.05 and elapsed < 900
    report(10, "held-out risk consistency trend", ok,
           f"median {med[50]:.4f}->{med[800]:.4f}, noise {noise_risk:.4f} vs 1/12, "
           f"{elapsed:.0f}s")
