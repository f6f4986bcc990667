"""Structural risk minimization over Lipschitz strata.

Builds the spanner-sparsified non-negative program for a candidate
Lipschitz budget (linear loss directly, quadratic loss via tangent-line
rows), searches the eta-grid of risk budgets r and Lipschitz budgets L,
and certifies that fitted value vectors are small perturbations of a
genuinely smooth hypothesis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import pcsolver
from .bounds import PERTURBATION_COEFF, BoundParams, RiskReport, stratified_penalty, total_bound
from .errors import DataError
from .metric import Dataset, build_net
from .spanner import SpannerGraph

R_GRID_MAX = 2.0  # objective includes the label mass, so budgets run to 2, not 1


@dataclass
class Hypothesis:
    """Fitted values on the sample plus the stratum they were fitted in."""

    values: np.ndarray
    lipschitz_budget: float
    eta: float
    q: int
    risk_report: RiskReport | None = None


@dataclass
class ErmProgram:
    """Sparsified ERM instance: the packing/covering data plus bookkeeping."""

    pc: pcsolver.PackingCoveringProgram
    objective: np.ndarray  # per-variable coefficients of the encoded risk
    n: int
    q: int
    eta: float
    L: float
    r: float
    beta: float
    edges: np.ndarray
    edge_lengths: np.ndarray


def beta_for(spanner: SpannerGraph, q: int, eta: float) -> float:
    """Solver relaxation eta^2 / (24 q * hop cap of the spanner)."""
    return eta**2 / (24 * q * max(1, spanner.hop_cap))


def empirical_risk(values: np.ndarray, labels: np.ndarray, q: int) -> float:
    return float(np.mean(np.abs(labels - values) ** q))


def build_erm_program(d: Dataset, spanner: SpannerGraph, L: float, r: float,
                      q: int, eta: float) -> ErmProgram:
    """Assemble the non-negative program for budget L and risk bound r.

    Variables: f_i, the negated companions x~_i, and either the one-sided
    residuals w_i (q=1) or the tangent-approximated squared residuals v_i
    (q=2, where x~_i doubles as the negated value the tangent rows need).
    Tangent rows with non-positive right-hand side are dropped.
    """
    if not (0 < eta < 0.25):
        raise DataError("eta must lie in (0, 1/4)")
    if L < 0 or r < 0:
        raise DataError("L and r must be non-negative")
    if q not in (1, 2):
        raise DataError("q must be 1 or 2")
    n = d.n
    y = d.labels
    beta = beta_for(spanner, q, eta)
    nv = 3 * n
    f = np.arange(n)
    xt = n + f
    aux = 2 * n + f  # w_i for q=1, v_i for q=2

    p_rows: list[tuple[np.ndarray, np.ndarray, np.ndarray, float]] = []
    c_rows: list[tuple[np.ndarray, np.ndarray, np.ndarray, float]] = []

    def add(rows, cols1, cols2, coef2, rhs):
        k = len(cols1)
        rows.append((np.asarray(cols1), np.asarray(cols2),
                     np.broadcast_to(np.asarray(coef2, dtype=float), (k,)),
                     np.asarray(rhs, dtype=float)))

    # negation pairs: f_i + x~_i == 1 up to relaxation
    ones = np.ones(n)
    p_rows.append((f, xt, ones, ones))
    c_rows.append((f, xt, ones, ones))

    ei = spanner.edges[:, 0] if len(spanner.edges) else np.empty(0, dtype=int)
    ej = spanner.edges[:, 1] if len(spanner.edges) else np.empty(0, dtype=int)
    el = spanner.lengths
    if len(ei):
        rhs = 1.0 + L * el
        p_rows.append((f[ei], xt[ej], np.ones(len(ei)), rhs))
        p_rows.append((f[ej], xt[ei], np.ones(len(ei)), rhs))

    if q == 1:
        keep = y > 0
        if keep.any():
            c_rows.append((f[keep], aux[keep], np.ones(keep.sum()), y[keep]))
        obj_cols = np.concatenate([f, aux])
        obj_coefs = np.concatenate([np.full(n, 1.0 / n), np.full(n, 2.0 / n)])
    else:
        j_max = math.ceil(1 / eta)
        for j in range(j_max + 1):
            s = 2 * j * eta  # tangent slope
            rhs_a = s * y - (j * eta) ** 2 + 2 * eta
            keep = rhs_a > 0
            if keep.any():
                c_rows.append((aux[keep], f[keep], np.full(keep.sum(), s), rhs_a[keep]))
            rhs_b = -s * y - (j * eta) ** 2 + 2 * eta + s * (1 + beta)
            keep = rhs_b > 0
            if keep.any():
                c_rows.append((aux[keep], xt[keep], np.full(keep.sum(), s), rhs_b[keep]))
        obj_cols = aux
        obj_coefs = np.full(n, 1.0 / n)

    objective = np.zeros(nv)
    objective[obj_cols] = obj_coefs

    def stack(rows, extra_row=None):
        data, ri, ci, rhs = [], [], [], []
        base = 0
        for cols1, cols2, coef2, b in rows:
            k = len(cols1)
            ri.extend([np.arange(base, base + k)] * 2)
            ci.extend([cols1, cols2])
            data.extend([np.ones(k), coef2])
            rhs.append(np.broadcast_to(b, (k,)))
            base += k
        if extra_row is not None:
            cols, coefs, b = extra_row
            ri.append(np.full(len(cols), base))
            ci.append(cols)
            data.append(coefs)
            rhs.append(np.array([b]))
            base += 1
        if base == 0:
            return sp.csr_matrix((0, nv)), np.empty(0)
        mat = sp.coo_matrix(
            (np.concatenate(data), (np.concatenate(ri), np.concatenate(ci))),
            shape=(base, nv),
        ).tocsr()
        return mat, np.concatenate(rhs)

    # zero budget still needs a positive packing bound; epsilon stands in for 0
    P, p_vec = stack(p_rows, extra_row=(obj_cols, obj_coefs, max(r, 1e-12)))
    C, c_vec = stack(c_rows)
    pc = pcsolver.PackingCoveringProgram(P=P, p=p_vec, C=C, c=c_vec, beta=beta)
    return ErmProgram(pc=pc, objective=objective, n=n, q=q, eta=eta, L=L, r=r,
                      beta=beta, edges=spanner.edges, edge_lengths=el)


def solve_erm(prog: ErmProgram, minimize: bool = True) -> np.ndarray | None:
    """Solve the assembled program; returns fitted f values or None if infeasible.

    Budget exhaustion in the solver propagates as BudgetExhaustedError.
    """
    obj = prog.objective if minimize else None
    outcome = pcsolver.solve(prog.pc, minimize=obj)
    if outcome.status != "feasible-solution":
        return None
    return np.clip(outcome.x[: prog.n], 0.0, 1.0)


def search_r(d: Dataset, spanner: SpannerGraph, L: float, q: int,
             eta: float) -> tuple[float, np.ndarray]:
    """Smallest eta-grid risk budget r admitting a feasible solve, plus values.

    One minimizing solve at the always-feasible top budget locates the
    minimum encoded objective; the smallest grid point at or above it is the
    answer and the minimizing values witness its feasibility.
    """
    prog = build_erm_program(d, spanner, L, R_GRID_MAX, q, eta)
    outcome = pcsolver.solve(prog.pc, minimize=prog.objective)
    if outcome.status != "feasible-solution":
        raise DataError("risk budget 2 should always be feasible")
    obj = float(prog.objective @ outcome.x)
    values = np.clip(outcome.x[: d.n], 0.0, 1.0)
    r_star = min(R_GRID_MAX, math.ceil(obj / eta - 1e-9) * eta)
    return max(0.0, r_star), values


def search_L(d: Dataset, spanner: SpannerGraph, q: int, eta: float,
             delta_conf: float, ddim: float) -> Hypothesis:
    """Model selection: minimum grid L whose fitted risk drops under the penalty.

    The empirical term is non-increasing and the penalty non-decreasing in
    L, so the crossing point is found by binary search over the eta-grid.
    """
    n = d.n
    if n == 1:
        h = Hypothesis(values=d.labels.copy(), lipschitz_budget=0.0, eta=eta, q=q)
        params = BoundParams(n=1, L=0.0, q=q, ddim=ddim, delta_conf=delta_conf, eta=eta)
        h.risk_report = total_bound(0.0, params, eta)
        return h

    k_max = math.ceil(n**2 / eta**2)  # L cap n^2/eta on the eta-grid
    cache: dict[int, tuple[float, np.ndarray, float]] = {}

    def probe(k: int):
        if k not in cache:
            L = k * eta
            _, values = search_r(d, spanner, L, q, eta)
            risk = empirical_risk(values, d.labels, q)
            params = BoundParams(n=n, L=L, q=q, ddim=ddim, delta_conf=delta_conf, eta=eta)
            _, eps = stratified_penalty(params, eta)
            cache[k] = (risk, values, eps)
        return cache[k]

    def ok(k: int) -> bool:
        risk, _, eps = probe(k)
        return risk <= eps + 1e-12

    if ok(0):
        k_star = 0
    elif not ok(k_max):
        k_star = k_max
    else:
        lo, hi = 0, k_max  # lo fails, hi passes
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ok(mid):
                hi = mid
            else:
                lo = mid
        k_star = hi
    risk, values, _ = probe(k_star)
    L_star = k_star * eta
    h = Hypothesis(values=values, lipschitz_budget=L_star, eta=eta, q=q)
    params = BoundParams(n=n, L=L_star, q=q, ddim=ddim, delta_conf=delta_conf, eta=eta)
    h.risk_report = total_bound(min(1.0, risk), params, eta)
    return h


def smooth_certificate(h: Hypothesis, d: Dataset) -> tuple[np.ndarray, float]:
    """Constructive near-smoothness witness.

    Extracts a fine net, caps the Lipschitz constant at (1+3 eta) L', and
    rebuilds the hypothesis as the lower Lipschitz envelope over net values.
    Returns the envelope and its sup-distance from the fitted values; a
    genuinely near-smooth hypothesis certifies with sup-distance <= eta,
    while spiked value vectors are pushed away from the envelope.
    """
    L = h.lipschitz_budget
    if L <= 0:
        c = (float(h.values.max()) + float(h.values.min())) / 2
        smooth = np.full_like(h.values, c)
        return smooth, float(np.abs(h.values - smooth).max())
    net = build_net(d, radius=h.eta / (3 * L))
    cap = (1 + 3 * h.eta) * L
    envelope = (h.values[net][None, :] + cap * d.dmatrix[:, net]).min(axis=1)
    return envelope, float(np.abs(h.values - envelope).max())
