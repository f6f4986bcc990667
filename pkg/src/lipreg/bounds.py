"""Generalization machinery: fat-shattering bound, deviation tail, and the
stratified penalty that the model-selection search minimizes.

All tail-probability arithmetic is done in log space so nothing overflows
up to n ~ 1e12; the plain-value accessor exponentiates at the end and may
legitimately report inf for wildly vacuous regimes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DataError

EPS_GRID_RATIO = 1.02  # geometric epsilon scan grid
PERTURBATION_COEFF = 24  # additive risk cost per unit of perturbation, times q


@dataclass
class BoundParams:
    n: int
    L: float
    q: int
    ddim: float
    delta_conf: float
    eta: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise DataError("sample count must be at least 1")
        if self.L < 0:
            raise DataError("Lipschitz constant must be non-negative")
        if self.q not in (1, 2):
            raise DataError("loss exponent q must be 1 or 2")
        if not (0 < self.delta_conf < 1):
            raise DataError("confidence delta must lie in (0, 1)")
        if self.eta < 0:
            raise DataError("perturbation eta must be non-negative")


@dataclass
class RiskReport:
    empirical_risk: float
    stratum_k: int
    penalty_eps: float
    perturbation_term: float
    total: float
    delta_conf: float
    stratum_prob: float
    stratum_lipschitz: float

    def rows(self):
        return [
            ("empirical_risk", self.empirical_risk),
            ("stratum_k", self.stratum_k),
            ("stratum_lipschitz", self.stratum_lipschitz),
            ("stratum_prob", self.stratum_prob),
            ("penalty_eps", self.penalty_eps),
            ("perturbation_term", self.perturbation_term),
            ("total_bound", self.total),
        ]


def fat_dim_bound(p: BoundParams, gamma: float) -> float:
    """Fat-shattering ceiling for [0,1]-valued L-Lipschitz functions at margin gamma.

    With perturbation eta the effective margin is gamma - q*eta. The
    Lipschitz factor is clamped to at least 1: constants alone shatter one
    point, so the bound must never drop below 1 for a nonempty class.
    """
    g = gamma - p.q * p.eta
    if not (0 < g and gamma <= 0.5):
        raise DataError("need q*eta < gamma <= 1/2")
    gq = g ** ((p.q + 1) / 2)
    return (1 + 1 / gq) * max(1.0, (p.L / gq) ** (p.ddim + 1))


def log_deviation_prob_bound(p: BoundParams, eps: float) -> float:
    """Natural log of the uniform-deviation tail bound at threshold eps."""
    if not (0 < eps < 1):
        raise DataError("eps must lie in (0, 1)")
    if p.n < 2 / eps**2:
        raise DataError("need n >= 2/eps^2")
    if p.eta * PERTURBATION_COEFF * p.q >= eps:
        raise DataError("need eta < eps / (24 q)")
    d = fat_dim_bound(p, eps / 24)
    return (
        math.log(24 * p.n)
        + d * math.log(24 * math.e * p.n / eps) * math.log(288 * p.n / eps**2)
        - eps**2 * p.n / 36
    )


def deviation_prob_bound(p: BoundParams, eps: float) -> float:
    logv = log_deviation_prob_bound(p, eps)
    return math.exp(logv) if logv < 700 else math.inf


def invert_eps(p: BoundParams, log_delta: float | None = None) -> float:
    """Smallest grid eps whose tail bound is at most delta_conf.

    Scans a geometric grid from 1 down to sqrt(2/n) (the bound's d term
    depends on eps, so monotonicity is not assumed and we scan rather than
    bisect). Returns 1 when no grid point qualifies; never below sqrt(2/n).
    ``log_delta`` overrides log(delta_conf), letting stratified callers pass
    confidence shares too small to represent directly.
    """
    floor = math.sqrt(2 / p.n)
    if floor >= 1:
        return 1.0
    if log_delta is None:
        log_delta = math.log(p.delta_conf)
    best = 1.0
    eps = 1.0 / EPS_GRID_RATIO
    while eps >= floor:
        try:
            ok = log_deviation_prob_bound(p, eps) <= log_delta
        except DataError:
            ok = False
        if ok:
            best = min(best, eps)
        eps /= EPS_GRID_RATIO
    return max(best, floor)


def stratified_penalty(p: BoundParams, eta_grid: float) -> tuple[int, float]:
    """Penalty for the Lipschitz stratum containing L.

    Strata are L_k = k * eta_grid with confidence share p_k = 2^{-k};
    k = max(1, ceil(L / eta_grid)).
    """
    if eta_grid <= 0:
        raise DataError("stratum grid step must be positive")
    k = max(1, math.ceil(p.L / eta_grid - 1e-12))
    stratum = BoundParams(n=p.n, L=k * eta_grid, q=p.q, ddim=p.ddim,
                          delta_conf=p.delta_conf, eta=p.eta)
    log_share = math.log(p.delta_conf) - k * math.log(2)
    return k, invert_eps(stratum, log_delta=log_share)


def total_bound(empirical: float, p: BoundParams, eta_grid: float) -> RiskReport:
    """Full risk bound: empirical + stratified penalty + 24 q eta."""
    if not (0 <= empirical <= 1):
        raise DataError("empirical risk must lie in [0, 1]")
    k, eps = stratified_penalty(p, eta_grid)
    perturbation = PERTURBATION_COEFF * p.q * p.eta
    return RiskReport(
        empirical_risk=empirical,
        stratum_k=k,
        penalty_eps=eps,
        perturbation_term=perturbation,
        total=empirical + eps + perturbation,
        delta_conf=p.delta_conf,
        stratum_prob=2.0**-k,
        stratum_lipschitz=k * eta_grid,
    )
