"""Approximate solver contract for non-negative packing/covering programs.

The contract: given non-negative P, C, positive p, non-negative c and a
relaxation beta in (0,1), either return x >= 0 with Px <= (1+beta) p and
Cx >= c, or certify that the unrelaxed program {Px <= p, Cx >= c, x >= 0}
is infeasible. Feasibility of the returned vector is always re-verified by
direct matrix-vector products, never trusted from solver internals.

The engine behind the contract is an exact sparse LP solve (HiGHS). The
iteration-style relaxed solvers this contract is written for degrade as
1/beta^2, which is unusable at the beta values the regression reduction
needs (eta^2 / log n scaling); an exact solve satisfies the same contract
with room to spare and yields exact infeasibility certificates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .errors import BudgetExhaustedError, DataError

# iteration ceiling K * m * d * log(m) / beta^2, as accounted in tests
ITERATION_CAP_K = 64.0


@dataclass
class PackingCoveringProgram:
    """Non-negative program data: Px <= p (packing) and Cx >= c (covering)."""

    P: sp.csr_matrix
    p: np.ndarray
    C: sp.csr_matrix
    c: np.ndarray
    beta: float
    num_vars: int = field(init=False)
    max_var_incidence: int = field(init=False)

    def __post_init__(self):
        self.P = sp.csr_matrix(self.P)
        self.C = sp.csr_matrix(self.C)
        self.p = np.asarray(self.p, dtype=float)
        self.c = np.asarray(self.c, dtype=float)
        if not (0 < self.beta < 1):
            raise DataError("beta must lie in (0, 1)")
        if self.P.nnz and self.P.data.min() < 0:
            raise DataError("packing matrix has a negative entry")
        if self.C.nnz and self.C.data.min() < 0:
            raise DataError("covering matrix has a negative entry")
        if np.any(self.p <= 0):
            raise DataError("packing bounds must be positive")
        if np.any(self.c < 0):
            raise DataError("covering targets must be non-negative")
        if self.P.shape[1] != self.C.shape[1]:
            raise DataError("P and C must agree on the variable count")
        self.num_vars = self.P.shape[1]
        incidence = np.asarray((self.P != 0).sum(axis=0)).ravel() + \
            np.asarray((self.C != 0).sum(axis=0)).ravel()
        self.max_var_incidence = int(incidence.max()) if self.num_vars else 0

    @property
    def num_rows(self) -> int:
        return self.P.shape[0] + self.C.shape[0]

    def iteration_cap(self) -> int:
        m = max(2, self.num_rows)
        d = max(1, self.max_var_incidence)
        return int(ITERATION_CAP_K * m * d * np.log(m) / self.beta**2)


@dataclass
class SolverOutcome:
    status: str  # "feasible-solution" | "infeasibility-certificate"
    x: np.ndarray | None
    iterations: int


def solve(prog: PackingCoveringProgram, minimize: np.ndarray | None = None) -> SolverOutcome:
    """Solve the program; optionally minimize a non-negative linear objective.

    Raises BudgetExhaustedError if the engine stops without either a
    relaxed-feasible point or an infeasibility certificate.
    """
    cost = np.zeros(prog.num_vars) if minimize is None else np.asarray(minimize, dtype=float)
    if cost.shape != (prog.num_vars,):
        raise DataError("objective length must match the variable count")
    a_ub = sp.vstack([prog.P, -prog.C], format="csr") if prog.C.shape[0] else prog.P
    b_ub = np.concatenate([prog.p, -prog.c])
    res = linprog(cost, A_ub=a_ub, b_ub=b_ub, bounds=(0, None), method="highs")
    iterations = int(res.nit) if res.nit is not None else 0
    if res.status == 0:
        x = np.maximum(res.x, 0.0)
        _verify_relaxed(prog, x)
        return SolverOutcome(status="feasible-solution", x=x, iterations=iterations)
    if res.status == 2:
        return SolverOutcome(status="infeasibility-certificate", x=None, iterations=iterations)
    raise BudgetExhaustedError(f"solver stopped without a certificate: {res.message}")


def _verify_relaxed(prog: PackingCoveringProgram, x: np.ndarray) -> None:
    tol = 1e-7 * max(1.0, float(np.abs(prog.p).max(initial=0.0)))
    if np.any(prog.P @ x > (1 + prog.beta) * prog.p + tol):
        raise BudgetExhaustedError("returned point violates relaxed packing rows")
    if prog.C.shape[0] and np.any(prog.C @ x < prog.c - tol - 1e-7 * np.abs(prog.c)):
        raise BudgetExhaustedError("returned point violates covering rows")


def encode_difference_pair(var: int, companion: int, num_vars: int):
    """Rows tying a variable to its negation companion: var + companion in [1, 1].

    Returns ((packing_row, bound), (covering_row, target)) as sparse 1-row
    matrices; any relaxed-feasible solution then pins companion into
    [1 - value, 1 - value + beta].
    """
    if not (0 <= var < num_vars and 0 <= companion < num_vars) or var == companion:
        raise DataError("need two distinct variable indices in range")
    row = sp.csr_matrix(([1.0, 1.0], ([0, 0], [var, companion])), shape=(1, num_vars))
    return (row, 1.0), (row.copy(), 1.0)
