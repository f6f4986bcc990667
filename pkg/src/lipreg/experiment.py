"""Synthetic-data harness measuring held-out risk as the sample grows.

Each schedule entry draws a fresh training sample, fits at a Lipschitz
budget that grows like log n, and scores the predictor on fresh draws from
the same source. Output is a plot-ready CSV plus an optional rendered
figure; everything is driven by one seed so reruns are byte-identical.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import extension, spanner, srm
from .bounds import BoundParams, total_bound
from .errors import DataError
from .metric import Dataset, estimate_ddim, normalize_diameter

GENERATORS = ("cycle", "torus", "cube-l1", "cube-l2", "cube-linf", "uniform-metric")
TARGETS = ("linear", "wave", "noise")


@dataclass
class ExperimentConfig:
    generator: str = "cube-l2"
    dim: int = 1
    n_schedule: tuple[int, ...] = (50, 100, 200, 400)
    noise: float = 0.0
    target: str = "linear"
    seed: int = 0
    q: int = 1
    eta: float = 0.1
    lipschitz_rule: str = "log"  # "log" for log2(n), or "fixed:<value>"
    test_draws: int = 2000
    delta_conf: float = 0.05
    spanner_delta: float = 0.25

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise DataError(f"unknown generator {self.generator!r}")
        if self.target not in TARGETS:
            raise DataError(f"unknown target {self.target!r}")
        sched = tuple(int(n) for n in self.n_schedule)
        if not sched or any(b <= a for a, b in zip(sched, sched[1:])):
            raise DataError("n schedule must be non-empty and increasing")
        if any(n < 2 for n in sched):
            raise DataError("schedule entries must be at least 2")
        self.n_schedule = sched
        if self.q not in (1, 2):
            raise DataError("q must be 1 or 2")
        if self.noise < 0:
            raise DataError("noise level must be non-negative")

    def budget_for(self, n: int) -> float:
        if self.lipschitz_rule == "log":
            return math.log2(n)
        if self.lipschitz_rule.startswith("fixed:"):
            return float(self.lipschitz_rule.split(":", 1)[1])
        raise DataError(f"unknown Lipschitz rule {self.lipschitz_rule!r}")


def _cycle_dist(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = np.abs(a[:, None] - b[None, :])
    return np.minimum(diff, 1.0 - diff)


def _target_values(cfg: ExperimentConfig, coords: np.ndarray, rng) -> np.ndarray:
    if cfg.target == "noise":
        return rng.random(len(coords))
    if cfg.target == "linear":
        base = coords.mean(axis=1)
    else:  # wave: tent map per coordinate, continuous around the cycle
        base = (2.0 * np.minimum(coords, 1.0 - coords)).mean(axis=1)
    if cfg.noise > 0:
        base = base + cfg.noise * rng.standard_normal(len(coords))
    return np.clip(base, 0.0, 1.0)


def _draw(cfg: ExperimentConfig, n: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Sample n source points; returns (latent coordinates, labels)."""
    dim = 2 if cfg.generator == "torus" else cfg.dim
    coords = rng.random((n, dim))
    return coords, _target_values(cfg, coords, rng)


def _train_dataset(cfg: ExperimentConfig, coords: np.ndarray, labels: np.ndarray) -> Dataset:
    if cfg.generator.startswith("cube-"):
        return Dataset.from_points(coords, labels, metric=cfg.generator.split("-")[1])
    if cfg.generator == "cycle":
        dm = _cycle_dist(coords[:, 0], coords[:, 0])
    elif cfg.generator == "torus":
        dm = _cycle_dist(coords[:, 0], coords[:, 0]) + _cycle_dist(coords[:, 1], coords[:, 1])
    else:  # uniform-metric: all distinct points one unit apart
        dm = 1.0 - np.eye(len(coords))
    return Dataset.from_matrix(dm, labels, exhaustive_check=False)


def _query_rows(cfg: ExperimentConfig, train_coords: np.ndarray,
                test_coords: np.ndarray) -> np.ndarray:
    """Test-point representation the predictor expects: coordinates for the
    cube generators, precomputed distance rows otherwise."""
    if cfg.generator.startswith("cube-"):
        return test_coords
    if cfg.generator == "cycle":
        return _cycle_dist(test_coords[:, 0], train_coords[:, 0])
    if cfg.generator == "torus":
        return (_cycle_dist(test_coords[:, 0], train_coords[:, 0])
                + _cycle_dist(test_coords[:, 1], train_coords[:, 1]))
    return np.ones((len(test_coords), len(train_coords)))


@dataclass
class ExperimentRow:
    n: int
    lipschitz: float
    empirical_risk: float
    risk_bound: float
    test_risk: float


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list[ExperimentRow] = field(default_factory=list)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("n,lipschitz,empirical_risk,risk_bound,test_risk\n")
        for r in self.rows:
            out.write(f"{r.n},{r.lipschitz:.9g},{r.empirical_risk:.9g},"
                      f"{r.risk_bound:.9g},{r.test_risk:.9g}\n")
        return out.getvalue()


def run_consistency_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    rng = np.random.default_rng(cfg.seed)
    result = ExperimentResult(config=cfg)
    for n in cfg.n_schedule:
        coords, labels = _draw(cfg, n, rng)
        raw = _train_dataset(cfg, coords, labels)
        d = normalize_diameter(raw)
        sp_graph = spanner.build_spanner(d, cfg.spanner_delta)
        # Lipschitz budgets live in the normalized frame already (diam = 1)
        L = cfg.budget_for(n)
        _, values = srm.search_r(d, sp_graph, L, cfg.q, cfg.eta)
        risk = srm.empirical_risk(values, d.labels, cfg.q)
        params = BoundParams(n=n, L=L, q=cfg.q, ddim=estimate_ddim(d),
                             delta_conf=cfg.delta_conf, eta=cfg.eta)
        report = total_bound(min(1.0, risk), params, cfg.eta)
        h = srm.Hypothesis(values=values, lipschitz_budget=L, eta=cfg.eta,
                           q=cfg.q, risk_report=report)
        predictor = extension.build_predictor(h, d, cfg.eta)

        test_coords, test_truth = _draw(cfg, cfg.test_draws, rng)
        queries = _query_rows(cfg, coords, test_coords) * d.scale
        preds = predictor.predict_many(queries)
        test_risk = float(np.mean(np.abs(preds - test_truth) ** cfg.q))
        result.rows.append(ExperimentRow(
            n=n, lipschitz=L, empirical_risk=risk,
            risk_bound=report.total, test_risk=test_risk,
        ))
    return result


def render_figure(result: ExperimentResult, path) -> None:
    """Line plot of empirical vs held-out risk over the schedule."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ns = [r.n for r in result.rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ns, [r.empirical_risk for r in result.rows], "o-", label="empirical risk")
    ax.plot(ns, [r.test_risk for r in result.rows], "s-", label="held-out risk")
    ax.set_xscale("log")
    ax.set_xlabel("sample size n")
    ax.set_ylabel(f"L{result.config.q} risk")
    ax.set_title(f"{result.config.generator} / {result.config.target} "
                 f"(seed {result.config.seed})")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None, "CreationDate": None})
    plt.close(fig)
