"""Monte Carlo comparison of single-comparison inference methods.

Reduced statistics are drawn as |N(0, 1)| (null) and |N(delta, 1)|
(alternative).  Every method analyzes each draw as if it were the only
comparison available, so LFDR methods refit the mixture on a singleton.
Performance at a nonnull proportion pi1 is the mixture of the per-arm
results with weights 1 - pi1 and pi1:

* the quadratic-loss study reports sqrt((1 - pi1) MSE_null + pi1 MSE_alt)
  for the posterior null probability as an estimate of the null indicator;
* the coverage study reports (1 - pi1) cov_null + pi1 cov_alt for equal-tail
  intervals of the absolute effect.

Replicate j of arm a in study s draws from its own stream seeded by
``SeedSequence(seed, spawn_key=(s, a, j))``, so results do not depend on
evaluation order.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .confidence import PosteriorSummary, confidence_posterior, improper_bayes_posterior, observed_confidence_null
from .errors import DomainError
from .fit import Pi0Bounds, fit_mixture
from .mixture import eb_posterior, lfdr
from .special_functions import INFINITE

__all__ = [
    "MethodKind",
    "MethodSpec",
    "SimulationConfig",
    "SimulationRow",
    "SimulationReport",
    "DEFAULT_LFDR_BOUNDS",
    "default_pi1_grid",
    "draw_statistics",
    "null_probability",
    "method_posterior",
    "weighted_mix",
    "run_rmse_study",
    "run_coverage_study",
]

# The fourth constraint is a free choice; see README.
DEFAULT_LFDR_BOUNDS = ((0.0, 1.0), (0.5, 1.0), (0.9, 1.0), (0.99, 1.0))

_STUDY_CODES = {"rmse": 0, "coverage": 1}
CSV_COLUMNS = ("method", "pi1", "metric", "value", "n_null", "n_alt", "seed")


class MethodKind(str, enum.Enum):
    ZERO_POSTERIOR = "zero_posterior"
    OBSERVED_CONFIDENCE = "observed_confidence"
    LFDR = "lfdr"
    IMPROPER_BAYES = "improper_bayes"


@dataclass(frozen=True)
class MethodSpec:
    """A single-comparison inference method; LFDR methods carry pi0 bounds."""

    kind: MethodKind
    bounds: Pi0Bounds | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", MethodKind(self.kind))
        if self.kind is MethodKind.LFDR:
            if self.bounds is None:
                raise DomainError("LFDR methods need pi0 bounds")
            if not isinstance(self.bounds, Pi0Bounds):
                object.__setattr__(self, "bounds", Pi0Bounds(*self.bounds))
        elif self.bounds is not None:
            raise DomainError(f"{self.kind.value} takes no pi0 bounds")

    @classmethod
    def zero_posterior(cls) -> "MethodSpec":
        return cls(MethodKind.ZERO_POSTERIOR)

    @classmethod
    def observed_confidence(cls) -> "MethodSpec":
        return cls(MethodKind.OBSERVED_CONFIDENCE)

    @classmethod
    def improper_bayes(cls) -> "MethodSpec":
        return cls(MethodKind.IMPROPER_BAYES)

    @classmethod
    def lfdr(cls, lower: float, upper: float = 1.0) -> "MethodSpec":
        return cls(MethodKind.LFDR, Pi0Bounds(lower, upper))

    @classmethod
    def parse(cls, label: str) -> "MethodSpec":
        """Inverse of :attr:`label`, e.g. ``"lfdr[0.9,1]"``."""
        label = label.strip()
        if label.startswith("lfdr[") and label.endswith("]"):
            return cls(MethodKind.LFDR, Pi0Bounds.parse(label[5:-1]))
        try:
            return cls(MethodKind(label))
        except ValueError:
            raise DomainError(f"unknown method {label!r}") from None

    @property
    def label(self) -> str:
        if self.kind is MethodKind.LFDR:
            return f"lfdr{self.bounds}"
        return self.kind.value


def default_pi1_grid() -> tuple[float, ...]:
    return tuple(round(0.01 * i, 2) for i in range(101))


def _default_rmse_methods() -> tuple[MethodSpec, ...]:
    return (MethodSpec.zero_posterior(), MethodSpec.observed_confidence()) + tuple(
        MethodSpec.lfdr(lo, hi) for lo, hi in DEFAULT_LFDR_BOUNDS
    )


def _default_coverage_methods() -> tuple[MethodSpec, ...]:
    return (MethodSpec.improper_bayes(), MethodSpec.observed_confidence()) + tuple(
        MethodSpec.lfdr(lo, hi) for lo, hi in DEFAULT_LFDR_BOUNDS
    )


@dataclass(frozen=True)
class SimulationConfig:
    """Settings shared by both studies.

    ``methods=None`` selects each study's default method set.  The null
    effect is fixed at zero.
    """

    alt_delta: float = 2.0
    n_null_reps: int = 100
    n_alt_reps: int = 100
    pi1_grid: tuple[float, ...] = field(default_factory=default_pi1_grid)
    alpha: float = 0.05
    seed: int = 0
    methods: tuple[MethodSpec, ...] | None = None

    null_delta = 0.0

    def __post_init__(self):
        object.__setattr__(self, "pi1_grid", tuple(float(p) for p in self.pi1_grid))
        if self.methods is not None:
            object.__setattr__(self, "methods", tuple(self.methods))
            if not self.methods:
                raise DomainError("at least one method is required")
        if not (math.isfinite(self.alt_delta) and self.alt_delta > 0):
            raise DomainError("alt_delta must be positive")
        if self.n_null_reps < 1 or self.n_alt_reps < 1:
            raise DomainError("replicate counts must be at least 1")
        if not self.pi1_grid or any(not 0.0 <= p <= 1.0 for p in self.pi1_grid):
            raise DomainError("pi1_grid must be a nonempty subset of [0, 1]")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError("alpha must lie in (0, 1)")
        if not (isinstance(self.seed, (int, np.integer)) and 0 <= self.seed < 2**64):
            raise DomainError("seed must be an unsigned 64-bit integer")

    def resolved_methods(self, study: str) -> tuple[MethodSpec, ...]:
        if self.methods is not None:
            return self.methods
        return _default_rmse_methods() if study == "rmse" else _default_coverage_methods()


@dataclass(frozen=True)
class SimulationRow:
    method: str
    pi1: float
    metric: str
    value: float
    n_null: int
    n_alt: int
    seed: int


@dataclass
class SimulationReport:
    """Per-(method, pi1) results plus the per-draw values they came from.

    ``null_values`` and ``alt_values`` map method labels to per-draw squared
    errors (rmse study) or coverage indicators (coverage study).  Only
    ``rows`` round-trips through CSV.
    """

    study: str
    rows: list[SimulationRow]
    null_values: dict[str, np.ndarray] = field(default_factory=dict)
    alt_values: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def methods(self) -> list[str]:
        return list(dict.fromkeys(r.method for r in self.rows))

    def curve(self, method: str) -> tuple[np.ndarray, np.ndarray]:
        rows = [r for r in self.rows if r.method == method]
        return np.array([r.pi1 for r in rows]), np.array([r.value for r in rows])

    def value(self, method: str, pi1: float) -> float:
        for r in self.rows:
            if r.method == method and math.isclose(r.pi1, pi1, abs_tol=1e-12):
                return r.value
        raise KeyError((method, pi1))

    def write_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([r.method, repr(r.pi1), r.metric, repr(r.value), r.n_null, r.n_alt, r.seed])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            self.write_csv(fh)

    @classmethod
    def from_csv(cls, path) -> "SimulationReport":
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
                raise DomainError(f"{path}: expected columns {','.join(CSV_COLUMNS)}")
            rows = [
                SimulationRow(
                    r["method"], float(r["pi1"]), r["metric"], float(r["value"]),
                    int(r["n_null"]), int(r["n_alt"]), int(r["seed"]),
                )
                for r in reader
            ]
        study = "rmse" if rows and rows[0].metric == "rmse" else "coverage"
        return cls(study=study, rows=rows)


def draw_statistics(seed: int, study: str, arm: int, n: int, delta: float) -> np.ndarray:
    """Reduced statistics |Z_j + delta| for replicates j = 0..n-1 of one arm."""
    code = _STUDY_CODES[study]
    z = np.empty(n)
    for j in range(n):
        ss = np.random.SeedSequence(int(seed), spawn_key=(code, arm, j))
        z[j] = np.random.Generator(np.random.PCG64(ss)).standard_normal()
    return np.abs(z + delta)


def weighted_mix(metric_null: float, metric_alt: float, pi1: float) -> float:
    """(1 - pi1) * metric_null + pi1 * metric_alt."""
    if not 0.0 <= pi1 <= 1.0:
        raise DomainError("pi1 must lie in [0, 1]")
    return (1.0 - pi1) * metric_null + pi1 * metric_alt


def _fit_singleton(method: MethodSpec, u: float, df):
    return fit_mixture([u], df=df, bounds=method.bounds)


def null_probability(method: MethodSpec, u: float, df=INFINITE) -> float:
    """Posterior probability a method assigns to the null given one statistic."""
    kind = method.kind
    if kind in (MethodKind.ZERO_POSTERIOR, MethodKind.IMPROPER_BAYES):
        return 0.0
    if kind is MethodKind.OBSERVED_CONFIDENCE:
        return float(observed_confidence_null(u, df))
    return float(lfdr(_fit_singleton(method, u, df).model, u))


def method_posterior(method: MethodSpec, u: float, df=INFINITE) -> PosteriorSummary:
    """Posterior over the absolute effect that a method builds from one statistic."""
    kind = method.kind
    if kind is MethodKind.OBSERVED_CONFIDENCE:
        return confidence_posterior(u, df)
    if kind is MethodKind.IMPROPER_BAYES:
        return improper_bayes_posterior(u, df)
    if kind is MethodKind.LFDR:
        return eb_posterior(_fit_singleton(method, u, df).model, u)
    raise DomainError("zero_posterior defines no posterior distribution; use improper_bayes")


def _null_probabilities(method: MethodSpec, u: np.ndarray) -> np.ndarray:
    if method.kind is MethodKind.OBSERVED_CONFIDENCE:
        return np.asarray(observed_confidence_null(u, INFINITE), dtype=float)
    return np.array([null_probability(method, x) for x in u])


def _covered(method: MethodSpec, u: np.ndarray, truth: float, alpha: float) -> np.ndarray:
    out = np.empty(u.size)
    for j, x in enumerate(u):
        lo, hi = method_posterior(method, float(x)).interval(alpha)
        out[j] = 1.0 if lo <= truth <= hi else 0.0
    return out


def _draws(config: SimulationConfig, study: str) -> tuple[np.ndarray, np.ndarray]:
    u0 = draw_statistics(config.seed, study, 0, config.n_null_reps, config.null_delta)
    u1 = draw_statistics(config.seed, study, 1, config.n_alt_reps, config.alt_delta)
    return u0, u1


def run_rmse_study(config: SimulationConfig) -> SimulationReport:
    """Root mean squared error of posterior null probabilities versus pi1."""
    u0, u1 = _draws(config, "rmse")
    report = SimulationReport(study="rmse", rows=[])
    for method in config.resolved_methods("rmse"):
        e0 = (1.0 - _null_probabilities(method, u0)) ** 2
        e1 = _null_probabilities(method, u1) ** 2
        report.null_values[method.label] = e0
        report.alt_values[method.label] = e1
        m0, m1 = float(e0.mean()), float(e1.mean())
        for pi1 in config.pi1_grid:
            report.rows.append(
                SimulationRow(
                    method.label, float(pi1), "rmse", math.sqrt(weighted_mix(m0, m1, pi1)),
                    config.n_null_reps, config.n_alt_reps, int(config.seed),
                )
            )
    return report


def run_coverage_study(config: SimulationConfig) -> SimulationReport:
    """Coverage of equal-tail (1 - alpha) intervals for the absolute effect versus pi1."""
    methods = config.resolved_methods("coverage")
    for method in methods:
        if method.kind is MethodKind.ZERO_POSTERIOR:
            raise DomainError("zero_posterior has no interval estimate; use improper_bayes")
    u0, u1 = _draws(config, "coverage")
    report = SimulationReport(study="coverage", rows=[])
    for method in methods:
        c0 = _covered(method, u0, config.null_delta, config.alpha)
        c1 = _covered(method, u1, config.alt_delta, config.alpha)
        report.null_values[method.label] = c0
        report.alt_values[method.label] = c1
        m0, m1 = float(c0.mean()), float(c1.mean())
        for pi1 in config.pi1_grid:
            report.rows.append(
                SimulationRow(
                    method.label, float(pi1), "coverage", weighted_mix(m0, m1, pi1),
                    config.n_null_reps, config.n_alt_reps, int(config.seed),
                )
            )
    return report
