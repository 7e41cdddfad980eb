"""Two-group abundance data: ingestion, preprocessing, and per-feature inference.

Input is two CSV files:

* a data file with a ``feature`` column followed by one column per sample;
* a design file with columns ``sample`` and ``group``.

:func:`analyze` fits the two-group mixture to all features at once (pi0
unrestricted) as the reference analysis, then analyzes every feature in
isolation with each requested method, and summarizes each method's
posterior null probabilities by their empirical distribution function.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, DomainError
from .fit import FitResult, Pi0Bounds, fit_mixture
from .mixture import lfdr
from .simulate import MethodSpec, null_probability

__all__ = [
    "AbundanceTable",
    "FeatureStatistics",
    "AnalysisReport",
    "read_table",
    "preprocess",
    "t_statistics",
    "analyze",
    "ecdf",
    "synthetic_table",
    "DEFAULT_METHODS",
    "SIMULTANEOUS",
    "write_table",
]

log = logging.getLogger(__name__)

SIMULTANEOUS = "simultaneous_lfdr"
DEFAULT_METHODS = (
    MethodSpec.observed_confidence(),
    MethodSpec.lfdr(0.5, 1.0),
    MethodSpec.lfdr(0.9, 1.0),
)
PERCENTILE_METHOD = "linear"  # numpy's default; Hyndman-Fan type 7


@dataclass
class AbundanceTable:
    """Measurements of each feature in a case group and a control group.

    ``case`` and ``control`` are 2-D arrays with one row per feature.
    """

    features: list[str]
    case: np.ndarray
    control: np.ndarray
    case_label: str = "case"
    control_label: str = "control"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.features = [str(f) for f in self.features]
        self.case = np.atleast_2d(np.asarray(self.case, dtype=float))
        self.control = np.atleast_2d(np.asarray(self.control, dtype=float))
        n = len(self.features)
        if n < 1:
            raise DataError("table has no features")
        if self.case.shape[0] != n or self.control.shape[0] != n:
            raise DataError("case/control arrays need one row per feature")
        if self.case.shape[1] < 2 or self.control.shape[1] < 2:
            raise DataError("each group needs at least 2 observations per feature")
        if not (np.isfinite(self.case).all() and np.isfinite(self.control).all()):
            raise DataError("table contains missing or non-finite values")

    @property
    def n_case(self) -> int:
        return self.case.shape[1]

    @property
    def n_control(self) -> int:
        return self.control.shape[1]

    def subset(self, index) -> "AbundanceTable":
        index = list(index)
        return AbundanceTable(
            [self.features[i] for i in index], self.case[index], self.control[index],
            self.case_label, self.control_label, dict(self.metadata),
        )


@dataclass(frozen=True)
class FeatureStatistics:
    feature: str
    t: float
    u: float
    df: float


@dataclass
class AnalysisReport:
    """Posterior null probabilities per feature and method, with ECDFs.

    ``probabilities`` maps a method label to an array aligned with
    ``statistics``.  The simultaneous reference analysis appears under
    ``SIMULTANEOUS``.
    """

    statistics: list[FeatureStatistics]
    fit: FitResult
    probabilities: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    @property
    def features(self) -> list[str]:
        return [s.feature for s in self.statistics]

    @property
    def methods(self) -> list[str]:
        return list(self.probabilities)

    def ecdf(self, method: str) -> tuple[np.ndarray, np.ndarray]:
        return ecdf(self.probabilities[method])

    def write(self, out_dir) -> dict[str, Path]:
        """Write ``report.csv``, ``fit.csv`` and ``ecdf.csv`` into ``out_dir``."""
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {name: out / f"{name}.csv" for name in ("report", "fit", "ecdf")}
        with open(paths["report"], "w", newline="", encoding="utf-8") as fh:
            write_report_csv(self, fh)
        with open(paths["fit"], "w", newline="", encoding="utf-8") as fh:
            write_fit_csv(self.fit, fh)
        with open(paths["ecdf"], "w", newline="", encoding="utf-8") as fh:
            write_ecdf_csv(self, fh)
        return paths


def write_report_csv(report: AnalysisReport, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["feature", "method", "posterior_null_prob"])
    for method, probs in report.probabilities.items():
        for feature, p in zip(report.features, probs):
            w.writerow([feature, method, repr(float(p))])


def write_fit_csv(fit: FitResult, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["bounds", "pi0_hat", "delta_hat", "loglik"])
    w.writerow([str(fit.bounds), repr(fit.pi0_hat), repr(fit.delta_hat), repr(fit.log_likelihood)])


def write_ecdf_csv(report: AnalysisReport, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["method", "x", "F(x)"])
    for method in report.methods:
        x, F = report.ecdf(method)
        for xi, Fi in zip(x, F):
            w.writerow([method, repr(float(xi)), repr(float(Fi))])


# ---------------------------------------------------------------------------
# Ingestion
# ---------------------------------------------------------------------------


def _read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty file (a header row is required)")
    return [c.strip() for c in rows[0]], rows[1:]


def _parse_number(text: str) -> float:
    text = text.strip()
    if text == "" or text.lower() in {"na", "nan"}:
        return math.nan
    try:
        return float(text)
    except ValueError:
        raise DataError(f"not a number: {text!r}") from None


def read_design(path) -> dict[str, str]:
    header, rows = _read_csv(path)
    if header[:2] != ["sample", "group"]:
        raise DataError(f"{path}: design header must be 'sample,group'")
    design = {}
    for r in rows:
        if len(r) < 2:
            raise DataError(f"{path}: malformed row {r!r}")
        design[r[0].strip()] = r[1].strip()
    return design


def read_table(data_path, design_path, case: str | None = None, control: str = "control") -> AbundanceTable:
    """Load a feature-by-sample CSV and assign samples to groups.

    Samples whose group is neither ``case`` nor ``control`` are ignored, so
    one data file can serve several case-versus-control comparisons.  If
    ``case`` is omitted the design must contain exactly one other group.
    Features with missing measurements are dropped and listed in
    ``metadata["dropped_features"]``.
    """
    design = read_design(design_path)
    groups = sorted(set(design.values()))
    if control not in groups:
        raise DataError(f"control group {control!r} not found in design")
    if case is None:
        others = [g for g in groups if g != control]
        if len(others) != 1:
            raise DataError(f"cannot infer the case group from {others}; name it explicitly")
        case = others[0]
    elif case not in groups:
        raise DataError(f"case group {case!r} not found in design")

    header, rows = _read_csv(data_path)
    if not header or header[0] != "feature":
        raise DataError(f"{data_path}: first column must be 'feature'")
    samples = header[1:]
    missing = [s for s in samples if s not in design]
    if missing:
        log.info("ignoring %d sample columns absent from the design", len(missing))
    case_cols = [i for i, s in enumerate(samples) if design.get(s) == case]
    ctrl_cols = [i for i, s in enumerate(samples) if design.get(s) == control]

    features, case_rows, ctrl_rows, dropped = [], [], [], []
    for r in rows:
        if len(r) != len(header):
            raise DataError(f"{data_path}: row for {r[0]!r} has {len(r)} fields, expected {len(header)}")
        values = [_parse_number(c) for c in r[1:]]
        a = np.array([values[i] for i in case_cols])
        b = np.array([values[i] for i in ctrl_cols])
        if not (np.isfinite(a).all() and np.isfinite(b).all()):
            dropped.append(r[0])
            continue
        features.append(r[0])
        case_rows.append(a)
        ctrl_rows.append(b)
    if dropped:
        log.warning("dropped %d features with missing values", len(dropped))
    if not features:
        raise DataError("no complete features remain after dropping missing values")
    return AbundanceTable(
        features, np.array(case_rows), np.array(ctrl_rows), case, control,
        {"dropped_features": dropped},
    )


def write_table(table: AbundanceTable, data_path, design_path) -> None:
    """Write ``table`` in the layout read by :func:`read_table`."""
    case_ids = [f"{table.case_label}_{j + 1}" for j in range(table.n_case)]
    ctrl_ids = [f"{table.control_label}_{j + 1}" for j in range(table.n_control)]
    with open(design_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sample", "group"])
        w.writerows([s, table.case_label] for s in case_ids)
        w.writerows([s, table.control_label] for s in ctrl_ids)
    with open(data_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["feature"] + case_ids + ctrl_ids)
        for name, a, b in zip(table.features, table.case, table.control):
            w.writerow([name] + [repr(float(x)) for x in a] + [repr(float(x)) for x in b])


# ---------------------------------------------------------------------------
# Processing
# ---------------------------------------------------------------------------


def preprocess(table: AbundanceTable, pooled: bool = True) -> AbundanceTable:
    """Shift by the control group's 25th percentile and take logarithms.

    With ``pooled`` the percentile is taken over all control values of all
    features; otherwise each feature uses its own control values.
    """
    if pooled:
        shift = np.full(len(table.features), np.percentile(table.control, 25, method=PERCENTILE_METHOD))
    else:
        shift = np.percentile(table.control, 25, axis=1, method=PERCENTILE_METHOD)
    case = table.case + shift[:, None]
    control = table.control + shift[:, None]
    bad = ((case <= 0).any(axis=1)) | ((control <= 0).any(axis=1))
    if bad.any():
        name = table.features[int(np.flatnonzero(bad)[0])]
        raise DataError(f"feature {name!r} has a nonpositive shifted value; cannot take logarithms")
    meta = dict(table.metadata)
    meta.update(
        shift="pooled" if pooled else "per-feature",
        shift_values=[float(s) for s in (shift[:1] if pooled else shift)],
        percentile_method=PERCENTILE_METHOD,
    )
    return AbundanceTable(table.features, np.log(case), np.log(control), table.case_label, table.control_label, meta)


def t_statistics(table: AbundanceTable) -> list[FeatureStatistics]:
    """Equal-variance two-sample t statistic (case minus control) per feature."""
    n1, n2 = table.n_case, table.n_control
    df = n1 + n2 - 2
    diff = table.case.mean(axis=1) - table.control.mean(axis=1)
    pooled = ((n1 - 1) * table.case.var(axis=1, ddof=1) + (n2 - 1) * table.control.var(axis=1, ddof=1)) / df
    out = []
    for name, d, s2 in zip(table.features, diff, pooled):
        if not s2 > 0:
            raise DataError(f"feature {name!r} has zero pooled variance")
        t = float(d / math.sqrt(s2 * (1.0 / n1 + 1.0 / n2)))
        out.append(FeatureStatistics(name, t, abs(t), float(df)))
    return out


def ecdf(values) -> tuple[np.ndarray, np.ndarray]:
    """Sorted values and the empirical distribution function at each of them."""
    x = np.sort(np.asarray(values, dtype=float))
    return x, np.arange(1, x.size + 1) / x.size


def analyze(table: AbundanceTable, methods=DEFAULT_METHODS) -> AnalysisReport:
    """Simultaneous and per-feature posterior null probabilities.

    The table is analyzed as given; call :func:`preprocess` first for raw
    abundances.
    """
    stats = t_statistics(table)
    u = np.array([s.u for s in stats])
    df = stats[0].df
    fit = fit_mixture(u, df=df, bounds=Pi0Bounds(0.0, 1.0))
    probs = {SIMULTANEOUS: np.asarray(lfdr(fit.model, u), dtype=float).reshape(-1)}
    for method in methods:
        if method.label in probs:
            raise DomainError(f"duplicate method {method.label}")
        probs[method.label] = np.array([null_probability(method, x, df) for x in u])
    meta = dict(table.metadata)
    meta.update(case=table.case_label, control=table.control_label, n_case=table.n_case, n_control=table.n_control)
    return AnalysisReport(stats, fit, probs, meta)


def synthetic_table(
    n_features: int = 20,
    pi0: float = 0.5,
    delta: float = 3.0,
    n_case: int = 55,
    n_control: int = 64,
    seed: int = 0,
) -> AbundanceTable:
    """Normal log-scale data with round(pi0 * n_features) null features.

    Nonnull features have a mean shift (random sign) giving t-statistic
    noncentrality ``delta``.
    """
    rng = np.random.default_rng(seed)
    n_null = int(round(pi0 * n_features))
    shift = np.zeros(n_features)
    alt = rng.permutation(n_features)[: n_features - n_null]
    shift[alt] = rng.choice([-1.0, 1.0], size=alt.size) * delta * math.sqrt(1.0 / n_case + 1.0 / n_control)
    case = rng.standard_normal((n_features, n_case)) + shift[:, None]
    control = rng.standard_normal((n_features, n_control))
    names = [f"F{i + 1:03d}" for i in range(n_features)]
    return AbundanceTable(names, case, control, "case", "control", {"synthetic": True, "pi0": pi0, "delta": delta})
