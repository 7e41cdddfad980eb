"""Constrained Type II maximum likelihood for the K = 1 two-group model.

The marginal log-likelihood of reduced statistics u_1..u_N,

    l(pi0, delta) = sum_i log(pi0 f(u_i; 0) + (1 - pi0) f(u_i; delta)),

is maximized over the box [pi0_lower, pi0_upper] x [delta_floor,
delta_ceiling].  Restricting pi0 is what keeps the estimate usable when N is
tiny: with N = 1 and an unrestricted pi0 the maximizer is almost always
pi0 = 0.

The search is a deterministic coarse grid (101 pi0 values by 200
log-spaced delta values) followed by refinement of each local maximum of the
grid's delta profile.  For fixed delta the objective is concave in pi0, so
the refinement profiles pi0 out exactly and runs a bounded Brent search over
delta alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import DegenerateInputError, DomainError
from .mixture import MixtureModel
from .special_functions import INFINITE, _as_df, folded_logpdf

__all__ = ["Pi0Bounds", "FitResult", "fit_mixture", "log_likelihood", "DELTA_FLOOR"]

DELTA_FLOOR = 1e-3
N_PI0_GRID = 101
N_DELTA_GRID = 200
_MAX_REFINE_STARTS = 5
_CHUNK_CELLS = 2_000_000


@dataclass(frozen=True)
class Pi0Bounds:
    """Closed interval [lower, upper] to which pi0 is restricted."""

    lower: float = 0.0
    upper: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "lower", float(self.lower))
        object.__setattr__(self, "upper", float(self.upper))
        if not 0.0 <= self.lower <= self.upper <= 1.0:
            raise DomainError(f"pi0 bounds need 0 <= lower <= upper <= 1, got [{self.lower}, {self.upper}]")

    @classmethod
    def parse(cls, text: str) -> "Pi0Bounds":
        """Parse ``"lo,hi"``."""
        try:
            lo, hi = (float(part) for part in text.split(","))
        except ValueError:
            raise DomainError(f"pi0 bounds must look like 'lo,hi', got {text!r}") from None
        return cls(lo, hi)

    def __str__(self) -> str:
        return f"[{self.lower:g},{self.upper:g}]"


@dataclass(frozen=True)
class FitResult:
    pi0_hat: float
    delta_hat: float
    log_likelihood: float
    n: int
    bounds: Pi0Bounds
    df: float
    delta_floor: float
    delta_ceiling: float
    converged: bool
    iterations: int

    @property
    def model(self) -> MixtureModel:
        return MixtureModel.two_group(self.pi0_hat, self.delta_hat, self.df)


def log_likelihood(stats, pi0: float, delta: float, df=INFINITE) -> float:
    """Marginal log-likelihood of ``stats`` under the K = 1 mixture."""
    u = np.asarray(stats, dtype=float)
    la = folded_logpdf(u, 0.0, df)
    lb = folded_logpdf(u, delta, df)
    return float(_loglik(la, lb, pi0))


def _loglik(la, lb, pi0: float) -> float:
    with np.errstate(divide="ignore"):
        lp, lq = math.log(pi0) if pi0 > 0 else -np.inf, math.log1p(-pi0) if pi0 < 1 else -np.inf
    return np.logaddexp(lp + la, lq + lb).sum(axis=-1)


def _loglik_grid(la, lb, pi0s) -> np.ndarray:
    """Log-likelihood on the (delta, pi0) grid; ``lb`` has shape (D, N)."""
    with np.errstate(divide="ignore"):
        lp = np.log(pi0s)[:, None]
        lq = np.log1p(-pi0s)[:, None]
    n_delta, n = lb.shape
    rows = max(1, _CHUNK_CELLS // (pi0s.size * n))
    out = np.empty((n_delta, pi0s.size))
    for start in range(0, n_delta, rows):
        block = lb[start : start + rows, None, :]
        out[start : start + rows] = np.logaddexp(lp + la, lq + block).sum(axis=-1)
    return out


def _score(la, lb, pi0: float) -> float:
    """Derivative of the log-likelihood in pi0 (decreasing: concave objective)."""
    d = la - lb
    s = np.exp(-np.abs(d))
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(d >= 0, (1.0 - s) / (pi0 + (1.0 - pi0) * s), (s - 1.0) / (pi0 * s + (1.0 - pi0)))
    # 0/0 arises only when a and b agree exactly; such terms carry no slope.
    return float(np.nansum(terms))


def _profile_pi0(la, lb, lo: float, hi: float) -> float:
    if lo == hi:
        return lo
    if _score(la, lb, lo) <= 0.0:
        return lo
    if _score(la, lb, hi) >= 0.0:
        return hi
    return optimize.brentq(lambda p: _score(la, lb, p), lo, hi, xtol=1e-14)


def _local_maxima(profile: np.ndarray) -> list[int]:
    n = profile.size
    idx = []
    for k in range(n):
        left = profile[k - 1] if k > 0 else -np.inf
        right = profile[k + 1] if k < n - 1 else -np.inf
        if profile[k] > left and profile[k] >= right:
            idx.append(k)
    idx.sort(key=lambda k: -profile[k])
    return idx[:_MAX_REFINE_STARTS]


def fit_mixture(
    stats,
    df=INFINITE,
    bounds: Pi0Bounds | tuple[float, float] = Pi0Bounds(),
    delta_floor: float = DELTA_FLOOR,
    delta_ceiling: float | None = None,
) -> FitResult:
    """Maximize the two-group marginal likelihood subject to box constraints.

    Parameters
    ----------
    stats : array_like
        Nonnegative reduced statistics ``u_i = |t_i|``; at least one.
    df : float
        Degrees of freedom of the t sampling model, or ``INFINITE``.
    bounds : Pi0Bounds or (lower, upper)
        Restriction on the null proportion.
    delta_floor, delta_ceiling : float
        Box for the nonnull effect.  The ceiling defaults to
        ``2 * max(stats) + 5``.

    Returns
    -------
    FitResult
        The maximizer is deterministic and independent of the order of
        ``stats``.  Grid ties are broken toward larger pi0.

    Raises
    ------
    DomainError
        For empty or invalid statistics, bounds, or delta box.
    DegenerateInputError
        When the likelihood is zero everywhere on the grid.
    """
    if not isinstance(bounds, Pi0Bounds):
        bounds = Pi0Bounds(*bounds)
    u = np.sort(np.asarray(stats, dtype=float).ravel())
    if u.size == 0:
        raise DomainError("fit_mixture needs at least one statistic")
    if np.any(~np.isfinite(u)) or np.any(u < 0):
        raise DomainError("statistics must be finite and nonnegative")
    df = float(_as_df(df))
    delta_floor = float(delta_floor)
    if not delta_floor > 0:
        raise DomainError("delta_floor must be positive")
    if delta_ceiling is None:
        delta_ceiling = 2.0 * float(u[-1]) + 5.0
    delta_ceiling = float(delta_ceiling)
    if not delta_ceiling > delta_floor:
        raise DomainError("delta_ceiling must exceed delta_floor")
    if not math.isfinite(delta_ceiling):
        raise DomainError("delta_ceiling must be finite; statistics are too large")
    lo, hi = bounds.lower, bounds.upper

    la = folded_logpdf(u, 0.0, df)
    deltas = np.geomspace(delta_floor, delta_ceiling, N_DELTA_GRID)
    lb_grid = np.atleast_2d(folded_logpdf(u[None, :], deltas[:, None], df))
    pi0s = np.linspace(lo, hi, N_PI0_GRID)
    grid = _loglik_grid(la, lb_grid, pi0s)

    best = grid.max()
    if not np.isfinite(best):
        raise DegenerateInputError("likelihood vanishes at every grid point")
    tol = 1e-12 * max(1.0, abs(best))
    ties = np.argwhere(grid >= best - tol)
    # Largest pi0 first, then smallest delta.
    k_best, j_best = min(ties, key=lambda kj: (-kj[1], kj[0]))
    pi0_hat, delta_hat = float(pi0s[j_best]), float(deltas[k_best])
    ll_hat = float(grid[k_best, j_best])

    def profile(delta: float) -> tuple[float, float]:
        lb = folded_logpdf(u, delta, df)
        p = _profile_pi0(la, lb, lo, hi)
        return float(_loglik(la, lb, p)), p

    converged, iterations = True, 0
    prof = grid.max(axis=1)
    if prof.max() - prof.min() > tol:
        for k in _local_maxima(prof):
            a = deltas[max(k - 1, 0)]
            b = deltas[min(k + 1, N_DELTA_GRID - 1)]
            res = optimize.minimize_scalar(
                lambda d: -profile(d)[0], bounds=(a, b), method="bounded", options={"xatol": 1e-10}
            )
            converged &= bool(res.success)
            iterations += int(res.nfev)
            for d in (float(res.x), float(deltas[k])):
                ll, p = profile(d)
                if ll > ll_hat + tol:
                    ll_hat, pi0_hat, delta_hat = ll, p, d
    else:
        # Flat in delta (pi0 pinned where the nonnull part carries no weight).
        ll, p = profile(delta_hat)
        if ll > ll_hat + tol:
            ll_hat, pi0_hat = ll, p

    return FitResult(
        pi0_hat=float(min(max(pi0_hat, lo), hi)),
        delta_hat=float(min(max(delta_hat, delta_floor), delta_ceiling)),
        log_likelihood=ll_hat,
        n=int(u.size),
        bounds=bounds,
        df=df,
        delta_floor=delta_floor,
        delta_ceiling=delta_ceiling,
        converged=converged,
        iterations=iterations,
    )
