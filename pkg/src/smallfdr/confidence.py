"""Confidence posteriors for the size of an effect, and posterior summaries.

For a reduced statistic ``u = |t|`` the folded confidence posterior of the
absolute effect has distribution function

    C(theta; u) = P_theta(|T| >= u),   theta >= 0,

so it carries an atom at zero equal to the two-sided p-value.  The improper
Bayes posterior (flat prior on the signed effect, normal model) puts no mass
on zero at all.  Both, together with the two-point empirical Bayes posterior
from :mod:`smallfdr.mixture`, are represented by :class:`PosteriorSummary`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .errors import DomainError, UnsupportedModelError
from .special_functions import INFINITE, _as_df, folded_sf, noncentral_t_cdf

__all__ = [
    "PosteriorKind",
    "PosteriorSummary",
    "observed_confidence_null",
    "confidence_cdf",
    "confidence_quantile",
    "confidence_posterior",
    "improper_bayes_posterior",
    "signed_confidence_cdf",
    "equal_tail_interval",
]

_XTOL = 1e-12


class PosteriorKind(str, enum.Enum):
    CONFIDENCE_FOLDED = "confidence_folded"
    IMPROPER_BAYES_FOLDED = "improper_bayes_folded"
    EB_DISCRETE = "eb_discrete"


def _check_probability_open(beta: float, name: str = "beta") -> float:
    beta = float(beta)
    if not 0.0 < beta < 1.0:
        raise DomainError(f"{name} must lie strictly between 0 and 1, got {beta}")
    return beta


def _check_nonnegative(x: float, name: str) -> float:
    x = float(x)
    if not x >= 0.0:
        raise DomainError(f"{name} must be nonnegative, got {x}")
    return x


def _increasing_root(cdf, beta: float, start: float) -> float:
    """Smallest theta >= 0 with cdf(theta) >= beta, for continuous increasing cdf.

    The caller guarantees cdf(0) < beta.
    """
    hi = max(start, 1.0)
    while cdf(hi) < beta:
        hi *= 2.0
        if hi > 1e8:
            raise DomainError("quantile bracket did not close")
    root = optimize.brentq(lambda th: cdf(th) - beta, 0.0, hi, xtol=_XTOL, rtol=4 * np.finfo(float).eps)
    # brentq may stop a hair below the crossing; step onto the upper level set.
    step = _XTOL
    while cdf(root) < beta and step < 1e-6:
        root += step
        step *= 2.0
    return root


# ---------------------------------------------------------------------------
# Folded confidence posterior
# ---------------------------------------------------------------------------


def observed_confidence_null(u, df=INFINITE):
    """Confidence posterior probability that the effect is zero.

    Equal to the two-sided p-value P_0(|T| >= u).
    """
    return folded_sf(u, 0.0, df)


def confidence_cdf(theta, u, df=INFINITE):
    """Distribution function of the folded confidence posterior at ``theta``."""
    theta = np.asarray(theta, dtype=float)
    if np.any(theta < 0):
        raise DomainError("theta must be nonnegative")
    return folded_sf(u, theta, df)


def confidence_quantile(beta: float, u: float, df=INFINITE) -> float:
    """Generalized inverse ``inf{theta >= 0 : C(theta; u) >= beta}``.

    Whenever ``beta`` does not exceed the p-value the atom at zero absorbs it
    and the quantile is 0.
    """
    beta = _check_probability_open(beta)
    u = _check_nonnegative(u, "u")
    _as_df(df)
    if confidence_cdf(0.0, u, df) >= beta:
        return 0.0
    return _increasing_root(lambda th: confidence_cdf(th, u, df), beta, u + 10.0)


def confidence_posterior(u: float, df=INFINITE) -> "PosteriorSummary":
    """Folded confidence posterior of the absolute effect given ``u = |t|``.

    At ``u = 0`` the posterior is a unit atom at zero; ``degenerate`` is set.
    """
    u = _check_nonnegative(u, "u")
    df = float(_as_df(df))
    return PosteriorSummary(
        kind=PosteriorKind.CONFIDENCE_FOLDED,
        null_mass=observed_confidence_null(u, df),
        statistic=u,
        df=df,
        degenerate=(u == 0.0),
    )


def signed_confidence_cdf(theta, t, df=INFINITE):
    """Confidence distribution of the standardized signed effect.

    The pivot gives theta ~ t + Student(0, df) (normal when df is INFINITE),
    which matches the flat-prior Bayesian posterior.  Exposed for finite df
    work; simulations only use the normal case.
    """
    return noncentral_t_cdf(np.asarray(theta, dtype=float) - np.asarray(t, dtype=float), 0.0, df)


# ---------------------------------------------------------------------------
# Improper Bayes posterior (flat prior on the signed effect, normal model)
# ---------------------------------------------------------------------------


def _improper_bayes_cdf(theta, t):
    theta = np.asarray(theta, dtype=float)
    val = special.ndtr(theta - t) - special.ndtr(-theta - t)
    return np.where(theta < 0, 0.0, np.clip(val, 0.0, 1.0))


def improper_bayes_posterior(t: float, df=INFINITE) -> "PosteriorSummary":
    """Posterior of |theta| when theta ~ N(t, 1); no mass at zero."""
    if math.isfinite(float(_as_df(df))):
        raise UnsupportedModelError("improper Bayes posterior is implemented for df = INFINITE only")
    t = float(t)
    if not math.isfinite(t):
        raise DomainError("t must be finite")
    return PosteriorSummary(
        kind=PosteriorKind.IMPROPER_BAYES_FOLDED,
        null_mass=0.0,
        statistic=abs(t),
        df=INFINITE,
    )


# ---------------------------------------------------------------------------
# Posterior summaries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PosteriorSummary:
    """A posterior over the absolute effect: an atom at 0 plus a nonnull part.

    Parameters
    ----------
    kind : PosteriorKind
        Which family the posterior belongs to.
    null_mass : float
        Probability assigned to an effect of exactly zero.
    statistic : float
        The observed reduced statistic ``u = |t|``.
    df : float
        Degrees of freedom of the sampling model (``INFINITE`` for normal).
    delta : float, optional
        Location of the nonnull atom for ``EB_DISCRETE``.
    degenerate : bool
        Set for the folded confidence posterior at ``u = 0``, which is a
        unit atom at zero.
    """

    kind: PosteriorKind
    null_mass: float
    statistic: float
    df: float = INFINITE
    delta: float | None = None
    degenerate: bool = False

    def __post_init__(self):
        if not 0.0 <= self.null_mass <= 1.0:
            raise DomainError(f"null_mass must lie in [0, 1], got {self.null_mass}")
        if self.kind is PosteriorKind.IMPROPER_BAYES_FOLDED and self.null_mass != 0.0:
            raise DomainError("improper Bayes posteriors put no mass on the null")
        if self.kind is PosteriorKind.EB_DISCRETE and (self.delta is None or self.delta <= 0):
            raise DomainError("EB_DISCRETE posteriors need a positive nonnull atom")

    @property
    def masses(self) -> tuple[tuple[float, float], ...]:
        """Support points and probabilities of an ``EB_DISCRETE`` posterior."""
        if self.kind is not PosteriorKind.EB_DISCRETE:
            raise DomainError(f"{self.kind.value} posteriors are not discrete")
        return ((0.0, self.null_mass), (float(self.delta), 1.0 - self.null_mass))

    def cdf(self, theta):
        """Posterior probability that the absolute effect is at most ``theta``."""
        theta = np.asarray(theta, dtype=float)
        if self.kind is PosteriorKind.CONFIDENCE_FOLDED:
            out = np.where(theta < 0, 0.0, folded_sf(self.statistic, np.maximum(theta, 0.0), self.df))
        elif self.kind is PosteriorKind.IMPROPER_BAYES_FOLDED:
            out = _improper_bayes_cdf(theta, self.statistic)
        else:
            out = np.where(theta < 0, 0.0, np.where(theta < self.delta, self.null_mass, 1.0))
        return float(out) if out.ndim == 0 else out

    def quantile(self, beta: float) -> float:
        """Smallest theta whose cumulative posterior probability reaches ``beta``."""
        beta = _check_probability_open(beta)
        if self.kind is PosteriorKind.EB_DISCRETE:
            return 0.0 if self.null_mass >= beta else float(self.delta)
        if self.kind is PosteriorKind.CONFIDENCE_FOLDED:
            return confidence_quantile(beta, self.statistic, self.df)
        t = self.statistic
        return _increasing_root(lambda th: float(_improper_bayes_cdf(th, t)), beta, t + 10.0)

    def interval(self, alpha: float = 0.05) -> tuple[float, float]:
        return equal_tail_interval(self, alpha)


def equal_tail_interval(posterior: PosteriorSummary, alpha: float = 0.05) -> tuple[float, float]:
    """Interval between the alpha/2 and 1 - alpha/2 posterior quantiles."""
    alpha = _check_probability_open(alpha, "alpha")
    lower = posterior.quantile(alpha / 2.0)
    upper = posterior.quantile(1.0 - alpha / 2.0)
    return lower, max(lower, upper)
