"""Two-group mixture model for reduced statistics and the local false discovery rate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .confidence import PosteriorKind, PosteriorSummary
from .errors import DegenerateInputError, DomainError, UnsupportedModelError
from .special_functions import INFINITE, _as_df, folded_logpdf, normal_pdf

__all__ = [
    "MixtureModel",
    "marginal_density",
    "marginal_logdensity",
    "lfdr",
    "eq1_posterior",
    "eb_posterior",
]


@dataclass(frozen=True)
class MixtureModel:
    """Hyperparameters of the mixture pi0 f(u; 0) + sum_k pi_k f(u; delta_k).

    ``components`` is a sequence of ``(weight, delta)`` pairs.  Weights and
    ``pi0`` must sum to one, and the |delta_k| must be distinct and nonzero.
    """

    pi0: float
    components: tuple[tuple[float, float], ...] = field(default_factory=tuple)
    df: float = INFINITE

    def __post_init__(self):
        comps = tuple((float(w), float(d)) for w, d in self.components)
        object.__setattr__(self, "components", comps)
        object.__setattr__(self, "pi0", float(self.pi0))
        object.__setattr__(self, "df", float(_as_df(self.df)))
        if not 0.0 <= self.pi0 <= 1.0:
            raise DomainError(f"pi0 must lie in [0, 1], got {self.pi0}")
        if any(not w >= 0.0 for w, _ in comps):
            raise DomainError("component weights must be nonnegative")
        if abs(self.pi0 + sum(w for w, _ in comps) - 1.0) > 1e-12:
            raise DomainError("pi0 and component weights must sum to 1")
        sizes = [abs(d) for _, d in comps]
        if any(s == 0.0 or not math.isfinite(s) for s in sizes):
            raise DomainError("component effects must be finite and nonzero")
        if len(set(sizes)) != len(sizes):
            raise DomainError("component effects must have distinct absolute values")

    @classmethod
    def two_group(cls, pi0: float, delta: float, df=INFINITE) -> "MixtureModel":
        """The K = 1 model with nonnull effect ``delta`` of weight ``1 - pi0``."""
        return cls(pi0=pi0, components=((1.0 - float(pi0), delta),), df=df)

    @property
    def K(self) -> int:
        return len(self.components)

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.components])

    @property
    def deltas(self) -> np.ndarray:
        return np.array([d for _, d in self.components])


def _component_logs(model: MixtureModel, u) -> tuple[np.ndarray, np.ndarray]:
    """Weighted log densities: the null term and an array of nonnull terms."""
    u = np.asarray(u, dtype=float)
    if np.any(u < 0) or np.any(np.isnan(u)):
        raise DomainError("u must be nonnegative")
    with np.errstate(divide="ignore"):
        null = math.log(model.pi0) if model.pi0 > 0 else -np.inf
        null = null + folded_logpdf(u, 0.0, model.df)
        alts = [
            (math.log(w) if w > 0 else -np.inf) + folded_logpdf(u, d, model.df)
            for w, d in model.components
        ]
    return np.asarray(null, dtype=float), np.asarray(alts, dtype=float).reshape((-1,) + u.shape)


def marginal_logdensity(model: MixtureModel, u):
    """Log of the mixture density at ``u``."""
    null, alts = _component_logs(model, u)
    out = special.logsumexp(np.concatenate([null[None], alts]), axis=0)
    return float(out) if np.ndim(out) == 0 else out


def marginal_density(model: MixtureModel, u):
    """Mixture density pi0 f(u; 0) + sum_k pi_k f(u; delta_k)."""
    with np.errstate(under="ignore"):
        out = np.exp(marginal_logdensity(model, u))
    return float(out) if np.ndim(out) == 0 else out


def lfdr(model: MixtureModel, u):
    """Local false discovery rate: posterior probability of the null given ``u``.

    Raises
    ------
    DegenerateInputError
        If the mixture density is zero at some ``u``.
    """
    null, alts = _component_logs(model, u)
    total = special.logsumexp(np.concatenate([null[None], alts]), axis=0)
    if np.any(np.isneginf(total)) or np.any(np.isnan(total)):
        raise DegenerateInputError("mixture density is zero; local false discovery rate undefined")
    with np.errstate(under="ignore"):
        out = np.clip(np.exp(null - total), 0.0, 1.0)
    return float(out) if np.ndim(out) == 0 else out


def eq1_posterior(x: float, n1: int, n_total: int) -> float:
    """Posterior null probability when N(0,1) and N(2,1) populations are mixed.

    With ``n1`` of ``n_total`` populations having mean 2, the prior null
    probability is ``1 - n1/n_total``.  Used as a closed-form check of
    :func:`lfdr` under the normal model.
    """
    if not 1 <= n1 <= n_total:
        raise DomainError("need 1 <= n1 <= n_total")
    prior = 1.0 - n1 / n_total
    num = prior * normal_pdf(x)
    return num / (num + (n1 / n_total) * normal_pdf(x - 2.0))


def eb_posterior(model: MixtureModel, u: float) -> PosteriorSummary:
    """Empirical Bayes posterior of the absolute effect given one statistic.

    Two atoms: ``lfdr(model, u)`` at zero and the remainder at ``|delta_1|``.
    """
    if model.K != 1:
        raise UnsupportedModelError("eb_posterior supports K = 1 models only")
    return PosteriorSummary(
        kind=PosteriorKind.EB_DISCRETE,
        null_mass=lfdr(model, float(u)),
        statistic=float(u),
        df=model.df,
        delta=abs(float(model.components[0][1])),
    )
