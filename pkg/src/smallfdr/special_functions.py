"""Normal and noncentral t distributions, plus their folded (absolute value) forms.

All functions broadcast over their arguments like numpy ufuncs and return a
Python float when every argument is a scalar.  Degrees of freedom may be any
positive real; ``INFINITE`` (``math.inf``) selects the exact normal limit
rather than a large-df approximation.

The finite-df noncentral t density is evaluated from its Poisson-type power
series in log space, and distribution functions from the incomplete-beta
series.  The folded variants keep only the terms that survive folding, which
leaves sums of positive terms and so retains relative accuracy deep in the
tails.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from .errors import DomainError

__all__ = [
    "INFINITE",
    "normal_pdf",
    "normal_cdf",
    "normal_quantile",
    "noncentral_t_pdf",
    "noncentral_t_cdf",
    "folded_pdf",
    "folded_logpdf",
    "folded_sf",
]

INFINITE = math.inf

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
# Elements processed per block in the series evaluations; bounds the size of
# the (elements x terms) work arrays.
_BLOCK_CELLS = 2_000_000


def _as_df(df) -> np.ndarray:
    df = np.asarray(df, dtype=float)
    if np.any(np.isnan(df)) or np.any(df <= 0):
        raise DomainError(f"degrees of freedom must be positive or INFINITE, got {df.tolist()}")
    return df


def _result(x: np.ndarray):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def _nonnegative(u, name: str = "u") -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if np.any(u < 0) or np.any(np.isnan(u)):
        raise DomainError(f"{name} must be nonnegative")
    return u


# ---------------------------------------------------------------------------
# Normal distribution
# ---------------------------------------------------------------------------


def normal_pdf(x):
    """Standard normal density."""
    x = np.asarray(x, dtype=float)
    return _result(np.exp(-0.5 * x * x - _LOG_SQRT_2PI))


def normal_cdf(x):
    """Standard normal distribution function."""
    return _result(special.ndtr(np.asarray(x, dtype=float)))


def normal_quantile(p):
    """Inverse of :func:`normal_cdf` on the open unit interval."""
    p = np.asarray(p, dtype=float)
    if np.any(~((p > 0) & (p < 1))):
        raise DomainError("normal_quantile requires 0 < p < 1")
    return _result(special.ndtri(p))


def _normal_logpdf(x):
    return -0.5 * x * x - _LOG_SQRT_2PI


# ---------------------------------------------------------------------------
# Series helpers (finite degrees of freedom)
# ---------------------------------------------------------------------------


def _density_terms_needed(x: np.ndarray, nu: np.ndarray) -> np.ndarray:
    # Terms Gamma((nu+j+1)/2)/j! |x|^j peak near j* and fall off like a
    # log-concave sequence with spread ~ sqrt(j*).
    x2 = x * x
    jstar = x2 / 4.0 + np.sqrt(x2 * x2 / 16.0 + x2 * nu / 2.0)
    return np.ceil(jstar + 14.0 * np.sqrt(jstar + 1.0) + 40.0).astype(int)


def _blocks(order: np.ndarray, width: np.ndarray):
    """Yield index blocks of ``order`` whose padded size stays bounded."""
    start = 0
    n = order.size
    while start < n:
        stop = start + 1
        while stop < n and (stop - start + 1) * width[order[stop]] <= _BLOCK_CELLS:
            stop += 1
        yield order[start:stop]
        start = stop


def _nct_log_series(t, delta, nu, even_only: bool):
    """Log of the power-series part of the noncentral t density.

    Returns ``(log_abs_sum, sign)`` for the sum over j of
    Gamma((nu+j+1)/2) / j! * x**j with x = t*delta*sqrt(2/(nu+t^2)).
    With ``even_only`` the odd terms are dropped and the sum is positive.
    """
    x = t * delta * np.sqrt(2.0 / (nu + t * t))
    need = _density_terms_needed(x, nu)
    if even_only:
        need = need // 2 + 1
    out = np.empty(t.shape)
    sign = np.ones(t.shape)
    order = np.argsort(need, kind="stable")
    with np.errstate(divide="ignore"):
        logabsx = np.log(np.abs(x))
    for idx in _blocks(order, need):
        jmax = int(need[idx].max())
        m = np.arange(jmax, dtype=float)
        j = 2.0 * m if even_only else m
        with np.errstate(invalid="ignore", divide="ignore"):
            powers = np.where(j[None, :] == 0, 0.0, j[None, :] * logabsx[idx, None])
        logs = (
            special.gammaln((nu[idx, None] + j[None, :] + 1.0) / 2.0)
            - special.gammaln(j[None, :] + 1.0)
            + powers
        )
        if even_only:
            out[idx] = special.logsumexp(logs, axis=1)
        else:
            signs = np.where((x[idx, None] < 0) & (j[None, :] % 2 == 1), -1.0, 1.0)
            val, sgn = special.logsumexp(logs, axis=1, b=signs, return_sign=True)
            out[idx] = val
            sign[idx] = sgn
    return out, sign


def _nct_log_prefactor(t, delta, nu):
    return (
        -0.5 * delta * delta
        - 0.5 * math.log(math.pi)
        - special.gammaln(nu / 2.0)
        - 0.5 * np.log(nu)
        - (nu + 1.0) / 2.0 * np.log1p(t * t / nu)
    )


def _nct_pdf_finite(t, delta, nu):
    series, sign = _nct_log_series(t, delta, nu, even_only=False)
    with np.errstate(over="ignore", under="ignore"):
        val = sign * np.exp(_nct_log_prefactor(t, delta, nu) + series)
    # Alternating sums can round to tiny negatives; densities saturate at 0.
    return np.maximum(val, 0.0)


def _folded_logpdf_finite(u, delta, nu):
    series, _ = _nct_log_series(u, delta, nu, even_only=True)
    return math.log(2.0) + _nct_log_prefactor(u, delta, nu) + series


def _poisson_terms_needed(lam: np.ndarray) -> np.ndarray:
    return np.ceil(lam + 14.0 * np.sqrt(lam) + 40.0).astype(int)


def _nct_cdf_nonneg_t(t, delta, nu):
    """P(T <= t) for t >= 0 via the incomplete-beta series."""
    lam = 0.5 * delta * delta
    need = _poisson_terms_needed(lam)
    xx = t * t / (t * t + nu)
    out = np.empty(t.shape)
    order = np.argsort(need, kind="stable")
    for idx in _blocks(order, need):
        j = np.arange(int(need[idx].max()), dtype=float)[None, :]
        lam_i = lam[idx, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            jloglam = np.where(j == 0, 0.0, j * np.log(lam_i))
            logq = (
                np.log(np.abs(delta[idx, None]))
                - lam_i
                + jloglam
                - 0.5 * math.log(2.0)
                - special.gammaln(j + 1.5)
            )
        logp = -lam_i + jloglam - special.gammaln(j + 1.0)
        p = np.exp(logp)
        # Same renormalization as the folded tail; q shares the scale error.
        scale = p.sum(axis=1, keepdims=True)
        p /= scale
        q = np.sign(delta[idx, None]) * np.exp(logq) / scale
        b = nu[idx, None] / 2.0
        x = xx[idx, None]
        s = p * special.betainc(j + 0.5, b, x) + q * special.betainc(j + 1.0, b, x)
        out[idx] = special.ndtr(-delta[idx]) + 0.5 * s.sum(axis=1)
    return out


def _folded_sf_finite(u, delta, nu):
    """P(|T| >= u) as a Poisson mixture of incomplete-beta tails."""
    lam = 0.5 * delta * delta
    need = _poisson_terms_needed(lam)
    # Complemented incomplete beta of x = u^2/(u^2+nu); forming 1-x directly
    # would round to 1 for small u.
    x = u * u / (u * u + nu)
    out = np.empty(u.shape)
    order = np.argsort(need, kind="stable")
    for idx in _blocks(order, need):
        j = np.arange(int(need[idx].max()), dtype=float)[None, :]
        lam_i = lam[idx, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            jloglam = np.where(j == 0, 0.0, j * np.log(lam_i))
        p = np.exp(-lam_i + jloglam - special.gammaln(j + 1.0))
        # Rounding in gammaln for large j leaves the weights summing to 1 only
        # within ~1e-12; the truncated tail itself is far smaller.
        p /= p.sum(axis=1, keepdims=True)
        a, b, xi = j + 0.5, nu[idx, None] / 2.0, x[idx, None]
        upper = (p * special.betaincc(a, b, xi)).sum(axis=1)
        lower = (p * special.betainc(a, b, xi)).sum(axis=1)
        # Use whichever tail is small, so the result keeps relative accuracy.
        out[idx] = np.where(upper <= 0.5, upper, 1.0 - lower)
    return out


def _split(df, *arrays):
    """Broadcast arguments and return them flattened with a finite-df mask."""
    df = _as_df(df)
    b = np.broadcast_arrays(df, *[np.asarray(a, dtype=float) for a in arrays])
    shape = b[0].shape
    flat = [np.ascontiguousarray(a).ravel() for a in b]
    return shape, flat[0], flat[1:], np.isfinite(flat[0])


# ---------------------------------------------------------------------------
# Noncentral t
# ---------------------------------------------------------------------------


def noncentral_t_pdf(t, delta, df):
    """Density of the noncentral t distribution Student(delta, df) at ``t``.

    For ``df = INFINITE`` this is the normal density centred at ``delta``.
    """
    shape, nu, (t, delta), fin = _split(df, t, delta)
    out = np.empty(t.shape)
    out[~fin] = normal_pdf(t[~fin] - delta[~fin])
    inf_t = fin & np.isinf(t)
    out[inf_t] = 0.0
    fin &= ~inf_t
    if fin.any():
        out[fin] = _nct_pdf_finite(t[fin], delta[fin], nu[fin])
    return _result(out.reshape(shape))


def noncentral_t_cdf(t, delta, df):
    """Distribution function P(T <= t) of Student(delta, df).

    Absolute error is of order 1e-14; far in the lower tail, where the value
    is itself that small, monotonicity in ``t`` holds only to that level.
    """
    shape, nu, (t, delta), fin = _split(df, t, delta)
    out = np.empty(t.shape)
    out[~fin] = special.ndtr(t[~fin] - delta[~fin])
    inf_t = fin & np.isinf(t)
    out[inf_t] = (t[inf_t] > 0).astype(float)
    fin &= ~inf_t
    if fin.any():
        tf, df_, nf = t[fin], delta[fin], nu[fin]
        pos = tf >= 0
        res = np.empty(tf.shape)
        if pos.any():
            res[pos] = _nct_cdf_nonneg_t(tf[pos], df_[pos], nf[pos])
        if (~pos).any():
            res[~pos] = 1.0 - _nct_cdf_nonneg_t(-tf[~pos], -df_[~pos], nf[~pos])
        out[fin] = res
    return _result(np.clip(out, 0.0, 1.0).reshape(shape))


# ---------------------------------------------------------------------------
# Folded (absolute value) distributions
# ---------------------------------------------------------------------------


def folded_logpdf(u, delta, df):
    """Log density of |T| at ``u >= 0`` where T ~ Student(delta, df)."""
    _nonnegative(u)
    shape, nu, (u, delta), fin = _split(df, u, delta)
    d = np.abs(delta)
    out = np.empty(u.shape)
    ui, di = u[~fin], d[~fin]
    with np.errstate(invalid="ignore", over="ignore"):
        out[~fin] = _normal_logpdf(ui - di) + np.log1p(np.exp(-2.0 * ui * di))
    inf_u = np.isinf(u)
    out[inf_u] = -np.inf
    fin &= ~inf_u
    if fin.any():
        out[fin] = _folded_logpdf_finite(u[fin], d[fin], nu[fin])
    return _result(out.reshape(shape))


def folded_pdf(u, delta, df):
    """Density of |T| at ``u >= 0``: f(u; delta) + f(-u; delta).

    The sign of ``delta`` is irrelevant after folding.
    """
    with np.errstate(under="ignore"):
        return _result(np.exp(folded_logpdf(u, delta, df)))


def folded_sf(u, delta, df):
    """Survival function P(|T| >= u) for T ~ Student(delta, df).

    With ``delta = 0`` this is the two-sided p-value of the observed |t|.
    """
    _nonnegative(u)
    shape, nu, (u, delta), fin = _split(df, u, delta)
    out = np.empty(u.shape)
    ui, di = u[~fin], delta[~fin]
    out[~fin] = special.ndtr(di - ui) + special.ndtr(-ui - di)
    inf_u = np.isinf(u)
    out[inf_u] = 0.0
    fin &= ~inf_u
    if fin.any():
        out[fin] = _folded_sf_finite(u[fin], delta[fin], nu[fin])
    out = np.clip(out, 0.0, 1.0)
    out[u == 0] = 1.0
    return _result(out.reshape(shape))
