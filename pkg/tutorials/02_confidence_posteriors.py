"""Confidence posteriors for the absolute effect size.

The folded confidence posterior has an atom at zero equal to the two-sided
p-value.  The improper flat-prior posterior has none.  The empirical Bayes
posterior puts the LFDR at zero and the rest at the fitted effect.
"""

import numpy as np

from smallfdr import (
    INFINITE,
    confidence_cdf,
    confidence_posterior,
    eb_posterior,
    fit_mixture,
    improper_bayes_posterior,
)

for u in (0.5, 2.0, 4.0):
    conf = confidence_posterior(u)
    flat = improper_bayes_posterior(u)
    eb = eb_posterior(fit_mixture([u], INFINITE, (0.9, 1.0)).model, u)
    print(f"u = {u}")
    print(f"  confidence:    mass at 0 = {conf.null_mass:.4f}, 95% interval = {np.round(conf.interval(0.05), 4)}")
    print(f"  improper flat: mass at 0 = {flat.null_mass:.4f}, 95% interval = {np.round(flat.interval(0.05), 4)}")
    print(f"  empirical:     mass at 0 = {eb.null_mass:.4f}, 95% interval = {np.round(eb.interval(0.05), 4)}")

# Calibration: C(theta; U) is uniform when U = |N(theta, 1)|.
rng = np.random.default_rng(1)
theta = 2.0
values = confidence_cdf(theta, np.abs(rng.standard_normal(20_000) + theta))
print("\ndeciles of C(2; U):", np.round(np.quantile(values, np.linspace(0.1, 0.9, 9)), 3))
