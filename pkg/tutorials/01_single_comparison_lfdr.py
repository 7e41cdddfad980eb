"""Local false discovery rate for a single comparison.

With one statistic the null proportion cannot be learned from data, so a
lower bound on pi0 carries the prior information.  This script fits the
two-group model to one |t| under several bounds and prints the resulting
posterior null probability next to the two-sided p-value.
"""

from smallfdr import INFINITE, eq1_posterior, fit_mixture, lfdr, observed_confidence_null

# Closed-form check: one of a million N(2,1) populations among N(0,1) ones.
print(f"P(null | x=2), 100 of 1e6 nonnull: {eq1_posterior(2.0, 100, 10**6):.4f}")
print(f"P(null | x=2), 1 of 1e6 nonnull:   {eq1_posterior(2.0, 1, 10**6):.8f}")
print()

u = 2.5
print(f"statistic u = {u}, two-sided p-value = {observed_confidence_null(u, INFINITE):.4f}")
print(f"{'bounds':>10} {'pi0_hat':>8} {'delta_hat':>10} {'lfdr':>8}")
for lower in (0.0, 0.5, 0.8, 0.9, 0.99):
    fit = fit_mixture([u], INFINITE, (lower, 1.0))
    print(f"{str(fit.bounds):>10} {fit.pi0_hat:8.3f} {fit.delta_hat:10.3f} {lfdr(fit.model, u):8.4f}")

# With a t model on 10 degrees of freedom the tails are heavier.
fit = fit_mixture([u], 10, (0.9, 1.0))
print(f"\ndf=10, bounds [0.9,1]: lfdr = {lfdr(fit.model, u):.4f}")
