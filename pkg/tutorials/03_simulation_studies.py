"""RMSE and coverage versus the nonnull proportion.

Reduced-size runs of both studies.  Increase the replicate counts for
smoother curves; results are reproducible for a given seed.
"""

from smallfdr import MethodSpec, SimulationConfig, run_coverage_study, run_rmse_study

grid = (0.0, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0)
methods = (MethodSpec.zero_posterior(), MethodSpec.observed_confidence(), MethodSpec.lfdr(0.5), MethodSpec.lfdr(0.9))
rmse = run_rmse_study(SimulationConfig(alt_delta=2.0, n_null_reps=1000, n_alt_reps=1000, pi1_grid=grid, seed=1, methods=methods))

print("RMSE of the posterior null probability")
print(f"{'pi1':>6}" + "".join(f"{m:>22}" for m in rmse.methods))
for pi1 in grid:
    print(f"{pi1:6.2f}" + "".join(f"{rmse.value(m, pi1):22.4f}" for m in rmse.methods))

methods = (MethodSpec.improper_bayes(), MethodSpec.observed_confidence(), MethodSpec.lfdr(0.5), MethodSpec.lfdr(0.9))
cov = run_coverage_study(SimulationConfig(alt_delta=2.0, n_null_reps=400, n_alt_reps=400, pi1_grid=grid, seed=1, methods=methods))

print("\nCoverage of 95% equal-tail intervals")
print(f"{'pi1':>6}" + "".join(f"{m:>22}" for m in cov.methods))
for pi1 in grid:
    print(f"{pi1:6.2f}" + "".join(f"{cov.value(m, pi1):22.4f}" for m in cov.methods))
