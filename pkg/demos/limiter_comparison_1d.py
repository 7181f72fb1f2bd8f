"""Compare bound violations of the limited schemes on the 1D composite profile.

    python demos/limiter_comparison_1d.py [N]
"""
import sys

from fvlim.bench import ExperimentPlan, run_violation_table

n = int(sys.argv[1]) if len(sys.argv) > 1 else 128
plan = ExperimentPlan("composite_1d", ("aPrioriMPP", "aPosteriori", "aPosterioriB"), (1, 3, 5), None, (n,), 1.0)
print(f"{'scheme':<14}{'p':>2}  {'integrator':<8}{'delta':>12}{'L1 error':>12}")
for row in run_violation_table(plan):
    print(f"{row['scheme']:<14}{row['p']:>2}  {row['integrator']:<8}{row['delta']:>12.2e}{row['e1']:>12.3e}")
