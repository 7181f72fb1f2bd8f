"""L1 errors and observed orders on the smooth 2D sine wave.

    python demos/convergence_sine_2d.py [p_max]
"""
import sys

from fvlim.bench import ExperimentPlan, run_convergence_table

p_max = int(sys.argv[1]) if len(sys.argv) > 1 else 3
for method in ("gauss_legendre", "transverse"):
    plan = ExperimentPlan("sine_2d", ps=range(p_max + 1), Ns=(16, 32, 64), flux_reconstructions=(method,))
    print(method)
    for r in run_convergence_table(plan):
        eoc = "" if r.EOC is None else f"{r.EOC:6.3f}"
        print(f"  p={r.p} {r.integrator:<6} N={r.N:<4} C={r.C:.3f}  E1={r.E1:.3e}  {eoc}")
