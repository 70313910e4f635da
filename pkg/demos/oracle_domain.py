"""How the finite-difference reference depends on its domain length.

The reference solver clamps y = 0 at x = L.  By t = 1 the wave train launched
by the gaussian preset has reached x = 20, so a 20-unit domain reflects it
back.  Lengthening the domain at fixed mesh width removes the discrepancy
with the contour-integral field.

    python3 demos/oracle_domain.py           (about ten seconds)
"""
import numpy as np

from fokas.acceptance import GR_SAMPLES, preset
from fokas.complex_plane import SpectralParams
from fokas.evaluator import EvaluationGrid, solve_field
from fokas.oracle import FDGrid, compare_fields, fd_solve, global_relation_residual

TIMES = (0.25, 0.5, 1.0)


def main():
    p = SpectralParams(1.0, 1.0)
    g0, g1 = preset("gaussian")
    x = EvaluationGrid.graded(1e-3, 20.0, 2000, TIMES).x_nodes
    field = solve_field(EvaluationGrid(x, np.asarray(TIMES)), g0, g1, p, 1e-8)
    print(f"{'L':>5} {'leakage':>9} " + " ".join(f"relL2@{t:<5g}" for t in TIMES) + "   GR max")
    for L in (20.0, 40.0, 80.0):
        fd = fd_solve(p, g0, g1, FDGrid.for_horizon(1.0, L, int(100 * L), 1e-3), save_every=10,
                      check_leakage=False)
        rel = compare_fields(field, fd).rel_l2
        gr = max(global_relation_residual(fd, k, t) for k in GR_SAMPLES for t in TIMES)
        print(f"{L:5g} {fd.leakage:9.2e} " + " ".join(f"{v:11.2e}" for v in rel) + f" {gr:8.2e}")


if __name__ == "__main__":
    main()
