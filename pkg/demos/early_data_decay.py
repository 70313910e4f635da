"""Decay slopes when the boundary data act early and then switch off.

The default gaussian preset peaks at t = 0.5, so on t in [0.02, 1] the field
is still being driven and its norms grow.  Here the data live on [0, 0.4] and
the norms are sampled on [0.5, 1], after the forcing has ended.

    python3 demos/early_data_decay.py        (about one minute)
"""
import math

import numpy as np

from fokas.dispersion import dispersion_run
from fokas.transforms import gaussian_bump

BOUNDS = {2.0: 0.05, 4.0: -0.075, math.inf: -0.2}


def main():
    support = (0.0, 0.4)
    g0 = gaussian_bump(1.0, 0.2, 0.06, 1.0, support=support)
    g1 = gaussian_bump(1.0, 0.2, 0.06, -0.5, support=support)
    run = dispersion_run(g0, g1, t_nodes=np.geomspace(0.5, 1.0, 8), nx=3000, x_max=300.0,
                         psi_ny=8001)
    print(f"{'r':>5} {'slope':>9} {'bound':>8} {'C max/min':>10}")
    for r in run.r_values:
        c = run.ratios[r]
        print(f"{r:>5g} {run.slopes[r]:+9.3f} {BOUNDS[r]:+8.3f} {c.max() / c.min():10.3f}")


if __name__ == "__main__":
    main()
