"""p-means approaching the geometric mean as p -> 0.

Runs the two worked examples and prints the error per p and the fitted order.
"""

import argparse

import numpy as np

from monosob.explorer import UniformInterval, WeightedDensity, log_grid, pmean_limit
from monosob.funcspace import normalized_gaussian
from monosob.special import Weight


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=7)
    args = ap.parse_args(argv)
    grid = log_grid(1e-4, 1e-1, args.points)
    g = normalized_gaussian(Weight((1.0, 2.0)), 1.0)
    cases = [("exp on [0,1]", np.exp, UniformInterval(0.0, 1.0)),
             ("Gaussian, A=(1,2)", g, WeightedDensity(g, 2.0))]
    for label, fn, mu in cases:
        res = pmean_limit(fn, mu, grid)
        print(f"{label}: target {res.target:.12g}, order {res.diagnostics['fitted_order']:.4f}")
        for p, e in zip(res.grid, res.errors):
            print(f"  p={p:.3e}  error={e:.3e}")


if __name__ == "__main__":
    main()
