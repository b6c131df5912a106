"""Distance of the tensor-power marginal to a Gaussian as l grows.

Prints the L2 distance for each l; it should decrease monotonically.
"""

import argparse

from monosob.explorer import gaussian_limit_diagnostic
from monosob.special import Weight


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--l", type=int, nargs="+", default=[4, 16, 64, 256])
    args = ap.parse_args(argv)
    for A in [(0.0,), (1.0, 0.0), (2.0, 1.0)]:
        res = gaussian_limit_diagnostic(Weight(A), tuple(args.l))
        vals = ", ".join(f"l={l}: {v:.3e}" for l, v in zip(res.grid, res.values))
        print(f"A={A}: {vals}  monotone={res.diagnostics['monotone']}")


if __name__ == "__main__":
    main()
