"""Dimensional limit l * C(l)^2 over l = 2^j for a few weights.

Writes one CSV per weight into --outdir and prints the final relative error,
the tail error ratio (about 1/2 for a c/l error) and where monotonicity starts.
"""

import argparse
import pathlib

from monosob.explorer import asymptotic_scan
from monosob.special import Weight

WEIGHTS = [(0.0, 0.0, 0.0), (1.0, 1.0), (2.0, 1.0, 0.0), (0.5,)]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--jmax", type=int, default=20)
    ap.add_argument("--outdir", default="results/asymptotics")
    args = ap.parse_args(argv)
    out = pathlib.Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for A in WEIGHTS:
        res = asymptotic_scan(Weight(A), [2**j for j in range(2, args.jmax + 1)])
        tag = "_".join(f"{a:g}" for a in A)
        (out / f"A_{tag}.csv").write_text(res.to_csv())
        d = res.diagnostics
        print(f"A={A}: limit={res.target:.12g} final rel err={d['final_rel_error']:.3e} "
              f"last ratio={d['error_ratios'][-1]:.4f} monotone from l={d['monotone_from']}")


if __name__ == "__main__":
    main()
