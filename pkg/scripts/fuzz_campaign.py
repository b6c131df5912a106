"""Run every registered fuzz suite and summarise verdicts.

Writes per-suite JSONL reports into --outdir plus a summary table on stdout.
"""

import argparse
import json
import pathlib
import time

from monosob.explorer import FUZZ_SUITES, fuzz


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=100)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--outdir", default="results/fuzz")
    args = ap.parse_args(argv)
    out = pathlib.Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    print(f"{'suite':<14} {'viol':>4} {'unconv':>6} {'equal':>5} {'min margin':>12} {'sec':>6}")
    for name in FUZZ_SUITES:
        t0 = time.perf_counter()
        res = fuzz(name, trials=args.trials, seed=args.seed, workers=args.workers)
        dt = time.perf_counter() - t0
        with open(out / f"{name}.jsonl", "w", encoding="utf-8") as fh:
            for r in res.reports:
                fh.write(r.to_json() + "\n")
        s = res.summary()
        print(f"{name:<14} {s['violations']:>4} {s['unconverged']:>6} {s['equalities']:>5} "
              f"{s['min_rel_margin']:>12.4g} {dt:>6.2f}")
        (out / f"{name}.summary.json").write_text(json.dumps(s, sort_keys=True, default=str))


if __name__ == "__main__":
    main()
