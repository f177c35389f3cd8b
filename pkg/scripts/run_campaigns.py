#!/usr/bin/env python3
"""Run the default verification campaigns and write CSV reports to results/.

The normwise campaign checks every rigorous bound against the true factor
change across four perturbation levels; the componentwise campaign runs the
synthetic-envelope protocol plus the floating-point backward-error check.
"""

import argparse
import pathlib
import sys
import time

from genchol.harness import (
    EnsembleConfig,
    emit_report,
    run_componentwise_campaign,
    run_normwise_campaign,
    summarize,
)


def main() -> int:
    parser = argparse.ArgumentParser(
        description=__doc__, formatter_class=argparse.ArgumentDefaultsHelpFormatter
    )
    parser.add_argument("--trials", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=20250810)
    parser.add_argument("--out-dir", default="results")
    args = parser.parse_args()

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    t0 = time.perf_counter()
    normwise_cfg = EnsembleConfig(
        m=4, n=3, trials=args.trials, cond_target=1e4,
        dk_levels=(1e-8, 1e-4, 0.1, 0.4), seed=args.seed,
    )
    records = run_normwise_campaign(normwise_cfg)
    emit_report(records, "csv", out / "normwise.csv")
    count, violations, worst = summarize(records)
    print(
        f"normwise: {count} records, {violations} violations, "
        f"worst ratio {worst:.4f}, {time.perf_counter() - t0:.1f}s"
    )

    t0 = time.perf_counter()
    comp_cfg = EnsembleConfig(
        m=3, n=3, trials=max(args.trials // 5, 1), cond_target=1e3,
        seed=args.seed, eps_synth=1e-6,
    )
    comp_records = run_componentwise_campaign(comp_cfg)
    emit_report(comp_records, "csv", out / "componentwise.csv")
    count, violations, worst = summarize(comp_records)
    skipped = sum(1 for r in comp_records if r.skipped)
    print(
        f"componentwise: {count} trials, {violations} violations, "
        f"{skipped} skipped, worst ratio {worst:.4f}, "
        f"{time.perf_counter() - t0:.1f}s"
    )
    return 1 if violations else 0


if __name__ == "__main__":
    sys.exit(main())
