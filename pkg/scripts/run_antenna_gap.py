"""Percentage SE gap of WMMSE sCSI TPC over the closed-form max-SE design versus antennas per satellite.

Example: python scripts/run_antenna_gap.py --powers 5 15 25 --trials 20
"""

import argparse
import dataclasses
from pathlib import Path

from satmimo.config import SystemConfig
from satmimo.harness import ExperimentSpec, mean_sum_se, performance_gap, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/antenna_gap"))
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--antennas", type=int, nargs="+", default=[36, 60, 84])
    ap.add_argument("--powers", type=float, nargs="+", default=[5.0])
    args = ap.parse_args()
    base = SystemConfig(S=4, K=10, M_x=6, M_y=6)
    spec = ExperimentSpec(base=base, sweep_name="antennas_per_sat", sweep_values=tuple(args.antennas),
                          algorithms=("robust_maxse", "wmmse_scsi_tpc"), trials=args.trials, seed=args.seed,
                          threads=args.threads)
    print("power_dBW  " + "  ".join(f"M={m:>4d}" for m in args.antennas))
    for p in args.powers:
        run = dataclasses.replace(spec, base=base.with_power_dBW(p))
        means = mean_sum_se(run_experiment(run, args.out / f"{p:g}dBW").rows)
        gaps = [performance_gap(means[(float(m), "wmmse_scsi_tpc")], means[(float(m), "robust_maxse")])
                for m in args.antennas]
        print(f"{p:9g}  " + "  ".join(f"{g:5.2f}%" for g in gaps))


if __name__ == "__main__":
    main()
