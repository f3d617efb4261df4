"""Sum SE versus total transmit power for the robust and WMMSE designs.

Example: python scripts/run_power_sweep.py --trials 20 --out results/power
"""

import argparse
from pathlib import Path

from satmimo.config import SystemConfig
from satmimo.harness import ALGORITHMS, ExperimentSpec, mean_sum_se, power_sweep_values, run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/power"))
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--start", type=float, default=5.0)
    ap.add_argument("--stop", type=float, default=25.0)
    ap.add_argument("--step", type=float, default=5.0)
    ap.add_argument("--algorithms", nargs="+", choices=ALGORITHMS,
                    default=["robust_maxse", "robust_mmse", "robust_single_stream_maxse",
                             "robust_single_stream_mmse", "wmmse_scsi_tpc", "wmmse_icsi_tpc"])
    args = ap.parse_args()
    spec = ExperimentSpec(base=SystemConfig(S=4, K=10, M_x=6, M_y=6), sweep_name="power_dBW",
                          sweep_values=tuple(power_sweep_values(args.start, args.stop, args.step)),
                          algorithms=tuple(args.algorithms), trials=args.trials, seed=args.seed, threads=args.threads)
    result = run_experiment(spec, args.out)
    means = mean_sum_se(result.rows)
    for v in spec.sweep_values:
        print(f"{v:5.1f} dBW  " + "  ".join(f"{a}={means[(v, a)]:.2f}" for a in spec.algorithms if (v, a) in means))


if __name__ == "__main__":
    main()
