"""Per-iteration WMMSE objective (bits/s/Hz) for TPC and PAPC, iCSI and sCSI.

Example: python scripts/run_convergence.py --iters 60 --trials 5
"""

import argparse
from pathlib import Path

from satmimo.config import SolverOptions, SystemConfig
from satmimo.harness import build_instance, convergence_trace, write_csv

ALGS = ("wmmse_icsi_tpc", "wmmse_scsi_tpc", "wmmse_icsi_papc", "wmmse_scsi_papc")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/convergence"))
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--iters", type=int, default=60)
    ap.add_argument("--power", type=float, default=15.0, help="total power in dBW")
    args = ap.parse_args()
    cfg = SystemConfig(S=4, K=10, M_x=6, M_y=6).with_power_dBW(args.power)
    solver = SolverOptions(max_iters=args.iters, eps_obj=0.0)
    recs = []
    for t in range(args.trials):
        inst = build_instance(cfg, args.seed, t, eval_realizations=0)
        for alg in ALGS:
            trace = convergence_trace(alg, inst, solver)
            recs += [(alg, t, i, v) for i, v in enumerate(trace, start=1)]
            half = trace[len(trace) // 2 - 1]
            print(f"trial {t} {alg:16s} iter {len(trace) // 2} {half:.3f}  iter {len(trace)} {trace[-1]:.3f}")
    path = write_csv(args.out / "convergence.csv", ("algorithm", "trial", "iteration", "objective_bpshz"), recs)
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
