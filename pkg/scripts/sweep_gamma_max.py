#!/usr/bin/env python3
"""Sweep the selection cap for one preset across several scaling parameters
and write the relative l1 error against the shared high-fidelity reference.

Example:
    python scripts/sweep_gamma_max.py --preset test1b --epsilons 1,1e-4,1e-8 \
        --caps 5,10,20,35,50 --out out/sweep
"""

import argparse
import dataclasses
import os

from bfkin import build_problem, make_config, run_simulation
from bfkin.error_metrics import relative_l1_error
from bfkin.outputs import write_sweep


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", required=True)
    ap.add_argument("--epsilons", default="1e-8")
    ap.add_argument("--caps", default="5,10,20,35,50")
    ap.add_argument("--t-final", type=float, default=None)
    ap.add_argument("--out", default="out/sweep")
    args = ap.parse_args()

    epsilons = [float(e) for e in args.epsilons.split(",")]
    caps = [int(c) for c in args.caps.split(",")]
    rows = []
    for eps in epsilons:
        base = make_config(args.preset, epsilon=eps, t_final=args.t_final)
        ref_cfg = dataclasses.replace(base, mode="hf_reference")
        print(f"epsilon={eps:g}: reference run")
        ref = run_simulation(ref_cfg, build_problem(ref_cfg))
        for cap in caps:
            cfg = dataclasses.replace(base, gamma_max=cap)
            bf = run_simulation(cfg)
            err = relative_l1_error(ref.final.values, bf.final.values)
            rows.append([eps, cap, cfg.t_final, err])
            print(f"  cap {cap:3d}: rel l1 error {err:.3e}")
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "sweep.csv")
    write_sweep(path, rows)
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
