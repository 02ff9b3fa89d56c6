#!/usr/bin/env python3
"""Run one preset with the bi-fidelity solver next to the full high-fidelity
reference and emit profile/history CSVs for plotting.

Example:
    python scripts/run_profiles.py --preset test2_riemann --epsilon 1e-8 --out out/riemann
"""

import argparse
import dataclasses

from bfkin import build_problem, make_config, run_simulation
from bfkin.outputs import emit_outputs


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", required=True)
    ap.add_argument("--epsilon", type=float, default=1e-8)
    ap.add_argument("--gamma-max", type=int, default=50)
    ap.add_argument("--t-final", type=float, default=None)
    ap.add_argument("--out", default="out/profiles")
    args = ap.parse_args()

    cfg = make_config(args.preset, epsilon=args.epsilon, gamma_max=args.gamma_max,
                      t_final=args.t_final)
    print(f"bi-fidelity run: {args.preset}, epsilon={args.epsilon:g}, "
          f"{round(cfg.t_final / cfg.dt)} steps")
    bf = run_simulation(cfg)
    print("high-fidelity reference run")
    ref_cfg = dataclasses.replace(cfg, mode="hf_reference")
    ref = run_simulation(ref_cfg, build_problem(ref_cfg))
    paths = emit_outputs(bf, args.out, reference=ref.final)
    sizes = [rec.gamma_size for rec in bf.history]
    print(f"wrote {len(paths)} files to {args.out}; "
          f"mean |gamma| = {sum(sizes) / len(sizes):.1f}")


if __name__ == "__main__":
    main()
