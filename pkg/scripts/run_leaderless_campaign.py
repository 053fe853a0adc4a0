#!/usr/bin/env python3
"""50-seed leaderless synchronization campaign (n=50, r=0.4, v=0.05, tau=0.01)."""

import argparse

from uniswarm import ModelParams, RunConfig, campaign


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=50)
    parser.add_argument("--steps", type=int, default=500)
    parser.add_argument("--out", default="runs/leaderless_campaign")
    args = parser.parse_args()

    params = ModelParams(n=50, r_n=0.4, v_n=0.05, tau_n=0.01)
    base = RunConfig(params=params, steps=args.steps, seed=0, audit_level="sampled")
    summary = campaign(base, list(range(args.seeds)), out_dir=args.out)
    print(f"sync fraction: {summary.sync_fraction:.3f}")
    print(f"connectivity fraction: {summary.connectivity_fraction:.3f}")
    print(f"audit verdicts: {summary.audit_verdicts}")


if __name__ == "__main__":
    main()
