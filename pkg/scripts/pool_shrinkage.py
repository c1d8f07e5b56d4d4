#!/usr/bin/env python3
"""Pool-size trajectory across reduction rounds.

Majority culling should cut a candidate pool roughly in half per round.
This script simulates pools of several starting sizes and prints the mean
pool size entering each round plus the survivor fraction, for consistent
and for noisy assessors.
"""

import argparse

from prefeval.campaign.config import CampaignConfig
from prefeval.campaign.simulate import simulate_campaign


def trajectory(n: int, trials: int, error_rate: float, seed: int) -> None:
    config = CampaignConfig()
    orders = {"t": [f"d{i:03d}" for i in range(n)]}
    report = simulate_campaign(
        orders, config, trials=trials, error_rate=error_rate, seed=seed
    )
    rounds = " -> ".join(
        f"{size:.1f} (x{frac:.2f})"
        for size, frac in zip(
            report.mean_pool_by_round, report.survivor_fraction_by_round
        )
    )
    print(
        f"n={n:4d}  judgments={report.mean_judgments:7.1f}"
        f"  recovery={report.recovery_rate:.3f}  rounds: {rounds}"
    )


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", type=int, nargs="*", default=[12, 20, 40, 80, 112])
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--error-rates", type=float, nargs="*", default=[0.0, 0.2])
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    for eps in args.error_rates:
        print(f"== error rate {eps:g} ==")
        for n in args.sizes:
            trajectory(n, args.trials, eps, args.seed)
        print()


if __name__ == "__main__":
    main()
