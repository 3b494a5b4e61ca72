#!/usr/bin/env python3
"""Study the bundled fixtures: a gamble sweep, policy gaps, centrality.

Sweeps the turn-back fixture's gamble probability q and compares the
optimal traveler with replanning-greedy and committed fixed routes,
cross-checks the exact triangle value against Monte Carlo, and prints
the triangle's blockage centrality table next to the geodesic baseline.

Usage:
    python3 scripts/fixture_study.py [--reps 20000] [--seed 0]
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass

from ctproute.centrality import (
    canadian_betweenness_all,
    geodesic_scores,
    write_centrality_csv,
)
from ctproute.fixtures import tb_fixture, tri_fixture
from ctproute.traveler import (
    OptimalPolicy,
    default_failure_cost,
    evaluate_policy_exact,
    exact_expected_time,
    make_policy,
    simulate_policy,
)


@dataclass(frozen=True)
class StudyConfig:
    reps: int = 20_000
    seed: int = 0
    gamble_levels: tuple = (0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0)


def gamble_sweep(cfg: StudyConfig) -> None:
    print("turn-back fixture: S-A (1) + gamble A-T (1, blocked w.p. q), "
          "direct S-T (4)")
    print(f"{'q':>5}  {'optimal':>8}  {'greedy':>8}  {'fixed S,T':>9}  "
          f"{'fixed S,A,T':>11}")
    for q in cfg.gamble_levels:
        net, model = tb_fixture(q)
        fc = default_failure_cost(net)
        optimal = exact_expected_time(net, model, "S", "T", failure_cost=fc)
        greedy = evaluate_policy_exact(
            net, model,
            make_policy("replan", net, model, "T", failure_cost=fc),
            "S", "T", failure_cost=fc,
        )
        direct = evaluate_policy_exact(
            net, model,
            make_policy("route", net, model, "T", failure_cost=fc,
                        route=["S", "T"]),
            "S", "T", failure_cost=fc,
        )
        through = evaluate_policy_exact(
            net, model,
            make_policy("route", net, model, "T", failure_cost=fc,
                        route=["S", "A", "T"]),
            "S", "T", failure_cost=fc,
        )
        print(f"{q:>5.2f}  {optimal.value:>8.3f}  {greedy.value:>8.3f}  "
              f"{direct.value:>9.3f}  {through.value:>11.3f}")
    print()


def monte_carlo_check(cfg: StudyConfig) -> None:
    net, model = tri_fixture()
    fc = default_failure_cost(net)
    exact = exact_expected_time(net, model, "S", "T", failure_cost=fc)
    dist = simulate_policy(
        net, model, OptimalPolicy(net, model, "T", fc), "S", "T",
        replications=cfg.reps, seed=cfg.seed, failure_cost=fc,
    )
    print(f"triangle fixture, optimal policy, {cfg.reps} replicates "
          f"(seed {cfg.seed}):")
    print(f"  exact expected time  {exact.value:.6f}")
    print(f"  simulated mean       {dist.mean:.6f}  "
          f"(stderr {dist.stderr:.6f})")
    print(f"  |difference| / se    "
          f"{abs(dist.mean - exact.value) / dist.stderr:.2f}")
    print()


def centrality_table(cfg: StudyConfig) -> None:
    net, model = tri_fixture()
    table = canadian_betweenness_all(
        net, model, "S", "T", mode="others_open"
    )
    print("triangle blockage centrality (others forced open) with the "
          "geodesic baseline:")
    print(write_centrality_csv(table, geodesic=geodesic_scores(net)), end="")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reps", type=int, default=StudyConfig.reps)
    parser.add_argument("--seed", type=int, default=StudyConfig.seed)
    args = parser.parse_args()
    cfg = StudyConfig(reps=args.reps, seed=args.seed)
    gamble_sweep(cfg)
    monte_carlo_check(cfg)
    centrality_table(cfg)


if __name__ == "__main__":
    main()
