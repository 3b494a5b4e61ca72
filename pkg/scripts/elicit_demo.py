#!/usr/bin/env python3
"""Elicit a coefficient prior from synthetic expert probabilities.

Builds covariates for a toy set of roads, generates noisy expert
blockage probabilities from a known coefficient vector, fits the normal
prior, and pushes coefficient draws forward to per-road probability
summaries. A second part mixes two disagreeing experts.

Usage:
    python3 scripts/elicit_demo.py [--roads 12] [--reps 4000] [--seed 0]
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass

import numpy as np

from ctproute.blockage import CovariateMatrix
from ctproute.elicit import (
    fit_prior,
    inverse_logit,
    logits_from_probabilities,
    mix_experts,
    mixture_moments,
    pushforward_probabilities,
    sample_beta,
)

TRUE_BETA = np.array([-1.5, 0.9, 0.5])  # intercept, grade, exposure


@dataclass(frozen=True)
class DemoConfig:
    roads: int = 12
    reps: int = 4_000
    seed: int = 0
    logit_noise: float = 0.35


def build_covariates(cfg: DemoConfig) -> CovariateMatrix:
    gen = np.random.default_rng(cfg.seed)
    grade = gen.uniform(0.0, 2.0, size=cfg.roads)
    exposure = gen.uniform(-1.0, 3.0, size=cfg.roads)
    values = np.column_stack([np.ones(cfg.roads), grade, exposure])
    return CovariateMatrix(
        values=values,
        columns=("intercept", "grade", "exposure"),
        edge_ids=tuple(f"r{i:02d}" for i in range(cfg.roads)),
    )


def expert_probabilities(
    cfg: DemoConfig, Z: CovariateMatrix, shift: float, stream: int
) -> list[float]:
    gen = np.random.default_rng(cfg.seed * 1000 + stream)
    logits = (
        Z.values @ TRUE_BETA
        + shift
        + gen.normal(scale=cfg.logit_noise, size=Z.values.shape[0])
    )
    return [inverse_logit(x) for x in logits]


def single_expert(cfg: DemoConfig, Z: CovariateMatrix) -> None:
    probs = expert_probabilities(cfg, Z, shift=0.0, stream=1)
    P, clamped = logits_from_probabilities(probs)
    prior = fit_prior(Z, P)
    print(f"single expert over {cfg.roads} roads "
          f"(logit noise {cfg.logit_noise}, {len(clamped)} clamped):")
    print(f"  {'coefficient':>11}  {'truth':>7}  {'fitted':>7}  {'sd':>7}")
    for j, name in enumerate(Z.columns):
        sd = float(np.sqrt(prior.covariance[j, j]))
        print(f"  {name:>11}  {TRUE_BETA[j]:>7.3f}  "
              f"{prior.mean[j]:>7.3f}  {sd:>7.3f}")
    print(f"  residual variance {prior.sigma2:.4f} on "
          f"{prior.degrees_of_freedom} degrees of freedom")
    print()


def two_expert_mixture(cfg: DemoConfig, Z: CovariateMatrix) -> None:
    optimist = logits_from_probabilities(
        expert_probabilities(cfg, Z, shift=-0.6, stream=2)
    )[0]
    pessimist = logits_from_probabilities(
        expert_probabilities(cfg, Z, shift=+0.6, stream=3)
    )[0]
    prior = mixture_moments(Z, [optimist, pessimist])
    sample = mix_experts(Z, [optimist, pessimist], cfg.reps, seed=cfg.seed)
    summaries = pushforward_probabilities(Z, sample)
    print(f"two-expert mixture, {2 * cfg.reps} pooled draws "
          f"(seed {cfg.seed}):")
    print("  pooled coefficient means:",
          np.array2string(prior.mean, precision=3))
    print(f"  {'road':>5}  {'mean':>6}  {'q05':>6}  {'median':>6}  {'q95':>6}")
    for s in summaries[:6]:
        print(f"  {s.edge_id:>5}  {s.mean:>6.3f}  {s.q05:>6.3f}  "
              f"{s.median:>6.3f}  {s.q95:>6.3f}")
    if len(summaries) > 6:
        print(f"  ... ({len(summaries) - 6} more roads)")
    print()


def fit_then_sample(cfg: DemoConfig, Z: CovariateMatrix) -> None:
    probs = expert_probabilities(cfg, Z, shift=0.0, stream=1)
    prior = fit_prior(Z, logits_from_probabilities(probs)[0])
    sample = sample_beta(prior, cfg.reps, seed=cfg.seed)
    recovered = np.mean(sample.draws, axis=0)
    print(f"{cfg.reps} prior draws reproduce the fitted mean:")
    print("  fitted:", np.array2string(prior.mean, precision=3))
    print("  sample:", np.array2string(recovered, precision=3))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--roads", type=int, default=DemoConfig.roads)
    parser.add_argument("--reps", type=int, default=DemoConfig.reps)
    parser.add_argument("--seed", type=int, default=DemoConfig.seed)
    args = parser.parse_args()
    cfg = DemoConfig(roads=args.roads, reps=args.reps, seed=args.seed)
    Z = build_covariates(cfg)
    single_expert(cfg, Z)
    two_expert_mixture(cfg, Z)
    fit_then_sample(cfg, Z)


if __name__ == "__main__":
    main()
