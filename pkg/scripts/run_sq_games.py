#!/usr/bin/env python3
"""Distinguishing games against honest and camouflage SQ oracles.

Plays the planted-subspace identification game in three regimes:
  1. honest oracle + support-mass learner  -> wins every trial;
  2. honest oracle + generic random-halfspace learner -> chance;
  3. camouflage oracle + support-mass learner -> the tailored queries
     still break camouflage at desk scale (the asymptotic hardness needs
     precision tau below the support's Gaussian mass, not reachable here).

Usage: python3 scripts/run_sq_games.py [--trials N] [--seed N]
"""

import argparse
import sys

from sqhard import instance as im
from sqhard import sqsim


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--family-size", type=int, default=4)
    ap.add_argument("--tau", type=float, default=0.05)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    base = im.make_instance(
        d=8, k=2, m=2, family_size=args.family_size, eps_orth=0.85,
        delta=0.01, seed=args.seed,
    )

    def factory(mode):
        def build(planted, seed):
            return sqsim.SqOracle(
                im.with_planted_index(base, planted),
                tau=args.tau, mode=mode, budget=200, seed=seed,
            )
        return build

    games = [
        ("honest", sqsim.make_support_mass_learner(), "support-mass"),
        ("honest", sqsim.make_random_query_learner(20, seed=args.seed), "random-halfspace"),
        ("camouflage", sqsim.make_support_mass_learner(), "support-mass"),
    ]
    print(f"family size {args.family_size}, chance level {1 / args.family_size:.3f}")
    for mode, learner, name in games:
        acc = sqsim.distinguishing_game(
            factory(mode), learner, args.family_size, args.trials, seed=args.seed + 1
        )
        print(f"mode={mode:11s} learner={name:16s} accuracy={acc:.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
