"""Statistical-query oracle simulator.

Answers bounded queries with Monte Carlo means calibrated so the answer
is within the precision tau of the true expectation with overwhelming
probability.  The camouflage mode answers with the reference-Gaussian
expectation whenever that is tau-consistent with the truth, which is the
mechanism making the planted subspace invisible to generic queries.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import instance as inst_mod

PER_QUERY_FAILURE = 1e-6


class BudgetExhaustedError(RuntimeError):
    """The oracle's query budget has been consumed."""


class QueryRangeError(ValueError):
    """An evaluator returned values outside [0, 1]."""


def hoeffding_samples(tau: float) -> int:
    """Samples making the MC error at most tau/2 except w.p. 1e-6.

    Hoeffding for [0,1]-valued queries: P(|mean - E| > t) <= 2 exp(-2nt^2),
    solved for n at t = tau/2, leaving the other tau/2 as answer slack.
    """
    if not 0 < tau < 1:
        raise ValueError(f"tau must be in (0, 1), got {tau}")
    return math.ceil(math.log(2.0 / PER_QUERY_FAILURE) / (2.0 * (tau / 2.0) ** 2))


@dataclass(frozen=True)
class SqQuery:
    evaluator: Callable[[np.ndarray], np.ndarray]  # (n, dim) -> (n,) in [0,1]
    description: str = ""


@dataclass
class SqOracle:
    """Stateful SQ oracle over a hidden instance.

    ``hidden.planted_index`` is the secret; learners interacting with the
    oracle may read the public family (``hidden.family``) but must not
    touch the planted index.
    """

    hidden: inst_mod.HardInstance
    tau: float = 0.01
    mode: str = "honest"
    budget: int = 1000
    mc_samples: int | None = None
    seed: int = 0
    ledger: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if self.mode not in ("honest", "camouflage"):
            raise ValueError(f"mode must be honest or camouflage, got {self.mode!r}")
        if self.budget < 1:
            raise ValueError("budget must be positive")
        if self.mc_samples is None:
            self.mc_samples = hoeffding_samples(self.tau)

    def _evaluate(self, q: SqQuery, x: np.ndarray) -> float:
        vals = np.asarray(q.evaluator(x), dtype=float)
        if vals.shape != (len(x),):
            raise QueryRangeError("evaluator must return one value per point")
        if np.any(vals < 0) or np.any(vals > 1):
            raise QueryRangeError("query values must lie in [0, 1]")
        return float(vals.mean())

    def query(self, q: SqQuery) -> tuple[float, float]:
        """Answer a query; appends to the ledger either way."""
        if len(self.ledger) >= self.budget:
            raise BudgetExhaustedError(f"budget of {self.budget} queries exhausted")
        idx = len(self.ledger)
        mc = self.mc_samples
        x0 = inst_mod.sample_points(self.hidden, 0, mc, inst_mod.split_seed(self.seed, 3 * idx))
        x1 = inst_mod.sample_points(self.hidden, 1, mc, inst_mod.split_seed(self.seed, 3 * idx + 1))
        u_true = self._evaluate(q, x0)
        v_true = self._evaluate(q, x1)
        broken = False
        if self.mode == "camouflage":
            rng = np.random.default_rng(inst_mod.split_seed(self.seed, 3 * idx + 2))
            g = self._evaluate(q, rng.standard_normal((mc, self.hidden.ambient_dim)))
            u = g if abs(u_true - g) <= self.tau else u_true
            v = g if abs(v_true - g) <= self.tau else v_true
            broken = (u != g) or (v != g)
        else:
            u, v = u_true, v_true
        self.ledger.append(
            {
                "queryIndex": idx,
                "description": q.description,
                "u": u,
                "v": v,
                "modeUsed": self.mode,
                "camouflageBroken": broken,
            }
        )
        return u, v


def export_ledger(oracle: SqOracle) -> str:
    """Ledger as JSON lines, one query record per line."""
    return "\n".join(json.dumps(entry) for entry in oracle.ledger)


def distinguishing_game(
    oracle_factory: Callable[[int, int], SqOracle],
    learner: Callable[[SqOracle], int],
    family_size: int,
    trials: int,
    seed: int,
) -> float:
    """Fraction of trials where the learner names the planted subspace.

    Each trial plants a uniformly random index, builds a fresh oracle via
    ``oracle_factory(planted_index, trial_seed)`` and scores the learner's
    guess; a learner exhausting its budget loses the trial.  Chance level
    is 1/family_size.
    """
    if trials < 1 or family_size < 2:
        raise ValueError("need trials >= 1 and family_size >= 2")
    correct = 0
    for t in range(trials):
        rng = np.random.default_rng(inst_mod.split_seed(seed, 2 * t))
        planted = int(rng.integers(family_size))
        oracle = oracle_factory(planted, int(np.random.default_rng(inst_mod.split_seed(seed, 2 * t + 1)).integers(2**31)))
        try:
            guess = learner(oracle)
        except BudgetExhaustedError:
            continue
        if guess == planted:
            correct += 1
    return correct / trials


def make_support_mass_learner() -> Callable[[SqOracle], int]:
    """Queries the A-support mass along every frame vector of every member.

    Under honest answers, directions of the planted frame show the full
    A-support mass while other directions show only the Gaussian mass of
    the support: the per-member average is a separating statistic.
    """

    def learner(oracle: SqOracle) -> int:
        family = oracle.hidden.family
        intervals = oracle.hidden.pair.intervals_a
        from . import quad1d

        scores = []
        for frame in family.frames:
            answers = []
            for i in range(frame.shape[1]):
                u_vec = frame[:, i]
                q = SqQuery(
                    evaluator=lambda x, u_vec=u_vec: quad1d.in_intervals(
                        x @ u_vec, intervals
                    ).astype(float),
                    description=f"A-support mass along frame column {i}",
                )
                answers.append(oracle.query(q)[0])
            scores.append(float(np.mean(answers)))
        return int(np.argmax(scores))

    return learner


def make_random_query_learner(n_queries: int, seed: int = 0) -> Callable[[SqOracle], int]:
    """Generic learner: random halfspace queries, correlation-scored guess.

    Both class-conditional marginals of a centered halfspace are symmetric,
    so honest answers carry no usable signal and the guess is at chance;
    under camouflage the answers are outright Gaussian.
    """

    def learner(oracle: SqOracle) -> int:
        d = oracle.hidden.ambient_dim
        rng = np.random.default_rng(seed)
        family = oracle.hidden.family
        scores = np.zeros(len(family))
        for j in range(n_queries):
            w = rng.standard_normal(d)
            w /= np.linalg.norm(w)
            q = SqQuery(
                evaluator=lambda x, w=w: (x @ w > 0).astype(float),
                description=f"random halfspace {j}",
            )
            u, v = oracle.query(q)
            for f_idx, frame in enumerate(family.frames):
                overlap = float(np.linalg.norm(frame.T @ w[: frame.shape[0]]))
                scores[f_idx] += (u - v) * overlap
        return int(np.argmax(scores))

    return learner
