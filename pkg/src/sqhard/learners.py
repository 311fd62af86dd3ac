"""Classifiers, exact robust-loss accounting, and robust ERM.

The set-vote classifier's robust loss is computed from an exact certified
margin (coordinate moves along an orthonormal frame are independent, so
the cheapest vote-flipping perturbation can be found by a small dynamic
program).  Linear classifiers get exact point-to-hyperplane attacks;
nearest-neighbor only gets a heuristic attack, reported as a lower bound.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import ks_2samp

from . import instance as inst_mod
from . import quad1d


@dataclass(frozen=True)
class RobustLossReport:
    epsilon: float
    per_class_loss: tuple[float, float]
    max_loss: float
    method: str  # certified | exactAttack | heuristicAttack
    n: tuple[int, int]

    def to_json(self) -> str:
        return json.dumps(
            {
                "epsilon": self.epsilon,
                "perClassLoss": list(self.per_class_loss),
                "maxLoss": self.max_loss,
                "method": self.method,
                "n": list(self.n),
            }
        )


class SetVoteClassifier:
    """Votes the planted coordinates' support memberships, majority rule.

    Predicts class 0 when at least as many planted projections sit in the
    A-support as in the B-support.  Ignores the augmented coordinate and
    undoes any Hadamard rotation, so only the base geometry matters.
    """

    variant = "setVote"

    def __init__(self, instance: inst_mod.HardInstance, metadata: str = "reference set-vote"):
        self.instance = instance
        self.metadata = metadata

    def predict(self, x) -> np.ndarray:
        mem = inst_mod.separation_sets_membership(self.instance, x)
        return (mem.frac_b > mem.frac_a).astype(int)

    def certified_margin(self, x) -> np.ndarray:
        return certified_margin_setvote(self, x)


class LinearClassifier:
    """Affine separator: predicts 1 on the positive side of <w,x> + b."""

    variant = "linear"

    def __init__(self, w: np.ndarray, b: float, metadata: str = "", training_error: float | None = None):
        w = np.asarray(w, dtype=float)
        if np.linalg.norm(w) == 0:
            raise ValueError("linear classifier needs a nonzero weight vector")
        self.w = w
        self.b = float(b)
        self.metadata = metadata
        self.training_error = training_error

    def predict(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return (x @ self.w + self.b > 0).astype(int)

    def margins(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return np.abs(x @ self.w + self.b) / np.linalg.norm(self.w)


class NearestNeighborClassifier:
    """1-NN over a stored training set; robustness only lower-boundable."""

    variant = "nearestNeighbor"

    def __init__(self, points: np.ndarray, labels: np.ndarray, metadata: str = ""):
        self.points = np.asarray(points, dtype=float)
        self.labels = np.asarray(labels, dtype=int)
        self.metadata = metadata

    def predict(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        d2 = ((x[:, None, :] - self.points[None, :, :]) ** 2).sum(axis=2)
        return self.labels[np.argmin(d2, axis=1)]


def _interval_exit_distance(t: np.ndarray, intervals: np.ndarray) -> np.ndarray:
    """Distance from each t to the boundary of the interval containing it.

    Points outside every interval get 0 (they are already out).
    """
    lo, hi = intervals[:, 0], intervals[:, 1]
    inside = (t[..., None] >= lo) & (t[..., None] <= hi)
    dist = np.minimum(t[..., None] - lo, hi - t[..., None])
    dist = np.where(inside, dist, 0.0)
    return dist.max(axis=-1)


def _interval_entry_distance(t: np.ndarray, intervals: np.ndarray) -> np.ndarray:
    """Distance from each t to the nearest point of the interval union."""
    lo, hi = intervals[:, 0], intervals[:, 1]
    gap = np.maximum(np.maximum(lo - t[..., None], t[..., None] - hi), 0.0)
    return gap.min(axis=-1)


def _min_flip_cost(gain_needed: int, one_step: np.ndarray, two_step: np.ndarray, usable_two: np.ndarray) -> float:
    """Cheapest squared-l2 budget achieving the required vote swing.

    Each coordinate offers a 1-vote move (leave the current side, or enter
    the target side from neither) at cost ``one_step``, and where
    ``usable_two`` a 2-vote move (cross fully to the target side) at cost
    ``two_step``.  Costs on distinct coordinates add in squares.
    dp[g] tracks the minimal squared cost buying a swing of at least g;
    a move of gain h from state dp[max(g-h, 0)] reaches dp[g].
    """
    if gain_needed <= 0:
        return 0.0
    dp = np.full(gain_needed + 1, np.inf)
    dp[0] = 0.0
    for c1, c2, has2 in zip(one_step, two_step, usable_two):
        new = dp.copy()
        if np.isfinite(c1):
            cand = np.concatenate([dp[:1], dp[:-1]])
            new = np.minimum(new, cand + c1 * c1)
        if has2 and np.isfinite(c2):
            cand = np.concatenate([dp[:1], dp[:1], dp[:-2]])[: len(dp)]
            new = np.minimum(new, cand + c2 * c2)
        dp = new
    return float(dp[gain_needed])


def certified_margin_setvote(classifier: SetVoteClassifier, x) -> np.ndarray:
    """Exact l2 robustness radius of the set-vote prediction at each point.

    Works in the planted frame's coordinates: flipping the majority vote
    requires a specific swing in (votes for target) - (votes for current),
    and the cheapest way to buy that swing is found per point by a small
    dynamic program over the per-coordinate move costs.  Perturbations
    orthogonal to the frame (including the augmented coordinate) cannot
    affect the vote, and the Hadamard rotation is an isometry, so the
    radius is exact for this classifier family.
    """
    hinst = classifier.instance
    y = inst_mod.to_base_coordinates(hinst, x)
    t = y @ hinst.frame
    iv_a, iv_b = hinst.pair.intervals_a, hinst.pair.intervals_b
    in_a = quad1d.in_intervals(t, iv_a)
    in_b = quad1d.in_intervals(t, iv_b)
    n_a = in_a.sum(axis=1)
    n_b = in_b.sum(axis=1)
    pred_is_b = n_b > n_a
    margins = np.empty(len(t))
    for i in range(len(t)):
        ti = t[i]
        if pred_is_b[i]:
            cur_in, tgt_iv = in_b[i], iv_a
            swing = int(n_b[i] - n_a[i])  # reach n_a' >= n_b'
        else:
            cur_in, tgt_iv = in_a[i], iv_b
            swing = int(n_a[i] - n_b[i]) + 1  # reach n_b' > n_a'
        exit_cost = _interval_exit_distance(ti, iv_b if pred_is_b[i] else iv_a)
        entry_cost = _interval_entry_distance(ti, tgt_iv)
        # coordinates already in the target side offer nothing
        in_tgt = quad1d.in_intervals(ti, tgt_iv)
        one_step = np.where(cur_in, exit_cost, entry_cost)
        one_step = np.where(in_tgt, np.inf, one_step)
        two_step = np.where(cur_in & ~in_tgt, entry_cost, np.inf)
        usable_two = cur_in & ~in_tgt
        cost2 = _min_flip_cost(swing, one_step, two_step, usable_two)
        margins[i] = math.sqrt(cost2)
    return margins


def _heuristic_nn_attack(classifier: NearestNeighborClassifier, x: np.ndarray, labels: np.ndarray, epsilon: float, seed: int = 0, n_random: int = 20) -> np.ndarray:
    """Lower bound on NN robust loss: random probes + coordinate descent."""
    rng = np.random.default_rng(seed)
    n, dim = x.shape
    flipped = classifier.predict(x) != labels
    for i in range(n):
        if flipped[i]:
            continue
        # push toward the nearest opposite-class training point
        opp = classifier.points[classifier.labels != labels[i]]
        d2 = ((opp - x[i]) ** 2).sum(axis=1)
        target = opp[np.argmin(d2)]
        direction = target - x[i]
        nrm = np.linalg.norm(direction)
        if nrm > 0 and classifier.predict(x[i] + direction * (epsilon / nrm))[0] != labels[i]:
            flipped[i] = True
            continue
        for _ in range(n_random):
            z = rng.standard_normal(dim)
            z *= epsilon / np.linalg.norm(z)
            if classifier.predict(x[i] + z)[0] != labels[i]:
                flipped[i] = True
                break
    return flipped


def robust_loss(classifier, samples0: np.ndarray, samples1: np.ndarray, epsilon: float) -> RobustLossReport:
    """Empirical per-class robust zero-one loss at radius epsilon.

    Set-vote: certified (exact for this family).  Linear: exact attack.
    Nearest-neighbor: heuristic attack, a lower bound on the true loss.
    Epsilon 0 reduces to the plain misclassification rate everywhere.
    """
    if epsilon < 0:
        raise ValueError(f"epsilon must be nonnegative, got {epsilon}")
    samples0 = np.atleast_2d(samples0)
    samples1 = np.atleast_2d(samples1)
    losses = []
    if isinstance(classifier, SetVoteClassifier):
        method = "certified"
        for label, pts in ((0, samples0), (1, samples1)):
            pred = classifier.predict(pts)
            margins = classifier.certified_margin(pts)
            bad = (pred != label) | (margins <= epsilon) if epsilon > 0 else (pred != label)
            losses.append(float(np.mean(bad)))
    elif isinstance(classifier, LinearClassifier):
        method = "exactAttack"
        for label, pts in ((0, samples0), (1, samples1)):
            pred = classifier.predict(pts)
            margins = classifier.margins(pts)
            bad = (pred != label) | (margins <= epsilon) if epsilon > 0 else (pred != label)
            losses.append(float(np.mean(bad)))
    elif isinstance(classifier, NearestNeighborClassifier):
        method = "heuristicAttack"
        for label, pts in ((0, samples0), (1, samples1)):
            lbl = np.full(len(pts), label)
            if epsilon > 0:
                bad = _heuristic_nn_attack(classifier, pts, lbl, epsilon)
            else:
                bad = classifier.predict(pts) != lbl
            losses.append(float(np.mean(bad)))
    else:
        raise TypeError(f"unsupported classifier {type(classifier).__name__}")
    return RobustLossReport(
        epsilon=float(epsilon),
        per_class_loss=(losses[0], losses[1]),
        max_loss=max(losses),
        method=method,
        n=(len(samples0), len(samples1)),
    )


def erm_robust(classifiers: list, samples0: np.ndarray, samples1: np.ndarray, epsilon: float):
    """Pick the family member minimizing empirical max-class robust loss.

    Ties break toward the lowest index so reruns are reproducible.
    """
    if not classifiers:
        raise ValueError("classifier family must be non-empty")
    reports = [robust_loss(f, samples0, samples1, epsilon) for f in classifiers]
    best = min(range(len(classifiers)), key=lambda i: (reports[i].max_loss, i))
    return classifiers[best], reports


def fit_linear(samples0: np.ndarray, samples1: np.ndarray, max_iters: int = 20) -> LinearClassifier:
    """Averaged-margin perceptron; any separator suffices here.

    Features are standardized (the scaling is folded back into the
    returned weights), updates fire whenever the functional margin is
    below 1, and the averaged iterate is returned.  On separable data the
    perceptron bound caps the updates; either way the training error of
    the returned separator is recorded on the classifier.
    """
    samples0 = np.atleast_2d(samples0)
    samples1 = np.atleast_2d(samples1)
    if len(samples0) == 0 or len(samples1) == 0:
        raise ValueError("both classes need at least one sample")
    x = np.vstack([samples0, samples1])
    y = np.concatenate([-np.ones(len(samples0)), np.ones(len(samples1))])
    mu, sd = x.mean(axis=0), x.std(axis=0)
    sd[sd == 0] = 1.0
    xb = np.hstack([(x - mu) / sd, np.ones((len(x), 1))])  # bias feature
    w = np.zeros(xb.shape[1])
    w_sum = np.zeros_like(w)
    n_seen = 0
    rng = np.random.default_rng(0)
    for _ in range(max_iters):
        updates = 0
        for i in rng.permutation(len(xb)):
            if y[i] * (xb[i] @ w) <= 1.0:
                w = w + y[i] * xb[i]
                updates += 1
            w_sum += w
            n_seen += 1
        if updates == 0:
            break
    w_avg = w_sum / n_seen
    if np.linalg.norm(w_avg[:-1]) == 0:
        w_avg = np.append(np.ones(xb.shape[1] - 1), 0.0)
    # unfold the standardization: w.(x-mu)/sd + b = (w/sd).x + (b - (w/sd).mu)
    w_final = w_avg[:-1] / sd
    b_final = w_avg[-1] - w_final @ mu
    err = float(np.mean(np.where(x @ w_final + b_final > 0, 1.0, -1.0) != y))
    return LinearClassifier(
        w_final, b_final, metadata="averaged margin perceptron", training_error=err
    )


def attack_linear(classifier: LinearClassifier, x: np.ndarray):
    """Minimal-norm flip for a linear classifier (exact up to a 1e-9 nudge)."""
    if not isinstance(classifier, LinearClassifier):
        raise TypeError("attack_linear needs a linear classifier")
    x = np.asarray(x, dtype=float)
    w, b = classifier.w, classifier.b
    score = float(x @ w + b)
    w2 = float(w @ w)
    z = -score * (1 + 1e-9) * w / w2
    if score == 0.0:
        # on the boundary: an infinitesimal push in either direction flips
        z = 1e-12 * w / math.sqrt(w2)
    return z, float(np.linalg.norm(z))


def nn_distance_diagnostic(hinst: inst_mod.HardInstance, n_train: int, n_test: int, seed) -> float:
    """KS distance between same-class and cross-class NN distances.

    For class-0 test points, compares the distribution of distance to the
    nearest class-0 training point against distance to the nearest class-1
    training point; near 0 means nearest neighbor cannot tell the classes
    apart.
    """
    if n_train < 10 or n_test < 10:
        raise ValueError("need at least 10 train and test points")
    train0 = inst_mod.sample_points(hinst, 0, n_train, inst_mod.split_seed(seed, 0))
    train1 = inst_mod.sample_points(hinst, 1, n_train, inst_mod.split_seed(seed, 1))
    test0 = inst_mod.sample_points(hinst, 0, n_test, inst_mod.split_seed(seed, 2))

    def nn_dist(test, train):
        d2 = ((test[:, None, :] - train[None, :, :]) ** 2).sum(axis=2)
        return np.sqrt(d2.min(axis=1))

    return float(ks_2samp(nn_dist(test0, train0), nn_dist(test0, train1)).statistic)


def classifier_to_json(classifier) -> str:
    if isinstance(classifier, LinearClassifier):
        doc = {
            "variant": "linear",
            "w": classifier.w.tolist(),
            "b": classifier.b,
            "metadata": classifier.metadata,
        }
    elif isinstance(classifier, SetVoteClassifier):
        doc = {
            "variant": "setVote",
            "metadata": classifier.metadata,
            "instance": json.loads(inst_mod.instance_to_json(classifier.instance)),
        }
    elif isinstance(classifier, NearestNeighborClassifier):
        doc = {
            "variant": "nearestNeighbor",
            "points": classifier.points.tolist(),
            "labels": classifier.labels.tolist(),
            "metadata": classifier.metadata,
        }
    else:
        raise TypeError(f"unsupported classifier {type(classifier).__name__}")
    return json.dumps(doc)


def classifier_from_json(text: str):
    doc = json.loads(text)
    variant = doc.get("variant")
    if variant == "linear":
        return LinearClassifier(np.array(doc["w"]), doc["b"], metadata=doc.get("metadata", ""))
    if variant == "setVote":
        hinst = inst_mod.instance_from_json(json.dumps(doc["instance"]))
        return SetVoteClassifier(hinst, metadata=doc.get("metadata", ""))
    if variant == "nearestNeighbor":
        return NearestNeighborClassifier(
            np.array(doc["points"]), np.array(doc["labels"]), metadata=doc.get("metadata", "")
        )
    raise ValueError(f"unknown classifier variant {variant!r}")
