"""Robust covering-number toolkit.

TV distance and bottleneck (W-infinity) distance between discrete
distributions, the two-distance neighborhood decision (a TV move of mass
delta followed by a W-infinity move of radius eps), greedy covers of
distribution-pair families, and ReLU generative-network weight covers
with the product Lipschitz bound.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

W_INF_MAX_POINTS = 2000
PROB_TOL = 1e-10


@dataclass(frozen=True)
class DiscreteDistribution:
    points: np.ndarray  # (n, dim)
    probs: np.ndarray  # (n,)

    def __post_init__(self):
        object.__setattr__(self, "points", np.atleast_2d(np.asarray(self.points, dtype=float)))
        object.__setattr__(self, "probs", np.asarray(self.probs, dtype=float))
        if len(self.points) != len(self.probs):
            raise ValueError("points and probabilities must align")
        if np.any(self.probs < 0):
            raise ValueError("probabilities must be nonnegative")
        if abs(self.probs.sum() - 1.0) > PROB_TOL:
            raise ValueError(f"probabilities sum to {self.probs.sum()}, not 1")

    @property
    def is_uniform(self) -> bool:
        return np.allclose(self.probs, 1.0 / len(self.probs), atol=PROB_TOL)

    def to_json(self) -> str:
        return json.dumps({"points": self.points.tolist(), "probs": self.probs.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "DiscreteDistribution":
        doc = json.loads(text)
        return cls(np.array(doc["points"]), np.array(doc["probs"]))


def uniform_empirical(points) -> DiscreteDistribution:
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = len(points)
    return DiscreteDistribution(points, np.full(n, 1.0 / n))


@dataclass(frozen=True)
class TwoDistanceNeighborhood:
    center: DiscreteDistribution
    eps: float
    delta: float

    def __post_init__(self):
        if self.eps < 0 or self.delta < 0:
            raise ValueError("eps and delta must be nonnegative")


def tv_distance(p: DiscreteDistribution, q: DiscreteDistribution) -> float:
    """Half the l1 distance over the union of atoms (exact for discrete)."""
    masses: dict = {}
    for pts, probs, sign in ((p.points, p.probs, 1.0), (q.points, q.probs, -1.0)):
        for point, prob in zip(pts, probs):
            key = tuple(point)
            masses[key] = masses.get(key, 0.0) + sign * prob
    return 0.5 * sum(abs(v) for v in masses.values())


def _pairwise_distances(a: np.ndarray, b: np.ndarray, norm=2) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.linalg.norm(diff, ord=norm, axis=2)


def _max_matching_size(adjacency: np.ndarray) -> int:
    match = maximum_bipartite_matching(csr_matrix(adjacency), perm_type="column")
    return int(np.count_nonzero(match >= 0))


def w_inf(p_points, q_points, norm=2) -> float:
    """Bottleneck distance between two equal-size point multisets.

    Binary search over the n^2 candidate radii (the pairwise distances),
    testing each radius by maximum bipartite matching; the result is the
    smallest pairwise distance admitting a perfect matching, which is the
    exact W-infinity distance of the two uniform empiricals.
    """
    p_points = np.atleast_2d(np.asarray(p_points, dtype=float))
    q_points = np.atleast_2d(np.asarray(q_points, dtype=float))
    if len(p_points) != len(q_points):
        raise ValueError("bottleneck matching needs equal-size point sets")
    n = len(p_points)
    if n > W_INF_MAX_POINTS:
        raise ValueError(f"matching limited to {W_INF_MAX_POINTS} points, got {n}")
    dist = _pairwise_distances(p_points, q_points, norm)
    radii = np.unique(dist)
    lo, hi = 0, len(radii) - 1
    if _max_matching_size(dist <= radii[lo]) == n:
        return float(radii[lo])
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _max_matching_size(dist <= radii[mid]) == n:
            hi = mid
        else:
            lo = mid
    return float(radii[hi])


def in_neighborhood(candidate: DiscreteDistribution, nbhd: TwoDistanceNeighborhood, norm=2) -> bool:
    """Membership in the two-distance neighborhood of the center.

    A TV move may redistribute up to delta of the center's mass, then the
    remainder must transport within W-infinity radius eps.  For two
    uniform n-point empiricals this is exact: membership holds iff a
    matching of at least ceil((1 - delta) * n) pairs exists within
    distance eps (the displaced atoms are re-placed exactly by the TV
    move).
    """
    center = nbhd.center
    if not (candidate.is_uniform and center.is_uniform):
        raise ValueError("neighborhood decision implemented for uniform empiricals")
    if len(candidate.points) != len(center.points):
        raise ValueError("uniform empiricals must have equal atom counts")
    n = len(center.points)
    if nbhd.delta >= 1.0:
        return True
    need = math.ceil((1.0 - nbhd.delta) * n - PROB_TOL)
    dist = _pairwise_distances(center.points, candidate.points, norm)
    return _max_matching_size(dist <= nbhd.eps + PROB_TOL) >= need


def pair_covered(
    center_pair: tuple[DiscreteDistribution, DiscreteDistribution],
    candidate_pair: tuple[DiscreteDistribution, DiscreteDistribution],
    eps: float,
    delta: float,
    norm=2,
) -> bool:
    """Product-metric convention: both components must be covered."""
    return all(
        in_neighborhood(cand, TwoDistanceNeighborhood(cent, eps, delta), norm)
        for cent, cand in zip(center_pair, candidate_pair)
    )


def greedy_cover(family: list, eps: float, delta: float, norm=2) -> tuple[list[int], int]:
    """Greedy set cover of a family of distribution pairs.

    Returns indices of chosen centers covering every member; a ln(n)
    approximation of the minimal cover, never smaller than it.
    """
    if not family:
        raise ValueError("family must be non-empty")
    n = len(family)
    covers = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(n):
            covers[i, j] = pair_covered(family[i], family[j], eps, delta, norm)
    uncovered = np.ones(n, dtype=bool)
    chosen: list[int] = []
    while uncovered.any():
        gains = (covers & uncovered).sum(axis=1)
        best = int(np.argmax(gains))
        if gains[best] == 0:
            # a member not even covering itself cannot occur (delta >= 0,
            # eps >= 0 and distance 0 to itself), but guard anyway
            raise RuntimeError("greedy cover stalled: member covers nothing")
        chosen.append(best)
        uncovered &= ~covers[best]
    return chosen, len(chosen)


@dataclass(frozen=True)
class GenerativeNet:
    """Fully-connected net with 1-Lipschitz nonlinearity and bounded weights."""

    weights: tuple  # matrices, layer i maps width_{i} -> width_{i+1}
    bound: float
    nonlinearity: str = "relu"

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(np.asarray(w, dtype=float) for w in self.weights))
        if not self.weights:
            raise ValueError("need at least one layer")
        if self.nonlinearity != "relu":
            raise ValueError(f"unsupported nonlinearity {self.nonlinearity!r}")
        for w_prev, w_next in zip(self.weights, self.weights[1:]):
            if w_next.shape[1] != w_prev.shape[0]:
                raise ValueError("layer shapes do not chain")
        for w in self.weights:
            if np.max(np.abs(w)) > self.bound + PROB_TOL:
                raise ValueError(f"weights exceed the bound {self.bound}")

    @property
    def depth(self) -> int:
        return len(self.weights)

    @property
    def max_width(self) -> int:
        return max(max(w.shape) for w in self.weights)

    @property
    def weight_count(self) -> int:
        return sum(w.size for w in self.weights)

    def flat_weights(self) -> np.ndarray:
        return np.concatenate([w.ravel() for w in self.weights])


def net_forward(net: GenerativeNet, x) -> np.ndarray:
    """Forward pass; ReLU between layers, linear output layer."""
    h = np.asarray(x, dtype=float)
    for i, w in enumerate(net.weights):
        h = w @ h
        if i < net.depth - 1:
            h = np.maximum(h, 0.0)
    return h


def lipschitz_bound_check(net: GenerativeNet, net_perturbed: GenerativeNet, x):
    """Check ||g_w(x) - g_w'(x)||_2 <= ||w - w'||_1 ||x||_2 (dB)^depth."""
    if net.depth != net_perturbed.depth or any(
        a.shape != b.shape for a, b in zip(net.weights, net_perturbed.weights)
    ):
        raise ValueError("architecture mismatch")
    x = np.asarray(x, dtype=float)
    lhs = float(np.linalg.norm(net_forward(net, x) - net_forward(net_perturbed, x)))
    w_l1 = float(np.abs(net.flat_weights() - net_perturbed.flat_weights()).sum())
    d = max(net.max_width, net_perturbed.max_width)
    b = max(net.bound, net_perturbed.bound)
    rhs = w_l1 * float(np.linalg.norm(x)) * (d * b) ** net.depth
    return lhs, rhs, lhs <= rhs * (1 + 1e-9)


def weight_grid_cover_size(m: int, bound: float, alpha: float) -> float:
    """Log cardinality 2m log(1 + 2B/alpha) of the weight-grid cover."""
    if alpha <= 0:
        raise ValueError(f"grid pitch must be positive, got {alpha}")
    return 2.0 * m * math.log(1.0 + 2.0 * bound / alpha)


def weight_grid(bound: float, alpha: float) -> np.ndarray:
    """The 1-d grid [-B, B] with pitch alpha: 1 + 2B/alpha points."""
    if alpha <= 0:
        raise ValueError(f"grid pitch must be positive, got {alpha}")
    count = int(round(1 + 2 * bound / alpha))
    return np.linspace(-bound, bound, count)
