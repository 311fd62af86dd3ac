"""The full d-dimensional hard distribution pair.

A planted k-dimensional subspace carries the moment-matched pair along
its basis directions; everything orthogonal is standard Gaussian.  The
augmented variant adds a noiseless label-revealing first coordinate of
size rho, and the rotated variant applies an orthonormal Hadamard
transform (padding with Gaussian coordinates up to a power of two) to
move the geometry into the l-infinity setting.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import geometry, quad1d

VOTE_THRESHOLD = 0.9
# Configured stand-ins for the asymptotic feasibility condition
# m^C * eps * k <= d^(-c); recorded as a flag, never asserted.
FEASIBILITY_C = 3.0
FEASIBILITY_SMALL_C = 0.1


@dataclass(frozen=True)
class LabeledSample:
    point: np.ndarray
    label: int


@dataclass(frozen=True)
class HardInstance:
    pair: quad1d.OneDimPair
    family: geometry.SubspaceFamily
    planted_index: int
    full_basis: np.ndarray  # extension of the planted frame to R^d
    rho: float
    rotated: bool

    @property
    def d(self) -> int:
        return self.family.ambient_dim

    @property
    def k(self) -> int:
        return self.family.subspace_dim

    @property
    def m(self) -> int:
        return self.pair.m

    @property
    def augmented(self) -> bool:
        return self.rho > 0

    @property
    def frame(self) -> np.ndarray:
        return self.family.frames[self.planted_index]

    @property
    def pre_rotation_dim(self) -> int:
        return self.d + (1 if self.augmented else 0)

    @property
    def ambient_dim(self) -> int:
        """Dimension of emitted samples (power of two when rotated)."""
        n = self.pre_rotation_dim
        return geometry.next_power_of_two(n) if self.rotated else n

    @property
    def feasibility_ok(self) -> bool:
        lhs = self.m**FEASIBILITY_C * self.family.eps_orth * self.k
        return lhs <= self.d ** (-FEASIBILITY_SMALL_C)


def make_instance(
    d: int,
    k: int,
    m: int,
    family_size: int = 1,
    eps_orth: float = 0.5,
    planted_index: int = 0,
    rho: float = 0.0,
    rotated: bool = False,
    delta: float | None = None,
    seed: int = 0,
    max_retries: int = 200,
) -> HardInstance:
    """Assemble an instance; the subspace family is seeded by ``seed``."""
    if not 0 <= planted_index < family_size:
        raise ValueError(f"planted_index {planted_index} outside family of size {family_size}")
    if rho < 0:
        raise ValueError(f"rho must be nonnegative, got {rho}")
    pair = quad1d.build_pair(m, delta)
    family = geometry.sample_family(d, k, family_size, eps_orth, seed, max_retries)
    full_basis = geometry.extend_to_full_basis(family.frames[planted_index])
    return HardInstance(
        pair=pair,
        family=family,
        planted_index=planted_index,
        full_basis=full_basis,
        rho=float(rho),
        rotated=rotated,
    )


def with_planted_index(instance: HardInstance, planted_index: int) -> HardInstance:
    """Same family and parameters, different planted subspace."""
    if not 0 <= planted_index < len(instance.family):
        raise ValueError(f"planted_index {planted_index} outside family")
    return HardInstance(
        pair=instance.pair,
        family=instance.family,
        planted_index=planted_index,
        full_basis=geometry.extend_to_full_basis(instance.family.frames[planted_index]),
        rho=instance.rho,
        rotated=instance.rotated,
    )


def split_seed(seed: int, chunk: int) -> np.random.SeedSequence:
    """Stream-splitting contract: child stream = (parent seed, chunk index)."""
    return np.random.SeedSequence(entropy=seed, spawn_key=(chunk,))


def sample_points(instance: HardInstance, label: int, n: int, seed) -> np.ndarray:
    """Draw n points of one class; rows are ambient-coordinate vectors."""
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label}")
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    rng = np.random.default_rng(seed)
    d, k = instance.d, instance.k
    side = "A" if label == 0 else "B"
    pair = instance.pair
    rule = pair.rule(side)
    centers = pair.centers(side)
    # inverse-CDF center choice (much faster than rng.choice at SQ-oracle
    # sample counts)
    idx = np.searchsorted(np.cumsum(rule.weights), rng.random((n, k)))
    idx = np.minimum(idx, len(centers) - 1)
    planted = centers[idx] + math.sqrt(pair.delta) * rng.standard_normal((n, k))
    rest = rng.standard_normal((n, d - k))
    x = np.hstack([planted, rest]) @ instance.full_basis.T
    if instance.augmented:
        first = np.full((n, 1), instance.rho * label)
        x = np.hstack([first, x])
    if instance.rotated:
        pad = instance.ambient_dim - x.shape[1]
        if pad:
            # padding coordinates carry N(0,1) noise so every marginal of
            # the rotated point stays Gaussian off the planted structure
            x = np.hstack([x, rng.standard_normal((n, pad))])
        x = geometry.walsh_hadamard(x)
    return x


def sample(instance: HardInstance, label: int, n: int, seed) -> list[LabeledSample]:
    return [LabeledSample(p, label) for p in sample_points(instance, label, n, seed)]


def to_base_coordinates(instance: HardInstance, x: np.ndarray) -> np.ndarray:
    """Undo rotation/padding/augmentation, returning d-dim base points."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if instance.rotated:
        x = geometry.walsh_hadamard(x)[:, : instance.pre_rotation_dim]
    if instance.augmented:
        x = x[:, 1:]
    return x


def log_density(instance: HardInstance, label: int, x) -> np.ndarray:
    """Log density: product of 1-d densities along the planted basis.

    Augmented instances have no Lebesgue density (the first coordinate is
    deterministic) and are rejected.  Rotated points are pre-rotated back;
    padding coordinates contribute their Gaussian factors.
    """
    if instance.augmented:
        raise ValueError("augmented instance has no density; first coordinate is singular")
    if label not in (0, 1):
        raise ValueError(f"label must be 0 or 1, got {label}")
    x = np.atleast_2d(np.asarray(x, dtype=float))
    pad_logs = 0.0
    if instance.rotated:
        x = geometry.walsh_hadamard(x)
        pad = x[:, instance.d :]
        pad_logs = np.sum(-0.5 * pad**2 - 0.5 * math.log(2 * math.pi), axis=1)
        x = x[:, : instance.d]
    coords = x @ instance.full_basis
    side = "A" if label == 0 else "B"
    planted_logs = np.sum(quad1d.log_pdf(instance.pair, side, coords[:, : instance.k]), axis=1)
    rest = coords[:, instance.k :]
    rest_logs = np.sum(-0.5 * rest**2 - 0.5 * math.log(2 * math.pi), axis=1)
    out = planted_logs + rest_logs + pad_logs
    return out if out.size > 1 else float(out[0])


@dataclass(frozen=True)
class SetMembership:
    in_a: np.ndarray
    in_b: np.ndarray
    frac_a: np.ndarray
    frac_b: np.ndarray


def separation_sets_membership(instance: HardInstance, x) -> SetMembership:
    """Per-point fraction of planted coordinates inside each side's support.

    A point is in the A-side separation set when at least a 0.9-fraction
    of its k planted projections land in the 1-d A-support (same for B).
    Both cannot hold at once: the supports are disjoint and 0.9 + 0.9 > 1.
    """
    y = to_base_coordinates(instance, x)
    t = y @ instance.frame
    frac_a = quad1d.in_intervals(t, instance.pair.intervals_a).mean(axis=1)
    frac_b = quad1d.in_intervals(t, instance.pair.intervals_b).mean(axis=1)
    return SetMembership(
        in_a=frac_a >= VOTE_THRESHOLD,
        in_b=frac_b >= VOTE_THRESHOLD,
        frac_a=frac_a,
        frac_b=frac_b,
    )


def set_separation(instance: HardInstance) -> float:
    """Certified l2 distance between the two separation sets.

    Points of the two sets agree on at least a 0.8-fraction of planted
    coordinates where both 1-d constraints bind, and each such coordinate
    contributes at least the 1-d support gap.
    """
    return math.sqrt(0.8 * instance.k) * instance.pair.gap


def reference_classifier(instance: HardInstance):
    """The set-vote classifier this instance is built to admit."""
    from . import learners

    return learners.SetVoteClassifier(instance)


def off_subspace_direction(instance: HardInstance, seed, max_proj: float = 0.1) -> np.ndarray:
    """Random unit direction in base coordinates nearly orthogonal to U.

    Draws a Gaussian direction and shrinks its planted component until
    the projection onto the planted subspace has norm <= max_proj.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(instance.d)
    v /= np.linalg.norm(v)
    u_part = instance.frame @ (instance.frame.T @ v)
    norm_u = np.linalg.norm(u_part)
    if norm_u > max_proj:
        # pick the in-subspace norm p so that after renormalizing the unit
        # vector satisfies p / sqrt(p^2 + w^2) = max_proj exactly
        w_part = v - u_part
        w = np.linalg.norm(w_part)
        p = max_proj * w / math.sqrt(1.0 - max_proj**2)
        v = w_part + u_part * (p / norm_u)
        v /= np.linalg.norm(v)
    return v


def instance_to_json(instance: HardInstance) -> str:
    """Full reproducibility record: parameters, frames, seed."""
    fam = instance.family
    doc = {
        "schemaVersion": 1,
        "d": instance.d,
        "k": instance.k,
        "m": instance.m,
        "delta": instance.pair.delta,
        "epsOrth": fam.eps_orth,
        "familySize": len(fam),
        "familySeed": fam.seed,
        "rejections": fam.rejections,
        "plantedIndex": instance.planted_index,
        "rho": instance.rho,
        "rotated": instance.rotated,
        "frames": [f.tolist() for f in fam.frames],
    }
    return json.dumps(doc)


def instance_from_json(text: str) -> HardInstance:
    doc = json.loads(text)
    if doc.get("schemaVersion") != 1:
        raise ValueError(f"unsupported schema version {doc.get('schemaVersion')!r}")
    pair = quad1d.build_pair(doc["m"], doc["delta"])
    frames = [np.array(f) for f in doc["frames"]]
    family = geometry.SubspaceFamily(
        ambient_dim=doc["d"],
        subspace_dim=doc["k"],
        eps_orth=doc["epsOrth"],
        frames=frames,
        seed=doc["familySeed"],
        rejections=doc["rejections"],
    )
    full_basis = geometry.extend_to_full_basis(frames[doc["plantedIndex"]])
    return HardInstance(
        pair=pair,
        family=family,
        planted_index=doc["plantedIndex"],
        full_basis=full_basis,
        rho=doc["rho"],
        rotated=doc["rotated"],
    )
