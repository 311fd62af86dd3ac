"""Near-orthogonal subspace families and the Hadamard rotation.

Rejection-sampled families of k-dimensional orthonormal frames whose
pairwise principal cosines are certified below a bound, plus a normalized
fast Walsh-Hadamard transform used by the l-infinity instance variant.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FRAME_ORTHO_TOL = 1e-10


class InfeasibleFamilyError(RuntimeError):
    """Could not sample a family meeting the orthogonality bound."""

    def __init__(self, message: str, best_bound: float):
        super().__init__(message)
        self.best_bound = best_bound


@dataclass(frozen=True)
class SubspaceFamily:
    """Frames of pairwise near-orthogonal k-dimensional subspaces.

    ``frames[i]`` is a d x k matrix with orthonormal columns; for any two
    distinct frames the largest singular value of F_i^T F_j (the maximal
    norm of the projection of a unit vector of one subspace onto the
    other) is at most ``eps_orth``.
    """

    ambient_dim: int
    subspace_dim: int
    eps_orth: float
    frames: list[np.ndarray]
    seed: int
    rejections: int = field(default=0)

    def __len__(self) -> int:
        return len(self.frames)


def _random_frame(rng: np.random.Generator, d: int, k: int) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((d, k)))
    # fix the sign convention so the frame is a deterministic function of
    # the Gaussian draw
    return q * np.sign(np.diag(r))


def pairwise_orthogonality(a, b=None) -> float:
    """Largest pairwise principal cosine.

    With a single family argument, the max over all distinct frame pairs;
    with two frames, the largest singular value of F_a^T F_b.
    """
    if b is not None:
        return float(np.linalg.norm(a.T @ b, ord=2))
    frames = a.frames if isinstance(a, SubspaceFamily) else list(a)
    worst = 0.0
    for i in range(len(frames)):
        for j in range(i + 1, len(frames)):
            worst = max(worst, pairwise_orthogonality(frames[i], frames[j]))
    return worst


def sample_family(
    d: int,
    k: int,
    count: int,
    eps_orth: float,
    seed: int,
    max_retries: int = 200,
) -> SubspaceFamily:
    """Rejection-sample a family of near-orthogonal frames.

    Gaussian d x k matrices are orthonormalized by QR; a candidate frame
    is accepted if its principal cosine against every already accepted
    frame is at most ``eps_orth``, otherwise it is redrawn.  Fails with
    the best bound seen once ``max_retries`` redraws are exhausted, which
    signals an infeasible (d, k, count, eps_orth) combination.
    """
    if not 1 <= k <= d:
        raise ValueError(f"need 1 <= k <= d, got k={k}, d={d}")
    if count < 1:
        raise ValueError(f"need count >= 1, got {count}")
    if not 0 < eps_orth < 1:
        raise ValueError(f"need eps_orth in (0, 1), got {eps_orth}")
    rng = np.random.default_rng(seed)
    frames: list[np.ndarray] = []
    rejections = 0
    best_round_bound = np.inf
    while len(frames) < count:
        cand = _random_frame(rng, d, k)
        bound = max(
            (pairwise_orthogonality(f, cand) for f in frames), default=0.0
        )
        if bound <= eps_orth:
            frames.append(cand)
            continue
        rejections += 1
        best_round_bound = min(best_round_bound, bound)
        if rejections > max_retries:
            raise InfeasibleFamilyError(
                f"gave up after {max_retries} redraws at family size "
                f"{len(frames)}/{count}; best achievable pairwise bound was "
                f"{best_round_bound:.4f} > eps_orth={eps_orth}",
                best_bound=float(best_round_bound),
            )
    return SubspaceFamily(
        ambient_dim=d,
        subspace_dim=k,
        eps_orth=eps_orth,
        frames=frames,
        seed=seed,
        rejections=rejections,
    )


def extend_to_full_basis(frame: np.ndarray) -> np.ndarray:
    """Complete a column-orthonormal d x k frame to a d x d orthogonal matrix.

    The first k columns of the result equal the frame exactly.
    """
    d, k = frame.shape
    if np.max(np.abs(frame.T @ frame - np.eye(k))) > FRAME_ORTHO_TOL:
        raise ValueError("frame columns are not orthonormal")
    # QR orthonormalizes left-to-right: the leading k columns reproduce
    # the frame (up to sign), the rest complete the basis.  Keep the exact
    # input columns and re-orthogonalize the completion against them once.
    q, _ = np.linalg.qr(np.hstack([frame, np.eye(d)]))
    tail = q[:, k:] - frame @ (frame.T @ q[:, k:])
    tail, _ = np.linalg.qr(tail)
    return np.hstack([frame, tail])


def walsh_hadamard(x: np.ndarray) -> np.ndarray:
    """Orthonormal fast Walsh-Hadamard transform (an involution).

    Normalized by 1/sqrt(d), so l2 norms are preserved exactly and
    applying the transform twice returns the input.  The unnormalized
    convention is recovered by multiplying with sqrt(d).
    """
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    if d < 1 or d & (d - 1) != 0:
        raise ValueError(f"length must be a power of two, got {d}")
    out = x.copy()
    h = 1
    while h < d:
        out = out.reshape(*x.shape[:-1], d // (2 * h), 2, h)
        top = out[..., 0, :] + out[..., 1, :]
        bot = out[..., 0, :] - out[..., 1, :]
        out = np.stack([top, bot], axis=-2).reshape(*x.shape[:-1], d)
        h *= 2
    return out / np.sqrt(d)


def next_power_of_two(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p
