"""One-dimensional moment-matched distributions.

Builds the discrete distributions supported on Gauss-Hermite nodes (which
match the standard Gaussian on many moments) and their Gaussian-smoothed
mixtures, together with supports, density ratios and sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.stats import norm

MAX_ORDER = 64
# Relative moment-match tolerance: tight up to order 16, relaxed beyond
# (double precision; factorial growth of the target moments).
MOMENT_RTOL_SMALL = 1e-8
MOMENT_RTOL_LARGE = 1e-5

# |t| beyond this makes exp(t^2/2) factors meaningless in double precision.
RATIO_T_MAX = 40.0


class EigenSolveError(RuntimeError):
    """Tridiagonal eigensolve for the quadrature rule did not converge."""


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes/weights of an m-point Gaussian quadrature for N(0,1).

    ``nodes`` are sorted and are sqrt(2) times the physicists' Hermite
    roots; ``weights`` are positive and sum to one, so the pair is also a
    discrete probability distribution matching N(0,1) on all moments of
    order <= 2m-1.
    """

    order: int
    nodes: np.ndarray
    weights: np.ndarray


def _he_pair(m: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(He_m(x), He_{m-1}(x)) for monic probabilists' Hermite polynomials."""
    prev = np.ones_like(x)
    cur = x.copy()
    for n in range(1, m):
        prev, cur = cur, x * cur - n * prev
    return cur, prev


def gauss_hermite_rule(m: int) -> QuadratureRule:
    """Return the m-point rule via Golub-Welsch on the Jacobi matrix."""
    if not 1 <= m <= MAX_ORDER:
        raise ValueError(f"order must be in [1, {MAX_ORDER}], got {m}")
    if m == 1:
        return QuadratureRule(1, np.zeros(1), np.ones(1))
    # Jacobi matrix of the N(0,1)-orthogonal (probabilists' Hermite)
    # recurrence: zero diagonal, off-diagonal sqrt(i).
    diag = np.zeros(m)
    offdiag = np.sqrt(np.arange(1, m, dtype=float))
    try:
        vals = eigh_tridiagonal(diag, offdiag, eigvals_only=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise EigenSolveError(f"eigensolve failed for order {m}") from exc
    nodes = np.sort(vals)
    # One Newton polish of the eigenvalue nodes, then analytic weights
    # w_i = (m-1)! / (m * He_{m-1}(x_i)^2).  Squared-first-eigenvector
    # weights lose all relative accuracy at the extreme nodes for large m;
    # the analytic form keeps even 1e-50 weights to full precision.
    hm, hm1 = _he_pair(m, nodes)
    nodes = nodes - hm / (m * hm1)
    _, hm1 = _he_pair(m, nodes)
    weights = 1.0 / (hm1**2 * m / math.factorial(m - 1))
    weights = weights / weights.sum()
    # Enforce the exact +/- symmetry of the rule (kills eigensolver noise).
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    if m % 2 == 1:
        nodes[m // 2] = 0.0
    return QuadratureRule(m, nodes, weights)


def discrete_moment(rule: QuadratureRule, l: int) -> float:
    """Exact l-th moment of the discrete node/weight distribution."""
    if l < 0 or l > 200:
        raise ValueError(f"moment order must be in [0, 200], got {l}")
    return math.fsum(w * x**l for w, x in zip(rule.weights, rule.nodes))


def gaussian_moment(l: int) -> float:
    """E[Z^l] for Z ~ N(0,1): 0 for odd l, (l-1)!! for even l."""
    if l % 2 == 1:
        return 0.0
    return float(math.prod(range(l - 1, 0, -2))) if l > 0 else 1.0


@dataclass(frozen=True)
class OneDimPair:
    """The smoothed distribution pair built from consecutive-order rules.

    Side A smooths the order-m rule, side B the order-(m+1) rule; both
    are Gaussian mixtures with component variance ``delta`` around scaled
    centers sqrt(1-delta) * node.  ``intervals_a``/``intervals_b`` are the
    disjoint closed intervals (one per center, half-width
    ``support_radius``) that carry almost all of each side's mass, and
    ``gap`` is the minimal distance between any A-interval and any
    B-interval.
    """

    m: int
    delta: float
    rule_a: QuadratureRule
    rule_b: QuadratureRule
    centers_a: np.ndarray
    centers_b: np.ndarray
    support_radius: float
    intervals_a: np.ndarray  # shape (m, 2)
    intervals_b: np.ndarray  # shape (m+1, 2)
    gap: float

    def rule(self, side: str) -> QuadratureRule:
        return self.rule_a if side == "A" else self.rule_b

    def centers(self, side: str) -> np.ndarray:
        return self.centers_a if side == "A" else self.centers_b

    def intervals(self, side: str) -> np.ndarray:
        return self.intervals_a if side == "A" else self.intervals_b


def _check_side(side: str) -> None:
    if side not in ("A", "B"):
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")


def build_pair(m: int, delta: float | None = None) -> OneDimPair:
    """Build the smoothed pair of order m (side A) and m+1 (side B).

    ``delta`` is the smoothing variance, default 1/m^2.  The support
    radius is one third of the minimal distance between A-centers and
    B-centers, so the residual A/B gap equals that distance over three.
    """
    if delta is None:
        # 1/m^2 except at m = 1 where that would not be a valid variance split
        delta = min(1.0 / m**2, 0.25)
    if not 0 < delta < 0.5:
        raise ValueError(f"delta must be in (0, 1/2), got {delta}")
    rule_a = gauss_hermite_rule(m)
    rule_b = gauss_hermite_rule(m + 1)
    scale = math.sqrt(1.0 - delta)
    centers_a = scale * rule_a.nodes
    centers_b = scale * rule_b.nodes
    center_gap = float(np.min(np.abs(centers_a[:, None] - centers_b[None, :])))
    radius = center_gap / 3.0
    intervals_a = np.column_stack([centers_a - radius, centers_a + radius])
    intervals_b = np.column_stack([centers_b - radius, centers_b + radius])
    gap = center_gap - 2.0 * radius
    if gap <= 0:
        raise AssertionError("internal invariant violation: non-positive support gap")
    return OneDimPair(
        m=m,
        delta=delta,
        rule_a=rule_a,
        rule_b=rule_b,
        centers_a=centers_a,
        centers_b=centers_b,
        support_radius=radius,
        intervals_a=intervals_a,
        intervals_b=intervals_b,
        gap=gap,
    )


def analytic_moment(pair: OneDimPair, side: str, l: int) -> float:
    """Exact l-th moment of the smoothed mixture, by binomial expansion.

    E[(c + sqrt(delta) Z)^l] summed over mixture components; avoids any
    sampling so it can serve as a ground-truth oracle in tests.
    """
    _check_side(side)
    rule = pair.rule(side)
    centers = pair.centers(side)
    sqd = math.sqrt(pair.delta)
    terms = []
    for w, c in zip(rule.weights, centers):
        for j in range(0, l + 1, 2):  # odd j vanish under E[Z^j]
            terms.append(w * math.comb(l, j) * c ** (l - j) * sqd**j * gaussian_moment(j))
    return math.fsum(terms)


def log_pdf(pair: OneDimPair, side: str, t) -> np.ndarray:
    """Log density of the smoothed mixture, stable for far tails."""
    _check_side(side)
    rule = pair.rule(side)
    centers = pair.centers(side)
    t = np.asarray(t, dtype=float)
    z = (t[..., None] - centers) / math.sqrt(pair.delta)
    logs = (
        np.log(rule.weights)
        - 0.5 * z**2
        - 0.5 * math.log(2.0 * math.pi * pair.delta)
    )
    mx = np.max(logs, axis=-1)
    return mx + np.log(np.sum(np.exp(logs - mx[..., None]), axis=-1))


def pdf_A(pair: OneDimPair, t):
    """Density of side A (strictly positive everywhere)."""
    return np.exp(log_pdf(pair, "A", t))


def pdf_B(pair: OneDimPair, t):
    """Density of side B (strictly positive everywhere)."""
    return np.exp(log_pdf(pair, "B", t))


def _ratio_components(pair: OneDimPair, side: str):
    """Gaussian-sum form of density/G: sum_i q_i * N(t; mu_i, s^2).

    Completing the square in density/G turns each mixture component into
    a Gaussian bump of variance s^2 = delta/(1-delta) around
    mu_i = center_i/(1-delta), with O(1) amplitude q_i.  This form stays
    finite for all t and differentiates cleanly.
    """
    rule = pair.rule(side)
    d = pair.delta
    nodes = rule.nodes
    x_phys = nodes / math.sqrt(2.0)  # physicists' Hermite roots
    mu = nodes / math.sqrt(1.0 - d)
    s = math.sqrt(d / (1.0 - d))
    log_q = np.log(rule.weights) + x_phys**2 + 0.5 * math.log(2.0 * math.pi / (1.0 - d))
    return np.exp(log_q), mu, s


def ratio_a(pair: OneDimPair, t, side: str = "A"):
    """The centered density ratio a(t) = density(t)/G(t) - 1.

    Computed through the Gaussian-sum form rather than a direct density
    quotient, so no exp(t^2/2) factor ever materialises.  Values of
    |t| > 40 are rejected: there the quotient is not meaningful in double
    precision.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(np.abs(t_arr) > RATIO_T_MAX):
        raise ValueError(f"density ratio undefined in double precision for |t| > {RATIO_T_MAX}")
    q, mu, s = _ratio_components(pair, side)
    z = (t_arr[..., None] - mu) / s
    ratio = np.sum(q * np.exp(-0.5 * z**2), axis=-1) / (s * math.sqrt(2.0 * math.pi))
    out = ratio - 1.0
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


def _hermite_he(l: int, z: np.ndarray) -> np.ndarray:
    """Probabilists' Hermite polynomial He_l evaluated by recurrence."""
    if l == 0:
        return np.ones_like(z)
    prev, cur = np.ones_like(z), z.copy()
    for n in range(1, l):
        prev, cur = cur, z * cur - n * prev
    return cur


def ratio_a_derivative(pair: OneDimPair, t, l: int, side: str = "A"):
    """Exact l-th derivative of a(t), via Gaussian derivative formulas.

    Each bump q_i N(t; mu_i, s^2) differentiates to
    q_i (-1)^l He_l(z) phi(z) / s^(l+1); finite differences would be
    hopeless here because of the e^(t^2/2)-scaled cancellations.
    """
    if l == 0:
        return ratio_a(pair, t, side)
    t_arr = np.asarray(t, dtype=float)
    if np.any(np.abs(t_arr) > RATIO_T_MAX):
        raise ValueError(f"density ratio undefined in double precision for |t| > {RATIO_T_MAX}")
    q, mu, s = _ratio_components(pair, side)
    z = (t_arr[..., None] - mu) / s
    phi = np.exp(-0.5 * z**2) / math.sqrt(2.0 * math.pi)
    out = np.sum(q * (-1.0) ** l * _hermite_he(l, z) * phi, axis=-1) / s ** (l + 1)
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


def sample_pair(pair: OneDimPair, side: str, n: int, seed) -> np.ndarray:
    """Ancestral sampling: pick a center by weight, add sqrt(delta)*N(0,1)."""
    _check_side(side)
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    rng = np.random.default_rng(seed)
    rule = pair.rule(side)
    centers = pair.centers(side)
    idx = rng.choice(len(centers), size=n, p=rule.weights)
    return centers[idx] + math.sqrt(pair.delta) * rng.standard_normal(n)


def in_intervals(t, intervals: np.ndarray) -> np.ndarray:
    """Elementwise membership of t in a union of closed intervals."""
    t = np.asarray(t, dtype=float)
    return np.any(
        (t[..., None] >= intervals[:, 0]) & (t[..., None] <= intervals[:, 1]), axis=-1
    )


def mass_outside_support(pair: OneDimPair, side: str) -> float:
    """Exact mixture mass outside the side's support intervals."""
    _check_side(side)
    rule = pair.rule(side)
    centers = pair.centers(side)
    intervals = pair.intervals(side)
    sqd = math.sqrt(pair.delta)
    inside = 0.0
    for w, c in zip(rule.weights, centers):
        inside += w * float(
            np.sum(norm.cdf((intervals[:, 1] - c) / sqd) - norm.cdf((intervals[:, 0] - c) / sqd))
        )
    return 1.0 - inside


def hermite_root_separation(m_max: int) -> list[tuple[int, float]]:
    """Min distance between (scaled) roots of consecutive-order rules.

    Returns one entry per m in 1..m_max-1, comparing the order-m and
    order-(m+1) node sets.  Empirically the separation is >= c/sqrt(m)
    with c around 0.7; callers assert their own constant.
    """
    if not 2 <= m_max <= MAX_ORDER:
        raise ValueError(f"m_max must be in [2, {MAX_ORDER}], got {m_max}")
    out = []
    prev = gauss_hermite_rule(1)
    for m in range(1, m_max):
        nxt = gauss_hermite_rule(m + 1)
        sep = float(np.min(np.abs(prev.nodes[:, None] - nxt.nodes[None, :])))
        out.append((m, sep))
        prev = nxt
    return out


def ratio_derivative_table(pair: OneDimPair, l_max: int = 4, grid_half_width: float = 12.0, grid_points: int = 4001) -> dict[int, float]:
    """Diagnostic: max |a^(l)(t)| on a grid, for l = 0..l_max.

    The growth rate in l is not asserted anywhere (no sharp constant is
    available); this exists for inspection only.
    """
    t = np.linspace(-grid_half_width, grid_half_width, grid_points)
    return {
        l: float(np.max(np.abs(ratio_a_derivative(pair, t, l)))) for l in range(l_max + 1)
    }


def node_weight_amplitude_table(m_max: int = 16) -> dict[int, float]:
    """Diagnostic: max_i w_i * exp(x_i^2) over physicists' roots x_i."""
    out = {}
    for m in range(1, m_max + 1):
        rule = gauss_hermite_rule(m)
        x_phys = rule.nodes / math.sqrt(2.0)
        out[m] = float(np.max(rule.weights * np.exp(x_phys**2)))
    return out
