"""Acceptance gate: one test per headline property, desk-scale parameters.

Each test prints a single ``CRITERION n: PASS/FAIL`` line and asserts it.
The asymptotic statements (exponential query lower bounds, exponential
family sizes) are out of reach numerically; these are the finite,
property-based stand-ins run at fixed seeds and tolerances.
"""

import itertools
import math

import numpy as np

from sqhard import correlation as co
from sqhard import covers as cv
from sqhard import geometry as geo
from sqhard import instance as im
from sqhard import learners as ln
from sqhard import quad1d
from sqhard import sqsim


def _verdict(num: int, label: str, ok: bool, detail: str = "") -> None:
    line = f"CRITERION {num}: {'PASS' if ok else 'FAIL'} — {label}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def test_criterion_01_moment_matching():
    failures = []
    for m in (2, 4, 8, 16):
        tol = 1e-5 if m == 16 else 1e-8
        rule = quad1d.gauss_hermite_rule(m)
        pair = quad1d.build_pair(m)
        for l in range(2 * m):
            g = quad1d.gaussian_moment(l)
            rel = abs(quad1d.discrete_moment(rule, l) - g) / max(1.0, abs(g))
            if rel > tol:
                failures.append(f"m={m} discrete l={l} rel={rel:.2e}")
        for l in range(m + 1):
            g = quad1d.gaussian_moment(l)
            err = abs(quad1d.analytic_moment(pair, "A", l) - g) / max(1.0, abs(g))
            if err > 1e-6:
                failures.append(f"m={m} smoothed l={l} err={err:.2e}")
        # negative control at the first unmatched even moment, 2m (the
        # smoothed distribution provably matches every moment up to 2m-1,
        # so no earlier even moment can carry a gap)
        g2m = quad1d.gaussian_moment(2 * m)
        gap = abs(quad1d.analytic_moment(pair, "A", 2 * m) - g2m) / g2m
        if gap < 1e-3:
            failures.append(f"m={m} unmatched-moment gap {gap:.2e} < 1e-3")
    _verdict(1, "moment matching through 2m-1, detectable gap at 2m",
             not failures, "; ".join(failures))


def test_criterion_02_root_separation():
    table = quad1d.hermite_root_separation(50)
    bad = [(m, sep) for m, sep in table if sep < 0.5 / math.sqrt(m)]
    _verdict(2, "consecutive-order Hermite root separation >= 0.5/sqrt(m), m <= 50",
             not bad, str(bad[:3]))


def test_criterion_03_certified_robustness():
    # delta = 1/m^4: small enough that per-coordinate noise concentrates
    # inside the 1-d supports (the 1/m^2 default provably cannot)
    inst = im.make_instance(d=64, k=4, m=6, delta=1 / 6**4, seed=0)
    eps = 0.25 * im.set_separation(inst)
    x0 = im.sample_points(inst, 0, 10_000, im.split_seed(0, 0))
    x1 = im.sample_points(inst, 1, 10_000, im.split_seed(0, 1))
    rep = ln.robust_loss(ln.SetVoteClassifier(inst), x0, x1, eps)
    ok = rep.method == "certified" and rep.max_loss <= 0.02
    _verdict(3, "set-vote certified robust error <= 0.02 at eps=0.25*separation",
             ok, f"maxLoss={rep.max_loss:.4f} at eps={eps:.4f}")


def test_criterion_04_nonrobust_robust_gap():
    rho = 0.1
    inst = im.make_instance(d=64, k=4, m=6, delta=1 / 6**4, rho=rho, seed=0)
    tr0 = im.sample_points(inst, 0, 2000, im.split_seed(0, 0))
    tr1 = im.sample_points(inst, 1, 2000, im.split_seed(0, 1))
    te0 = im.sample_points(inst, 0, 2000, im.split_seed(0, 2))
    te1 = im.sample_points(inst, 1, 2000, im.split_seed(0, 3))
    lin = ln.fit_linear(tr0, tr1)
    clean = ln.robust_loss(lin, te0, te1, 0.0).max_loss
    fragile = min(ln.robust_loss(lin, te0, te1, 2 * rho).per_class_loss)
    sturdy = ln.robust_loss(ln.SetVoteClassifier(inst), te0, te1, 2 * rho).max_loss
    ok = clean <= 0.01 and fragile >= 0.99 and sturdy <= 0.05
    _verdict(4, "linear: clean <= 0.01 but robust loss >= 0.99 at eps=2rho; set-vote <= 0.05",
             ok, f"clean={clean:.4f} fragile={fragile:.4f} setVote={sturdy:.4f}")


def test_criterion_05_camouflage():
    failures = []
    # (a) off-subspace 1-d marginals look Gaussian up to moment m
    inst = im.make_instance(d=64, k=4, m=6, seed=0)
    n = 100_000
    x = im.sample_points(inst, 0, n, im.split_seed(0, 0))
    for i in range(20):
        v = im.off_subspace_direction(inst, im.split_seed(1, i), max_proj=0.1)
        t = x @ v
        for l in range(1, inst.m + 1):
            powers = t**l
            stderr = powers.std(ddof=1) / math.sqrt(n)
            dev = abs(powers.mean() - quad1d.gaussian_moment(l))
            if dev > 5 * stderr:
                failures.append(f"dir {i} moment {l}: dev={dev:.3g} > 5*{stderr:.3g}")
    # (b) generic SQ learner against the camouflage oracle stays at chance
    family_size, trials = 8, 200
    base = im.make_instance(d=2, k=1, m=2, family_size=family_size,
                            eps_orth=0.95, seed=0, max_retries=5000)

    def factory(planted, seed):
        return sqsim.SqOracle(im.with_planted_index(base, planted),
                              tau=0.01, mode="camouflage", budget=60, seed=seed)

    acc = sqsim.distinguishing_game(
        factory, sqsim.make_random_query_learner(50, seed=7),
        family_size, trials, seed=42,
    )
    chance = 1.0 / family_size
    band = 1.96 * math.sqrt(chance * (1 - chance) / trials)
    if abs(acc - chance) > band:
        failures.append(f"game accuracy {acc:.3f} outside {chance}+-{band:.3f}")
    _verdict(5, "off-subspace moments Gaussian to 5 stderr; camouflaged game at chance",
             not failures, "; ".join(failures))


def test_criterion_06_chi_correlation():
    failures = []
    # analytic factorized value vs direct MC of the defining integral
    base = im.make_instance(d=16, k=2, m=2, family_size=2, seed=0)
    analytic = co.chi_same(base)
    mc = co.chi_cross(base, base, 1_000_000, seed=1)
    if abs(analytic.value - mc.value) > 3 * mc.stderr:
        failures.append(f"same: |{analytic.value:.5f} - {mc.value:.5f}| > 3*{mc.stderr:.2g}")
    # near-orthogonal cross-correlation collapses
    big = im.make_instance(d=256, k=2, m=4, family_size=2, eps_orth=0.1, seed=2)
    other = im.with_planted_index(big, 1)
    same = co.chi_same(big).value
    cross = co.chi_cross(big, other, 1_000_000, seed=3)
    if abs(cross.value) > 0.05 * same:
        failures.append(f"cross {cross.value:.4g} > 0.05 * {same:.4g}")
    # low-order coefficients killed: 10 random (S, T, l) configurations
    inst1 = im.make_instance(d=16, k=3, m=2, family_size=2, seed=4)
    inst2 = im.with_planted_index(inst1, 1)
    rng = np.random.default_rng(6)
    for trial in range(10):
        s_size = int(rng.integers(1, 4))
        t_size = int(rng.integers(1, s_size + 1))
        s_set = list(rng.choice(3, size=s_size, replace=False))
        t_set = list(rng.choice(3, size=t_size, replace=False))
        l_map = {i: int(rng.integers(0, inst1.m + 1)) for i in t_set}
        est, se = co.coeff_killing_check(
            inst1, inst2, s_set, t_set, l_map, 100_000, seed=200 + trial
        )
        if abs(est) > 4 * se:
            failures.append(f"coeff config {trial}: |{est:.3g}| > 4*{se:.3g}")
    _verdict(6, "chi-correlation: analytic=MC, cross-terms collapse, coefficients killed",
             not failures, "; ".join(failures))


def test_criterion_07_robust_erm():
    family_size, trials_total = 64, 30
    base = im.make_instance(d=64, k=4, m=6, family_size=family_size,
                            eps_orth=0.5, delta=1 / 6**4, seed=0, max_retries=2000)
    classifiers = [ln.SetVoteClassifier(im.with_planted_index(base, j))
                   for j in range(family_size)]
    eps = 0.25 * im.set_separation(base)
    n = math.ceil(40 * math.log(family_size))
    delta_prime = 0.1
    rng = np.random.default_rng(17)
    successes = 0
    for trial in range(trials_total):
        planted = int(rng.integers(family_size))
        inst = im.with_planted_index(base, planted)
        x0 = im.sample_points(inst, 0, n, im.split_seed(trial, 0))
        x1 = im.sample_points(inst, 1, n, im.split_seed(trial, 1))
        chosen, _ = ln.erm_robust(classifiers, x0, x1, eps)
        te0 = im.sample_points(inst, 0, 4000, im.split_seed(trial, 2))
        te1 = im.sample_points(inst, 1, 4000, im.split_seed(trial, 3))
        true_loss = ln.robust_loss(chosen, te0, te1, eps).max_loss
        planted_loss = ln.robust_loss(classifiers[planted], te0, te1, eps).max_loss
        if true_loss <= planted_loss + 2 * delta_prime:
            successes += 1
    _verdict(7, "robust ERM over 64 members meets (eps, delta+2delta') in >= 20/30 trials",
             successes >= 20, f"successes={successes}/{trials_total}, n={n}/class")


def test_criterion_08_margin_exactness():
    inst = im.make_instance(d=2, k=1, m=2, seed=0)
    clf = ln.SetVoteClassifier(inst)
    rng = np.random.default_rng(1)
    ang = np.linspace(0, 2 * math.pi, 4000, endpoint=False)
    circle = np.column_stack([np.cos(ang), np.sin(ang)])
    checked, failures = 0, []
    while checked < 100:
        x = rng.normal(0, 2, 2)
        margin = clf.certified_margin(x[None])[0]
        if margin == 0 or not np.isfinite(margin):
            continue
        checked += 1
        p0 = clf.predict(x[None])[0]
        if np.any(clf.predict(x + 0.99 * margin * circle) != p0):
            failures.append(f"flip inside certificate at {x}")
        if np.all(clf.predict(x + 1.01 * margin * circle) == p0):
            failures.append(f"no flip just outside certificate at {x}")
    _verdict(8, "certified margin exact on 100 grid-searched points",
             not failures, "; ".join(failures[:3]))


def _brute_force_w_inf(p, q):
    best = math.inf
    for perm in itertools.permutations(range(len(q))):
        worst = max(np.linalg.norm(p[i] - q[j]) for i, j in enumerate(perm))
        best = min(best, worst)
    return best


def test_criterion_09_w_inf_and_covers():
    failures = []
    rng = np.random.default_rng(3)
    for trial in range(200):
        n = int(rng.integers(1, 7))
        dim = int(rng.integers(1, 4))
        p = rng.normal(size=(n, dim))
        q = rng.normal(size=(n, dim))
        got, want = cv.w_inf(p, q), _brute_force_w_inf(p, q)
        if abs(got - want) > 1e-9:
            failures.append(f"w_inf trial {trial}: {got} != {want}")
    for fam_seed in range(3):
        fam_rng = np.random.default_rng(100 + fam_seed)
        anchors = fam_rng.normal(scale=2.0, size=(3, 2))
        family = []
        for _ in range(10):
            a = anchors[fam_rng.integers(3)]
            family.append(tuple(
                cv.uniform_empirical(a + 0.1 * fam_rng.normal(size=(5, 2)))
                for _ in range(2)
            ))
        eps, delta = 0.6, 0.21
        chosen, size = cv.greedy_cover(family, eps, delta)
        for j, member in enumerate(family):
            if not any(cv.pair_covered(family[i], member, eps, delta) for i in chosen):
                failures.append(f"family {fam_seed}: member {j} left uncovered")
        exact = min(
            (len(subset) for r in range(1, 11)
             for subset in itertools.combinations(range(10), r)
             if all(any(cv.pair_covered(family[i], member, eps, delta) for i in subset)
                    for member in family)),
            default=None,
        )
        if exact is None or size < exact:
            failures.append(f"family {fam_seed}: greedy {size} below exact minimum {exact}")
    _verdict(9, "W-infinity matches brute force; greedy cover valid and >= exact minimum",
             not failures, "; ".join(failures[:3]))


def test_criterion_10_generative_lipschitz():
    failures = []
    rng = np.random.default_rng(4)
    bound = 1.0
    for trial in range(100):
        w1 = rng.uniform(-bound, bound, size=(8, 8))
        w2 = rng.uniform(-bound, bound, size=(8, 8))
        net = cv.GenerativeNet((w1, w2), bound)
        scale = rng.uniform(0, 0.2)
        pert = cv.GenerativeNet(
            tuple(np.clip(w + scale * rng.normal(size=w.shape), -bound, bound)
                  for w in (w1, w2)),
            bound,
        )
        x = rng.normal(size=8)
        lhs, rhs, ok = cv.lipschitz_bound_check(net, pert, x)
        if not ok:
            failures.append(f"trial {trial}: lhs {lhs:.4g} > rhs {rhs:.4g}")
    # grid-size formula (log cardinality for 2m weights) vs enumeration of
    # the actual grid over a 2-weight net
    for b, alpha in ((1.0, 0.5), (2.0, 0.25), (1.0, 0.1)):
        enumerated = len(cv.weight_grid(b, alpha)) ** 2
        formula = math.exp(cv.weight_grid_cover_size(1, b, alpha))
        if abs(enumerated - formula) > 1e-6 * formula:
            failures.append(f"grid B={b} alpha={alpha}: {enumerated} != {formula:.6f}")
    _verdict(10, "generative-net weight-Lipschitz bound holds; grid size matches formula",
             not failures, "; ".join(failures[:3]))


def test_criterion_11_hadamard_variant():
    failures = []
    # FWHT agrees with the naive orthonormal Hadamard matrix at d=8
    h = np.array([[1.0]])
    while h.shape[0] < 8:
        h = np.block([[h, h], [h, -h]])
    h /= math.sqrt(8)
    x = np.random.default_rng(5).normal(size=(50, 8))
    if np.max(np.abs(geo.walsh_hadamard(x) - x @ h.T)) > 1e-12:
        failures.append("FWHT differs from naive transform")
    # rotated vectors spread out: max coordinate at least norm/sqrt(d)
    y = np.random.default_rng(6).normal(size=(10_000, 8))
    hy = geo.walsh_hadamard(y)
    lhs = np.abs(hy).max(axis=1)
    if np.any(lhs < np.linalg.norm(y, axis=1) / math.sqrt(8) - 1e-12):
        failures.append("l-infinity lower bound violated")
    # certified margins unchanged by the rotation
    base = im.make_instance(d=16, k=3, m=3, seed=2)
    rot = im.HardInstance(base.pair, base.family, 0, base.full_basis, 0.0, True)
    pts = im.sample_points(base, 0, 200, im.split_seed(0, 0))
    m_base = ln.SetVoteClassifier(base).certified_margin(pts)
    m_rot = ln.SetVoteClassifier(rot).certified_margin(geo.walsh_hadamard(pts))
    if np.max(np.abs(m_base - m_rot)) > 1e-9:
        failures.append("margins changed under rotation")
    _verdict(11, "Hadamard rotation: exact transform, spread bound, invariant margins",
             not failures, "; ".join(failures))
