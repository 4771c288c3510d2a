"""Independent brute-force verification oracles and the lemma suites.

Everything here recomputes quantities from first principles (direct
per-subset transforms, symbolic restrictions, weighted enumeration,
exact small-scale quadratic programs) and deliberately shares no code
path with the learners' sampled estimators, so a corrupted estimator
cannot hide from these checks.

Each suite runs a fixed seed schedule (seeds 1..trials) and reports the
worst margin observed together with any violating instance.
"""

from __future__ import annotations

import math
from itertools import combinations

import numpy as np

from ._bits import all_masks, bits_of, popcount, submasks
from .distributions import (
    Distribution,
    conditional_marginal,
    exact_event_prob_masked,
    marginal,
    random_smooth_table,
    verify_smoothness,
)
from .errors import ContractViolation, EnumerationLimitError
from .fourier import (
    MONOMIAL_01,
    UNIFORM_PM,
    FourierSpectrum,
    ProductBasis,
    char_values,
    exact_transform,
)
from .generators import (
    random_product_means,
    random_sparse_poly,
    random_subset,
    random_tree,
)
from .noise import rcn_collision_prob
from .targets import PLUS_MINUS, ZERO_ONE, tree_to_polynomial, truncate_tree


class VerifierOracle:
    """Brute-force engines: direct transforms, symbolic restrictions,
    exact losses, and a small exact L1-constrained least squares."""

    def __init__(self):
        self._cache: dict = {}

    # ------------------------------------------------------------ transforms

    def direct_transform(self, target, basis, subsets=None) -> FourierSpectrum:
        """Per-subset inner products straight from the definition."""
        import json as _json

        if subsets is None:
            key = (
                _json.dumps(target.to_json(), sort_keys=True)
                if hasattr(target, "to_json")
                else None,
                repr(basis),
            )
            if key[0] is not None and key in self._cache:
                return self._cache[key]
        else:
            key = None
        n = target.n
        if n > 14:
            raise EnumerationLimitError("direct transform kept to n <= 14")
        masks = all_masks(n)
        values = np.asarray(target.value_batch(masks), dtype=np.float64)
        if subsets is None:
            subsets = range(1 << n)
        coeffs = {}
        if basis is MONOMIAL_01:
            lookup = {int(m): float(v) for m, v in zip(masks, values)}
            for s in subsets:
                acc = [
                    (-1.0) ** int(popcount(s ^ t)) * lookup[t] for t in submasks(s)
                ]
                c = math.fsum(acc)
                if c != 0.0:
                    coeffs[int(s)] = c
            result = FourierSpectrum(n, basis, coeffs)
            if key is not None and key[0] is not None:
                self._cache[key] = result
            return result
        if basis is UNIFORM_PM:
            weights = np.full(masks.shape, 1.0 / (1 << n))
        elif isinstance(basis, ProductBasis):
            weights = np.ones(masks.shape)
            for i, mu in enumerate(basis.means):
                p = (1.0 + mu) / 2.0
                weights *= np.where((masks >> i) & 1, p, 1.0 - p)
        else:
            raise ContractViolation(f"unknown basis {basis!r}")
        for s in subsets:
            chi = char_values(basis, int(s), masks, n)
            c = math.fsum((weights * chi * values).tolist())
            if abs(c) > 1e-13:
                coeffs[int(s)] = c
        result = FourierSpectrum(n, basis, coeffs)
        if key is not None and key[0] is not None:
            self._cache[key] = result
        return result

    # ----------------------------------------------------------- exact losses

    def exact_sq_loss(self, f, h, dist: Distribution) -> float:
        masks = all_masks(dist.n)
        pr = dist.probs_array()
        diff = np.asarray(f.value_batch(masks)) - np.asarray(h.value_batch(masks))
        return math.fsum((pr * diff * diff).tolist())

    def exact_01_error(self, f, h, dist: Distribution) -> float:
        """Pr[sign(h) != f] with sign(0) counted as +1."""
        masks = all_masks(dist.n)
        pr = dist.probs_array()
        hv = np.sign(np.asarray(h.value_batch(masks)))
        hv[hv == 0] = 1.0
        fv = np.sign(np.asarray(f.value_batch(masks)))
        return math.fsum(pr[hv != fv].tolist())

    def exact_nonzero_prob(self, func, dist: Distribution, tol: float = 0.0) -> float:
        """Pr_D[|func| > tol] by weighted enumeration; func may be a
        restriction, in which case the inert coordinates integrate out."""
        masks = all_masks(dist.n)
        vals = np.abs(np.asarray(func.value_batch(masks)))
        return exact_event_prob_masked(dist, vals > tol)

    def exact_cond_l2(self, spectrum: FourierSpectrum, subset: int) -> float:
        """Sum of squared coefficients over supersets of the subset."""
        return math.fsum(
            c * c for m, c in spectrum.coeffs.items() if m & subset == subset
        )

    # -------------------------------------------------- exact L1-ball lsq QP

    def exact_l1_least_squares(
        self, features: np.ndarray, labels: np.ndarray, bound: float
    ) -> tuple[np.ndarray, float]:
        """Exact minimizer of mean squared loss over the L1 ball, by
        enumerating supports and boundary sign patterns (<= 10 features)."""
        X = np.asarray(features, dtype=np.float64)
        y = np.asarray(labels, dtype=np.float64)
        m, k = X.shape
        if k > 10:
            raise EnumerationLimitError("exact QP enumeration kept to <= 10 features")
        G = X.T @ X / m
        c = X.T @ y / m
        offset = float(y @ y / m)

        def objective(w):
            return float(w @ G @ w - 2.0 * c @ w + offset)

        best_w = np.zeros(k)
        best_val = objective(best_w)

        for size in range(1, k + 1):
            for support in combinations(range(k), size):
                idx = list(support)
                Gs = G[np.ix_(idx, idx)]
                cs = c[idx]
                # interior candidate on this support
                try:
                    ws = np.linalg.solve(Gs, cs)
                except np.linalg.LinAlgError:
                    ws = None
                if ws is not None and np.abs(ws).sum() <= bound + 1e-12:
                    w = np.zeros(k)
                    w[idx] = ws
                    val = objective(w)
                    if val < best_val - 1e-15:
                        best_val, best_w = val, w
                # boundary candidates, one per sign pattern
                for signs_bits in range(1 << size):
                    s = np.array(
                        [1.0 if signs_bits >> j & 1 else -1.0 for j in range(size)]
                    )
                    kkt = np.zeros((size + 1, size + 1))
                    kkt[:size, :size] = 2.0 * Gs
                    kkt[:size, size] = s
                    kkt[size, :size] = s
                    rhs = np.concatenate([2.0 * cs, [bound]])
                    try:
                        sol = np.linalg.solve(kkt, rhs)
                    except np.linalg.LinAlgError:
                        continue
                    ws = sol[:size]
                    if np.any(np.sign(ws) * s < -1e-9):
                        continue
                    w = np.zeros(k)
                    w[idx] = ws
                    if np.abs(w).sum() > bound + 1e-9:
                        continue
                    val = objective(w)
                    if val < best_val - 1e-15:
                        best_val, best_w = val, w
        return best_w, best_val


# ---------------------------------------------------------------- suite tools


def _report(suite: str, trials: int, margins: list[float], violations: list, extra=None):
    rep = {
        "suite": suite,
        "trials": trials,
        "violations": len(violations),
        "worst_margin": min(margins) if margins else None,
        "passed": not violations,
    }
    if violations:
        rep["counterexamples"] = violations[:5]
    if extra:
        rep.update(extra)
    return rep


def _push(margins, violations, margin: float, context) -> None:
    margins.append(margin)
    if margin < 0:
        violations.append(context)


# --------------------------------------------------------------------- suites


def suite_fact_smooth(n: int = 10, alpha: float = 1.5, trials: int = 200, seed: int = 0):
    """Single-bit and subset probability bounds, marginal and conditional
    smoothness closure, and smoothness of convex combinations."""
    margins, violations = [], []
    for trial in range(1, trials + 1):
        rng = np.random.default_rng([seed, trial])
        dist = random_smooth_table(n, alpha, rng)
        a_star = verify_smoothness(dist)
        _push(
            margins,
            violations,
            alpha - a_star + 1e-12,
            {"trial": trial, "alpha_star": a_star},
        )
        masks = all_masks(n)
        lo, hi = 1.0 / (1.0 + a_star), a_star / (1.0 + a_star)
        for i in range(n):
            p1 = exact_event_prob_masked(dist, ((masks >> i) & 1) == 1)
            for p in (p1, 1.0 - p1):
                _push(margins, violations, p - lo + 1e-12, {"trial": trial, "bit": i, "p": p})
                _push(margins, violations, hi - p + 1e-12, {"trial": trial, "bit": i, "p": p})
        subset = random_subset(n, 3, rng, min_size=1)
        assignment = int(rng.integers(0, 1 << n)) & subset
        k = int(popcount(subset))
        p_sub = exact_event_prob_masked(dist, (masks & subset) == assignment)
        _push(margins, violations, p_sub - lo**k + 1e-12, {"trial": trial, "set_prob": p_sub})
        _push(margins, violations, hi**k - p_sub + 1e-12, {"trial": trial, "set_prob": p_sub})
        keep = random_subset(n, n - 1, rng, min_size=1)
        _push(
            margins,
            violations,
            a_star - verify_smoothness(marginal(dist, keep)) + 1e-12,
            {"trial": trial, "marginal_of": bits_of(keep)},
        )
        cond = conditional_marginal(dist, subset, assignment)
        _push(
            margins,
            violations,
            a_star - verify_smoothness(cond) + 1e-12,
            {"trial": trial, "conditioned_on": bits_of(subset)},
        )
        other = random_smooth_table(n, alpha, rng)
        lam = float(rng.uniform(0.2, 0.8))
        mix = Distribution.table(
            [lam * a + (1 - lam) * b for a, b in zip(dist.probs, other.probs)],
            dist.domain,
        )
        a_mix = verify_smoothness(mix)
        a_both = max(a_star, verify_smoothness(other))
        _push(margins, violations, a_both - a_mix + 1e-12, {"trial": trial, "mix_alpha": a_mix})
    return _report("fact-smooth", trials, margins, violations,
                   {"tolerance": "exact bounds, 1e-12 float cushion"})


def suite_parseval(n: int = 12, trials: int = 200, seed: int = 0):
    """Parseval identity in the uniform and product bases, exact to 1e-9."""
    margins, violations = [], []
    tol = 1e-9
    for trial in range(1, trials + 1):
        rng = np.random.default_rng([seed, trial])
        tree = random_tree(n, int(rng.integers(2, 17)), rng, max_depth=6)
        spec_u = exact_transform(tree, UNIFORM_PM)
        gap_u = abs(spec_u.l2() - 1.0)
        _push(margins, violations, tol - gap_u, {"trial": trial, "basis": "uniform", "gap": gap_u})
        means = random_product_means(n, rng)
        basis = ProductBasis(tuple(means))
        spec_p = exact_transform(tree, basis)
        dist = Distribution.product(means, PLUS_MINUS)
        masks = all_masks(n)
        e2 = math.fsum(
            (dist.probs_array() * np.asarray(tree.value_batch(masks)) ** 2).tolist()
        )
        gap_p = abs(spec_p.l2() - e2)
        _push(margins, violations, tol - gap_p, {"trial": trial, "basis": "product", "gap": gap_p})
    return _report("parseval", trials, margins, violations, {"tolerance": tol})


def suite_km_norms(n: int = 12, trials: int = 200, seed: int = 0):
    """Per-coefficient bound t/2^|S| and total L1 bound t for t-leaf trees."""
    margins, violations = [], []
    for trial in range(1, trials + 1):
        rng = np.random.default_rng([seed, trial])
        t = int(rng.integers(2, 17))
        tree = random_tree(n, t, rng, max_depth=8)
        t_real = tree.leaf_count
        spec = exact_transform(tree, UNIFORM_PM)
        for s, c in spec.coeffs.items():
            bound = t_real / 2.0 ** int(popcount(s))
            _push(
                margins,
                violations,
                bound - abs(c) + 1e-12,
                {"trial": trial, "set": bits_of(s), "coeff": c, "bound": bound},
            )
        _push(
            margins,
            violations,
            t_real - spec.l1() + 1e-9,
            {"trial": trial, "l1": spec.l1(), "t": t_real},
        )
    return _report("km-norms", trials, margins, violations,
                   {"tolerance": "exact bounds, 1e-12 float cushion"})


def suite_spectral_tail(n: int = 12, trials: int = 200, seed: int = 0):
    """Spectral tail above log(t^2/tau) carries at most tau of the mass."""
    margins, violations = [], []
    for trial in range(1, trials + 1):
        rng = np.random.default_rng([seed, trial])
        tree = random_tree(n, int(rng.integers(2, 17)), rng, max_depth=8)
        t = tree.leaf_count
        spec = exact_transform(tree, UNIFORM_PM)
        for tau in (0.5, 0.1, 0.05):
            cut = math.log2(t * t / tau)
            tail = math.fsum(
                c * c for s, c in spec.coeffs.items() if popcount(s) >= cut
            )
            _push(
                margins,
                violations,
                tau - tail + 1e-12,
                {"trial": trial, "tau": tau, "tail": tail},
            )
    return _report("spectral-tail", trials, margins, violations,
                   {"tolerance": "exact bound, 1e-12 float cushion"})


def suite_nonzero_constant_term(n: int = 12, alpha: float = 1.5, trials: int = 200, seed: int = 0):
    """Sparse {0,1} polynomials with a non-zero constant term are non-zero
    with probability at least (1+alpha)^(-log2 t)."""
    margins, violations = [], []
    ver = VerifierOracle()
    for trial in range(1, trials + 1):
        rng = np.random.default_rng([seed, trial])
        t = int(rng.integers(2, 9))
        poly = random_sparse_poly(
            n, t, rng, max_degree=6, domain=ZERO_ONE, include_constant=True
        )
        dist = random_smooth_table(n, alpha, rng, domain=ZERO_ONE)
        a_star = verify_smoothness(dist)
        p = ver.exact_nonzero_prob(poly, dist, tol=1e-12)
        bound = (1.0 / (1.0 + a_star)) ** math.log2(max(poly.sparsity, 2))
        _push(
            margins,
            violations,
            p - bound + 1e-12,
            {"trial": trial, "p": p, "bound": bound, "t": poly.sparsity},
        )
    return _report("nonzero-constant-term", trials, margins, violations,
                   {"tolerance": "exact bound, 1e-12 float cushion"})


def suite_nonzero_lower_bound(n: int = 12, alpha: float = 1.5, trials: int = 200, seed: int = 0):
    """If f_S keeps a monomial of degree <= d-|S|, its non-zero probability
    is at least (1+alpha)^-(d-|S|+log2 t)."""
    margins, violations = [], []
    ver = VerifierOracle()
    for trial in range(1, trials + 1):
        rng = np.random.default_rng([seed, trial])
        t = int(rng.integers(2, 9))
        poly = random_sparse_poly(n, t, rng, max_degree=5, domain=ZERO_ONE)
        dist = random_smooth_table(n, alpha, rng, domain=ZERO_ONE)
        a_star = verify_smoothness(dist)
        support = [m for m in poly.terms]
        base = support[int(rng.integers(0, len(support)))]
        sub_choices = list(submasks(base))
        subset = sub_choices[int(rng.integers(0, len(sub_choices)))]
        restriction = poly.restrict(subset)
        if not restriction.terms:
            continue
        min_deg = min(int(popcount(m)) for m in restriction.terms)
        d = min_deg + int(popcount(subset))  # tightest d the premise allows
        p = ver.exact_nonzero_prob(restriction, dist, tol=1e-12)
        expo = d - int(popcount(subset)) + math.log2(max(poly.sparsity, 2))
        bound = (1.0 / (1.0 + a_star)) ** expo
        _push(
            margins,
            violations,
            p - bound + 1e-12,
            {"trial": trial, "set": bits_of(subset), "p": p, "bound": bound},
        )
    return _report("nonzero-lower-bound", trials, margins, violations,
                   {"tolerance": "exact bound, 1e-12 float cushion"})


def suite_nonzero_upper_bound(n: int = 12, alpha: float = 1.5, trials: int = 200, seed: int = 0):
    """If every term of f_S has degree >= d', the non-zero probability is
    at most t (alpha/(1+alpha))^d'."""
    margins, violations = [], []
    ver = VerifierOracle()
    for trial in range(1, trials + 1):
        rng = np.random.default_rng([seed, trial])
        t = int(rng.integers(2, 9))
        d_floor = int(rng.integers(2, 6))
        poly = random_sparse_poly(
            n, t, rng, max_degree=min(n, d_floor + 3), min_degree=d_floor,
            domain=ZERO_ONE,
        )
        dist = random_smooth_table(n, alpha, rng, domain=ZERO_ONE)
        a_star = verify_smoothness(dist)
        d_prime = min(int(popcount(m)) for m in poly.terms)
        p = ver.exact_nonzero_prob(poly, dist, tol=1e-12)
        bound = poly.sparsity * (a_star / (1.0 + a_star)) ** d_prime
        _push(
            margins,
            violations,
            bound - p + 1e-12,
            {"trial": trial, "p": p, "bound": bound, "d_prime": d_prime},
        )
    return _report("nonzero-upper-bound", trials, margins, violations,
                   {"tolerance": "exact bound, 1e-12 float cushion"})


def suite_restriction_growth(n: int = 10, alpha: float = 1.5, trials: int = 200, seed: int = 0):
    """Dropping one variable from a grown set shrinks the non-zero
    probability of the restriction by a factor of at most (1+alpha):
    Pr[f_S != 0] >= Pr[f_{S+i} != 0] / (1+alpha). Climbing from a
    maximal coefficient down to any subset chains this into the
    (1+alpha)^-d admission guarantee."""
    margins, violations = [], []
    ver = VerifierOracle()
    for trial in range(1, trials + 1):
        rng = np.random.default_rng([seed, trial])
        tree = random_tree(n, int(rng.integers(2, 9)), rng, max_depth=4)
        spec = exact_transform(tree, UNIFORM_PM)
        dist = random_smooth_table(n, alpha, rng, domain=PLUS_MINUS)
        a_star = verify_smoothness(dist)
        support = sorted(spec.coeffs)
        base = support[int(rng.integers(0, len(support)))]
        subs = list(submasks(base))
        subset = subs[int(rng.integers(0, len(subs)))]
        i = int(rng.integers(0, n))
        if subset >> i & 1:
            continue
        p_s = ver.exact_nonzero_prob(spec.restrict(subset), dist, tol=1e-12)
        p_si = ver.exact_nonzero_prob(
            spec.restrict(subset | (1 << i)), dist, tol=1e-12
        )
        _push(
            margins,
            violations,
            p_s - p_si / (1.0 + a_star) + 1e-12,
            {"trial": trial, "set": bits_of(subset), "i": i, "p_s": p_s, "p_si": p_si},
        )
    return _report("restriction-growth", trials, margins, violations,
                   {"tolerance": "exact bound, 1e-12 float cushion"})


def suite_tree_truncation(n: int = 12, trials: int = 200, seed: int = 0, c: float = 0.3):
    """Truncation bounds for trees under bounded product distributions:
    truncation error, coefficient count/degree of the truncation, and the
    off-support spectral tail."""
    margins, violations = [], []
    for trial in range(1, trials + 1):
        rng = np.random.default_rng([seed, trial])
        t = int(rng.integers(2, 17))
        tree = random_tree(n, t, rng, max_depth=10)
        t_real = tree.leaf_count
        means = random_product_means(n, rng, -(1 - 2 * c), 1 - 2 * c)
        dist = Distribution.product(means, PLUS_MINUS)
        basis = ProductBasis(tuple(means))
        rate = math.log(1.0 / (1.0 - c))
        tau = 0.05
        # depth-d truncation misses with probability at most tau
        d5 = max(1, math.ceil(math.log(t_real / tau) / rate))
        cut = truncate_tree(tree, d5, cap_label=-1)
        masks = all_masks(n)
        diff = np.asarray(tree.value_batch(masks)) != np.asarray(cut.value_batch(masks))
        p_diff = exact_event_prob_masked(dist, diff)
        _push(margins, violations, tau - p_diff + 1e-12,
              {"trial": trial, "check": "d5", "p_diff": p_diff, "d": d5})
        # truncated tree has few, low-degree coefficients
        d6 = min(d5, tree.depth)
        spec_cut = exact_transform(cut, basis)
        _push(margins, violations, t_real * 2**cut.depth - spec_cut.l0() + 0.5,
              {"trial": trial, "check": "d6-count", "l0": spec_cut.l0()})
        max_deg = max((int(popcount(s)) for s in spec_cut.coeffs), default=0)
        _push(margins, violations, cut.depth - max_deg + 0.5,
              {"trial": trial, "check": "d6-degree", "deg": max_deg})
        # off-support tail of the full spectrum
        d7 = max(1, math.ceil(math.log(4 * t_real / tau) / rate))
        cut7 = truncate_tree(tree, d7, cap_label=-1)
        spec_full = exact_transform(tree, basis)
        support7 = set(exact_transform(cut7, basis).coeffs)
        tail = math.fsum(
            cc * cc for s, cc in spec_full.coeffs.items() if s not in support7
        )
        _push(margins, violations, tau - tail + 1e-12,
              {"trial": trial, "check": "d7", "tail": tail})
    return _report("tree-truncation", trials, margins, violations,
                   {"tolerance": "exact bounds at tau=0.05, 1e-12 float cushion"})


def suite_truncation_poly(n: int = 12, alpha: float = 1.5, trials: int = 200, seed: int = 0):
    """Pr[f != f^d] <= t (alpha/(1+alpha))^d for {0,1} polynomials."""
    margins, violations = [], []
    for trial in range(1, trials + 1):
        rng = np.random.default_rng([seed, trial])
        t = int(rng.integers(2, 9))
        poly = random_sparse_poly(n, t, rng, max_degree=8, domain=ZERO_ONE)
        dist = random_smooth_table(n, alpha, rng, domain=ZERO_ONE)
        a_star = verify_smoothness(dist)
        d = int(rng.integers(1, 6))
        cut = poly.truncate(d)
        masks = all_masks(n)
        diff = np.abs(
            np.asarray(poly.value_batch(masks)) - np.asarray(cut.value_batch(masks))
        ) > 1e-12
        p_diff = exact_event_prob_masked(dist, diff)
        bound = poly.sparsity * (a_star / (1.0 + a_star)) ** d
        _push(
            margins,
            violations,
            bound - p_diff + 1e-12,
            {"trial": trial, "d": d, "p_diff": p_diff, "bound": bound},
        )
    return _report("truncation-poly", trials, margins, violations,
                   {"tolerance": "exact bound, 1e-12 float cushion"})


def suite_rcn_monotone(seed: int = 0, trials: int = 0):
    """Collision probabilities strictly decrease in the offset for every
    eta < 1/2 on a k-grid up to 2**10."""
    margins, violations = [], []
    ks = [1, 2, 4, 8, 16, 64, 256, 1024]
    etas = [0.05, 0.1, 0.2, 0.3, 0.45]
    for k in ks:
        for eta in etas:
            prev = rcn_collision_prob(k, 0, eta)
            for i in range(1, min(k, 6) + 1):
                cur = rcn_collision_prob(k, i, eta)
                _push(
                    margins,
                    violations,
                    prev - cur,
                    {"k": k, "eta": eta, "i": i, "p_prev": prev, "p_cur": cur},
                )
                prev = cur
    return _report("rcn-monotone", len(ks) * len(etas), margins, violations,
                   {"tolerance": "strict monotonicity, exact arithmetic"})


def walk_gap_floor(k: int) -> float:
    """Exact lazy-walk gap at the most-mixing rate: the difference
    Pr[walk at 0] - Pr[walk at 2] after k-1 steps of a +-2 walk that
    moves with probability 1/2; lower bounds the same gap at any noise
    rate below 1/2 once scaled by (2 eta - 1)^2. Scales like k^(-3/2).
    """
    if k == 1:
        return 1.0
    steps = 2 * (k - 1)
    # C(2k-2, k-1) - C(2k-2, k) = C(2k-2, k-1) / k; exact big-int ratio
    from fractions import Fraction

    return float(Fraction(math.comb(steps, k - 1), k * 4 ** (k - 1)))


def suite_rcn_gap(seed: int = 0, trials: int = 0):
    """p0 - p1 >= (2 eta - 1)^2 * walk_gap_floor(k)."""
    margins, violations = [], []
    ks = [1, 2, 4, 8, 16, 64, 256, 1024]
    etas = [0.05, 0.1, 0.2, 0.3, 0.45]
    for k in ks:
        for eta in etas:
            gap = rcn_collision_prob(k, 0, eta) - rcn_collision_prob(k, 1, eta)
            floor = (2.0 * eta - 1.0) ** 2 * walk_gap_floor(k)
            _push(
                margins,
                violations,
                gap - floor + 1e-14,
                {"k": k, "eta": eta, "gap": gap, "floor": floor},
            )
    return _report("rcn-gap", len(ks) * len(etas), margins, violations,
                   {"tolerance": "exact bound, 1e-14 float cushion"})


def suite_tree_expansion(n: int = 10, trials: int = 100, seed: int = 0):
    """Path expansion of trees agrees pointwise with tree evaluation and
    with the direct transform, in all three bases."""
    margins, violations = [], []
    ver = VerifierOracle()
    for trial in range(1, trials + 1):
        rng = np.random.default_rng([seed, trial])
        tree = random_tree(n, int(rng.integers(2, 9)), rng, max_depth=5)
        masks = all_masks(n)
        tv = np.asarray(tree.value_batch(masks))
        for basis in (UNIFORM_PM, ProductBasis(tuple(random_product_means(n, rng)))):
            spec = tree_to_polynomial(tree, basis)
            gap = float(np.max(np.abs(np.asarray(spec.value_batch(masks)) - tv)))
            _push(margins, violations, 1e-9 - gap,
                  {"trial": trial, "basis": getattr(basis, "tag", "?"), "gap": gap})
            budget = tree.leaf_count * 2**tree.depth
            _push(margins, violations, budget - spec.l0() + 0.5,
                  {"trial": trial, "check": "count"})
    return _report("tree-expansion", trials, margins, violations,
                   {"tolerance": 1e-9})


def agnostic_parity_stub(sim, max_size: int = 2, samples: int = 50_000):
    """Brute-force agnostic learner over signed parities of the message
    bits, run through a reduction simulator: draws simulated examples and
    returns the empirical-correlation maximizer (subset, sign)."""
    n = sim.embedded.n
    _, masks, labels = sim.draw_batch(samples)
    best = (0, 1.0, -math.inf)
    for size in range(max_size + 1):
        for subset_vars in combinations(range(n), size):
            subset = 0
            for i in subset_vars:
                subset |= 1 << i
            chi = char_values(UNIFORM_PM, subset, masks, n)
            corr = float(np.mean(labels * chi))
            for sign in (1.0, -1.0):
                if sign * corr > best[2]:
                    best = (subset, sign, sign * corr)
    return best[0], best[1]


def agnostic_excess(base_target, subset: int, sign: float, max_size: int = 2):
    """Exact correlations for the agnostic guarantee: returns
    (achieved, best) where achieved = E_U[f * h'] for the pulled-back
    hypothesis h'(x) = sign * chi_subset(x) and best is the top
    correlation over the signed-parity class."""
    spec = exact_transform(base_target, UNIFORM_PM, zero_tol=0.0)
    achieved = sign * spec.coeff(subset)
    best = max(
        (abs(spec.coeff(s)) for s in range(1 << base_target.n) if popcount(s) <= max_size),
        default=0.0,
    )
    return achieved, best


SUITES = {
    "fact-smooth": suite_fact_smooth,
    "parseval": suite_parseval,
    "km-norms": suite_km_norms,
    "spectral-tail": suite_spectral_tail,
    "nonzero-constant-term": suite_nonzero_constant_term,
    "nonzero-lower-bound": suite_nonzero_lower_bound,
    "nonzero-upper-bound": suite_nonzero_upper_bound,
    "restriction-growth": suite_restriction_growth,
    "tree-truncation": suite_tree_truncation,
    "truncation-poly": suite_truncation_poly,
    "rcn-monotone": suite_rcn_monotone,
    "rcn-gap": suite_rcn_gap,
    "tree-expansion": suite_tree_expansion,
}


def run_lemma_suite(suite: str, **params) -> dict:
    if suite == "all":
        return {"suites": [run_lemma_suite(name, **params) for name in SUITES]}
    if suite not in SUITES:
        raise ContractViolation(f"unknown suite {suite!r}; have {sorted(SUITES)}")
    fn = SUITES[suite]
    import inspect

    accepted = set(inspect.signature(fn).parameters)
    kwargs = {k: v for k, v in params.items() if k in accepted and v is not None}
    return fn(**kwargs)
