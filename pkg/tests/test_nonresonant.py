import math

import numpy as np
import pytest

from carleman_lab.errors import (
    NotPoincareError,
    ResonanceFoundError,
    ResonantDenominatorError,
    UncertifiedError,
)
from carleman_lab.nonresonant import (
    BOUNDARY,
    POINCARE,
    SIEGEL,
    build_nl,
    classify_spectrum,
    shift_to_fixed_point,
    build_v_blocks,
    build_vinv_blocks,
    certify_oscillating,
    certify_poincare,
    certify_siegel_split,
    check_resonance,
    classify_domain,
    column_sparsity,
    delta_gap_poincare,
    diagonalize_carleman,
    find_siegel_split,
    level_sums,
    nonresonant_error_bound,
    norm_bounds_check,
    r_big_delta,
    shift_oscillating_f2,
    siegel_type_estimate,
    xi_nu,
)
from carleman_lab.system import (
    QuadraticSystem,
    integrate_nonautonomous,
    integrate_reference,
)


def random_poincare_system(seed, n=2, f2_scale=0.05):
    """Diagonalizable driftless system with spectrum in the open left plane."""
    rng = np.random.default_rng(seed)
    lams = -rng.uniform(0.5, 3.0, n) + 1j * rng.uniform(-1.0, 1.0, n)
    q = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    f1 = q @ np.diag(lams) @ np.linalg.inv(q)
    f2 = f2_scale * (rng.standard_normal((n, n * n)) + 1j * rng.standard_normal((n, n * n)))
    return QuadraticSystem(f0=np.zeros(n), f1=f1, f2=f2)


class TestResonance:
    def test_integer_relation_detected(self):
        cls = check_resonance([-1.0, -2.0], 4)
        assert any(i == 1 and alpha == (2, 0) for i, alpha in cls.resonant_tuples)

    def test_incommensurate_pair_clean(self):
        cls = check_resonance([-1.0, -np.pi], 8)
        assert cls.resonant_tuples == []

    def test_marginal_pair_resonant(self):
        cls = check_resonance([1j, -1j], 4)
        assert cls.resonant_tuples  # i = 2i + (-i) at order three


class TestClassifyDomain:
    def test_left_plane_cluster(self):
        assert classify_domain([-1.0, -2.0 + 1j, -1.0 - 1j]) == POINCARE

    def test_straddling_imaginary_axis(self):
        assert classify_domain([1j, -1j]) == SIEGEL

    def test_origin_on_hull(self):
        assert classify_domain([0.0, -1.0]) == BOUNDARY


class TestDeltaGap:
    def test_scalar_value(self):
        assert delta_gap_poincare([-1.0]) == pytest.approx(1.0)

    def test_brute_force_cross_check(self):
        lams = np.array([-1.0, -np.pi])
        gap = delta_gap_poincare(lams, order_cap=6)
        # oracle: direct enumeration far beyond the analytic cutoff
        from itertools import combinations_with_replacement

        brute = np.inf
        for total in range(2, 40):
            for combo in combinations_with_replacement(range(2), total):
                s = lams[list(combo)].sum()
                brute = min(brute, np.abs(lams - s).min() / (total - 1))
        assert gap <= brute + 1e-12
        assert gap > 0

    def test_upper_half_plane_pair(self):
        assert delta_gap_poincare([-1.0 + 5j, -1.0 + 6j]) > 0

    def test_siegel_rejected(self):
        with pytest.raises(NotPoincareError):
            delta_gap_poincare([1j, -1j])

    def test_resonant_rejected(self):
        with pytest.raises(ResonanceFoundError):
            delta_gap_poincare([-1.0, -2.0])


class TestBuildNl:
    def test_scalar_entries(self):
        a = -1.3
        for l in range(2, 6):
            nl = build_nl([a], l)
            assert nl[0, 0] == pytest.approx(1.0 / ((l - 1) * a))

    def test_pair_entry(self):
        lams = [-1.0, -np.pi]
        nl = build_nl(lams, 2)
        # entry (first eigenvalue | column of the (2,2) index pair)
        assert nl[0, 3] == pytest.approx(1.0 / (-2 * np.pi + 1.0))

    def test_marginal_resonance_raises(self):
        with pytest.raises(ResonantDenominatorError) as info:
            build_nl([1j, -1j], 3)
        assert info.value.offending is not None

    def test_marginal_pair_order_two_is_fine(self):
        nl = build_nl([1j, -1j], 2)
        assert np.all(np.isfinite(nl))


class TestVBlocks:
    def test_first_off_diagonal_is_hadamard_product(self):
        rng = np.random.default_rng(0)
        lams = np.array([-1.0 + 0.2j, -2.2 - 0.4j])
        f2t = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
        blocks = build_v_blocks(lams, f2t, 2)
        assert np.allclose(blocks[(1, 2)], build_nl(lams, 2) * f2t, atol=1e-14)

    def test_scalar_superdiagonal(self):
        a, b = -1.0, 0.7
        blocks = build_v_blocks(np.array([a]), np.array([[b]]), 9)
        for m in range(1, 9):
            assert blocks[(m, m + 1)][0, 0] == pytest.approx(m * b / a, abs=1e-14)

    def test_defining_recurrence(self):
        from carleman_lab.carleman import build_blocks

        sys = random_poincare_system(3)
        from carleman_lab.linalg import eig

        dec = eig(sys.f1)
        lams = dec.eigenvalues
        f2t = dec.inverse_vectors @ sys.f2 @ np.kron(dec.right_vectors, dec.right_vectors)
        k = 4
        blocks = build_v_blocks(lams, f2t, k)
        cm = build_blocks(
            QuadraticSystem(f0=np.zeros(2), f1=np.diag(lams), f2=f2t), k
        )
        for i in range(1, k):
            for j in range(i + 1, k + 1):
                lhs = blocks[(i, j)] * level_sums(lams, j)[None, :] - level_sums(
                    lams, i
                )[:, None] * blocks[(i, j)]
                rhs = cm.block_upper(i) @ blocks[(i + 1, j)]
                scale = max(np.abs(rhs).max(), 1.0)
                assert np.abs(lhs - rhs).max() <= 1e-10 * scale


def _paper_vinv_13(lams, f2t):
    """Explicit five-index double sum for the (1, 3) inverse block."""
    n = len(lams)
    out = np.zeros((n, n**3), dtype=complex)
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    for e in range(n):
                        w1 = (
                            f2t[a, b * n + c]
                            * f2t[b, d * n + e]
                            / (lams[b] + lams[c] - lams[a])
                            / (lams[c] + lams[d] + lams[e] - lams[a])
                        )
                        out[a, (d * n + e) * n + c] += w1
                        w2 = (
                            f2t[a, b * n + c]
                            * f2t[c, d * n + e]
                            / (lams[b] + lams[c] - lams[a])
                            / (lams[b] + lams[d] + lams[e] - lams[a])
                        )
                        out[a, (b * n + d) * n + e] += w2
    return out


def _paper_vinv_24(lams, f2t):
    """Explicit six-index five-forest sum for the (2, 4) inverse block."""
    n = len(lams)
    out = np.zeros((n**2, n**4), dtype=complex)

    def col(*idx):
        c = 0
        for i in idx:
            c = c * n + i
        return c

    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    for e in range(n):
                        for f in range(n):
                            t1 = (
                                f2t[a, b * n + c]
                                * f2t[b, d * n + e]
                                / (lams[b] + lams[c] - lams[a])
                                / (lams[c] + lams[d] + lams[e] - lams[a])
                            )
                            out[col(a, f), col(d, e, c, f)] += t1
                            t2 = (
                                f2t[a, b * n + c]
                                * f2t[c, d * n + e]
                                / (lams[b] + lams[c] - lams[a])
                                / (lams[b] + lams[d] + lams[e] - lams[a])
                            )
                            out[col(a, f), col(b, d, e, f)] += t2
                            t3 = (
                                f2t[a, b * n + c]
                                * f2t[b, e * n + f]
                                / (lams[b] + lams[c] - lams[a])
                                / (lams[c] + lams[e] + lams[f] - lams[a])
                            )
                            out[col(d, a), col(d, e, f, c)] += t3
                            t4 = (
                                f2t[a, b * n + c]
                                * f2t[c, e * n + f]
                                / (lams[b] + lams[c] - lams[a])
                                / (lams[b] + lams[e] + lams[f] - lams[a])
                            )
                            out[col(d, a), col(d, b, e, f)] += t4
                            t5 = (
                                f2t[a, c * n + d]
                                * f2t[b, e * n + f]
                                / (lams[c] + lams[d] - lams[a])
                                / (lams[e] + lams[f] - lams[b])
                            )
                            out[col(a, b), col(c, d, e, f)] += t5
    return out


class TestVInverseBlocks:
    def _data(self, seed=1):
        rng = np.random.default_rng(seed)
        lams = np.array([-1.1 + 0.3j, -2.4 - 0.6j])
        f2t = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
        return lams, f2t

    def test_one_layer_is_negated_forward_block(self):
        lams, f2t = self._data()
        v = build_v_blocks(lams, f2t, 2)
        w = build_vinv_blocks(lams, f2t, 2, method="forest")
        assert np.allclose(w[(1, 2)], -v[(1, 2)], atol=1e-13)

    def test_explicit_13_formula(self):
        lams, f2t = self._data(2)
        w = build_vinv_blocks(lams, f2t, 3, method="forest")
        oracle = _paper_vinv_13(lams, f2t)
        assert np.abs(w[(1, 3)] - oracle).max() <= 1e-12 * np.abs(oracle).max()

    def test_explicit_24_five_forest_formula(self):
        lams, f2t = self._data(3)
        w = build_vinv_blocks(lams, f2t, 4, method="forest")
        oracle = _paper_vinv_24(lams, f2t)
        assert np.abs(w[(2, 4)] - oracle).max() <= 1e-12 * np.abs(oracle).max()

    def test_methods_agree(self):
        lams, f2t = self._data(4)
        wf = build_vinv_blocks(lams, f2t, 4, method="forest")
        wb = build_vinv_blocks(lams, f2t, 4, method="backsubstitution")
        for key in wf:
            scale = max(np.abs(wb[key]).max(), 1.0)
            assert np.abs(wf[key] - wb[key]).max() <= 1e-9 * scale

    def test_block_product_is_identity(self):
        lams, f2t = self._data(5)
        k = 4
        v = build_v_blocks(lams, f2t, k)
        w = build_vinv_blocks(lams, f2t, k, method="forest")
        n = 2
        for i in range(1, k + 1):
            for j in range(i, k + 1):
                acc = np.zeros((n**i, n**j), dtype=complex)
                for m in range(i, j + 1):
                    acc += v[(i, m)] @ w[(m, j)]
                target = np.eye(n**i) if i == j else 0.0
                assert np.abs(acc - target).max() <= 1e-10

    def test_scalar_forest_bound_beats_factorial_path_bound(self):
        a, b = -1.0, 0.6
        k = 8
        w = build_vinv_blocks(np.array([a]), np.array([[b]]), k, method="forest")
        for j in range(2, k + 1):
            bound = (4 * abs(b) / abs(a)) ** (j - 1)
            assert abs(w[(1, j)][0, 0]) <= bound


class TestDiagonalize:
    def test_linear_system_trivial_transform(self):
        sys = QuadraticSystem(
            f0=np.zeros(2), f1=np.diag([-1.0, -2.5]), f2=np.zeros((2, 4))
        )
        diag = diagonalize_carleman(sys, 3)
        for (i, j), block in diag.v_blocks.items():
            if i == j:
                assert np.array_equal(block, np.eye(2**i))
            else:
                assert np.count_nonzero(block) == 0
        d = diag.level_entries(2)
        assert np.allclose(d, [-2.0, -3.5, -3.5, -5.0])

    def test_second_layer_structure(self):
        sys = random_poincare_system(6)
        diag = diagonalize_carleman(sys, 3)
        w2 = build_nl(diag.eigenvalues, 2) * diag.f2_tilde
        eye = np.eye(2)
        expected = np.kron(w2, eye) + np.kron(eye, w2)
        assert np.allclose(diag.v_blocks[(2, 3)], expected, atol=1e-12)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_random_three_dimensional_residuals(self, seed):
        sys = random_poincare_system(seed, n=3, f2_scale=0.03)
        diag = diagonalize_carleman(sys, 4)
        assert diag.residual <= 1e-10
        assert diag.inverse_residual <= 1e-10

    def test_block_independent_of_truncation_order(self):
        sys = random_poincare_system(9)
        small = diagonalize_carleman(sys, 3)
        large = diagonalize_carleman(sys, 5)
        for key, block in small.v_blocks.items():
            assert np.allclose(block, large.v_blocks[key], atol=1e-12)

    def test_ambient_block_transform(self):
        sys = random_poincare_system(10)
        diag = diagonalize_carleman(sys, 2)
        expected = np.kron(diag.q, np.array([[1.0]])) @ diag.v_blocks[(1, 2)]
        assert np.allclose(diag.ambient_v_block(1, 2), expected)


class TestNormBounds:
    def test_scalar_margins(self):
        a, b = -1.0, 0.4
        sys = QuadraticSystem(f0=np.zeros(1), f1=[[a]], f2=[[b]])
        diag = diagonalize_carleman(sys, 8)
        report = norm_bounds_check(diag, delta_gap_poincare([a]))
        assert report["all_ok"]
        for row in report["rows"]:
            i, j = row["i"], row["j"]
            assert row["bound"] == pytest.approx(
                math.comb(j - 1, i - 1) * (4 * abs(b) / abs(a)) ** (j - i)
            )

    def test_zero_nonlinearity_trivial(self):
        sys = QuadraticSystem(
            f0=np.zeros(2), f1=np.diag([-1.0, -2.5]), f2=np.zeros((2, 4))
        )
        diag = diagonalize_carleman(sys, 3)
        report = norm_bounds_check(diag, 1.0)
        assert report["all_ok"] and report["sparsity"] == 1

    @pytest.mark.parametrize("seed", [3, 4])
    def test_random_fixture_margins_nonnegative(self, seed):
        sys = random_poincare_system(seed, f2_scale=0.05)
        diag = diagonalize_carleman(sys, 5)
        report = norm_bounds_check(diag, delta_gap_poincare(diag.eigenvalues))
        assert report["all_ok"]


class TestRBigDelta:
    def test_zero_nonlinearity(self):
        sys = QuadraticSystem(
            f0=np.zeros(2), f1=np.diag([-1.0, -2.5]), f2=np.zeros((2, 4))
        )
        assert r_big_delta(sys, 1.0, 1.0) == 0.0

    def test_scalar_value(self):
        sys = QuadraticSystem(f0=np.zeros(1), f1=[[-1.0]], f2=[[0.01]])
        assert r_big_delta(sys, 1.0, 1.0) == pytest.approx(0.08)

    def test_threshold(self):
        sys = random_poincare_system(12)
        from carleman_lab.linalg import eig

        dec = eig(sys.f1)
        f2t = dec.inverse_vectors @ sys.f2 @ np.kron(dec.right_vectors, dec.right_vectors)
        delta = delta_gap_poincare(dec.eigenvalues)
        s = column_sparsity(f2t)
        x_max = 0.9
        val = r_big_delta(sys, x_max, delta)
        assert (val < 1) == (8 * s * np.linalg.norm(f2t, 2) * x_max < delta)

    def test_siegel_rejected(self):
        sys = QuadraticSystem(f0=np.zeros(2), f1=np.diag([1j, -1j]), f2=np.zeros((2, 4)))
        with pytest.raises(NotPoincareError):
            r_big_delta(sys, 1.0, 1.0)


class TestErrorBoundFormula:
    def test_first_block_form(self):
        val = nonresonant_error_bound(1, 5, 2.0, 1.3, 0.2, 0.8, 0.5)
        assert val == pytest.approx(5 * 2.0 * 1.3 * 0.2 * 0.8**2 * 0.5**4)

    def test_split_variant_carries_sqrt2(self):
        base = nonresonant_error_bound(2, 5, 1.0, 1.0, 0.1, 0.5, 0.3)
        split = nonresonant_error_bound(2, 5, 1.0, 1.0, 0.1, 0.5, 0.3, "siegel_split")
        assert split == pytest.approx(base * math.sqrt(2))

    def test_uncertified_rejected(self):
        with pytest.raises(UncertifiedError):
            nonresonant_error_bound(1, 5, 1.0, 1.0, 0.1, 0.5, 1.2)

    def test_certified_scalar_measured_below_bound(self):
        sys = QuadraticSystem(f0=np.zeros(1), f1=[[-1.0]], f2=[[0.05]])
        cert = certify_poincare(sys, [0.5], horizon=10.0)
        assert cert.certified
        from carleman_lab.carleman import error_profile

        prof = error_profile(sys, [0.5], 6, np.array([0.0, 2.0]), tol=1e-12)
        assert prof.block_norms[-1, 0] <= cert.error_bound(1, 6, 2.0)


class TestShiftOscillating:
    def _system(self):
        f2 = np.zeros((2, 4))
        f2[0, 3] = 0.05
        f2[1, 0] = 0.04
        return QuadraticSystem(f0=np.zeros(2), f1=np.diag([0.5j, -0.5j]), f2=f2)

    def test_band_and_gap(self):
        sys = self._system()
        omega = 2.0
        shifted = shift_oscillating_f2(sys, omega)
        lams = np.linalg.eigvals(shifted.shifted.f1)
        assert np.all(lams.imag >= 3 * omega / 4 - 1e-10)
        assert np.all(lams.imag <= 5 * omega / 4 + 1e-10)
        assert delta_gap_poincare(lams) >= omega / 4 - 1e-10

    def test_round_trip_against_nonautonomous_solve(self):
        sys = self._system()
        omega = 2.0
        shifted = shift_oscillating_f2(sys, omega)
        x0 = np.array([0.4, 0.3])
        times = np.linspace(0, 5, 11)
        direct = integrate_nonautonomous(
            lambda t, y: sys.f1 @ y + np.exp(1j * omega * t) * (sys.f2 @ np.kron(y, y)),
            x0,
            times,
            1e-12,
            1e-12,
        )
        auto = integrate_reference(shifted.shifted, x0, times, 1e-12, 1e-12)
        recovered = auto.states * np.exp(-1j * omega * times)[:, None]
        assert np.max(np.abs(recovered - direct.states)) <= 1e-7

    def test_frequency_too_small(self):
        from carleman_lab.errors import FrequencyTooSmallError

        with pytest.raises(FrequencyTooSmallError):
            shift_oscillating_f2(self._system(), 0.5)


class TestSiegelType:
    def test_xi_at_zero(self):
        for nu in (-1.0, 0.0, 0.7, 2.0):
            assert xi_nu(nu, 0) == 1.0

    def test_poincare_spectrum_fits_nonpositive_exponent(self):
        fit = siegel_type_estimate([-1.0, -np.pi], order_cap=8)
        assert fit["nu"] <= 0
        # the fitted law holds on every enumerated order
        for m, g in zip(fit["orders"], fit["min_gaps"]):
            assert fit["c"] * (m - 1.0) ** (-fit["nu"]) <= g * (1 + 1e-12)

    def test_golden_ratio_small_denominators(self):
        phi = (1 + math.sqrt(5)) / 2
        # opposite-sign imaginary pair: classic Siegel small denominators
        fit = siegel_type_estimate([1j, -phi * 1j], order_cap=10)
        assert fit["nu"] > 0
        # same-sign pair is Poincare and its gaps grow instead
        assert classify_domain([1j, phi * 1j]) == POINCARE


class TestCertifiers:
    def test_poincare_route(self):
        sys = QuadraticSystem(f0=np.zeros(1), f1=[[-1.0]], f2=[[0.05]])
        cert = certify_poincare(sys, [0.5])
        assert cert.certified and cert.value < 1

    def test_siegel_split_route(self):
        f2 = np.zeros((2, 4), dtype=complex)
        f2[0, 0] = 0.02
        f2[1, 3] = 0.015
        sys = QuadraticSystem(f0=np.zeros(2), f1=np.diag([1j, -1j]), f2=f2)
        assert classify_domain([1j, -1j]) == SIEGEL
        split = find_siegel_split(np.array([1j, -1j]), f2)
        assert split == ([0], [1])
        cert = certify_siegel_split(sys, [0.3, 0.3])
        assert cert.certified and cert.variant == "siegel_split"
        assert not certify_poincare(sys, [0.3, 0.3]).certified

    def test_coupled_siegel_refused(self):
        f2 = np.zeros((2, 4), dtype=complex)
        f2[0, 1] = 0.02  # couples the two half-plane sectors
        sys = QuadraticSystem(f0=np.zeros(2), f1=np.diag([1j, -1j]), f2=f2)
        cert = certify_siegel_split(sys, [0.3, 0.3])
        assert not cert.certified

    def test_oscillating_route(self):
        f2 = np.zeros((2, 4))
        f2[0, 3] = 0.02
        f2[1, 0] = 0.02
        sys = QuadraticSystem(f0=np.zeros(2), f1=np.diag([0.4j, -0.4j]), f2=f2)
        cert = certify_oscillating(sys, [0.4, 0.4], omega=2.0)
        assert cert.certified and cert.omega == 2.0


class TestClassifySpectrum:
    def test_poincare_gets_gap_and_direction(self):
        cls = classify_spectrum([-1.0, -np.pi])
        assert cls.domain == POINCARE and cls.delta_gap > 0
        assert abs(abs(cls.separating_direction) - 1.0) <= 1e-12
        assert cls.siegel_type is None

    def test_siegel_gets_type_fit(self):
        phi = (1 + math.sqrt(5)) / 2
        cls = classify_spectrum([1j, -phi * 1j], order_cap=8)
        assert cls.domain == SIEGEL and cls.delta_gap is None
        c, nu = cls.siegel_type
        assert c > 0 and nu > 0

    def test_resonant_has_no_gap(self):
        cls = classify_spectrum([-1.0, -2.0])
        assert cls.resonant_tuples and cls.delta_gap is None


class TestFixedPointShift:
    def test_recentring_removes_drive(self):
        # scalar with equilibrium at x* = 2 of xdot = 1.2 - x + 0.2 x^2
        sys = QuadraticSystem(f0=[1.2], f1=[[-1.0]], f2=[[0.2]])
        shifted = shift_to_fixed_point(sys, [2.0])
        assert np.count_nonzero(shifted.f0) == 0
        assert shifted.f1[0, 0] == pytest.approx(-1.0 + 0.2 * 2 * 2)
        # the deviation dynamics match the original after recentring
        times = np.linspace(0, 4, 9)
        orig = integrate_reference(sys, [1.0], times, 1e-12, 1e-12)
        dev = integrate_reference(shifted, [-1.0], times, 1e-12, 1e-12)
        assert np.max(np.abs(dev.states[:, 0] + 2.0 - orig.states[:, 0])) <= 1e-9

    def test_non_equilibrium_rejected(self):
        sys = QuadraticSystem(f0=[1.2], f1=[[-1.0]], f2=[[0.2]])
        with pytest.raises(ValueError):
            shift_to_fixed_point(sys, [1.0])
