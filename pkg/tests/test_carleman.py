import numpy as np
import pytest

from carleman_lab.carleman import (
    assemble_dense,
    build_blocks,
    convergence_sweep,
    error_profile,
    initial_lift,
    integrate_lift,
    split_blocks,
    total_dimension,
)
from carleman_lab.errors import DimensionCapError, DimensionMismatchError
from carleman_lab.linalg import tensor_power
from carleman_lab.system import QuadraticSystem, integrate_reference


def scalar_system(a, b, f0=0.0):
    return QuadraticSystem(f0=[f0], f1=[[a]], f2=[[b]])


def random_system(seed, n=2, f2_scale=0.1):
    rng = np.random.default_rng(seed)
    return QuadraticSystem(
        f0=0.1 * rng.standard_normal(n),
        f1=rng.standard_normal((n, n)) - 2 * np.eye(n),
        f2=f2_scale * rng.standard_normal((n, n * n)),
    )


class TestBuildBlocks:
    def test_scalar_block_values(self):
        a, b = -1.0, 0.5
        cm = build_blocks(scalar_system(a, b), 4)
        assert [cm.block_diag(j)[0, 0] for j in range(1, 5)] == [a, 2 * a, 3 * a, 4 * a]
        assert [cm.block_upper(j)[0, 0] for j in range(1, 4)] == [b, 2 * b, 3 * b]
        # the level-k upward block is retained as the truncation source
        assert cm.block_upper(4)[0, 0] == 4 * b

    def test_zero_drive_zeroes_lower_blocks(self):
        sys = random_system(0)
        cm = build_blocks(QuadraticSystem(f0=np.zeros(2), f1=sys.f1, f2=sys.f2), 3)
        for j in range(2, 4):
            assert np.count_nonzero(cm.block_lower(j)) == 0
        assert np.count_nonzero(cm.drive) == 0

    def test_level_two_diagonal_is_kronecker_sum(self):
        sys = random_system(1)
        cm = build_blocks(sys, 2)
        eye = np.eye(2)
        expected = np.kron(sys.f1, eye) + np.kron(eye, sys.f1)
        assert np.allclose(cm.block_diag(2), expected, atol=1e-15)

    def test_dimension_cap(self):
        with pytest.raises(DimensionCapError):
            build_blocks(random_system(2), 6, cap=50)


class TestAssembleDense:
    def test_printed_driven_scalar_lift(self):
        sys = scalar_system(-1.0, 0.02, f0=0.97)
        dense = assemble_dense(build_blocks(sys, 4))
        expected = np.array(
            [
                [-1.0, 0.02, 0.0, 0.0],
                [1.94, -2.0, 0.04, 0.0],
                [0.0, 2.91, -3.0, 0.06],
                [0.0, 0.0, 3.88, -4.0],
            ]
        )
        assert np.max(np.abs(dense - expected)) <= 1e-12

    def test_order_one_is_linear_part(self):
        sys = random_system(3)
        assert np.array_equal(assemble_dense(build_blocks(sys, 1)), sys.f1)

    def test_dense_matches_blockwise_matvec(self):
        sys = random_system(4)
        k = 3
        cm = build_blocks(sys, k)
        dense = assemble_dense(cm)
        rng = np.random.default_rng(5)
        y = rng.standard_normal(cm.total_dim) + 1j * rng.standard_normal(cm.total_dim)
        blocks = split_blocks(y, sys.n, k)
        expected = []
        for j in range(1, k + 1):
            acc = cm.block_diag(j) @ blocks[j - 1]
            if j >= 2:
                acc = acc + cm.block_lower(j) @ blocks[j - 2]
            if j < k:
                acc = acc + cm.block_upper(j) @ blocks[j]
            expected.append(acc)
        assert np.max(np.abs(dense @ y - np.concatenate(expected))) <= 1e-14


class TestInitialLift:
    def test_zero_state(self):
        assert np.count_nonzero(initial_lift(np.zeros(2), 3)) == 0

    def test_basis_vector(self):
        lift = initial_lift([1.0, 0.0], 3)
        blocks = split_blocks(lift, 2, 3)
        for j, block in enumerate(blocks, start=1):
            expected = np.zeros(2**j)
            expected[0] = 1.0
            assert np.array_equal(block, expected)

    def test_arithmetic(self):
        lift = initial_lift([0.5, 0.5], 2)
        assert np.allclose(lift, [0.5, 0.5, 0.25, 0.25, 0.25, 0.25])


class TestIntegrateLift:
    def test_null_generator_constant(self):
        sys = QuadraticSystem(f0=np.zeros(1), f1=np.zeros((1, 1)), f2=np.zeros((1, 1)))
        cm = build_blocks(sys, 3)
        y0 = initial_lift([0.7], 3)
        traj = integrate_lift(cm, y0, np.linspace(0, 2, 5))
        assert np.allclose(traj.states, y0, atol=1e-15)

    def test_order_one_matches_linearized_reference(self):
        sys = random_system(6)
        linear = QuadraticSystem(f0=sys.f0, f1=sys.f1, f2=np.zeros((2, 4)))
        x0 = np.array([0.4, -0.1])
        times = np.linspace(0.0, 3.0, 7)
        lift = integrate_lift(build_blocks(linear, 1), x0, times)
        ref = integrate_reference(linear, x0, times, 1e-12, 1e-12)
        assert np.max(np.abs(lift.states - ref.states)) <= 1e-9

    def test_scalar_first_block_tracks_reference(self):
        sys = scalar_system(-1.0, 0.1)
        times = np.array([0.0, 1.0])
        lift = integrate_lift(build_blocks(sys, 6), initial_lift([0.5], 6), times)
        ref = integrate_reference(sys, [0.5], times, 1e-12, 1e-12)
        assert abs(lift.states[-1][0] - ref.states[-1][0]) <= 1e-6

    def test_dimension_mismatch(self):
        cm = build_blocks(scalar_system(-1.0, 0.1), 3)
        with pytest.raises(DimensionMismatchError):
            integrate_lift(cm, np.zeros(5), [0.0, 1.0])


class TestErrorProfile:
    def test_linear_system_exact(self):
        sys = random_system(8)
        linear = QuadraticSystem(f0=sys.f0, f1=sys.f1, f2=np.zeros((2, 4)))
        prof = error_profile(linear, [0.5, -0.5], 4, np.linspace(0, 10, 6), tol=1e-12)
        assert np.max(prof.block_norms) <= 1e-9

    def test_zero_time_zero_error(self):
        sys = scalar_system(-1.0, 0.1)
        prof = error_profile(sys, [0.5], 5, np.array([0.0, 1.0]))
        assert np.max(prof.block_norms[0]) == 0.0

    def test_scalar_errors_shrink_geometrically(self):
        sys = scalar_system(-1.0, 0.1)
        sweep = convergence_sweep(sys, [0.5], range(2, 9), 2.0)
        errs = [sweep["errors"][k] for k in range(2, 9)]
        assert all(a > b for a, b in zip(errs, errs[1:]))
        # by k = 8 the error reaches the oracle noise floor, so fit the
        # ratio on the clean part of the sweep
        clean = convergence_sweep(sys, [0.5], range(2, 8), 2.0)
        x_max = 0.5
        cap = 8 * 0.1 * x_max / 1.0 + 0.05
        assert clean["fitted_ratio"] <= cap

    def test_flow_derivative_matches_block_action(self):
        # central difference of tensor powers along the flow vs the blocks
        sys = random_system(9, f2_scale=0.05)
        k = 3
        cm = build_blocks(sys, k)
        h = 1e-4
        times = np.array([0.0, 1.0 - h, 1.0, 1.0 + h])
        ref = integrate_reference(sys, [0.3, 0.2], times, 1e-12, 1e-12)
        x_minus, x_mid, x_plus = ref.states[1], ref.states[2], ref.states[3]
        for j in range(1, k + 1):
            numeric = (tensor_power(x_plus, j) - tensor_power(x_minus, j)) / (2 * h)
            model = cm.block_diag(j) @ tensor_power(x_mid, j) + cm.block_upper(
                j
            ) @ tensor_power(x_mid, j + 1)
            if j >= 2:
                model = model + cm.block_lower(j) @ tensor_power(x_mid, j - 1)
            else:
                model = model + sys.f0
            assert np.max(np.abs(numeric - model)) <= 1e-6


class TestConvergenceSweep:
    def test_linear_reports_noise_floor(self):
        sys = QuadraticSystem(
            f0=np.zeros(2), f1=[[0.0, 1.0], [-1.0, -1.0]], f2=np.zeros((2, 4))
        )
        sweep = convergence_sweep(sys, [0.5, 0.5], range(2, 6), 2.0)
        assert sweep["fitted_ratio"] is None

    def test_damped_oscillator_converges(self):
        from carleman_lab.fixtures import damped_oscillator

        fx = damped_oscillator(r=1.5, n=0.2)
        sweep = convergence_sweep(fx.system, fx.x0, range(2, 8), 3.0)
        errs = [sweep["errors"][k] for k in range(2, 8)]
        assert all(a > b for a, b in zip(errs, errs[1:]))
        assert sweep["fitted_ratio"] < 1

    def test_uncertified_bounded_instance_reports_growth(self):
        # bounded damped rotation with strong nonlinearity: R_mu > 1 and
        # the truncation errors grow with k; the sweep must say so calmly
        sys = scalar_system(-0.1 + 3j, 3.0)
        from carleman_lab.stability import r_mu

        assert r_mu(sys, [0.8]) > 1
        traj = integrate_reference(sys, [0.8], np.linspace(0, 10, 11))
        assert np.abs(traj.states).max() <= 0.81
        sweep = convergence_sweep(sys, [0.8], range(2, 9), 3.0)
        assert sweep["fitted_ratio"] >= 1


def test_total_dimension():
    assert total_dimension(2, 3) == 14
    assert total_dimension(1, 6) == 6
