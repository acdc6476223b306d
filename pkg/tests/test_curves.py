import numpy as np
import pytest

from qpcascade.curves import (
    FourierCurve,
    constant_curve,
    continue_in_epsilon,
    curve_cocycle,
    default_grid_size,
    eval_curve,
    initial_curve_for,
    invariance_residual,
    reducibility_status,
    solve_invariant_curve,
)
from qpcascade.errors import StepUnderflow
from qpcascade.forced import (
    CylinderState,
    ForcedFamily,
    ForcingSpec,
    ParamPoint,
    lyapunov_exponent,
    map_step,
)
from qpcascade.numerics import STANDARD, dft_forward, dft_inverse, FourierCoeffs
from qpcascade.unimodal import find_superstable

GOLDEN = (np.sqrt(5) - 1) / 2
S1 = 1 + np.sqrt(5)


def family(kind="multiplicative-cos", E=0.0, omega=GOLDEN):
    return ForcedFamily(omega=omega, forcing=ForcingSpec(kind, E))


def two_cycle_points(alpha):
    root = np.sqrt((alpha + 1) * (alpha - 3))
    return ((alpha + 1 + root) / (2 * alpha), (alpha + 1 - root) / (2 * alpha))


def linear_response_oracle(alpha, eps, omega):
    """First-order response of the fixed curve of the multiplicative family.

    Solves u(theta + omega) = m*u(theta) + g(theta) per harmonic, with
    m = alpha*(1 - 2 x0) and g = alpha*x0*(1-x0)*cos(2 pi theta).
    """
    x0 = 1 - 1 / alpha
    m = alpha * (1 - 2 * x0)
    amp = alpha * x0 * (1 - x0)
    # first harmonic as a phasor: (R(2 pi omega) - m I) u = (amp, 0)
    c, s = np.cos(2 * np.pi * omega), np.sin(2 * np.pi * omega)
    A = np.array([[c - m, s], [-s, c - m]])
    u_cos, u_sin = np.linalg.solve(A, np.array([amp, 0.0]))
    return x0, eps * u_cos, eps * u_sin


class TestEvalCurve:
    def test_constant(self):
        curve = constant_curve(0.6, 16)
        for th in (0.0, 0.31, 0.77):
            assert eval_curve(curve, th) == pytest.approx(0.6, abs=1e-15)

    def test_first_harmonic_quarter(self):
        vec = np.zeros(8)
        vec[1] = 1.0
        from qpcascade.curves import unpack_coeffs
        curve = FourierCurve(unpack_coeffs(vec), 8)
        assert eval_curve(curve, 0.25) == pytest.approx(0.0, abs=1e-15)

    def test_matches_transform_pair(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal(32)
        coeffs = dft_forward(x)
        curve = FourierCurve(coeffs, 32)
        theta = np.arange(32) / 32
        vals = eval_curve(curve, theta)
        assert np.max(np.abs(vals - dft_inverse(coeffs))) <= 8 * 32 * np.finfo(float).eps


class TestInvarianceResidual:
    def test_fixed_point_zero(self):
        fam = family()
        curve = constant_curve(0.6, 16)
        res = invariance_residual(fam, ParamPoint(2.5, 0.0), 0, curve)
        assert np.max(np.abs(res)) < 1e-14

    def test_two_cycle_constant_branch(self):
        fam = family()
        x_hi, _ = two_cycle_points(3.2)
        curve = constant_curve(x_hi, 16)
        res = invariance_residual(fam, ParamPoint(3.2, 0.0), 1, curve)
        assert np.max(np.abs(res)) < 1e-13

    def test_perturbation_raises_residual(self):
        fam = family()
        p = ParamPoint(2.5, 0.01)
        curve = solve_invariant_curve(fam, p, 0, constant_curve(0.55, 32))
        vec = curve.branch0.coeffs
        assert np.max(np.abs(invariance_residual(fam, p, 0, curve.branch0))) <= 1e-12
        bumped = FourierCurve(
            FourierCoeffs(vec.cos + np.eye(len(vec.cos))[0] * 1e-4, vec.sin.copy()), 32)
        assert np.max(np.abs(invariance_residual(fam, p, 0, bumped))) > 1e-5


class TestSolve:
    def test_fixed_point_constant(self):
        fam = family()
        curve = solve_invariant_curve(fam, ParamPoint(2.5, 0.0), 0,
                                      constant_curve(0.55, 32))
        assert eval_curve(curve.branch0, 0.37) == pytest.approx(0.6, abs=1e-12)
        assert curve.residual_norm <= 1e-12

    def test_small_coupling_matches_linear_response(self):
        fam = family()
        p = ParamPoint(2.5, 0.01)
        curve = solve_invariant_curve(fam, p, 0, constant_curve(0.55, 32))
        x0, uc, us = linear_response_oracle(2.5, 0.01, GOLDEN)
        assert curve.branch0.coeffs.cos[0] == pytest.approx(x0, abs=0.01)
        assert curve.branch0.coeffs.cos[1] == pytest.approx(uc, abs=1e-4)
        assert curve.branch0.coeffs.sin[0] == pytest.approx(us, abs=1e-4)
        assert curve.residual_norm <= 1e-12

    def test_two_cycle_branch(self):
        fam = family()
        x_hi, x_lo = two_cycle_points(3.2)
        curve = solve_invariant_curve(fam, ParamPoint(3.2, 0.0), 1,
                                      constant_curve(x_hi + 0.01, 32))
        assert eval_curve(curve.branch0, 0.5) == pytest.approx(x_hi, abs=1e-10)
        assert curve.branch_separation == pytest.approx(x_hi - x_lo, rel=1e-6)

    def test_branch_permutation(self):
        # iterating branch0 2^n times returns to branch0
        fam = family()
        p = ParamPoint(3.2, 0.008)
        curve = solve_invariant_curve(fam, p, 1, constant_curve(0.513, 32))
        for th in np.linspace(0, 1, 64, endpoint=False):
            s = CylinderState(th, float(eval_curve(curve.branch0, th)))
            for _ in range(2):
                s = map_step(fam, p, s)
            assert s.x == pytest.approx(float(eval_curve(curve.branch0, s.theta)),
                                        abs=10 * 1e-12)

    def test_mode_doubling_on_fat_tail(self):
        # strong coupling from a deliberately small grid: the tail check
        # doubles the collocation size until the spectrum is resolved
        fam = family()
        curve = solve_invariant_curve(fam, ParamPoint(2.5, 0.4), 0,
                                      constant_curve(0.6, 8))
        assert curve.branch0.n_modes >= 32
        assert curve.residual_norm <= 1e-12

    def test_spectral_decay(self):
        fam = family()
        curve = solve_invariant_curve(fam, ParamPoint(3.4, 0.01), 0,
                                      constant_curve(0.7, 64))
        mags = np.abs(curve.branch0.coeffs.cos[1:17])
        mags = np.maximum(mags, 1e-300)
        # geometric decay of the leading harmonics
        ratios = mags[1:] / mags[:-1]
        assert np.median(ratios[mags[1:] > 1e-14]) < 0.9


class TestContinuation:
    def test_targets_zero_only(self):
        fam = family()
        (curve,) = continue_in_epsilon(fam, 2.5, 0, [0.0])
        assert curve.params.epsilon == 0.0
        assert eval_curve(curve.branch0, 0.1) == pytest.approx(0.6, abs=1e-12)

    def test_c0_continuity(self):
        fam = family()
        curves = continue_in_epsilon(fam, 2.5, 0, [0.0, 1e-3, 2e-3])
        assert all(c.residual_norm <= 1e-12 for c in curves)
        c0 = [float(c.branch0.coeffs.cos[0]) for c in curves]
        assert max(abs(a - b) for a, b in zip(c0, c0[1:])) <= 0.05

    def test_two_cycle_persists(self):
        fam = family()
        curves = continue_in_epsilon(fam, 3.2, 1, [0.0, 5e-3, 1e-2])
        assert curves[-1].branch_separation >= 0.1


class TestCocycleAndReducibility:
    def test_fixed_point_cocycle(self):
        fam = family()
        curve = solve_invariant_curve(fam, ParamPoint(2.5, 0.0), 0,
                                      constant_curve(0.55, 16))
        m = curve_cocycle(curve)
        assert np.allclose(np.asarray(m, dtype=float), -0.5, atol=1e-12)

    def test_superstable_cycle_zero_cocycle(self):
        fam = family()
        s1 = float(find_superstable(1))
        curve = solve_invariant_curve(fam, ParamPoint(s1, 0.0), 1,
                                      constant_curve(0.5, 16))
        m = np.asarray(curve_cocycle(curve), dtype=float)
        assert np.max(np.abs(m)) < 1e-10

    def test_cocycle_matches_lyapunov(self):
        fam = family()
        p = ParamPoint(2.5, 0.01)
        curve = solve_invariant_curve(fam, p, 0, constant_curve(0.55, 32))
        m = np.asarray(curve_cocycle(curve), dtype=float)
        lyap, _ = lyapunov_exponent(fam, p)
        assert np.mean(np.log(np.abs(m))) == pytest.approx(lyap, abs=1e-3)

    def test_cocycle_lyapunov_random_points(self):
        rng = np.random.default_rng(9)
        fam = family()
        for _ in range(10):
            alpha = rng.uniform(2.2, 2.9)
            eps = rng.uniform(0.0, 0.02)
            p = ParamPoint(alpha, eps)
            curve = solve_invariant_curve(fam, p, 0,
                                          constant_curve(1 - 1 / alpha, 32))
            m = np.asarray(curve_cocycle(curve), dtype=float)
            lyap, _ = lyapunov_exponent(fam, p)
            assert np.mean(np.log(np.abs(m))) == pytest.approx(lyap, abs=1e-3)

    def test_reducibility_status_basic(self):
        assert reducibility_status(np.full(16, -0.5)) == "reducible"
        theta = np.arange(16) / 16
        assert reducibility_status(np.cos(2 * np.pi * theta)) == "nonreducible"
