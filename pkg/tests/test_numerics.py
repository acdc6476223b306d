import numpy as np
import pytest

from qpcascade.errors import InsufficientData, NoConvergence, SingularSystem
from qpcascade.numerics import (
    EXTENDED,
    STANDARD,
    FourierCoeffs,
    dft_forward,
    dft_inverse,
    evaluate_series,
    newton_solve,
    richardson_extrapolate,
)


def naive_trig_coeffs(samples):
    """O(N^2) projection oracle for the forward transform."""
    n = len(samples)
    theta = np.arange(n) / n
    cos = np.empty(n // 2 + 1)
    sin = np.empty(n // 2 - 1)
    for k in range(n // 2 + 1):
        w = 1.0 / n if k in (0, n // 2) else 2.0 / n
        cos[k] = w * np.sum(np.cos(2 * np.pi * k * theta) * samples)
    for k in range(1, n // 2):
        sin[k - 1] = (2.0 / n) * np.sum(np.sin(2 * np.pi * k * theta) * samples)
    return FourierCoeffs(cos, sin)


def naive_eval(coeffs, theta):
    n = coeffs.grid_size
    out = np.full_like(np.asarray(theta, dtype=float), coeffs.cos[0])
    for k in range(1, n // 2 + 1):
        out = out + coeffs.cos[k] * np.cos(2 * np.pi * k * theta)
        if k < n // 2:
            out = out + coeffs.sin[k - 1] * np.sin(2 * np.pi * k * theta)
    return out


class TestTransforms:
    def test_constant_samples(self):
        c = dft_forward(np.ones(8))
        assert c.cos[0] == pytest.approx(1.0, abs=1e-15)
        assert np.max(np.abs(c.cos[1:])) < 1e-15
        assert np.max(np.abs(c.sin)) < 1e-15

    def test_pure_first_harmonic(self):
        theta = np.arange(8) / 8
        c = dft_forward(np.cos(2 * np.pi * theta))
        assert c.cos[1] == pytest.approx(1.0, abs=1e-15)
        c.cos[1] = 0
        assert np.max(np.abs(c.cos)) < 1e-15

    def test_inverse_constant(self):
        c = FourierCoeffs(np.array([2.0, 0, 0, 0, 0]), np.zeros(3))
        assert np.allclose(dft_inverse(c), 2.0, atol=1e-15)

    def test_inverse_first_harmonic(self):
        c = FourierCoeffs(np.array([0.0, 1.0, 0, 0, 0]), np.zeros(3))
        theta = np.arange(8) / 8
        assert np.allclose(dft_inverse(c), np.cos(2 * np.pi * theta), atol=1e-15)

    def test_forward_matches_naive_oracle(self):
        rng = np.random.default_rng(7)
        x = rng.standard_normal(32)
        ours = dft_forward(x)
        oracle = naive_trig_coeffs(x)
        assert np.allclose(ours.cos, oracle.cos, atol=32 * 8 * np.finfo(float).eps)
        assert np.allclose(ours.sin, oracle.sin, atol=32 * 8 * np.finfo(float).eps)

    def test_degree3_poly_matches_direct_eval(self):
        c = FourierCoeffs(np.array([0.3, -1.2, 0.7, 0.1, 0.0, 0, 0, 0, 0]),
                          np.array([0.4, -0.2, 0.05, 0, 0, 0, 0]))
        theta = np.arange(16) / 16
        assert np.allclose(dft_inverse(c), naive_eval(c, theta),
                           atol=8 * np.finfo(float).eps * 16)

    @pytest.mark.parametrize("n", [4, 16, 64, 256, 1024, 4096])
    def test_round_trip(self, n):
        rng = np.random.default_rng(n)
        x = rng.standard_normal(n)
        back = dft_inverse(dft_forward(x))
        assert np.max(np.abs(back - x)) <= 8 * n * np.finfo(float).eps

    def test_round_trip_extended(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(16)
        coeffs = dft_forward(x, EXTENDED)
        back = dft_inverse(coeffs, EXTENDED)
        err = max(abs(float(b) - v) for b, v in zip(back, x))
        assert err < 1e-30

    def test_non_power_of_two_rejected(self):
        with pytest.raises(ValueError):
            dft_forward(np.ones(12))

    def test_series_eval_matches_grid(self):
        rng = np.random.default_rng(11)
        x = rng.standard_normal(32)
        c = dft_forward(x)
        theta = np.arange(32) / 32
        vals = evaluate_series(c, theta)
        assert np.max(np.abs(vals - x)) <= 8 * 32 * np.finfo(float).eps


class TestNewton:
    def test_scalar_quadratic(self):
        res = lambda x: np.array([x[0] ** 2 - 4.0])
        jac = lambda x: np.array([[2 * x[0]]])
        x, rnorm, its = newton_solve(res, jac, np.array([3.0]), 1e-12)
        assert x[0] == pytest.approx(2.0, abs=1e-12)

    def test_affine_single_iteration(self):
        res = lambda x: np.array([x[0] - 5.0])
        jac = lambda x: np.array([[1.0]])
        x, rnorm, its = newton_solve(res, jac, np.array([0.0]), 1e-14)
        assert its == 1
        assert x[0] == 5.0

    def test_2d_circle_line(self):
        res = lambda z: np.array([z[0] ** 2 + z[1] ** 2 - 1.0, z[0] - z[1]])
        jac = lambda z: np.array([[2 * z[0], 2 * z[1]], [1.0, -1.0]])
        z, _, _ = newton_solve(res, jac, np.array([1.0, 0.5]), 1e-14)
        assert z[0] == pytest.approx(np.sqrt(2) / 2, abs=1e-13)
        assert z[1] == pytest.approx(np.sqrt(2) / 2, abs=1e-13)

    def test_quadratic_tail(self):
        # residual norms of successive iterates contract at least quadratically
        res = lambda x: np.array([x[0] ** 2 - 4.0])
        jac = lambda x: np.array([[2 * x[0]]])
        norms = []
        for k in range(1, 7):
            try:
                _, rnorm, _ = newton_solve(res, jac, np.array([3.0]), 0.0, max_iter=k)
            except NoConvergence as err:
                rnorm = err.residual_norm
            if rnorm == 0.0 or rnorm is None:
                break
            norms.append(float(rnorm))
        tail = [n for n in norms if n > 1e-12]
        assert len(tail) >= 3
        for a, b in zip(tail, tail[1:]):
            assert b <= a ** 2  # quadratic contraction (|r_next| ~ r^2/16 here)

    def test_singular_jacobian(self):
        res = lambda x: np.array([x[0] + x[1], x[0] + x[1]])
        jac = lambda x: np.array([[1.0, 1.0], [1.0, 1.0]])
        with pytest.raises(SingularSystem):
            newton_solve(res, jac, np.array([1.0, 2.0]), 1e-12)

    def test_no_convergence_carries_norm(self):
        res = lambda x: np.array([np.cos(x[0]) + 2.0])  # no root
        jac = lambda x: np.array([[-np.sin(x[0]) - 1e-3]])
        with pytest.raises(NoConvergence) as err:
            newton_solve(res, jac, np.array([0.3]), 1e-12, max_iter=5)
        assert err.value.residual_norm is not None

    def test_extended_mode(self):
        import mpmath
        res = lambda x: np.array([x[0] ** 2 - 2], dtype=object)
        jac = lambda x: np.array([[2 * x[0]]], dtype=object)
        x, rnorm, _ = newton_solve(res, jac, np.array([mpmath.mpf(1)], dtype=object),
                                   1e-30, precision=EXTENDED)
        with mpmath.mp.workdps(34):
            assert abs(x[0] - mpmath.sqrt(2)) < mpmath.mpf("1e-30")


class TestRichardson:
    def test_constant_sequence(self):
        pts = [(0.1 * 0.5 ** k, 7.0) for k in range(5)]
        value, acc = richardson_extrapolate(pts)
        assert value == pytest.approx(7.0, abs=1e-14)
        assert acc == pytest.approx(0.0, abs=1e-14)

    def test_exact_linear_error(self):
        pts = [(0.1 * 0.5 ** k, 3.0 + 0.1 * 0.5 ** k) for k in range(5)]
        value, acc = richardson_extrapolate(pts, steps=1)
        assert value == pytest.approx(3.0, abs=1e-14)
        value3, _ = richardson_extrapolate(pts, steps=3)
        assert value3 == pytest.approx(3.0, abs=1e-13)

    def test_sin_derivative(self):
        # difference slope of sin at 0 on the k = 1..8 ladder; analytic derivative 1
        hs = [0.1 * 0.5 ** k for k in range(1, 9)]
        pts = [(h, np.sin(h) / h) for h in hs]
        value, acc = richardson_extrapolate(pts, steps=3)
        assert abs(value - 1.0) < 1e-12
        assert acc < 1e-12

    def test_order_lift(self):
        c, a, b = 0.7, 2.3, -1.9
        pts = [(0.2 * 0.5 ** k, c + a * (0.2 * 0.5 ** k) + b * (0.2 * 0.5 ** k) ** 2)
               for k in range(5)]
        value, _ = richardson_extrapolate(pts, steps=2)
        assert abs(value - c) <= 100 * np.finfo(float).eps

    def test_insufficient_data(self):
        with pytest.raises(InsufficientData):
            richardson_extrapolate([(0.1, 1.0), (0.05, 1.0)], steps=3)

    def test_non_halving_rejected(self):
        with pytest.raises(ValueError):
            richardson_extrapolate([(0.1, 1.0), (0.07, 1.0), (0.035, 1.0),
                                    (0.0175, 1.0)], steps=1)
