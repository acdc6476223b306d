import numpy as np
import pytest

from qpcascade.forced import (
    ClassifyOptions,
    CylinderState,
    ForcedFamily,
    ForcingSpec,
    ParamPoint,
    classify_attractor,
    cocycle_derivative,
    double_map,
    lyapunov_exponent,
    map_step,
)

GOLDEN = (np.sqrt(5) - 1) / 2


def family(kind="multiplicative-cos", E=0.0, omega=GOLDEN):
    return ForcedFamily(omega=omega, forcing=ForcingSpec(kind, E))


class TestFamilies:
    def test_omega_stored_mod_one(self):
        fam = family(omega=2 * GOLDEN)
        assert 0 <= fam.omega < 1
        assert fam.omega == pytest.approx((2 * GOLDEN) % 1, abs=1e-15)

    def test_near_rational_rejected(self):
        with pytest.raises(ValueError):
            family(omega=0.5)
        with pytest.raises(ValueError):
            family(omega=3 / 7 + 1e-14)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            ForcingSpec("cubic")

    def test_eps_zero_reduces_to_logistic(self):
        rng = np.random.default_rng(0)
        for kind in ("multiplicative-cos", "additive-cos", "additive-two-harmonic"):
            fam = family(kind, E=0.3)
            for _ in range(100):
                alpha, x, th = rng.uniform(1, 4), rng.uniform(0, 1), rng.uniform(0, 1)
                s = map_step(fam, ParamPoint(alpha, 0.0), CylinderState(th, x))
                assert s.x == pytest.approx(alpha * x * (1 - x), abs=1e-12)

    def test_additive_pure_forcing(self):
        fam = family("additive-cos")
        s = map_step(fam, ParamPoint(0.0, 1.0), CylinderState(0.0, 0.3))
        assert s.x == pytest.approx(1.0, abs=1e-15)

    def test_two_harmonic_degenerates_at_E0(self):
        rng = np.random.default_rng(1)
        f_a = family("additive-cos")
        f_t = family("additive-two-harmonic", E=0.0)
        for _ in range(100):
            p = ParamPoint(rng.uniform(1, 4), rng.uniform(0, 0.2))
            s = CylinderState(rng.uniform(0, 1), rng.uniform(0, 1))
            assert map_step(f_a, p, s) == map_step(f_t, p, s)

    def test_theta_marginal_is_rigid_rotation(self):
        fam = family()
        s = CylinderState(0.2, 0.4)
        p = ParamPoint(3.0, 0.05)
        k = 1000
        for _ in range(k):
            s = map_step(fam, p, s)
        assert s.theta == pytest.approx((0.2 + k * fam.omega) % 1.0, abs=1e-12 * k)


class TestCocycle:
    def test_critical_line(self):
        fam = family()
        for th in np.linspace(0, 1, 7, endpoint=False):
            assert cocycle_derivative(fam, ParamPoint(3.7, 0.4),
                                      CylinderState(th, 0.5)) == 0.0

    def test_additive_theta_independent(self):
        fam = family("additive-cos")
        vals = [cocycle_derivative(fam, ParamPoint(2.5, 0.7), CylinderState(th, 0.6))
                for th in np.linspace(0, 1, 5, endpoint=False)]
        assert np.allclose(vals, -0.5, atol=1e-15)

    def test_depth2_chain_rule(self):
        fam = double_map(family())
        d = cocycle_derivative(fam, ParamPoint(2.5, 0.0), CylinderState(0.3, 0.6))
        assert d == pytest.approx(0.25, abs=1e-14)


class TestDoubling:
    def test_omega_doubles_mod_one(self):
        fam = double_map(family())
        assert fam.omega == pytest.approx(np.sqrt(5) - 2, abs=1e-14)

    def test_composition_identity_bit_exact(self):
        rng = np.random.default_rng(2)
        fam = family()
        f2 = double_map(fam)
        p = ParamPoint(3.4, 0.07)
        for _ in range(100):
            s = CylinderState(rng.uniform(0, 1), rng.uniform(0, 1))
            two_steps = map_step(fam, p, map_step(fam, p, s))
            assert map_step(f2, p, s) == two_steps  # identical float sequence

    def test_lyapunov_additivity(self):
        fam = family()
        p = ParamPoint(2.5, 0.01)
        l1, esc1 = lyapunov_exponent(fam, p)
        l2, esc2 = lyapunov_exponent(double_map(fam), p)
        assert not esc1 and not esc2
        assert l2 == pytest.approx(2 * l1, abs=2e-3)


class TestLyapunov:
    def test_fixed_point_closed_form(self):
        lyap, esc = lyapunov_exponent(family(), ParamPoint(2.5, 0.0))
        assert not esc
        assert lyap == pytest.approx(np.log(0.5), abs=1e-3)

    def test_two_cycle_closed_form(self):
        lyap, esc = lyapunov_exponent(family(), ParamPoint(3.2, 0.0))
        assert not esc
        assert lyap == pytest.approx(np.log(abs(4 + 2 * 3.2 - 3.2 ** 2)) / 2, abs=1e-3)

    def test_escape(self):
        lyap, esc = lyapunov_exponent(family(), ParamPoint(4.5, 0.0),
                                      seed_state=CylinderState(0.0, 0.5))
        assert esc

    def test_eps_zero_matches_1d_on_random_points(self):
        rng = np.random.default_rng(3)
        for kind in ("multiplicative-cos", "additive-cos"):
            fam = family(kind)
            for _ in range(3):
                alpha = rng.uniform(2.2, 2.9)
                s = CylinderState(rng.uniform(0, 1), rng.uniform(0.2, 0.8))
                lyap, esc = lyapunov_exponent(fam, ParamPoint(alpha, 0.0),
                                              transient=4000, iters=20000, seed_state=s)
                assert lyap == pytest.approx(np.log(abs(2 - alpha)), abs=5e-3)

    def test_eps_zero_exponent_matches_1d_orbit_sum(self):
        # same orbit, same log sum as a plain 1D computation, to 1e-12
        rng = np.random.default_rng(4)
        for kind in ("multiplicative-cos", "additive-cos", "additive-two-harmonic"):
            fam = family(kind)
            for _ in range(4):
                alpha = rng.uniform(1.5, 3.5)
                x0 = rng.uniform(0.1, 0.9)
                transient, iters = 200, 2000
                lyap, esc = lyapunov_exponent(
                    fam, ParamPoint(alpha, 0.0), transient, iters,
                    seed_state=CylinderState(0.0, x0))
                x = x0
                for _ in range(transient):
                    x = alpha * x * (1 - x)
                total = 0.0
                for _ in range(iters):
                    total += np.log(max(abs(alpha * (1 - 2 * x)), 1e-300))
                    x = alpha * x * (1 - x)
                assert not esc
                assert lyap == pytest.approx(total / iters, abs=1e-12)


class TestClassification:
    def test_attracting_fixed_point(self):
        res = classify_attractor(family(), ParamPoint(2.5, 0.0))
        assert res.label == "reducible-nonchaotic"
        assert res.period_detected == 1

    def test_divergent(self):
        res = classify_attractor(family(), ParamPoint(4.5, 0.0))
        assert res.label == "divergent"

    def test_chaotic(self):
        # 1D Lyapunov oracle at alpha=3.8 gives ~ +0.43
        res = classify_attractor(family(), ParamPoint(3.8, 0.0))
        assert res.label == "chaotic"
        assert res.lyapunov == pytest.approx(0.43, abs=0.05)

    def test_forced_fixed_curve_reducible(self):
        res = classify_attractor(family(), ParamPoint(2.5, 0.01))
        assert res.label == "reducible-nonchaotic"
        assert res.period_detected == 1

    def test_inside_wedge_nonreducible(self):
        # alpha = 3.2 at eps = 0.01 sits inside the non-reducibility wedge
        # around the period-2 superstable parameter (slopes ~ +-5.83)
        res = classify_attractor(family(), ParamPoint(3.2, 0.01))
        assert res.label == "nonreducible-nonchaotic"
        assert res.period_detected == 2

    def test_outside_wedge_reducible(self):
        res = classify_attractor(family(), ParamPoint(3.1, 0.01))
        assert res.label == "reducible-nonchaotic"
        assert res.period_detected == 2
