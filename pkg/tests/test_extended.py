"""Extended-precision mode: smoke checks plus the optional long-running
reproduction of the deeper slope rows (run with ``pytest -m extended``)."""

import numpy as np
import pytest

import qpcascade as qc
from qpcascade.analysis import SlopeJobConfig
from qpcascade.curves import constant_curve

GOLDEN = (np.sqrt(5) - 1) / 2
MULT = qc.ForcingSpec("multiplicative-cos")


def family():
    return qc.ForcedFamily(omega=GOLDEN, forcing=MULT)


class TestExtendedSmoke:
    def test_curve_solve_meets_extended_tolerance(self):
        curve = qc.solve_invariant_curve(
            family(), qc.ParamPoint(2.5, 0.01), 0,
            constant_curve(0.55, 16, qc.EXTENDED), precision=qc.EXTENDED)
        assert float(curve.residual_norm) <= 1e-25
        assert float(curve.branch0.coeffs.cos[0]) == pytest.approx(0.59995, abs=1e-4)

    def test_superstable_extended_digits(self):
        import mpmath
        s1 = qc.find_superstable(1, precision=qc.EXTENDED)
        with mpmath.mp.workdps(40):
            exact = 1 + mpmath.sqrt(5)
            assert abs(s1 - exact) < mpmath.mpf("1e-30")

    def test_slope_anchor_quick_ladder(self):
        cfg = SlopeJobConfig(h0=1e-2, kappa=0.25, M=4, extrapolation_steps=3,
                             n_grid=16)
        rec = qc.estimate_slope(MULT, GOLDEN, 0, cfg, precision=qc.EXTENDED)
        assert rec.alpha_prime == pytest.approx(-2.0, abs=1e-6)
        assert rec.accuracy < 1e-5


@pytest.mark.extended
class TestExtendedReproduction:
    """Deep slope rows at extended precision (optional, several minutes)."""

    TABLE = [-2.0, -5.8329149229, -8.4942599432, -16.351279467,
             -11.252460775, -12.243326651, -18.079693906, -34.735234067,
             -29.583312211, -41.569457725]

    @pytest.mark.parametrize("n", range(10))
    def test_slopes_to_n9(self, n):
        # the deeper ladder (M=12) trades extrapolation truncation for rungs
        # that extended precision can resolve without a noise penalty
        cfg = SlopeJobConfig(h0=1e-2, kappa=0.25, M=12, extrapolation_steps=3,
                             n_grid=32)
        rec = qc.estimate_slope(MULT, GOLDEN, n, cfg, precision=qc.EXTENDED)
        assert rec.alpha_prime == pytest.approx(self.TABLE[n], rel=1e-6)
