"""Quasi-periodically forced logistic families on the cylinder.

A family couples the rigid rotation theta -> theta + omega with a fiber map
x -> f(theta, x).  Three forcing shapes are implemented:

    multiplicative-cos      a*x*(1-x) * (1 + eps*cos(2 pi theta))
    additive-cos            a*x*(1-x) + eps*cos(2 pi theta)
    additive-two-harmonic   a*x*(1-x) + eps*(cos(2 pi theta) + E*cos(4 pi theta))

``double_map`` composes a family with itself (rotation doubles mod 1); all
orbit kernels iterate base steps so composed families behave bit-identically
to repeated stepping.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import STANDARD

FORCING_KINDS = ("multiplicative-cos", "additive-cos", "additive-two-harmonic")

#: Orbits beyond this |x| are declared divergent (the trap region is [0, 1]).
ESCAPE_BOUND = 10.0


@dataclass(frozen=True)
class ForcingSpec:
    kind: str
    E: float = 0.0

    def __post_init__(self):
        if self.kind not in FORCING_KINDS:
            raise ValueError(f"unknown forcing kind {self.kind!r}")
        if not np.isfinite(self.E):
            raise ValueError("E must be finite")


@dataclass(frozen=True)
class ParamPoint:
    alpha: float
    epsilon: float


@dataclass(frozen=True)
class CylinderState:
    theta: float
    x: float


def _near_rational(omega, max_q=100, tol=1e-12):
    for q in range(1, max_q + 1):
        p = round(omega * q)
        if abs(omega - p / q) < tol:
            return True
    return False


@dataclass(frozen=True)
class ForcedFamily:
    """Rotation number (stored mod 1) plus forcing; composition_depth counts
    how many base steps one application performs (2^m after m doublings)."""

    omega: float
    forcing: ForcingSpec
    composition_depth: int = 1
    base_omega: float = field(default=None)

    def __post_init__(self):
        omega = float(self.omega) % 1.0
        object.__setattr__(self, "omega", omega)
        if self.base_omega is None:
            if self.composition_depth != 1:
                raise ValueError("base_omega required when composition_depth > 1")
            object.__setattr__(self, "base_omega", omega)
        d = self.composition_depth
        if d < 1 or (d & (d - 1)) != 0:
            raise ValueError("composition_depth must be a power of two")
        if _near_rational(omega):
            raise ValueError(f"omega={omega} is within 1e-12 of a rational p/q, q <= 100")


def double_map(family):
    """The self-composed family: rotation 2*omega mod 1, twice the depth."""
    return ForcedFamily(
        omega=(2.0 * family.omega) % 1.0,
        forcing=family.forcing,
        composition_depth=2 * family.composition_depth,
        base_omega=family.base_omega,
    )


# ---------------------------------------------------------------------------
# fiber map and its partial derivatives (vectorized, precision-agnostic)
# ---------------------------------------------------------------------------

def _forcing_factor(forcing, eps, theta, prec):
    two_pi = 2 * prec.pi
    if forcing.kind == "multiplicative-cos":
        return 1 + eps * prec.cos(two_pi * theta)
    if forcing.kind == "additive-cos":
        return eps * prec.cos(two_pi * theta)
    return eps * (prec.cos(two_pi * theta) + forcing.E * prec.cos(2 * two_pi * theta))


def fiber_map(forcing, alpha, eps, theta, x, prec=STANDARD):
    core = alpha * x * (1 - x)
    if forcing.kind == "multiplicative-cos":
        return core * _forcing_factor(forcing, eps, theta, prec)
    return core + _forcing_factor(forcing, eps, theta, prec)


def fiber_dx(forcing, alpha, eps, theta, x, prec=STANDARD):
    d = alpha * (1 - 2 * x)
    if forcing.kind == "multiplicative-cos":
        return d * _forcing_factor(forcing, eps, theta, prec)
    return d


def fiber_dalpha(forcing, alpha, eps, theta, x, prec=STANDARD):
    core = x * (1 - x)
    if forcing.kind == "multiplicative-cos":
        return core * _forcing_factor(forcing, eps, theta, prec)
    return core


def fiber_dx_dx(forcing, alpha, eps, theta, x, prec=STANDARD):
    """d/dx of fiber_dx (curvature of the fiber map)."""
    if forcing.kind == "multiplicative-cos":
        return -2 * alpha * _forcing_factor(forcing, eps, theta, prec)
    return -2 * alpha + 0 * x


def fiber_dx_dalpha(forcing, alpha, eps, theta, x, prec=STANDARD):
    """d/dalpha of fiber_dx."""
    if forcing.kind == "multiplicative-cos":
        return (1 - 2 * x) * _forcing_factor(forcing, eps, theta, prec)
    return 1 - 2 * x


# ---------------------------------------------------------------------------
# stepping and orbit kernels
# ---------------------------------------------------------------------------

def map_step(family, p, s):
    """One application of the family (composition_depth base steps)."""
    theta, x = s.theta, s.x
    for _ in range(family.composition_depth):
        x = fiber_map(family.forcing, p.alpha, p.epsilon, theta, x)
        theta = (theta + family.base_omega) % 1.0
    return CylinderState(theta, x)


def cocycle_derivative(family, p, s):
    """d/dx of one family application (chain product over base steps)."""
    theta, x = s.theta, s.x
    prod = 1.0
    for _ in range(family.composition_depth):
        prod *= fiber_dx(family.forcing, p.alpha, p.epsilon, theta, x)
        x = fiber_map(family.forcing, p.alpha, p.epsilon, theta, x)
        theta = (theta + family.base_omega) % 1.0
    return prod


def orbit_transfer(family, p, theta0, x0, applications, prec=STANDARD,
                   want_dalpha=False, want_lyap_rows=False):
    """Iterate ``applications`` family steps from grid arrays (theta0, x0).

    Returns a dict with the final fiber values ``x``, the chain-rule product
    ``m`` = d x_final / d x0 and, on request, ``dalpha`` = d x_final / d alpha
    and the row weights of d(sum log|D_k|) w.r.t. x0 and alpha used by the
    zero-Lyapunov defining system.
    """
    forcing = family.forcing
    alpha, eps = p.alpha, p.epsilon
    steps = applications * family.composition_depth
    x = x0 + 0 * x0  # copy preserving dtype
    m = x * 0 + 1
    da = x * 0 if want_dalpha else None
    lw_x = x * 0 if want_lyap_rows else None
    lw_a = x * 0 if want_lyap_rows else None
    theta = theta0
    dw = family.base_omega
    # trial Newton steps may wander into overflow; the caller rejects the
    # resulting non-finite residuals, so arithmetic warnings are noise here
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for k in range(steps):
            d = fiber_dx(forcing, alpha, eps, theta, x, prec)
            if want_lyap_rows:
                ddx = fiber_dx_dx(forcing, alpha, eps, theta, x, prec)
                dda = fiber_dx_dalpha(forcing, alpha, eps, theta, x, prec)
                lw_x = lw_x + ddx * m / d
                lw_a = lw_a + (ddx * da + dda) / d
            if want_dalpha:
                da = d * da + fiber_dalpha(forcing, alpha, eps, theta, x, prec)
            x = fiber_map(forcing, alpha, eps, theta, x, prec)
            m = d * m
            theta = (theta + dw) % 1
    out = {"x": x, "m": m, "theta": theta}
    if want_dalpha:
        out["dalpha"] = da
    if want_lyap_rows:
        out["lyap_wx"] = lw_x
        out["lyap_wa"] = lw_a
    return out


def lyapunov_exponent(family, p, transient=10_000, iters=100_000, seed_state=None):
    """Ergodic average of log|d f/d x| along the orbit (per family application).

    Returns (lyap, escaped); when the orbit leaves |x| <= ESCAPE_BOUND at any
    point the exponent is meaningless and escaped is True.
    """
    if transient < 1 or iters < 1:
        raise ValueError("transient and iters must be >= 1")
    s = seed_state or CylinderState(0.0, 0.5)
    theta, x = s.theta, s.x
    forcing, alpha, eps = family.forcing, p.alpha, p.epsilon
    dw = family.base_omega
    steps_per_app = family.composition_depth
    for _ in range(transient * steps_per_app):
        x = fiber_map(forcing, alpha, eps, theta, x)
        theta = (theta + dw) % 1.0
        if not (-ESCAPE_BOUND <= x <= ESCAPE_BOUND):
            return 0.0, True
    total = 0.0
    for _ in range(iters * steps_per_app):
        d = fiber_dx(forcing, alpha, eps, theta, x)
        total += np.log(max(abs(d), 1e-300))
        x = fiber_map(forcing, alpha, eps, theta, x)
        theta = (theta + dw) % 1.0
        if not (-ESCAPE_BOUND <= x <= ESCAPE_BOUND):
            return 0.0, True
    return total / iters, False


# ---------------------------------------------------------------------------
# attractor classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassifyOptions:
    transient: int = 10_000
    iters: int = 100_000
    lyap_tol: float = None       # default 10/sqrt(iters)
    dist_tol: float = 2e-3       # rms tolerance of the periodic-curve fit
    m_max: int = 12              # periods up to 2^m_max
    fit_harmonics: int = 8
    fit_samples: int = 96
    seed_state: CylinderState = CylinderState(0.0, 0.5)

    @property
    def effective_lyap_tol(self):
        return self.lyap_tol if self.lyap_tol is not None else 10.0 / np.sqrt(self.iters)


@dataclass(frozen=True)
class AttractorClass:
    label: str                  # zero-lyapunov | chaotic | nonreducible-nonchaotic |
                                # reducible-nonchaotic | divergent
    lyapunov: float
    period_detected: int = None


LABELS = ("zero-lyapunov", "chaotic", "nonreducible-nonchaotic",
          "reducible-nonchaotic", "divergent")


def detect_period(family, p, opts=ClassifyOptions(), state=None):
    """Smallest 2^m such that the orbit closes onto a continuous curve family.

    For each candidate period the orbit is sampled every 2^m applications;
    those samples lie on a single branch, so a low-order trig fit against the
    sampled angles must reproduce them to ``dist_tol`` (rms).  Returns
    (period, fitted_coeffs, theta_base) or (None, None, None).
    """
    s = state or opts.seed_state
    theta, x = s.theta, s.x
    # settle on the attractor first
    out = orbit_transfer(family, p, theta, x, opts.transient)
    theta, x = float(out["theta"]), float(out["x"])
    K = opts.fit_samples
    for m in range(opts.m_max + 1):
        period = 2 ** m
        ys = np.empty(K)
        phis = np.empty(K)
        for k in range(K):
            phis[k] = theta
            ys[k] = x
            res = orbit_transfer(family, p, theta, x, period)
            theta, x = float(res["theta"]), float(res["x"])
            if not (-ESCAPE_BOUND <= x <= ESCAPE_BOUND):
                return None, None, None
        coeffs, rms = _fit_trig(phis, ys, opts.fit_harmonics)
        if rms < opts.dist_tol:
            return period, coeffs, phis[0]
    return None, None, None


def _fit_trig(phis, ys, harmonics):
    cols = [np.ones_like(phis)]
    for k in range(1, harmonics + 1):
        cols.append(np.cos(2 * np.pi * k * phis))
        cols.append(np.sin(2 * np.pi * k * phis))
    A = np.column_stack(cols)
    sol, *_ = np.linalg.lstsq(A, ys, rcond=None)
    rms = float(np.sqrt(np.mean((A @ sol - ys) ** 2)))
    return sol, rms


def classify_attractor(family, p, opts=ClassifyOptions()):
    """Label one parameter point following the diagram color coding."""
    lyap, escaped = lyapunov_exponent(
        family, p, opts.transient, opts.iters, opts.seed_state
    )
    if escaped:
        return AttractorClass("divergent", float("nan"))
    tol = opts.effective_lyap_tol
    if lyap > tol:
        return AttractorClass("chaotic", lyap)
    if abs(lyap) <= tol:
        return AttractorClass("zero-lyapunov", lyap)
    period, fit_coeffs, theta_base = detect_period(family, p, opts)
    if period is None:
        return AttractorClass("nonreducible-nonchaotic", lyap)
    label = _reducibility_label(family, p, period, fit_coeffs, theta_base)
    return AttractorClass(label, lyap, period_detected=period)


def _reducibility_label(family, p, period, fit_coeffs, theta_base):
    # solved here to avoid an import cycle at module load
    from .curves import solve_invariant_curve, curve_cocycle, reducibility_status, curve_from_fit
    from .errors import QpCascadeError

    n = int(np.log2(period))
    try:
        initial = curve_from_fit(fit_coeffs, n)
        curve = solve_invariant_curve(family, p, n, initial)
        status = reducibility_status(curve_cocycle(curve))
    except QpCascadeError:
        return "nonreducible-nonchaotic"
    return "reducible-nonchaotic" if status == "reducible" else "nonreducible-nonchaotic"
