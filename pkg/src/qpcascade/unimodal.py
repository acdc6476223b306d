"""Unforced logistic cascade: superstable parameters, period doublings, ratio limits.

The map is l_a(x) = a*x*(1-x).  ``find_superstable`` locates the parameter
s_n where the critical point 1/2 is 2^n-periodic; ``find_period_doubling``
locates d_n where the attracting 2^n-cycle has multiplier -1.  Ratios of
consecutive gaps of either sequence converge to the universal doubling
constant 4.66920...
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    MinimalPeriodViolation,
    NoConvergence,
    QpCascadeError,
    SingularSystem,
    ZeroDenominator,
)
from .numerics import STANDARD, get_precision

#: Universal period-doubling ratio (quadratic maximum), to full double accuracy.
FEIGENBAUM_DELTA = 4.669201609102990671853

#: Separation required between return distances when verifying minimal period.
MINIMAL_PERIOD_TOL = 1e-6


def logistic_eval(alpha, x):
    """One application of the logistic map a*x*(1-x)."""
    return alpha * x * (1 - x)


def iterate_with_multiplier(alpha, x0, k):
    """k-th iterate of the logistic map and the derivative product along the orbit.

    Returns (x_k, prod_{j<k} alpha*(1-2*x_j)).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    x = x0
    mult = alpha * 0 + 1  # unity in the scalar type of alpha
    for _ in range(k):
        mult = mult * alpha * (1 - 2 * x)
        x = logistic_eval(alpha, x)
    return x, mult


def _critical_orbit(alpha, q, prec):
    """f^q(1/2) - 1/2 and its alpha-derivative by forward accumulation."""
    half = prec.scalar(0.5)
    x = half
    t = prec.scalar(0)
    for _ in range(q):
        t = x * (1 - x) + alpha * (1 - 2 * x) * t
        x = alpha * x * (1 - x)
    return x - half, t


_superstable_cache = {}
_doubling_cache = {}


def _default_superstable_bracket(n, prec):
    if n == 0:
        return (prec.scalar(1.5), prec.scalar(2.5))
    if n == 1:
        return (prec.scalar(3.1), prec.scalar(3.3))
    s_prev = find_superstable(n - 1, precision=prec)
    s_prev2 = find_superstable(n - 2, precision=prec)
    step = (s_prev - s_prev2) / FEIGENBAUM_DELTA
    # the next superstable value sits roughly one shrunken gap further right
    return (s_prev + prec.scalar(0.55) * step, s_prev + prec.scalar(1.6) * step)


def find_superstable(n, bracket=None, tol=None, precision=STANDARD):
    """Parameter s_n at which the critical point 1/2 is 2^n-periodic.

    Bisection inside the bracket (seeded from the asymptotic gap law when not
    given) followed by a Newton polish.  Verifies the orbit does not close up
    at any shorter power-of-two period.
    """
    prec = get_precision(precision)
    key = (n, prec.name)
    if bracket is None and key in _superstable_cache:
        return _superstable_cache[key]
    if n < 0:
        raise ValueError("n must be >= 0")
    with prec.context():
        if tol is None:
            tol = 100 * prec.eps
        q = 2 ** n
        lo, hi = bracket if bracket is not None else _default_superstable_bracket(n, prec)
        lo, hi = prec.scalar(lo), prec.scalar(hi)
        flo, _ = _critical_orbit(lo, q, prec)
        fhi, _ = _critical_orbit(hi, q, prec)
        if (flo > 0) == (fhi > 0):
            raise NoConvergence(
                f"superstable bracket ({float(lo)}, {float(hi)}) does not straddle a root for n={n}"
            )
        # bisection to reach the Newton basin
        for _ in range(60):
            mid = (lo + hi) / 2
            fm, _ = _critical_orbit(mid, q, prec)
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
        alpha = (lo + hi) / 2
        at_resolution = False
        prev_step = None
        stalled = 0
        for _ in range(100):
            f, t = _critical_orbit(alpha, q, prec)
            if t == 0:
                break
            step = f / t
            alpha = alpha - step
            astep = abs(step)
            if astep <= 2 * abs(alpha) * prec.eps:
                # alpha cannot be resolved further in this precision mode
                at_resolution = True
                break
            if prev_step is not None and astep >= prev_step / 2:
                # steps stopped contracting: dithering at the roundoff floor
                stalled += 1
                if stalled >= 3 and astep < 1e-6 * abs(alpha):
                    at_resolution = True
                    break
            else:
                stalled = 0
            prev_step = astep
        f, _ = _critical_orbit(alpha, q, prec)
        if abs(f) > tol and not at_resolution:
            raise NoConvergence(f"superstable solve stalled at |f|={float(abs(f)):.3e}",
                                residual_norm=abs(f))
        # minimal period: no earlier power-of-two return within tolerance
        for m in range(n):
            fm, _ = _critical_orbit(alpha, 2 ** m, prec)
            if abs(fm) < MINIMAL_PERIOD_TOL:
                raise MinimalPeriodViolation(
                    f"critical orbit at alpha={float(alpha)} returns after 2^{m} steps"
                )
        if bracket is None:
            _superstable_cache[key] = alpha
        return alpha


def _cycle_with_partials(alpha, x0, q):
    """Forward pass returning f^q(x0), multiplier and all first-order partials.

    Tracks u = d x_k / d x0 and a = d x_k / d alpha along the orbit, plus the
    derivatives of the multiplier M = prod alpha*(1-2 x_k) via prefix/suffix
    products (no divisions, safe when single factors are small).
    """
    xs = np.empty(q + 1)
    us = np.empty(q + 1)
    aas = np.empty(q + 1)
    xs[0], us[0], aas[0] = x0, 1.0, 0.0
    for k in range(q):
        d = alpha * (1 - 2 * xs[k])
        xs[k + 1] = alpha * xs[k] * (1 - xs[k])
        us[k + 1] = d * us[k]
        aas[k + 1] = d * aas[k] + xs[k] * (1 - xs[k])
    dvals = alpha * (1 - 2 * xs[:q])
    prefix = np.ones(q + 1)
    np.cumprod(dvals, out=prefix[1:])
    suffix = np.ones(q + 1)
    suffix[:q] = np.cumprod(dvals[::-1])[::-1]
    mult = prefix[q]
    # dM/dp = sum_k prefix[k] * dD_k/dp * suffix[k+1]
    dD_dx = -2.0 * alpha * us[:q]
    dD_da = (1 - 2 * xs[:q]) - 2.0 * alpha * aas[:q]
    dM_dx0 = float(np.sum(prefix[:q] * dD_dx * suffix[1:]))
    dM_da = float(np.sum(prefix[:q] * dD_da * suffix[1:]))
    return xs[q], us[q], aas[q], mult, dM_dx0, dM_da


def _attracting_cycle_point(alpha, q, transient=None):
    x = 0.31
    steps = transient if transient is not None else max(4000, 40 * q)
    for _ in range(steps):
        x = alpha * x * (1 - x)
    return x


def find_period_doubling(n, bracket=None, tol=1e-12, precision=STANDARD):
    """Parameter d_n where the attracting 2^n-cycle has multiplier -1.

    Solves (f^q(x) - x, M(x, alpha) + 1) = 0 jointly in (x, alpha); the joint
    solve avoids differentiating an implicitly defined cycle.
    """
    prec = get_precision(precision)
    key = (n, prec.name)
    if bracket is None and key in _doubling_cache:
        return _doubling_cache[key]
    if n < 0:
        raise ValueError("n must be >= 0")
    if prec.extended:
        # polish the standard-precision value with extended Newton steps
        d_std = find_period_doubling(n, bracket=bracket, tol=tol)
        return _polish_doubling_extended(n, d_std, prec)
    q = 2 ** n
    if bracket is not None:
        alpha = 0.5 * (bracket[0] + bracket[1])
    elif n == 0:
        alpha = 3.1
    elif n == 1:
        alpha = 3.45
    else:
        d1 = find_period_doubling(n - 1)
        d2 = find_period_doubling(n - 2)
        alpha = d1 + (d1 - d2) / FEIGENBAUM_DELTA

    x = _attracting_cycle_point(alpha, q)
    # joint Newton; the multiplier row has alpha-sensitivity ~ delta^n, so its
    # residual floor is that sensitivity times one alpha ulp -- convergence is
    # judged by step stagnation, not by the raw residual alone
    z = np.array([x, alpha])
    eps = np.finfo(float).eps
    prev_step = None
    stalled = 0
    at_resolution = False
    for _ in range(80):
        xq, u, aav, mult, dMx, dMa = _cycle_with_partials(z[1], z[0], q)
        r = np.array([xq - z[0], mult + 1.0])
        J = np.array([[u - 1.0, aav], [dMx, dMa]])
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError as exc:
            raise SingularSystem(str(exc)) from exc
        z = z + step
        astep = np.max(np.abs(step))
        if astep <= 4 * eps * max(1.0, abs(z[1])):
            at_resolution = True
            break
        if prev_step is not None and astep >= prev_step / 2:
            stalled += 1
            if stalled >= 3 and astep < 1e-6:
                at_resolution = True
                break
        else:
            stalled = 0
        prev_step = astep
    xq, u, aav, mult, dMx, dMa = _cycle_with_partials(z[1], z[0], q)
    graph_ok = abs(xq - z[0]) <= max(tol, 1e4 * q * eps)
    mult_floor = max(tol, 64 * abs(dMa) * abs(z[1]) * eps + 1e3 * eps)
    mult_ok = abs(mult + 1.0) <= mult_floor
    if not ((at_resolution and graph_ok and mult_ok) or
            (abs(xq - z[0]) <= tol and abs(mult + 1.0) <= tol)):
        raise NoConvergence(
            f"doubling solve stalled: |f^q(x)-x|={abs(xq - z[0]):.2e}, "
            f"|M+1|={abs(mult + 1.0):.2e}",
            residual_norm=max(abs(xq - z[0]), abs(mult + 1.0)),
        )
    d = float(z[1])
    if bracket is not None and not (bracket[0] <= d <= bracket[1]):
        raise NoConvergence(f"period-doubling solve left the bracket: {d}")
    if bracket is None:
        _doubling_cache[key] = d
    return d


def _polish_doubling_extended(n, d_std, prec):
    q = 2 ** n
    with prec.context():
        alpha = prec.scalar(d_std)
        x = prec.scalar(_attracting_cycle_point(d_std, q))
        for _ in range(60):
            xs = [x]
            for _ in range(q):
                xs.append(alpha * xs[-1] * (1 - xs[-1]))
            dvals = [alpha * (1 - 2 * xs[k]) for k in range(q)]
            mult = prec.scalar(1)
            for d in dvals:
                mult *= d
            # finite-difference Jacobian is adequate for polishing
            h = prec.scalar(10) ** (-prec.dps // 2)
            f0 = np.array([xs[q] - x, mult + 1], dtype=object)

            def fval(xx, aa):
                y = xx
                m = prec.scalar(1)
                for _ in range(q):
                    m *= aa * (1 - 2 * y)
                    y = aa * y * (1 - y)
                return np.array([y - xx, m + 1], dtype=object)

            fx = (fval(x + h, alpha) - f0) / h
            fa = (fval(x, alpha + h) - f0) / h
            det = fx[0] * fa[1] - fx[1] * fa[0]
            dx = (-f0[0] * fa[1] + f0[1] * fa[0]) / det
            da = (-fx[0] * f0[1] + fx[1] * f0[0]) / det
            x, alpha = x + dx, alpha + da
            if abs(da) < abs(alpha) * prec.eps * 100:
                break
        return alpha


def feigenbaum_ratios(values):
    """Gap ratios (v_n - v_{n-1}) / (v_{n+1} - v_n) of a monotone sequence."""
    v = list(values)
    if len(v) < 3:
        raise ValueError("need at least 3 values")
    out = []
    for k in range(1, len(v) - 1):
        denom = v[k + 1] - v[k]
        if denom == 0:
            raise ZeroDenominator(f"values {k} and {k + 1} coincide")
        out.append((v[k] - v[k - 1]) / denom)
    return np.array([float(r) for r in out])


def accumulation_alpha(s_values):
    """Cascade accumulation point from the geometric tail of the s_n sequence."""
    s = [float(v) for v in s_values]
    if len(s) < 2:
        raise ValueError("need at least two values")
    return s[-1] + (s[-1] - s[-2]) / (FEIGENBAUM_DELTA - 1.0)


@dataclass
class CascadeTable:
    """Computed s_n / d_n values with their gap-ratio estimates."""

    entries: list = field(default_factory=list)  # (n, s_n, d_n)
    ratios_s: np.ndarray = None
    ratios_d: np.ndarray = None

    @property
    def s_values(self):
        return [e[1] for e in self.entries]

    @property
    def d_values(self):
        return [e[2] for e in self.entries]


def cascade_table(n_max, precision=STANDARD):
    """s_n, d_n for n = 0..n_max plus both ratio sequences.

    Checks the interleaving d_n < s_{n+1} < d_{n+1} of doubling and
    superstable parameters.
    """
    prec = get_precision(precision)
    entries = []
    for n in range(n_max + 1):
        s = float(find_superstable(n, precision=prec))
        d = float(find_period_doubling(n, precision=prec))
        entries.append((n, s, d))
    for n in range(n_max):
        if not (entries[n][2] < entries[n + 1][1] < entries[n + 1][2]):
            raise QpCascadeError(
                f"interleaving violated at n={n}: d_n={entries[n][2]}, "
                f"s_n+1={entries[n + 1][1]}, d_n+1={entries[n + 1][2]}"
            )
    table = CascadeTable(entries=entries)
    if n_max >= 2:
        table.ratios_s = feigenbaum_ratios(table.s_values)
        table.ratios_d = feigenbaum_ratios(table.d_values)
    return table
