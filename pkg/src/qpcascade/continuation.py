"""Defining systems and continuation for reducibility-loss and zero-Lyapunov branches.

A reducibility-loss point fixes (curve coefficients, alpha, theta*) by the
invariance equations plus a double-zero (contact + tangency) of the curve
against the critical set x = 1/2, where the fiber derivative of all three
implemented families vanishes (|eps| < 1 in the multiplicative case).  The
zero-Lyapunov system replaces the two tangency rows by the vanishing of the
grid average of log|m|.

Branches are anchored at eps = 0: reducibility-loss curves leave the
superstable parameters of the unforced cascade, zero-Lyapunov curves leave
the period-doubling parameters.  First steps are seeded by the linearized
response of the superstable cycle, which also yields the branch slope at
eps = 0 in closed form (used as an independent cross-check of the slope
extraction pipeline).
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass, field

import numpy as np

from .curves import (
    N_MAX,
    TAIL_TOL,
    _tail_is_fat,
    basis_matrix,
    grid_thetas,
    unpack_coeffs,
)
from .errors import (
    LogSingularity,
    NoConvergence,
    SideAmbiguity,
    StepUnderflow,
)
from .forced import ParamPoint, orbit_transfer
from .numerics import STANDARD, get_precision, newton_solve
from .unimodal import find_superstable, find_period_doubling, _cycle_with_partials

ZERO_TOL = 1e-10


@dataclass
class BranchPoint:
    params: ParamPoint
    theta_star: float          # None for zero-Lyapunov points
    residual_norm: float
    coeffs: np.ndarray = None  # packed curve coefficients
    n_modes: int = None


@dataclass
class BifurcationBranch:
    kind: str                  # reducibility-loss-minus | reducibility-loss-plus | zero-lyapunov
    period_exponent: int
    points: list = field(default_factory=list)
    anchor_alpha: float = None
    family: object = None

    def alphas(self):
        return np.array([pt.params.alpha for pt in self.points])

    def epsilons(self):
        return np.array([pt.params.epsilon for pt in self.points])


# ---------------------------------------------------------------------------
# linearized response of the superstable cycle (eps -> 0 limit)
# ---------------------------------------------------------------------------

def _cycle_suffix_products(s_n, q):
    xs = np.empty(q)
    xs[0] = 0.5
    for k in range(q - 1):
        xs[k + 1] = s_n * xs[k] * (1 - xs[k])
    dphi = s_n * (1 - 2 * xs)
    suffix = np.ones(q + 1)
    suffix[:q] = np.cumprod(dphi[::-1])[::-1]
    return xs, suffix


def linearized_branch_data(family, n, s_n=None):
    """First-order branch data at the superstable anchor.

    The orbit through the critical point makes the first-order invariance
    system explicitly solvable: the periodic correction of branch0 is
    u0(phi) = a*S + W(phi - shift) with W a one/two-harmonic profile, and the
    double-zero condition picks a = -max(W)/S on one side, a = -min(W)/S on
    the other.  Returns a dict with both slopes, the tangency angles and the
    harmonic phasors needed to synthesize seed curves.
    """
    depth = family.composition_depth
    q = 2 ** n * depth
    n_base = n + int(np.log2(depth))
    if s_n is None:
        s_n = float(find_superstable(n_base))
    xs, suffix = _cycle_suffix_products(s_n, q)
    S = float(np.sum(suffix[1:] * xs * (1 - xs)))
    k = np.arange(q)
    rot = np.exp(2j * np.pi * k * family.base_omega)
    kind = family.forcing.kind
    if kind == "multiplicative-cos":
        C1 = complex(np.sum(suffix[1:] * s_n * xs * (1 - xs) * rot))
        C2 = 0j
    elif kind == "additive-cos":
        C1 = complex(np.sum(suffix[1:] * rot))
        C2 = 0j
    else:
        C1 = complex(np.sum(suffix[1:] * rot))
        C2 = family.forcing.E * complex(np.sum(suffix[1:] * rot * rot))

    def w_val(t):
        return (C1 * cmath.exp(2j * np.pi * t)).real + (C2 * cmath.exp(4j * np.pi * t)).real

    def w_d1(t):
        return (2j * np.pi * C1 * cmath.exp(2j * np.pi * t)).real + \
               (4j * np.pi * C2 * cmath.exp(4j * np.pi * t)).real

    def w_d2(t):
        return (-(2 * np.pi) ** 2 * C1 * cmath.exp(2j * np.pi * t)).real + \
               (-(4 * np.pi) ** 2 * C2 * cmath.exp(4j * np.pi * t)).real

    if abs(C2) == 0.0:
        t_max = (-cmath.phase(C1) / (2 * np.pi)) % 1.0
        t_min = (t_max + 0.5) % 1.0
        w_max, w_min = abs(C1), -abs(C1)
    else:
        tf = np.linspace(0.0, 1.0, 4096, endpoint=False)
        wf = (C1 * np.exp(2j * np.pi * tf)).real + (C2 * np.exp(4j * np.pi * tf)).real
        t_max, t_min = tf[np.argmax(wf)], tf[np.argmin(wf)]
        for _ in range(60):
            t_max -= w_d1(t_max) / w_d2(t_max)
            t_min -= w_d1(t_min) / w_d2(t_min)
        t_max %= 1.0
        t_min %= 1.0
        w_max, w_min = w_val(t_max), w_val(t_min)

    shift = (q * family.base_omega) % 1.0
    cand = {
        "max": {"slope": -w_max / S, "t_w": t_max},
        "min": {"slope": -w_min / S, "t_w": t_min},
    }
    minus_key = "max" if cand["max"]["slope"] < 0 else "min"
    plus_key = "min" if minus_key == "max" else "max"
    out = {"s_n": s_n, "S": S, "C1": C1, "C2": C2, "shift": shift}
    for side, keyname in (("minus", minus_key), ("plus", plus_key)):
        slope = cand[keyname]["slope"]
        t_w = cand[keyname]["t_w"]
        out[side] = {
            "slope": slope,
            "theta_star": (t_w + shift) % 1.0,
        }
    return out


def linearized_slope(family, n, side="minus", s_n=None):
    """Branch slope d alpha / d eps at eps = 0, from the linearized system."""
    return linearized_branch_data(family, n, s_n)[side]["slope"]


def _seed_vector(data, side, eps, N):
    """Packed coefficients of 1/2 + eps*u0 for the selected side."""
    a = data[side]["slope"]
    shift = data["shift"]
    C1s = data["C1"] * cmath.exp(-2j * np.pi * shift)
    C2s = data["C2"] * cmath.exp(-4j * np.pi * shift)
    vec = np.zeros(N)
    vec[0] = 0.5 + eps * (a * data["S"] + 0.0)
    vec[1] = eps * C1s.real
    vec[N // 2 + 1] = -eps * C1s.imag
    if abs(C2s) > 0 and N >= 8:
        vec[2] = eps * C2s.real
        vec[N // 2 + 2] = -eps * C2s.imag
    return vec


# ---------------------------------------------------------------------------
# reducibility-loss defining system
# ---------------------------------------------------------------------------

def _basis_row(N, t, prec, derivative=0):
    two_pi = 2 * prec.pi
    k_cos = np.arange(N // 2 + 1)
    k_sin = np.arange(1, N // 2)
    if prec.extended:
        kc = prec.asarray(list(k_cos))
        ks = prec.asarray(list(k_sin))
    else:
        kc, ks = k_cos.astype(float), k_sin.astype(float)
    if derivative == 0:
        return np.concatenate([prec.cos(two_pi * kc * t), prec.sin(two_pi * ks * t)])
    if derivative == 1:
        return np.concatenate([-two_pi * kc * prec.sin(two_pi * kc * t),
                               two_pi * ks * prec.cos(two_pi * ks * t)])
    return np.concatenate([-(two_pi * kc) ** 2 * prec.cos(two_pi * kc * t),
                           -(two_pi * ks) ** 2 * prec.sin(two_pi * ks * t)])


class _ContactSystem:
    """Residual/Jacobian closures for the (N+2) reducibility-loss system."""

    def __init__(self, family, n, eps, N, prec):
        self.family = family
        self.n = n
        self.q = 2 ** n
        self.eps = eps
        self.N = N
        self.prec = prec
        self.thetas = grid_thetas(N, prec)
        self.B = basis_matrix(N, self.thetas, prec)
        shift = (self.q * family.omega) % 1.0
        self.Bs = basis_matrix(N, self.thetas + prec.scalar(shift), prec)

    def residual(self, X):
        N, prec = self.N, self.prec
        vec, alpha, ts = X[:N], X[N], X[N + 1]
        p = ParamPoint(alpha, self.eps)
        x0 = self.B.dot(vec)
        out = orbit_transfer(self.family, p, self.thetas, x0, self.q, prec)
        res = np.empty(N + 2, dtype=vec.dtype)
        res[:N] = self.Bs.dot(vec) - out["x"]
        b0 = _basis_row(N, ts, prec, 0)
        b1 = _basis_row(N, ts, prec, 1)
        res[N] = b0.dot(vec) - prec.scalar(0.5)
        res[N + 1] = b1.dot(vec)
        return res

    def jacobian(self, X):
        N, prec = self.N, self.prec
        vec, alpha, ts = X[:N], X[N], X[N + 1]
        p = ParamPoint(alpha, self.eps)
        x0 = self.B.dot(vec)
        out = orbit_transfer(self.family, p, self.thetas, x0, self.q, prec,
                             want_dalpha=True)
        if prec.extended:
            J = np.zeros((N + 2, N + 2), dtype=object)
        else:
            J = np.zeros((N + 2, N + 2))
        J[:N, :N] = self.Bs - out["m"][:, None] * self.B
        J[:N, N] = -out["dalpha"]
        b0 = _basis_row(N, ts, prec, 0)
        b1 = _basis_row(N, ts, prec, 1)
        b2 = _basis_row(N, ts, prec, 2)
        J[N, :N] = b0
        J[N, N + 1] = b1.dot(vec)
        J[N + 1, :N] = b1
        J[N + 1, N + 1] = b2.dot(vec)
        return J


def reducibility_loss_residual(X, eps, family, n, precision=STANDARD):
    """Residual of the (N+2)-equation reducibility-loss system at state X.

    X packs (curve coefficients, alpha, theta*); rows are the invariance
    equations, the critical-line contact x(theta*) - 1/2 and its theta
    derivative (tangency).
    """
    prec = get_precision(precision)
    with prec.context():
        N = len(X) - 2
        sys = _ContactSystem(family, n, eps, N, prec)
        return sys.residual(prec.asarray(X))


# ---------------------------------------------------------------------------
# zero-Lyapunov defining system
# ---------------------------------------------------------------------------

class _ZeroLyapunovSystem:
    """Residual/Jacobian closures for the (N+1) zero-Lyapunov system."""

    def __init__(self, family, n, eps, N, prec):
        self.family = family
        self.n = n
        self.q = 2 ** n
        self.eps = eps
        self.N = N
        self.prec = prec
        self.thetas = grid_thetas(N, prec)
        self.B = basis_matrix(N, self.thetas, prec)
        shift = (self.q * family.omega) % 1.0
        self.Bs = basis_matrix(N, self.thetas + prec.scalar(shift), prec)

    def _orbit(self, vec, alpha, rows=False):
        p = ParamPoint(alpha, self.eps)
        x0 = self.B.dot(vec)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = orbit_transfer(self.family, p, self.thetas, x0, self.q,
                                 self.prec, want_dalpha=rows, want_lyap_rows=rows)
        m_abs = np.abs(np.asarray([float(v) for v in out["m"]]))
        if m_abs.min() <= ZERO_TOL:
            raise LogSingularity(
                f"cocycle magnitude {m_abs.min():.3e} below {ZERO_TOL} on the grid"
            )
        return out

    def residual(self, X):
        N, prec = self.N, self.prec
        vec, alpha = X[:N], X[N]
        out = self._orbit(vec, alpha)
        res = np.empty(N + 1, dtype=vec.dtype)
        res[:N] = self.Bs.dot(vec) - out["x"]
        res[N] = np.sum(prec.log_abs(out["m"])) / N
        return res

    def jacobian(self, X):
        N, prec = self.N, self.prec
        vec, alpha = X[:N], X[N]
        out = self._orbit(vec, alpha, rows=True)
        if prec.extended:
            J = np.zeros((N + 1, N + 1), dtype=object)
        else:
            J = np.zeros((N + 1, N + 1))
        J[:N, :N] = self.Bs - out["m"][:, None] * self.B
        J[:N, N] = -out["dalpha"]
        J[N, :N] = out["lyap_wx"].dot(self.B) / N
        J[N, N] = np.sum(out["lyap_wa"]) / N
        return J


def zero_lyapunov_residual(X, eps, family, n, precision=STANDARD):
    """Residual of the (N+1)-equation zero-Lyapunov system at state X."""
    prec = get_precision(precision)
    with prec.context():
        N = len(X) - 1
        sys = _ZeroLyapunovSystem(family, n, eps, N, prec)
        return sys.residual(prec.asarray(X))


# ---------------------------------------------------------------------------
# tracers
# ---------------------------------------------------------------------------

def _double_grid(vec, N):
    curve_small = unpack_coeffs(vec)
    N2 = 2 * N
    out = np.zeros(N2, dtype=vec.dtype)
    out[: N // 2 + 1] = curve_small.cos
    out[N2 // 2 + 1: N2 // 2 + N // 2] = curve_small.sin
    return out, N2


def trace_reducibility_loss(family, n, side, eps_schedule, n_grid=None,
                            solve_tol=None, max_iter=40, min_step=None,
                            precision=STANDARD):
    """Continue the reducibility-loss branch across an ascending eps schedule.

    The first point is seeded from the linearized eps -> 0 response on the
    requested side ("minus": alpha below the superstable anchor); subsequent
    points use a secant predictor.  Failed corrections bisect the eps step
    down to ``min_step``.  The returned branch starts with the eps = 0 anchor
    and is ordered by eps ascending.
    """
    if side not in ("minus", "plus"):
        raise ValueError("side must be 'minus' or 'plus'")
    prec = get_precision(precision)
    eps_list = [float(e) for e in eps_schedule]
    if not eps_list or any(e <= 0 for e in eps_list) or any(
            b <= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_schedule must be strictly ascending positive values")
    if min_step is None:
        min_step = eps_list[0] / 2 ** 10
    with prec.context():
        if solve_tol is None:
            solve_tol = prec.solve_tol
        depth = family.composition_depth
        n_base = n + int(np.log2(depth))
        s_n = find_superstable(n_base, precision=prec)
        data = linearized_branch_data(family, n, float(s_n))
        N = n_grid or _default_branch_grid(n)

        kind = f"reducibility-loss-{side}"
        branch = BifurcationBranch(kind=kind, period_exponent=n,
                                   anchor_alpha=float(s_n), family=family)
        branch.points.append(BranchPoint(
            params=ParamPoint(float(s_n), 0.0),
            theta_star=data[side]["theta_star"],
            residual_norm=0.0,
        ))

        X = None            # last converged state
        X_prev = None       # the one before (for the secant predictor)
        eps_prev = 0.0
        eps_prev2 = 0.0
        first_done = False
        pending = list(eps_list)
        while pending:
            eps_target = pending[0]
            if X is None:
                seed = np.concatenate([
                    _seed_vector(data, side, eps_target, N),
                    [float(s_n) + eps_target * data[side]["slope"],
                     data[side]["theta_star"]],
                ])
                predictor = prec.asarray(seed)
            elif X_prev is not None and eps_prev != eps_prev2:
                t = (eps_target - eps_prev) / (eps_prev - eps_prev2)
                predictor = X + (X - X_prev) * prec.scalar(t)
            else:
                predictor = X
            sys = _ContactSystem(family, n, eps_target, N, prec)
            try:
                X_new, rnorm, _ = newton_solve(sys.residual, sys.jacobian,
                                               predictor, solve_tol, max_iter, prec)
            except NoConvergence:
                # bisect the step toward the last converged epsilon
                eps_mid = 0.5 * (eps_prev + eps_target)
                if eps_target - eps_prev < min_step or eps_mid <= eps_prev:
                    raise StepUnderflow(
                        f"step under {min_step} targeting eps={eps_target}")
                pending.insert(0, eps_mid)
                continue
            # fat Fourier tail: double the grid and re-correct the same point
            while _tail_is_fat(X_new[:N], N, TAIL_TOL):
                if 2 * N > N_MAX:
                    from .errors import ModeBudgetExceeded
                    raise ModeBudgetExceeded(f"tail stayed fat at N={N}")
                vec2, N = _double_grid(X_new[:N], N)
                predictor = prec.asarray(np.concatenate([vec2, [X_new[-2], X_new[-1]]]))
                sys = _ContactSystem(family, n, eps_target, N, prec)
                X_new, rnorm, _ = newton_solve(sys.residual, sys.jacobian,
                                               predictor, solve_tol, max_iter, prec)
                X = X_prev = None  # grid changed; rebuild secant history
            if not first_done:
                got = float(X_new[N]) - float(s_n)
                if (got < 0) != (side == "minus"):
                    raise SideAmbiguity(
                        f"first step converged on the wrong side: alpha-s_n={got:.3e}"
                    )
                first_done = True
            X_prev, eps_prev2 = X, eps_prev
            X, eps_prev = X_new, eps_target
            if eps_target in eps_list:
                branch.points.append(BranchPoint(
                    params=ParamPoint(float(X[N]), eps_target),
                    theta_star=float(X[N + 1]) % 1.0,
                    residual_norm=float(rnorm),
                    coeffs=np.array([float(v) for v in X[:N]]),
                    n_modes=N,
                ))
            if pending and pending[0] == eps_target:
                pending.pop(0)
        return branch


def _default_branch_grid(n):
    from .curves import default_grid_size
    return default_grid_size(n)


def trace_zero_lyapunov(family, n, eps_schedule, n_grid=None, solve_tol=None,
                        max_iter=40, min_step=None, precision=STANDARD):
    """Continue the zero-Lyapunov (period-doubling) branch from (d_n, 0)."""
    prec = get_precision(precision)
    eps_list = [float(e) for e in eps_schedule]
    if any(e < 0 for e in eps_list) or any(b <= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_schedule must be ascending and nonnegative")
    with prec.context():
        if solve_tol is None:
            solve_tol = prec.solve_tol
        depth = family.composition_depth
        n_base = n + int(np.log2(depth))
        d_n = float(find_period_doubling(n_base))
        N = n_grid or _default_branch_grid(n)
        branch = BifurcationBranch(kind="zero-lyapunov", period_exponent=n,
                                   anchor_alpha=d_n, family=family)

        # anchor state: constant curve at the cycle point with multiplier -1
        x_cycle = _neutral_cycle_point(d_n, 2 ** n_base)
        vec = prec.zeros(N)
        vec[0] = prec.scalar(x_cycle)
        X = np.concatenate([vec, [prec.scalar(d_n)]])
        if eps_list and eps_list[0] == 0.0:
            sys0 = _ZeroLyapunovSystem(family, n, 0.0, N, prec)
            X, rnorm0, _ = newton_solve(sys0.residual, sys0.jacobian, X,
                                        solve_tol, max_iter, prec)
            branch.points.append(BranchPoint(
                params=ParamPoint(float(X[N]), 0.0), theta_star=None,
                residual_norm=float(rnorm0),
                coeffs=np.array([float(v) for v in X[:N]]), n_modes=N))
            eps_list = eps_list[1:]
        else:
            branch.points.append(BranchPoint(
                params=ParamPoint(d_n, 0.0), theta_star=None, residual_norm=0.0))

        if min_step is None:
            min_step = (eps_list[0] / 2 ** 10) if eps_list else 0.0
        X_prev = None
        eps_prev = 0.0
        eps_prev2 = 0.0
        pending = list(eps_list)
        while pending:
            eps_target = pending[0]
            if X_prev is not None and eps_prev != eps_prev2:
                t = (eps_target - eps_prev) / (eps_prev - eps_prev2)
                predictor = X + (X - X_prev) * prec.scalar(t)
            else:
                predictor = X
            sys = _ZeroLyapunovSystem(family, n, eps_target, N, prec)
            try:
                X_new, rnorm, _ = newton_solve(sys.residual, sys.jacobian,
                                               predictor, solve_tol, max_iter, prec)
            except NoConvergence:
                eps_mid = 0.5 * (eps_prev + eps_target)
                if eps_target - eps_prev < min_step or eps_mid <= eps_prev:
                    raise StepUnderflow(
                        f"step under {min_step} targeting eps={eps_target}")
                pending.insert(0, eps_mid)
                continue
            while _tail_is_fat(X_new[:N], N, TAIL_TOL):
                if 2 * N > N_MAX:
                    from .errors import ModeBudgetExceeded
                    raise ModeBudgetExceeded(f"tail stayed fat at N={N}")
                vec2, N = _double_grid(X_new[:N], N)
                predictor = prec.asarray(np.concatenate([vec2, [X_new[-1]]]))
                sys = _ZeroLyapunovSystem(family, n, eps_target, N, prec)
                X_new, rnorm, _ = newton_solve(sys.residual, sys.jacobian,
                                               predictor, solve_tol, max_iter, prec)
                X = X_prev = None  # grid changed; rebuild secant history
            X_prev, eps_prev2 = X, eps_prev
            X, eps_prev = X_new, eps_target
            if eps_target in eps_list:
                branch.points.append(BranchPoint(
                    params=ParamPoint(float(X[N]), eps_target), theta_star=None,
                    residual_norm=float(rnorm),
                    coeffs=np.array([float(v) for v in X[:N]]), n_modes=N))
            if pending and pending[0] == eps_target:
                pending.pop(0)
        return branch


def _neutral_cycle_point(alpha, q):
    """Cycle point at the doubling parameter via the joint (x, alpha) solve."""
    x = 0.31
    for _ in range(max(4000, 40 * q)):
        x = alpha * x * (1 - x)
    # polish x on f^q(x) = x at fixed alpha (multiplier -1: Newton on the graph)
    for _ in range(60):
        xq, u, _, _, _, _ = _cycle_with_partials(alpha, x, q)
        denom = u - 1.0
        if denom == 0:
            break
        step = (xq - x) / denom
        x -= step
        if abs(step) < 1e-14:
            break
    return x
