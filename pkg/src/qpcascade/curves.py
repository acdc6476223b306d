"""Fourier representation and Newton solution of 2^n-periodic invariant curves.

The unknown is branch0 only: the graph x(theta) invariant under the 2^n-th
iterate of the family, collocated at theta_j = j/N.  The residual is

    x(theta_j + 2^n omega) - f^(2^n)(theta_j, x(theta_j))

with the shifted term evaluated by the trig series itself (exact spectral
shift), never by grid interpolation.  The Jacobian couples the shift basis
matrix with the chain-rule product of the fiber derivative along the orbit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ModeBudgetExceeded, NoConvergence, StepUnderflow
from .forced import ParamPoint, orbit_transfer
from .numerics import (
    STANDARD,
    FourierCoeffs,
    evaluate_series,
    get_precision,
    newton_solve,
)

TAIL_TOL = 1e-3
SEP_TOL = 1e-6
N_MAX = 2048
ZERO_TOL = 1e-10


@dataclass
class FourierCurve:
    coeffs: FourierCoeffs
    n_modes: int

    def packed(self):
        return np.concatenate([self.coeffs.cos, self.coeffs.sin])


@dataclass
class PeriodicInvariantCurve:
    period_exponent: int
    branch0: FourierCurve
    params: ParamPoint
    family: object
    residual_norm: float
    branch_separation: float = None


def default_grid_size(n):
    """Initial collocation size for a period-2^n curve."""
    return 32 * 2 ** ((n + 1) // 2)


def grid_thetas(N, prec=STANDARD):
    if prec.extended:
        import mpmath
        return np.array([mpmath.mpf(j) / N for j in range(N)], dtype=object)
    return np.arange(N) / N


def basis_matrix(N, thetas, prec=STANDARD):
    """Rows: evaluation points; columns: cos_0..cos_{N/2}, sin_1..sin_{N/2-1}."""
    two_pi = 2 * prec.pi
    k_cos = np.arange(N // 2 + 1)
    k_sin = np.arange(1, N // 2)
    if prec.extended:
        arg_c = np.outer(thetas, prec.asarray(list(k_cos))) * two_pi
        arg_s = np.outer(thetas, prec.asarray(list(k_sin))) * two_pi
        return np.concatenate([prec.cos(arg_c), prec.sin(arg_s)], axis=1)
    B = np.empty((len(thetas), N))
    B[:, : N // 2 + 1] = np.cos(two_pi * np.outer(thetas, k_cos))
    B[:, N // 2 + 1:] = np.sin(two_pi * np.outer(thetas, k_sin))
    return B


def pack_coeffs(coeffs):
    return np.concatenate([coeffs.cos, coeffs.sin])


def unpack_coeffs(vec):
    n = len(vec)
    return FourierCoeffs(np.asarray(vec[: n // 2 + 1]), np.asarray(vec[n // 2 + 1:]))


def constant_curve(value, N, prec=STANDARD):
    vec = prec.zeros(N)
    vec[0] = prec.scalar(value)
    return FourierCurve(unpack_coeffs(vec), N)


def curve_from_fit(fit_coeffs, n, n_grid=None):
    """Seed curve from the (c0, c1, s1, c2, s2, ...) layout of an orbit fit."""
    N = n_grid or default_grid_size(n)
    vec = np.zeros(N)
    vec[0] = fit_coeffs[0]
    harmonics = (len(fit_coeffs) - 1) // 2
    for k in range(1, min(harmonics, N // 2 - 1) + 1):
        vec[k] = fit_coeffs[2 * k - 1]
        vec[N // 2 + k] = fit_coeffs[2 * k]
    return FourierCurve(unpack_coeffs(vec), N)


def resize_curve(curve, N_new, prec=STANDARD):
    """Embed (or truncate) the coefficient vector into a different grid size."""
    old = curve.coeffs
    N_old = curve.n_modes
    vec = prec.zeros(N_new)
    for k in range(min(N_old, N_new) // 2 + 1):
        vec[k] = old.cos[k]
    for k in range(1, min(N_old, N_new) // 2):
        vec[N_new // 2 + k] = old.sin[k - 1]
    return FourierCurve(unpack_coeffs(vec), N_new)


def eval_curve(curve, theta, precision=STANDARD):
    """Trig-series evaluation at arbitrary angle(s)."""
    return evaluate_series(curve.coeffs, theta, get_precision(precision))


def invariance_residual(family, p, n, curve, precision=STANDARD):
    """Residual of invariance under the 2^n-th iterate, at the collocation grid."""
    prec = get_precision(precision)
    with prec.context():
        N = curve.n_modes
        thetas = grid_thetas(N, prec)
        B = basis_matrix(N, thetas, prec)
        shift = (2 ** n * family.omega) % 1.0
        Bs = basis_matrix(N, thetas + prec.scalar(shift), prec)
        vec = pack_coeffs(curve.coeffs)
        x0 = B.dot(vec)
        out = orbit_transfer(family, p, thetas, x0, 2 ** n, prec)
        return Bs.dot(vec) - out["x"]


def _tail_is_fat(vec, N, tail_tol):
    mags = np.abs(np.asarray([float(v) for v in vec]))
    harmonics = np.concatenate([np.arange(N // 2 + 1), np.arange(1, N // 2)])
    tail = mags[harmonics > N // 4]
    return tail.size > 0 and tail.max() > tail_tol * mags.max()


def _solve_fixed_grid(family, p, n, vec0, N, prec, solve_tol, max_iter):
    thetas = grid_thetas(N, prec)
    B = basis_matrix(N, thetas, prec)
    shift = (2 ** n * family.omega) % 1.0
    Bs = basis_matrix(N, thetas + prec.scalar(shift), prec)
    q = 2 ** n

    def residual(vec):
        x0 = B.dot(vec)
        out = orbit_transfer(family, p, thetas, x0, q, prec)
        return Bs.dot(vec) - out["x"]

    def jacobian(vec):
        x0 = B.dot(vec)
        out = orbit_transfer(family, p, thetas, x0, q, prec)
        return Bs - out["m"][:, None] * B

    return newton_solve(residual, jacobian, vec0, solve_tol, max_iter, prec)


def branch_separation(family, p, n, vec, N, prec):
    """Distance between branch0 and its power-of-two forward images.

    For each offset 2^m (m < n) the image branch is sampled at the grid
    angles by iterating from back-shifted series values; a true period
    smaller than 2^n would make one of these distances vanish.
    """
    if n == 0:
        return float("inf")
    coeffs = unpack_coeffs(vec)
    thetas = grid_thetas(N, prec)
    sep = None
    for m in range(n):
        off = 2 ** m
        shift = (off * family.omega) % 1.0
        th_start = (thetas - prec.scalar(shift)) % 1
        x_start = evaluate_series(coeffs, th_start, prec)
        out = orbit_transfer(family, p, th_start, x_start, off, prec)
        x_here = evaluate_series(coeffs, thetas, prec)
        dist = np.abs(out["x"] - x_here).min()
        sep = dist if sep is None else min(sep, dist)
    return float(sep)


def solve_invariant_curve(family, p, n, initial, solve_tol=None, tail_tol=TAIL_TOL,
                          n_max=N_MAX, max_iter=40, precision=STANDARD):
    """Newton-solve the period-2^n invariant curve from an initial guess.

    Doubles the collocation grid and re-solves while the Fourier tail stays
    above ``tail_tol`` relative to the largest coefficient, up to ``n_max``
    (then ModeBudgetExceeded).
    """
    prec = get_precision(precision)
    if solve_tol is None:
        solve_tol = prec.solve_tol
    with prec.context():
        N = initial.n_modes
        vec = prec.asarray(pack_coeffs(initial.coeffs))
        while True:
            vec, rnorm, _ = _solve_fixed_grid(family, p, n, vec, N, prec,
                                              solve_tol, max_iter)
            if not _tail_is_fat(vec, N, tail_tol):
                break
            if 2 * N > n_max:
                raise ModeBudgetExceeded(
                    f"tail above {tail_tol} of max coefficient at N={N} (cap {n_max})"
                )
            curve = FourierCurve(unpack_coeffs(vec), N)
            N *= 2
            vec = prec.asarray(pack_coeffs(resize_curve(curve, N, prec).coeffs))
        sep = branch_separation(family, p, n, vec, N, prec)
        return PeriodicInvariantCurve(
            period_exponent=n,
            branch0=FourierCurve(unpack_coeffs(vec), N),
            params=p,
            family=family,
            residual_norm=float(rnorm),
            branch_separation=sep,
        )


def logistic_cycle_point(alpha, n, depth=1):
    """A point of the attracting 2^n*depth cycle of the unforced map."""
    q = 2 ** n * depth
    x = 0.31
    for _ in range(max(4000, 40 * q)):
        x = alpha * x * (1 - x)
    return x


def initial_curve_for(family, alpha, n, n_grid=None, prec=STANDARD):
    """Constant seed curve at a numerically computed cycle point (eps = 0 limit)."""
    N = n_grid or default_grid_size(n)
    x_cycle = logistic_cycle_point(alpha, n, family.composition_depth)
    return constant_curve(x_cycle, N, prec)


def continue_in_epsilon(family, alpha, n, eps_targets, n_grid=None, solve_tol=None,
                        min_step=None, precision=STANDARD):
    """Solve curves along an ascending epsilon ladder, each seeding the next.

    The ladder starts from the eps = 0 curve (constant at a cycle point); a
    failed step is bisected until min_step, then StepUnderflow is raised.
    """
    prec = get_precision(precision)
    targets = [float(e) for e in eps_targets]
    if any(b < a for a, b in zip(targets, targets[1:])) or (targets and targets[0] < 0):
        raise ValueError("eps_targets must be ascending and nonnegative")
    if min_step is None:
        pos = [t for t in targets if t > 0]
        min_step = pos[0] / 2 ** 10 if pos else 0.0

    results = []
    current = initial_curve_for(family, alpha, n, n_grid, prec)
    cur_eps = 0.0
    cur_curve = solve_invariant_curve(
        family, ParamPoint(alpha, 0.0), n, current, solve_tol, precision=prec
    )
    for target in targets:
        if target == 0.0:
            results.append(cur_curve)
            continue
        eps_here = cur_eps
        curve_here = cur_curve
        step = target - eps_here
        while eps_here < target:
            eps_try = min(target, eps_here + step)
            try:
                solved = solve_invariant_curve(
                    family, ParamPoint(alpha, eps_try), n,
                    curve_here.branch0, solve_tol, precision=prec,
                )
            except NoConvergence:
                step /= 2
                if step < min_step:
                    raise StepUnderflow(
                        f"epsilon step under {min_step} while targeting {target}"
                    )
                continue
            eps_here, curve_here = eps_try, solved
        results.append(curve_here)
        cur_eps, cur_curve = eps_here, curve_here
    return results


def curve_cocycle(curve, precision=STANDARD):
    """Chain-rule product of the fiber derivative along the curve, per node."""
    prec = get_precision(precision)
    with prec.context():
        N = curve.branch0.n_modes
        thetas = grid_thetas(N, prec)
        x0 = evaluate_series(curve.branch0.coeffs, thetas, prec)
        out = orbit_transfer(curve.family, curve.params, thetas, x0,
                             2 ** curve.period_exponent, prec)
        return out["m"]


def reducibility_status(m, zero_tol=ZERO_TOL):
    """"reducible" iff the cocycle is bounded away from zero with one sign."""
    vals = np.asarray([float(v) for v in m])
    if np.abs(vals).min() <= zero_tol:
        return "nonreducible"
    return "reducible" if (np.all(vals > 0) or np.all(vals < 0)) else "nonreducible"


def curve_text_rows(curve):
    """Plain-text export: one "harmonic,cos,sin" row per retained harmonic."""
    branch = curve.branch0 if isinstance(curve, PeriodicInvariantCurve) else curve
    coeffs = branch.coeffs
    rows = ["harmonic,cos,sin"]
    half = len(coeffs.cos) - 1
    for k in range(half + 1):
        c = float(coeffs.cos[k])
        s = float(coeffs.sin[k - 1]) if 1 <= k <= half - 1 else 0.0
        rows.append(f"{k},{c:.17e},{s:.17e}")
    return rows
