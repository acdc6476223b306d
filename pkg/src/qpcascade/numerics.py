"""Shared numeric substrate: precision contexts, trig transforms, Newton, extrapolation.

Scalars are plain ``float`` in standard precision and ``mpmath.mpf`` in
extended precision; arrays are float64 ndarrays or object ndarrays of mpf.
Extended mode targets >= 30 significant digits (default 34).  A computation
run fixes its mode up front; modes are never mixed inside one Newton solve.
"""

from __future__ import annotations

import contextlib
from dataclasses import dataclass

import numpy as np
import mpmath

from .errors import InsufficientData, NoConvergence, SingularSystem

EXTENDED_DPS = 34


class Precision:
    """Arithmetic context ("standard" float64 or "extended" mpmath).

    Provides the handful of operations whose implementation differs between
    the two scalar types: array construction, elementwise trig, dense linear
    solving and the working epsilon.  Plain arithmetic (+, -, *, /) works on
    both array kinds directly.
    """

    def __init__(self, name, dps=None):
        if name not in ("standard", "extended"):
            raise ValueError(f"unknown precision mode {name!r}")
        self.name = name
        self.dps = dps if name == "extended" else None
        if name == "extended" and self.dps is None:
            self.dps = EXTENDED_DPS

    def __repr__(self):
        return f"Precision({self.name!r})"

    @property
    def extended(self):
        return self.name == "extended"

    def context(self):
        """Context manager fixing the working precision for a computation run."""
        if self.extended:
            return mpmath.mp.workdps(self.dps)
        return contextlib.nullcontext()

    @property
    def eps(self):
        if self.extended:
            with mpmath.mp.workdps(self.dps):
                return float(mpmath.mp.eps)
        return float(np.finfo(np.float64).eps)

    @property
    def solve_tol(self):
        return 1e-25 if self.extended else 1e-12

    def scalar(self, x):
        if self.extended:
            if isinstance(x, mpmath.mpf):
                return x
            if isinstance(x, (int, np.integer)):
                return mpmath.mpf(int(x))
            return mpmath.mpf(float(x))
        return float(x)

    def sqrt(self, x):
        return mpmath.sqrt(x) if self.extended else float(np.sqrt(x))

    @property
    def pi(self):
        return mpmath.pi() if self.extended else float(np.pi)

    def asarray(self, values):
        if self.extended:
            return np.array([self.scalar(v) for v in np.ravel(values)], dtype=object)
        return np.asarray(values, dtype=np.float64)

    def zeros(self, n):
        if self.extended:
            return np.array([mpmath.mpf(0)] * n, dtype=object)
        return np.zeros(n)

    def ones(self, n):
        if self.extended:
            return np.array([mpmath.mpf(1)] * n, dtype=object)
        return np.ones(n)

    def cos(self, x):
        if self.extended:
            return _MP_COS(x)
        return np.cos(x)

    def sin(self, x):
        if self.extended:
            return _MP_SIN(x)
        return np.sin(x)

    def log_abs(self, x):
        if self.extended:
            return _MP_LOGABS(x)
        return np.log(np.abs(x))

    def max_abs(self, x):
        a = np.abs(np.asarray(x))
        return a.max() if a.size else self.scalar(0)

    def solve(self, A, b):
        """Dense solve with partial-pivot LU; raises SingularSystem when the
        condition estimate exceeds 1/eps."""
        if self.extended:
            try:
                M = mpmath.matrix(A.tolist())
                rhs = mpmath.matrix([list(b)]).T
                sol = mpmath.lu_solve(M, rhs)
            except ZeroDivisionError as exc:
                raise SingularSystem("singular matrix in extended solve") from exc
            return np.array([sol[i] for i in range(len(b))], dtype=object)
        import warnings

        import scipy.linalg as sla

        A = np.asarray(A, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                lu, piv = sla.lu_factor(A)
        except (ValueError, sla.LinAlgError) as exc:
            raise SingularSystem(str(exc)) from exc
        diag = np.abs(np.diag(lu))
        if not np.all(np.isfinite(lu)) or diag.min() <= diag.max() * self.eps * 1e-3:
            raise SingularSystem(
                f"condition estimate beyond 1/eps (pivot ratio {diag.min():.3e}/{diag.max():.3e})"
            )
        return sla.lu_solve((lu, piv), b)


_MP_COS = np.frompyfunc(mpmath.cos, 1, 1)
_MP_SIN = np.frompyfunc(mpmath.sin, 1, 1)
_MP_LOGABS = np.frompyfunc(lambda v: mpmath.log(abs(v)), 1, 1)

STANDARD = Precision("standard")
EXTENDED = Precision("extended")


def get_precision(precision):
    """Resolve "standard"/"extended"/Precision to a Precision instance."""
    if isinstance(precision, Precision):
        return precision
    return Precision(precision)


# ---------------------------------------------------------------------------
# Real trigonometric transforms on the uniform grid theta_j = j/N
# ---------------------------------------------------------------------------

@dataclass
class FourierCoeffs:
    """Real trig-interpolant coefficients: cos[k] for k=0..N/2, sin[k-1] for k=1..N/2-1.

    The represented function is
        x(theta) = cos[0] + sum_k (cos[k]*cos(2 pi k theta) + sin[k-1]*sin(2 pi k theta))
    with the Nyquist harmonic (k = N/2) carrying a cosine term only.
    """

    cos: np.ndarray
    sin: np.ndarray

    @property
    def grid_size(self):
        return 2 * (len(self.cos) - 1)

    def copy(self):
        return FourierCoeffs(self.cos.copy(), self.sin.copy())


def _check_grid(samples):
    n = len(samples)
    if n < 4 or (n & (n - 1)) != 0:
        raise ValueError(f"grid length {n} is not a power of two >= 4")
    return n


def dft_forward(samples, precision=STANDARD):
    """Samples at theta_j = j/N -> real trig interpolant coefficients."""
    prec = get_precision(precision)
    n = _check_grid(samples)
    if not prec.extended:
        spec = np.fft.rfft(np.asarray(samples, dtype=np.float64)) / n
        cos = np.empty(n // 2 + 1)
        sin = np.empty(n // 2 - 1)
        cos[0] = spec[0].real
        cos[1:n // 2] = 2.0 * spec[1:n // 2].real
        cos[n // 2] = spec[n // 2].real
        sin[:] = -2.0 * spec[1:n // 2].imag
        return FourierCoeffs(cos, sin)
    # extended: direct projection against the orthogonal trig basis
    with prec.context():
        theta = prec.asarray([mpmath.mpf(j) / n for j in range(n)])
        x = prec.asarray(samples)
        cos = prec.zeros(n // 2 + 1)
        sin = prec.zeros(n // 2 - 1)
        two_pi = 2 * prec.pi
        for k in range(n // 2 + 1):
            ck = prec.cos(two_pi * k * theta)
            w = mpmath.mpf(1) / n if k in (0, n // 2) else mpmath.mpf(2) / n
            cos[k] = w * np.sum(ck * x)
            if 1 <= k <= n // 2 - 1:
                sk = prec.sin(two_pi * k * theta)
                sin[k - 1] = (mpmath.mpf(2) / n) * np.sum(sk * x)
        return FourierCoeffs(cos, sin)


def dft_inverse(coeffs, precision=STANDARD):
    """Coefficients -> samples at theta_j = j/N (exact inverse of dft_forward)."""
    prec = get_precision(precision)
    n = coeffs.grid_size
    if not prec.extended:
        spec = np.zeros(n // 2 + 1, dtype=complex)
        spec[0] = coeffs.cos[0]
        spec[1:n // 2] = 0.5 * (coeffs.cos[1:n // 2] - 1j * coeffs.sin)
        spec[n // 2] = coeffs.cos[n // 2]
        return np.fft.irfft(spec * n, n)
    with prec.context():
        theta = prec.asarray([mpmath.mpf(j) / n for j in range(n)])
        return evaluate_series(coeffs, theta, prec)


def evaluate_series(coeffs, theta, precision=STANDARD):
    """Evaluate the trig interpolant at arbitrary angles (scalar or array)."""
    prec = get_precision(precision)
    scalar_input = np.isscalar(theta) or getattr(theta, "ndim", 0) == 0
    th = prec.asarray(np.atleast_1d(theta) if not prec.extended else
                      ([theta] if scalar_input else theta))
    two_pi = 2 * prec.pi
    out = prec.zeros(len(th)) + coeffs.cos[0]
    half = len(coeffs.cos) - 1
    for k in range(1, half + 1):
        out = out + coeffs.cos[k] * prec.cos(two_pi * k * th)
        if k < half:
            out = out + coeffs.sin[k - 1] * prec.sin(two_pi * k * th)
    return out[0] if scalar_input else out


# ---------------------------------------------------------------------------
# Damped Newton driver
# ---------------------------------------------------------------------------

MAX_HALVINGS = 8


def newton_solve(residual, jacobian, x0, tol, max_iter=30, precision=STANDARD):
    """Solve residual(x) = 0 by Newton iteration with step halving.

    Returns (x, residual_norm, iterations) with sup-norm residual <= tol.
    A full step that fails to reduce the residual norm is halved up to
    ``MAX_HALVINGS`` times; the smallest trial step is then accepted so the
    iteration can escape flat stretches within its budget.

    Raises SingularSystem on a numerically singular Jacobian and
    NoConvergence (carrying the last residual norm) when max_iter is reached.
    """
    prec = get_precision(precision)
    with prec.context():
        x = prec.asarray(x0)
        r = prec.asarray(residual(x))
        rnorm = prec.max_abs(r)
        for it in range(max_iter):
            if rnorm <= tol:
                return x, rnorm, it
            J = jacobian(x)
            step = prec.solve(J, -r)
            scale = prec.scalar(1)
            for _ in range(MAX_HALVINGS + 1):
                x_try = x + scale * step
                r_try = prec.asarray(residual(x_try))
                rn_try = prec.max_abs(r_try)
                if rn_try < rnorm or rn_try <= tol:
                    break
                scale = scale / 2
            x, r, rnorm = x_try, r_try, rn_try
            if not prec.extended and not np.all(np.isfinite(r)):
                raise NoConvergence("residual became non-finite", residual_norm=None)
        if rnorm <= tol:
            return x, rnorm, max_iter
        raise NoConvergence(
            f"Newton did not reach tol={tol} in {max_iter} iterations "
            f"(residual {float(rnorm):.3e})",
            residual_norm=rnorm,
        )


# ---------------------------------------------------------------------------
# Richardson extrapolation
# ---------------------------------------------------------------------------

def richardson_extrapolate(estimates, steps=3):
    """Extrapolate (h_k, v_k) pairs with h_k = h_0 * 2^-k to h -> 0.

    Assumes an error expansion in integer powers of h and runs ``steps``
    Neville elimination stages.  Returns (value, accuracy) where value is the
    last entry of the final stage and accuracy the absolute difference of the
    last two entries in that stage (consecutive-extrapolant estimate).
    """
    pts = list(estimates)
    if len(pts) < steps + 1:
        raise InsufficientData(
            f"need at least steps+1={steps + 1} estimates, got {len(pts)}"
        )
    hs = [p[0] for p in pts]
    for k in range(1, len(hs)):
        ratio = hs[k - 1] / hs[k]
        if abs(float(ratio) - 2.0) > 1e-9:
            raise ValueError("step sizes must halve between consecutive estimates")
    col = [p[1] for p in pts]
    prev_col = col
    for stage in range(1, steps + 1):
        fac = 2.0 ** stage
        prev_col = col
        col = [(fac * col[k + 1] - col[k]) / (fac - 1.0) for k in range(len(col) - 1)]
    value = col[-1]
    if len(col) >= 2:
        accuracy = abs(col[-1] - col[-2])
    else:
        accuracy = abs(col[-1] - prev_col[-1])
    return value, accuracy
