"""Slope extraction and the universality / self-similarity analyses.

``estimate_slope`` traces the reducibility-loss branch at a geometric ladder
of epsilon values, forms difference quotients against the superstable anchor
and Richardson-extrapolates them to eps -> 0, reporting the consecutive-
extrapolant difference as the accuracy estimate.  The remaining operations
combine slope records across families and rotation numbers: gap-ratio
sequences, the asymptotic-equivalence decision, the vertical rescaling
sequence of the parameter-space self-similarity map, and forcing-shape
sensitivity gaps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .continuation import trace_reducibility_loss
from .errors import IndexMismatch, InsufficientData, ZeroDenominator
from .forced import ForcedFamily, ForcingSpec, ParamPoint
from .numerics import EXTENDED, STANDARD, get_precision, richardson_extrapolate
from .unimodal import FEIGENBAUM_DELTA, find_superstable


@dataclass(frozen=True)
class SlopeJobConfig:
    """Epsilon sampling schedule for slope extraction.

    The ladder for level n is eps_k = 2^-k * h0 * kappa^n, k = 1..M; three
    extrapolation stages by default.  ``n_grid`` caps the initial collocation
    size (the tail check still doubles it when needed); ``refine_anchor``
    polishes s_n in extended precision so the anchor error stays far below
    the smallest quotient denominator.
    """

    h0: float = 1e-2
    kappa: float = 0.5
    M: int = 8
    extrapolation_steps: int = 3
    n_grid: int = 64
    refine_anchor: bool = True

    def __post_init__(self):
        if not (0 < self.kappa < 1):
            raise ValueError("kappa must lie in (0, 1)")
        if self.M < self.extrapolation_steps + 1:
            raise ValueError("M must be at least extrapolation_steps + 1")

    def ladder(self, n):
        h_n = self.h0 * self.kappa ** n
        return [h_n * 2.0 ** (-k) for k in range(1, self.M + 1)]


#: Schedule tuned for reproducing published slope tables in double precision:
#: the branch curvature grows roughly sevenfold per level, so the ladder has
#: to shrink faster than the default kappa = 1/2.
TABLE_SCHEDULE = SlopeJobConfig(h0=1e-2, kappa=0.25, M=8)


@dataclass
class SlopeRecord:
    n: int
    omega: float               # caller's value, kept verbatim (may exceed 1)
    forcing: ForcingSpec
    alpha_prime: float
    beta_prime: float          # None unless the plus side was requested
    accuracy: float
    s_n: float


@dataclass
class EquivalenceVerdict:
    equivalent: bool
    rho_hat: float
    K0_hat: float
    diffs: np.ndarray


@dataclass(frozen=True)
class AffineSelfSimMap:
    """(alpha, eps) -> (delta0*(alpha - s_star) + s_star, delta1*eps)."""

    s_star: float
    delta0: float
    delta1: float


def _family_for(forcing, omega):
    return ForcedFamily(omega=float(omega) % 1.0, forcing=forcing)


def _refined_anchor(n, cfg, precision):
    prec = get_precision(precision)
    if cfg.refine_anchor and not prec.extended:
        return float(find_superstable(n, precision=EXTENDED))
    return float(find_superstable(n, precision=prec))


def _one_side_slope(family, n, s_n, cfg, side, precision):
    eps_ladder = sorted(cfg.ladder(n))
    branch = trace_reducibility_loss(
        family, n, side, eps_ladder, n_grid=cfg.n_grid, precision=precision
    )
    pts = [pt for pt in branch.points if pt.params.epsilon > 0]
    if len(pts) < cfg.extrapolation_steps + 1:
        raise InsufficientData(f"only {len(pts)} usable branch points")
    # largest epsilon first so step sizes halve along the sequence
    pts = sorted(pts, key=lambda pt: -pt.params.epsilon)
    quotients = [
        (pt.params.epsilon, (pt.params.alpha - s_n) / pt.params.epsilon) for pt in pts
    ]
    return richardson_extrapolate(quotients, cfg.extrapolation_steps)


def estimate_slope(forcing, omega, n, cfg=None, want_beta=False,
                   precision=STANDARD):
    """Slope of the reducibility-loss branch at eps = 0 for one (family, omega, n).

    Returns a SlopeRecord; ``want_beta`` adds the plus-side slope computed
    the same way.  ``omega`` is stored verbatim in the record while the
    dynamics use omega mod 1.
    """
    cfg = cfg or SlopeJobConfig()
    prec = get_precision(precision)
    family = _family_for(forcing, omega)
    s_n = _refined_anchor(n, cfg, prec)
    alpha_prime, acc = _one_side_slope(family, n, s_n, cfg, "minus", prec)
    beta_prime = None
    if want_beta:
        beta_prime, acc_b = _one_side_slope(family, n, s_n, cfg, "plus", prec)
        acc = max(acc, acc_b)
    return SlopeRecord(
        n=n, omega=float(omega), forcing=forcing,
        alpha_prime=float(alpha_prime),
        beta_prime=None if beta_prime is None else float(beta_prime),
        accuracy=float(acc), s_n=s_n,
    )


def slope_table(forcing, omega, n_values, cfg=None, want_beta=False,
                precision=STANDARD):
    """Slope records for a range of n (list ordered as given)."""
    return [estimate_slope(forcing, omega, n, cfg, want_beta, precision)
            for n in n_values]


def ratio_sequence(records):
    """r_n = alpha'_n / alpha'_{n-1} for consecutive records of one family."""
    recs = sorted(records, key=lambda r: r.n)
    for a, b in zip(recs, recs[1:]):
        if b.n != a.n + 1:
            raise IndexMismatch(f"records skip from n={a.n} to n={b.n}")
        if (a.forcing, a.omega) != (b.forcing, b.omega):
            raise IndexMismatch("records mix families or rotation numbers")
    out = []
    for a, b in zip(recs, recs[1:]):
        if a.alpha_prime == 0:
            raise ZeroDenominator(f"alpha'_{a.n} vanishes")
        out.append(b.alpha_prime / a.alpha_prime)
    return np.array(out)


def asymptotic_equivalence(r, s, offset=0):
    """Decide whether |s_i - r_{i+offset}| decays geometrically.

    Finite-sample proxy for asymptotic equivalence: least-squares fit of
    log|diff| against the index must slope downward and the last gap must be
    below half the first.  Identical sequences report rho_hat = 0.
    """
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    n_overlap = min(len(s), len(r) - offset)
    if n_overlap < 4:
        raise InsufficientData(f"only {n_overlap} overlapping entries")
    diffs = np.abs(s[:n_overlap] - r[offset:offset + n_overlap])
    if np.all(diffs < 1e-300):
        return EquivalenceVerdict(True, 0.0, 0.0, diffs)
    idx = np.arange(n_overlap, dtype=float)
    logd = np.log(np.maximum(diffs, 1e-300))
    slope, intercept = np.polyfit(idx, logd, 1)
    equivalent = slope < 0 and diffs[-1] < diffs[0] / 2
    return EquivalenceVerdict(
        equivalent=bool(equivalent),
        rho_hat=float(np.exp(slope)),
        K0_hat=float(np.exp(intercept)),
        diffs=diffs,
    )


def delta1_sequence(records_omega, records_2omega, delta0=FEIGENBAUM_DELTA):
    """Vertical rescaling estimates delta0 * alpha'_n(omega) / alpha'_{n-1}(2*omega).

    The caller's stored omegas are paired by doubling mod 1; entries exist
    for every n >= 1 of ``records_omega`` whose n-1 is covered at 2*omega.
    """
    base = {r.n: r for r in records_omega}
    doubled = {r.n: r for r in records_2omega}
    if base and doubled:
        w1 = next(iter(base.values())).omega
        w2 = next(iter(doubled.values())).omega
        if abs(((2 * w1) % 1.0) - (w2 % 1.0)) > 1e-9:
            raise IndexMismatch(
                f"rotation numbers not in a doubling pair: {w1} vs {w2}")
    out = []
    ns = sorted(n for n in base if n >= 1)
    for n in ns:
        if n - 1 not in doubled:
            raise IndexMismatch(f"missing n-1={n - 1} record at doubled omega")
        denom = doubled[n - 1].alpha_prime
        if denom == 0:
            raise ZeroDenominator(f"alpha'_{n - 1}(2 omega) vanishes")
        out.append(delta0 * base[n].alpha_prime / denom)
    return np.array(out)


def affine_remap(m, p):
    """Apply the self-similarity map to one parameter point."""
    return ParamPoint(
        alpha=m.delta0 * (p.alpha - m.s_star) + m.s_star,
        epsilon=m.delta1 * p.epsilon,
    )


def non_universality_gap(records_mod, records_base):
    """|ratio gaps| between a modified forcing and its single-harmonic base.

    Both record lists must cover the same n range at the same omega; returns
    the elementwise |r_n(modified) - r_n(base)| of the ratio sequences.
    """
    ns_mod = [r.n for r in sorted(records_mod, key=lambda r: r.n)]
    ns_base = [r.n for r in sorted(records_base, key=lambda r: r.n)]
    if ns_mod != ns_base:
        raise IndexMismatch(f"n ranges differ: {ns_mod} vs {ns_base}")
    return np.abs(ratio_sequence(records_mod) - ratio_sequence(records_base))


# ---------------------------------------------------------------------------
# table formatting (shared by the CLI and the tests)
# ---------------------------------------------------------------------------

def format_sci(x):
    """Scientific notation with a 10-digit mantissa fraction, e.g. -5.8329149229e+00."""
    return f"{x:.10e}"


def slope_table_rows(records):
    """CSV rows (n, alpha_prime, ratio, accuracy) in table layout."""
    recs = sorted(records, key=lambda r: r.n)
    ratios = ratio_sequence(recs) if len(recs) > 1 else []
    rows = [("n", "alpha_prime", "ratio", "accuracy")]
    for i, r in enumerate(recs):
        ratio = format_sci(ratios[i - 1]) if i >= 1 else "---"
        rows.append((str(r.n), format_sci(r.alpha_prime), ratio,
                     f"{r.accuracy:.1e}"))
    return rows


def delta1_table_rows(values):
    """CSV rows (n, delta1_n, diff) mirroring the self-similarity tables."""
    rows = [("n", "delta1", "diff")]
    prev = None
    for i, v in enumerate(values, start=1):
        diff = "---" if prev is None else f"{v - prev:.1e}"
        rows.append((str(i), format_sci(v), diff))
        prev = v
    return rows
