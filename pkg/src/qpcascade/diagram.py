"""Parameter-plane rasters: batched attractor classification, PPM export,
and the self-similarity box comparison.

All cells share the driving angle sequence (same omega, same seed), so one
scalar theta orbit serves the whole batch and the per-cell work is plain
elementwise arithmetic.  Grids are endpoint-inclusive so windows with
eps_min = 0 contain an exact eps = 0 row.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analysis import affine_remap
from .curves import curve_cocycle, curve_from_fit, reducibility_status, solve_invariant_curve
from .errors import QpCascadeError
from .forced import (
    ESCAPE_BOUND,
    ClassifyOptions,
    ForcedFamily,
    ParamPoint,
    fiber_dx,
    fiber_map,
)

LABEL_CODES = {
    "zero-lyapunov": 0,
    "chaotic": 1,
    "nonreducible-nonchaotic": 2,
    "reducible-nonchaotic": 3,
    "divergent": 4,
}
LABEL_NAMES = {v: k for k, v in LABEL_CODES.items()}
LABEL_COLORS = np.array([
    (0, 0, 0),        # zero-lyapunov
    (255, 0, 0),      # chaotic
    (0, 0, 255),      # nonreducible-nonchaotic
    (128, 128, 128),  # reducible-nonchaotic
    (255, 255, 255),  # divergent
], dtype=np.uint8)


@dataclass
class DiagramRaster:
    width: int
    height: int
    window: tuple            # (alpha_min, alpha_max, eps_min, eps_max)
    labels: np.ndarray       # (height, width) int8 label codes
    lyapunov: np.ndarray     # (height, width) float
    period: np.ndarray       # (height, width) int32, -1 when undetected

    def alphas(self):
        a0, a1, _, _ = self.window
        return np.linspace(a0, a1, self.width)

    def epsilons(self):
        _, _, e0, e1 = self.window
        return np.linspace(e0, e1, self.height)


def _orbit_advance(forcing, alpha, eps, dw, theta, x, steps, escaped, accum=None):
    """Advance every cell of a flat batch by ``steps`` base steps.

    Escaped cells are frozen at x = 0.5 and excluded from the Lyapunov
    accumulator; the driving angle is one shared scalar.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(steps):
            if accum is not None:
                d = fiber_dx(forcing, alpha, eps, theta, x)
                np.add(accum, np.log(np.maximum(np.abs(d), 1e-300)), out=accum,
                       where=~escaped)
            x = np.where(escaped, 0.5, fiber_map(forcing, alpha, eps, theta, x))
            escaped |= np.abs(x) > ESCAPE_BOUND
            x = np.where(escaped, 0.5, x)
            theta = (theta + dw) % 1.0
    return theta, x


def classify_batch(family, alpha, eps, opts=ClassifyOptions()):
    """Classify flat arrays of parameter points sharing one rotation number.

    Returns (labels, lyapunov, period) arrays; the orbit logic mirrors the
    scalar classifier: transient, Lyapunov accumulation with escape
    tracking, then periodic-curve detection by strided trig fits and a
    reducibility check through the solved curve's cocycle.  Cells classified
    early drop out of the iteration, so the expensive deep period stages run
    only on the cells that still need them.
    """
    alpha = np.asarray(alpha, dtype=float)
    eps = np.asarray(eps, dtype=float)
    ncell = alpha.size
    forcing = family.forcing
    depth = family.composition_depth
    dw = family.base_omega

    theta = float(opts.seed_state.theta)
    x = np.full(ncell, float(opts.seed_state.x))
    escaped = np.zeros(ncell, dtype=bool)

    theta, x = _orbit_advance(forcing, alpha, eps, dw, theta, x,
                              opts.transient * depth, escaped)
    lyap_sum = np.zeros(ncell)
    theta, x = _orbit_advance(forcing, alpha, eps, dw, theta, x,
                              opts.iters * depth, escaped, accum=lyap_sum)
    lyap = lyap_sum / opts.iters

    labels = np.full(ncell, -1, dtype=np.int8)
    period = np.full(ncell, -1, dtype=np.int32)
    tol = opts.effective_lyap_tol
    labels[escaped] = LABEL_CODES["divergent"]
    lyap[escaped] = np.nan
    live = ~escaped
    labels[live & (lyap > tol)] = LABEL_CODES["chaotic"]
    labels[live & (np.abs(lyap) <= tol)] = LABEL_CODES["zero-lyapunov"]

    # period detection on the compacted open set; deep stages use fewer
    # (still ample) samples since their cost scales with 2^m
    open_idx = np.flatnonzero(labels == -1)
    sub_x = x[open_idx]
    sub_alpha = alpha[open_idx]
    sub_eps = eps[open_idx]
    sub_escaped = np.zeros(open_idx.size, dtype=bool)
    fits = {}
    for m in range(opts.m_max + 1):
        if open_idx.size == 0:
            break
        p = 2 ** m
        K = opts.fit_samples if p <= 128 else max(2 * opts.fit_harmonics + 8,
                                                  opts.fit_samples // 2)
        ys = np.empty((K, open_idx.size))
        phis = np.empty(K)
        for k in range(K):
            phis[k] = theta
            ys[k] = sub_x
            theta, sub_x = _orbit_advance(forcing, sub_alpha, sub_eps, dw,
                                          theta, sub_x, p * depth, sub_escaped)
        if sub_escaped.any():
            labels[open_idx[sub_escaped]] = LABEL_CODES["divergent"]
            keep = ~sub_escaped
            open_idx, sub_x = open_idx[keep], sub_x[keep]
            sub_alpha, sub_eps = sub_alpha[keep], sub_eps[keep]
            sub_escaped = sub_escaped[keep]
            if open_idx.size == 0:
                break
            ys = ys[:, keep]
        cols = [np.ones(K)]
        for h in range(1, opts.fit_harmonics + 1):
            cols.append(np.cos(2 * np.pi * h * phis))
            cols.append(np.sin(2 * np.pi * h * phis))
        A = np.column_stack(cols)
        sol, *_ = np.linalg.lstsq(A, ys, rcond=None)
        rms = np.sqrt(np.mean((A @ sol - ys) ** 2, axis=0))
        good = rms < opts.dist_tol
        for j, cell in enumerate(open_idx[good]):
            fits[cell] = (p, sol[:, j])
        period[open_idx[good]] = p
        keep = ~good
        open_idx, sub_x = open_idx[keep], sub_x[keep]
        sub_alpha, sub_eps = sub_alpha[keep], sub_eps[keep]
        sub_escaped = sub_escaped[keep]
    # contracting but no continuous periodic curve found
    labels[(labels == -1) & (period == -1)] = LABEL_CODES["nonreducible-nonchaotic"]

    for cell, (p, fit) in fits.items():
        n = int(np.log2(p))
        pt = ParamPoint(float(alpha[cell]), float(eps[cell]))
        try:
            curve = solve_invariant_curve(family, pt, n, curve_from_fit(fit, n))
            status = reducibility_status(curve_cocycle(curve))
        except QpCascadeError:
            labels[cell] = LABEL_CODES["nonreducible-nonchaotic"]
            continue
        labels[cell] = LABEL_CODES[
            "reducible-nonchaotic" if status == "reducible" else "nonreducible-nonchaotic"
        ]
    return labels, lyap, period


#: Target cells per classification task; small rows are grouped so the
#: vectorized orbit kernels work on decently sized arrays.
BLOCK_CELLS = 8192


def compute_diagram(family, window, width, height, opts=ClassifyOptions(), threads=1):
    """Classify an endpoint-inclusive (alpha, eps) grid into a DiagramRaster.

    Row blocks are partitioned deterministically across the worker pool;
    every cell's result is independent of the partition.
    """
    if width < 2 or height < 2:
        raise ValueError("grid resolution must be at least 2x2")
    a0, a1, e0, e1 = window
    if not (a1 > a0 and e1 >= e0):
        raise ValueError("window is degenerate")
    alphas = np.linspace(a0, a1, width)
    epsilons = np.linspace(e0, e1, height)
    labels = np.empty((height, width), dtype=np.int8)
    lyap = np.empty((height, width))
    period = np.empty((height, width), dtype=np.int32)

    rows_per_block = max(1, BLOCK_CELLS // width)
    blocks = [range(j, min(j + rows_per_block, height))
              for j in range(0, height, rows_per_block)]

    def run_block(rows):
        alpha_flat = np.tile(alphas, len(rows))
        eps_flat = np.repeat(epsilons[list(rows)], width)
        lab, ly, per = classify_batch(family, alpha_flat, eps_flat, opts)
        return rows, lab, ly, per

    if threads <= 1:
        results = map(run_block, blocks)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_block, blocks))
    for rows, lab, ly, per in results:
        for i, j in enumerate(rows):
            sl = slice(i * width, (i + 1) * width)
            labels[j] = lab[sl]
            lyap[j] = ly[sl]
            period[j] = per[sl]
    return DiagramRaster(width, height, tuple(window), labels, lyap, period)


def write_ppm(raster, path):
    """Binary P6 image, one pixel per cell, eps increasing upward."""
    rgb = LABEL_COLORS[raster.labels[::-1]]  # flip so the top row is eps_max
    with open(path, "wb") as fh:
        fh.write(f"P6\n{raster.width} {raster.height}\n255\n".encode())
        fh.write(rgb.tobytes())


def write_cells_csv(raster, path):
    from .analysis import format_sci

    alphas = raster.alphas()
    epsilons = raster.epsilons()
    with open(path, "w") as fh:
        fh.write("alpha,epsilon,label,lyapunov,period\n")
        for j in range(raster.height):
            for i in range(raster.width):
                ly = raster.lyapunov[j, i]
                fh.write(
                    f"{format_sci(alphas[i])},{format_sci(epsilons[j])},"
                    f"{LABEL_NAMES[int(raster.labels[j, i])]},"
                    f"{'nan' if np.isnan(ly) else format_sci(ly)},"
                    f"{int(raster.period[j, i])}\n"
                )


@dataclass
class SelfSimReport:
    agreement: float
    raster_doubled: DiagramRaster   # window W at rotation number 2*omega
    raster_base: DiagramRaster      # window L(W) at rotation number omega


def selfsim_agreement(forcing, omega, window, width, height, simmap,
                      opts=ClassifyOptions(), threads=1):
    """Cell-label agreement between the 2*omega diagram on W and the omega
    diagram on the affinely remapped window L(W)."""
    fam_base = ForcedFamily(omega=float(omega) % 1.0, forcing=forcing)
    fam_doubled = ForcedFamily(omega=(2.0 * float(omega)) % 1.0, forcing=forcing)
    a0, a1, e0, e1 = window
    lo = affine_remap(simmap, ParamPoint(a0, e0))
    hi = affine_remap(simmap, ParamPoint(a1, e1))
    window_mapped = (lo.alpha, hi.alpha, lo.epsilon, hi.epsilon)
    raster_doubled = compute_diagram(fam_doubled, window, width, height, opts, threads)
    raster_base = compute_diagram(fam_base, window_mapped, width, height, opts, threads)
    agreement = float(np.mean(raster_doubled.labels == raster_base.labels))
    return SelfSimReport(agreement, raster_doubled, raster_base)
