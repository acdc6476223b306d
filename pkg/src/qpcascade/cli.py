"""qpcascade command line: cascade / slopes / delta1 / diagram / selfsim.

Configuration is a plain-text key = value file ('#' starts a comment).
Rotation numbers accept the tokens golden, 2golden, 4golden, sqrt5over2
(evaluated at working precision) or a decimal literal.  Exit codes: 0 on
success, 2 on configuration errors, 3 on numerical failures (partial
outputs are flushed before exiting).
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .analysis import (
    SlopeJobConfig,
    delta1_sequence,
    delta1_table_rows,
    estimate_slope,
    format_sci,
    slope_table_rows,
    AffineSelfSimMap,
)
from .diagram import (
    compute_diagram,
    selfsim_agreement,
    write_cells_csv,
    write_ppm,
)
from .errors import QpCascadeError
from .forced import ClassifyOptions, ForcedFamily, ForcingSpec
from .numerics import get_precision
from .unimodal import FEIGENBAUM_DELTA, accumulation_alpha, cascade_table, find_superstable

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(Exception):
    pass


def parse_config(path):
    cfg = {}
    try:
        with open(path) as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key = value")
                key, value = line.split("=", 1)
                cfg[key.strip()] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    return cfg


def omega_value(token, prec):
    """Rotation-number token -> value at working precision (kept un-reduced)."""
    named = {
        "golden": lambda: (prec.sqrt(5) - 1) / 2,
        "2golden": lambda: prec.sqrt(5) - 1,
        "4golden": lambda: 2 * (prec.sqrt(5) - 1),
        "sqrt5over2": lambda: prec.sqrt(5) / 2,
    }
    if token in named:
        return named[token]()
    try:
        return float(token)
    except ValueError:
        raise ConfigError(f"bad omega token {token!r}")


def forcing_from(cfg):
    kind = cfg.get("family", "multiplicative-cos")
    try:
        return ForcingSpec(kind, float(cfg.get("E", "0")))
    except ValueError as exc:
        raise ConfigError(str(exc))


def _get(cfg, key, cast, default):
    if key not in cfg:
        return default
    try:
        return cast(cfg[key])
    except ValueError:
        raise ConfigError(f"bad value for {key}: {cfg[key]!r}")


def schedule_from(cfg):
    try:
        return SlopeJobConfig(
            h0=_get(cfg, "h0", float, 1e-2),
            kappa=_get(cfg, "kappa", float, 0.25),
            M=_get(cfg, "M", int, 8),
            extrapolation_steps=_get(cfg, "extrapolation_steps", int, 3),
            n_grid=_get(cfg, "n_grid", int, 64),
            refine_anchor=_get(cfg, "refine_anchor", lambda s: s.lower() == "true", True),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))


def classify_opts_from(cfg):
    return ClassifyOptions(
        transient=_get(cfg, "transient", int, 10_000),
        iters=_get(cfg, "iters", int, 100_000),
        lyap_tol=_get(cfg, "lyap_tol", float, None),
        dist_tol=_get(cfg, "dist_tol", float, 2e-3),
        m_max=_get(cfg, "m_max", int, 12),
    )


def window_from(cfg, default=(2.8, 4.0, 0.0, 0.15)):
    if "window" not in cfg:
        return default
    parts = cfg["window"].split(",")
    if len(parts) != 4:
        raise ConfigError("window must be alpha_min,alpha_max,eps_min,eps_max")
    return tuple(float(p) for p in parts)


def write_csv(path, rows):
    with open(path, "w") as fh:
        for row in rows:
            fh.write(",".join(row) + "\n")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_cascade(cfg, out_dir, prec, threads):
    n_max = _get(cfg, "n_max", int, 8)
    table = cascade_table(n_max, precision=prec)
    rows = [("n", "s_n", "d_n", "ratio_s", "ratio_d")]
    for idx, (n, s, d) in enumerate(table.entries):
        rs = format_sci(table.ratios_s[idx - 1]) if table.ratios_s is not None \
            and 1 <= idx <= len(table.ratios_s) else "---"
        rd = format_sci(table.ratios_d[idx - 1]) if table.ratios_d is not None \
            and 1 <= idx <= len(table.ratios_d) else "---"
        rows.append((str(n), format_sci(s), format_sci(d), rs, rd))
    write_csv(os.path.join(out_dir, "cascade.csv"), rows)
    return EXIT_OK


def _branch_csv_rows(branch):
    rows = ["epsilon,alpha,theta_star,residual"]
    for pt in branch.points:
        ts = "" if pt.theta_star is None else format_sci(pt.theta_star)
        rows.append(f"{format_sci(pt.params.epsilon)},{format_sci(pt.params.alpha)},"
                    f"{ts},{pt.residual_norm:.3e}")
    return rows


def _dump_branch(branch, out_dir, stem):
    from .curves import FourierCurve, curve_text_rows, unpack_coeffs

    with open(os.path.join(out_dir, f"{stem}.csv"), "w") as fh:
        fh.write("\n".join(_branch_csv_rows(branch)) + "\n")
    last = branch.points[-1]
    if last.coeffs is not None:
        curve = FourierCurve(unpack_coeffs(last.coeffs), last.n_modes)
        with open(os.path.join(out_dir, f"{stem}_curve.txt"), "w") as fh:
            fh.write("\n".join(curve_text_rows(curve)) + "\n")


def cmd_slopes(cfg, out_dir, prec, threads):
    from .continuation import trace_reducibility_loss
    from .forced import ForcedFamily

    forcing = forcing_from(cfg)
    omega = omega_value(cfg.get("omega", "golden"), prec)
    n_min = _get(cfg, "n_min", int, 0)
    n_max = _get(cfg, "n_max", int, 6)
    sched = schedule_from(cfg)
    want_beta = _get(cfg, "want_beta", lambda s: s.lower() == "true", False)
    dump = _get(cfg, "dump_branches", lambda s: s.lower() == "true", False)
    records = []
    failure = None
    for n in range(n_min, n_max + 1):
        try:
            records.append(estimate_slope(forcing, float(omega), n, sched,
                                          want_beta=want_beta, precision=prec))
            if dump:
                family = ForcedFamily(omega=float(omega) % 1.0, forcing=forcing)
                sides = ("minus", "plus") if want_beta else ("minus",)
                for side in sides:
                    branch = trace_reducibility_loss(
                        family, n, side, sorted(sched.ladder(n)),
                        n_grid=sched.n_grid, precision=prec)
                    _dump_branch(branch, out_dir, f"branch_{side}_{n}")
        except QpCascadeError as exc:
            failure = (n, exc)
            break
    rows = slope_table_rows(records) if records else [("n", "alpha_prime", "ratio", "accuracy")]
    if want_beta and records:
        rows[0] = rows[0] + ("beta_prime",)
        for i, rec in enumerate(sorted(records, key=lambda r: r.n), start=1):
            rows[i] = rows[i] + (format_sci(rec.beta_prime),)
    if failure is not None:
        rows.append((str(failure[0]), f"FAILED: {failure[1]}", "---", "---"))
    write_csv(os.path.join(out_dir, "slopes.csv"), rows)
    return EXIT_OK if failure is None else EXIT_NUMERICAL


def cmd_delta1(cfg, out_dir, prec, threads):
    forcing = forcing_from(cfg)
    omega = omega_value(cfg.get("omega", "golden"), prec)
    n_min = _get(cfg, "n_min", int, 0)
    n_max = _get(cfg, "n_max", int, 6)
    sched = schedule_from(cfg)
    recs = []
    recs2 = []
    failure = None
    try:
        for n in range(n_min, n_max + 1):
            recs.append(estimate_slope(forcing, float(omega), n, sched, precision=prec))
        for n in range(max(0, n_min - 1), n_max):
            recs2.append(estimate_slope(forcing, 2 * float(omega), n, sched, precision=prec))
        values = delta1_sequence(recs, recs2, FEIGENBAUM_DELTA)
    except QpCascadeError as exc:
        failure = exc
        values = []
    rows = delta1_table_rows(values)
    if failure is not None:
        rows.append(("-", f"FAILED: {failure}", "---"))
    write_csv(os.path.join(out_dir, "delta1.csv"), rows)
    return EXIT_OK if failure is None else EXIT_NUMERICAL


def cmd_diagram(cfg, out_dir, prec, threads):
    from .continuation import trace_zero_lyapunov

    forcing = forcing_from(cfg)
    omega = omega_value(cfg.get("omega", "golden"), prec)
    window = window_from(cfg)
    width = _get(cfg, "width", int, 400)
    height = _get(cfg, "height", int, 300)
    opts = classify_opts_from(cfg)
    family = ForcedFamily(omega=float(omega) % 1.0, forcing=forcing)
    raster = compute_diagram(family, window, width, height, opts, threads)
    write_ppm(raster, os.path.join(out_dir, "diagram.ppm"))
    write_cells_csv(raster, os.path.join(out_dir, "diagram.csv"))
    # optional overlay data: zero-Lyapunov (period-doubling) polylines
    if "zero_lyapunov_n" in cfg:
        levels = [int(v) for v in cfg["zero_lyapunov_n"].split(",")]
        eps_max = _get(cfg, "zero_lyapunov_eps_max", float, window[3])
        count = _get(cfg, "zero_lyapunov_points", int, 12)
        schedule = [0.0] + [eps_max * (k + 1) / count for k in range(count)]
        for n in levels:
            branch = trace_zero_lyapunov(family, n, schedule, precision=prec)
            _dump_branch(branch, out_dir, f"zero_lyapunov_{n}")
    return EXIT_OK


def cmd_selfsim(cfg, out_dir, prec, threads):
    forcing = forcing_from(cfg)
    omega = omega_value(cfg.get("omega", "golden"), prec)
    window = window_from(cfg, default=None)
    if window is None:
        raise ConfigError("selfsim requires an explicit window (the box W at 2*omega)")
    width = _get(cfg, "width", int, 100)
    height = _get(cfg, "height", int, 100)
    if "s_star" in cfg:
        s_star = float(cfg["s_star"])
    else:
        s_values = [float(find_superstable(n)) for n in range(9)]
        s_star = accumulation_alpha(s_values)
    simmap = AffineSelfSimMap(
        s_star=s_star,
        delta0=_get(cfg, "delta0", float, 4.66920),
        delta1=_get(cfg, "delta1", float, 7.54718),
    )
    opts = classify_opts_from(cfg)
    report = selfsim_agreement(forcing, float(omega), window, width, height,
                               simmap, opts, threads)
    write_ppm(report.raster_doubled, os.path.join(out_dir, "selfsim_doubled.ppm"))
    write_ppm(report.raster_base, os.path.join(out_dir, "selfsim_base.ppm"))
    with open(os.path.join(out_dir, "selfsim.txt"), "w") as fh:
        fh.write(f"agreement {report.agreement:.6f}\n")
        fh.write(f"s_star {format_sci(s_star)}\n")
        fh.write(f"delta0 {format_sci(simmap.delta0)}\n")
        fh.write(f"delta1 {format_sci(simmap.delta1)}\n")
        fh.write(f"window_doubled {','.join(format_sci(v) for v in window)}\n")
        fh.write(f"window_base {','.join(format_sci(v) for v in report.raster_base.window)}\n")
    print(f"selfsim agreement: {report.agreement:.4f}")
    return EXIT_OK


COMMANDS = {
    "cascade": cmd_cascade,
    "slopes": cmd_slopes,
    "delta1": cmd_delta1,
    "diagram": cmd_diagram,
    "selfsim": cmd_selfsim,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="qpcascade",
        description="Cascade tables, branch slopes and parameter-space diagrams "
                    "of quasi-periodically forced logistic maps.",
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="key = value config file")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--precision", choices=["standard", "extended"], default=None)
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(args.config)
        precision_name = args.precision or cfg.get("precision", "standard")
        prec = get_precision(precision_name)
        threads = args.threads if args.threads is not None else int(cfg.get("threads", "1"))
        out_dir = args.out
        os.makedirs(out_dir, exist_ok=True)
        if not os.access(out_dir, os.W_OK):
            raise ConfigError(f"output directory {out_dir} is not writable")
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        return COMMANDS[args.command](cfg, out_dir, prec, threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except QpCascadeError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
