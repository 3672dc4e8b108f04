"""Command-line front door.

Subcommands:
    thresholds     solve beta*/beta_perp and print the conserved P0
    power          power-vs-logOR grid for methods A/B/C (CSV or JSON)
    error-profile  false-positive-rate grid under cohort aberrance
    compare        sweep replication-split allocations at fixed total
    mc-validate    run the Monte Carlo 3-SE agreement harness

Grids default to CSV (header row, probabilities in 16-significant-digit
scientific notation); scalar results default to JSON.  Exit codes: 0 ok,
1 mc-validate found a disagreement, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Optional

import numpy as np

from . import __version__
from .analysis import Method, error_profile, hit_probability, power_curve
from .design import (
    StudyDesign,
    covariance,
    scenario_from_or_maf,
    zeta,
)
from .mc import MCConfig, simulate
from .thresholds import SolverFailure, Thresholds, solve_beta_star

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INVALID_INPUT = 2
EXIT_NUMERICAL = 3

COHORT_CHOICES = ("C0", "C1", "C0p", "C1p")


def _fmt(x: float) -> str:
    return f"{x:.15e}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sharedctrl",
        description="Replication thresholds, power and error profiles for "
                    "shared-control two-stage designs",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, grid: bool = False):
        p.add_argument("--input", type=str, default=None,
                       help="JSON file with design/thresholds/scenario; flags override")
        p.add_argument("--n0", type=int, default=None)
        p.add_argument("--n1", type=int, default=None)
        p.add_argument("--n0p", type=int, default=None)
        p.add_argument("--n1p", type=int, default=None)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--beta", type=float, default=None)
        p.add_argument("--gamma", type=float, default=None)
        p.add_argument("--maf", type=float, default=None)
        p.add_argument("--or", dest="odds_ratio", type=float, default=None)
        p.add_argument("--kappa0", type=float, default=None,
                       help="fraction of C0' drawn from the case population")
        p.add_argument("--kappa1", type=float, default=None,
                       help="fraction of C1' drawn from the control population")
        p.add_argument("--grid-points", type=int, default=None)
        p.add_argument("--log-or-min", type=float, default=None)
        p.add_argument("--log-or-max", type=float, default=None)
        p.add_argument("--reps", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--quiet", action="store_true")

    p_thr = sub.add_parser("thresholds", help="solve beta*/beta_perp")
    add_common(p_thr)

    p_pow = sub.add_parser("power", help="power curves on a log-OR grid")
    add_common(p_pow)

    p_err = sub.add_parser("error-profile", help="aberrance error-rate grid")
    add_common(p_err)
    p_err.add_argument("--cohort", action="append", choices=COHORT_CHOICES,
                       default=None, help="aberrant cohort(s); repeatable")

    p_cmp = sub.add_parser("compare", help="sweep replication splits at fixed total")
    add_common(p_cmp)
    p_cmp.add_argument("--new-samples", type=int, default=None,
                       help="total replication samples n0p + n1p")

    p_mcv = sub.add_parser("mc-validate", help="Monte Carlo agreement harness")
    add_common(p_mcv)
    return parser


_DEFAULTS = {
    "alpha": 5e-6, "beta": 5e-4, "gamma": 5e-8,
    "maf": 0.1, "odds_ratio": 1.3, "kappa0": 0.0, "kappa1": 0.0,
    "grid_points": 25, "log_or_min": -1.0, "log_or_max": 1.0,
    "reps": 100_000, "seed": 0,
}

_INPUT_KEYS = {
    "design": ("n0", "n1", "n0p", "n1p"),
    "thresholds": ("alpha", "beta", "gamma"),
    "scenario": ("maf", "odds_ratio", "kappa0", "kappa1"),
    "grid": ("grid_points", "log_or_min", "log_or_max"),
    "mc": ("reps", "seed"),
}


def resolve_params(args: argparse.Namespace) -> dict:
    """Layer resolution: defaults < --input file < explicit flags."""
    params = dict(_DEFAULTS)
    for k in ("n0", "n1", "n0p", "n1p"):
        params[k] = None
    if args.input:
        with open(args.input) as fh:
            doc = json.load(fh)
        for section, keys in _INPUT_KEYS.items():
            body = doc.get(section, {})
            for k in keys:
                if k in body:
                    params[k] = body[k]
        for k in ("new_samples", "cohorts"):
            if k in doc:
                params[k] = doc[k]
    for k in ("n0", "n1", "n0p", "n1p", "alpha", "beta", "gamma", "maf",
              "odds_ratio", "kappa0", "kappa1", "grid_points",
              "log_or_min", "log_or_max", "reps", "seed"):
        v = getattr(args, k, None)
        if v is not None:
            params[k] = v
    return params


def _design(params: dict, require_all: bool = True) -> StudyDesign:
    missing = [k for k in ("n0", "n1", "n0p", "n1p") if params.get(k) is None]
    if missing and require_all:
        raise ValueError(f"invalid input: missing {', '.join('--' + m for m in missing)}")
    return StudyDesign(params["n0"], params["n1"], params["n0p"], params["n1p"])


def _thresholds(params: dict) -> Thresholds:
    return Thresholds(params["alpha"], params["beta"], params["gamma"])


def _scenario(params: dict):
    return scenario_from_or_maf(
        params["odds_ratio"], params["maf"], params["kappa0"], params["kappa1"]
    )


def cmd_thresholds(params: dict) -> dict:
    design = _design(params)
    t = _thresholds(params)
    dt = solve_beta_star(covariance(design), t)
    return {
        "design": design.to_dict(),
        "thresholds": t.to_dict(),
        "beta_star": dt.beta_star,
        "beta_perp": dt.beta_perp,
        "p0": dt.p0,
        "diagnostics": dt.diagnostics,
    }


def cmd_power(params: dict) -> tuple[list[str], list[list[float]], dict]:
    design = _design(params)
    t = _thresholds(params)
    curve = power_curve(
        design, t, params["maf"],
        (params["log_or_min"], params["log_or_max"]), params["grid_points"],
        fa_ctrl_repl=params["kappa0"], fa_case_repl=params["kappa1"],
    )
    header = ["log_or", "power_A", "power_B", "power_C"]
    rows = [[p.log_or, p.power_A, p.power_B, p.power_C] for p in curve.grid]
    meta = {
        "design": design.to_dict(),
        "thresholds": t.to_dict(),
        "maf": params["maf"],
        "kappa0": params["kappa0"],
        "kappa1": params["kappa1"],
        "beta_star": curve.derived.beta_star,
        "beta_perp": curve.derived.beta_perp,
        "p0": curve.derived.p0,
    }
    return header, rows, meta


def _logit_shift_grid(maf: float, lo: float, hi: float, n: int) -> list[float]:
    # aberrant MAF parametrised on the log-odds scale relative to the base,
    # so the grid is design independent and covers saturation symmetrically
    base = math.log(maf / (1.0 - maf))
    return [1.0 / (1.0 + math.exp(-(base + g))) for g in np.linspace(lo, hi, n)]


def cmd_error_profile(params: dict, cohorts: Optional[list[str]]) -> tuple:
    design = _design(params)
    t = _thresholds(params)
    cohorts = cohorts or params.get("cohorts") or ["C1"]
    for c in cohorts:
        if c not in COHORT_CHOICES:
            raise ValueError(f"invalid input: unknown cohort {c!r}")
    dt = solve_beta_star(covariance(design), t)
    mus = _logit_shift_grid(
        params["maf"], params["log_or_min"], params["log_or_max"],
        params["grid_points"],
    )
    prof = error_profile(design, t, dt, {c: mus for c in cohorts}, params["maf"])
    header = ["zeta_driver", "R_A", "R_B", "R_C"]
    rows = [[p.zeta_driver, p.R_A, p.R_B, p.R_C] for p in prof.grid]
    meta = {
        "design": design.to_dict(),
        "thresholds": t.to_dict(),
        "aberrant_cohorts": list(prof.aberrant_cohorts),
        "base_maf": params["maf"],
        "beta_star": dt.beta_star,
        "beta_perp": dt.beta_perp,
        "p0": dt.p0,
        "limits": {
            m: {
                "at_zero": lim.at_zero,
                "at_pos_inf": lim.at_pos_inf,
                "at_neg_inf": lim.at_neg_inf,
            }
            for m, lim in prof.limits.items()
        },
    }
    return header, rows, meta


def cmd_compare(params: dict) -> dict:
    for k in ("n0", "n1"):
        if params.get(k) is None:
            raise ValueError(f"invalid input: missing --{k}")
    total = params.get("new_samples")
    if total is None:
        if params.get("n0p") is None or params.get("n1p") is None:
            raise ValueError("invalid input: need --new-samples or --n0p/--n1p")
        total = params["n0p"] + params["n1p"]
    total = int(total)
    if total < 2:
        raise ValueError("invalid input: --new-samples must be at least 2")
    t = _thresholds(params)
    scen = _scenario(params)

    step = max(1, total // 20)
    splits = list(range(max(step, total // 10), total - max(step, total // 10) + 1, step))
    rows = []
    for n0p in splits:
        d = StudyDesign(params["n0"], params["n1"], n0p, total - n0p)
        dt = solve_beta_star(covariance(d), t)
        rows.append({
            "n0p": n0p,
            "n1p": total - n0p,
            "power_A": hit_probability(Method.A, d, scen, t, dt),
            "power_B": hit_probability(Method.B, d, scen, t, dt),
        })
    best_a = max(rows, key=lambda r: r["power_A"])
    best_b = max(rows, key=lambda r: r["power_B"])
    out = {
        "design": {"n0": params["n0"], "n1": params["n1"]},
        "new_samples": total,
        "thresholds": t.to_dict(),
        "odds_ratio": params["odds_ratio"],
        "maf": params["maf"],
        "splits": rows,
        "best_A": {"n0p": best_a["n0p"], "n1p": best_a["n1p"], "power": best_a["power_A"]},
        "best_B": {"n0p": best_b["n0p"], "n1p": best_b["n1p"], "power": best_b["power_B"]},
    }
    if params.get("n0p") is not None and params.get("n1p") is not None:
        d = StudyDesign(params["n0"], params["n1"], params["n0p"], params["n1p"])
        dt = solve_beta_star(covariance(d), t)
        pb = hit_probability(Method.B, d, scen, t, dt)
        out["chosen_B"] = {"n0p": params["n0p"], "n1p": params["n1p"], "power": pb}
        out["chosen_B_beats_all_A"] = bool(pb > best_a["power_A"])
    return out


def cmd_mc_validate(params: dict) -> tuple[dict, bool]:
    design = _design(params)
    t = _thresholds(params)
    dt = solve_beta_star(covariance(design), t)
    cfg = MCConfig(replicates=params["reps"], seed=params["seed"],
                   thresholds=t, derived=dt)
    checks = []
    warnings = []
    if params["reps"] < 10_000:
        warnings.append("low replicate count")

    def add(name, value, target, se):
        if se > 0:
            sigmas = abs(value - target) / se
            ok = sigmas <= 3.0
        else:
            sigmas = None  # degenerate estimate (e.g. zero hits)
            ok = value == target
        checks.append({
            "check": name, "value": value, "target": target,
            "se": se, "sigmas": sigmas, "pass": bool(ok),
        })

    from .design import EffectScenario

    null_res = simulate(design, EffectScenario.null(params["maf"]), cfg)
    for m in ("A", "B", "C"):
        if m in null_res.hit_rate:
            add(f"null_rate_{m}_vs_p0", null_res.hit_rate[m], dt.p0, null_res.hit_se[m])
    cov = covariance(design)
    for pair, r in null_res.rho.items():
        add(f"rho_{pair[0]}{pair[1]}", r, cov.pair(*pair), null_res.rho_se[pair])

    scen = _scenario(params)
    if not scen.is_null:
        power_res = simulate(design, scen, cfg)
        for m in ("A", "B", "C"):
            if m in power_res.hit_rate:
                analytic = hit_probability(Method(m), design, scen, t, dt)
                add(f"power_{m}", power_res.hit_rate[m], analytic, power_res.hit_se[m])
        zv = zeta(design, scen)
        add("mean_z_d", power_res.mean_z["d"], zv.zeta_d, power_res.mean_z_se["d"])

    ok = all(c["pass"] for c in checks)
    report = {
        "design": design.to_dict(),
        "thresholds": t.to_dict(),
        "replicates": params["reps"],
        "seed": params["seed"],
        "p0": dt.p0,
        "warnings": warnings,
        "checks": checks,
        "all_pass": ok,
    }
    return report, ok


def _render_csv(header: list[str], rows: list[list[float]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(x) for x in row])
    return buf.getvalue()


def _grid_payload(header, rows, meta, fmt: str) -> str:
    if fmt == "csv":
        return _render_csv(header, rows)
    return json.dumps(
        {**meta, "columns": header, "grid": [dict(zip(header, r)) for r in rows]},
        indent=2,
    ) + "\n"


def _emit(text: str, out: Optional[str], quiet: bool) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
        if not quiet:
            print(f"wrote {out}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        params = resolve_params(args)
        if args.command == "thresholds":
            payload = json.dumps(cmd_thresholds(params), indent=2) + "\n"
            if getattr(args, "format", None) == "csv":
                raise ValueError("invalid input: thresholds output is JSON only")
            _emit(payload, args.out, args.quiet)
            return EXIT_OK
        if args.command == "power":
            fmt = args.format or "csv"
            header, rows, meta = cmd_power(params)
            _emit(_grid_payload(header, rows, meta, fmt), args.out, args.quiet)
            return EXIT_OK
        if args.command == "error-profile":
            fmt = args.format or "csv"
            header, rows, meta = cmd_error_profile(params, args.cohort)
            _emit(_grid_payload(header, rows, meta, fmt), args.out, args.quiet)
            return EXIT_OK
        if args.command == "compare":
            params["new_samples"] = getattr(args, "new_samples", None) or params.get("new_samples")
            payload = json.dumps(cmd_compare(params), indent=2) + "\n"
            _emit(payload, args.out, args.quiet)
            return EXIT_OK
        if args.command == "mc-validate":
            report, ok = cmd_mc_validate(params)
            _emit(json.dumps(report, indent=2) + "\n", args.out, args.quiet)
            return EXIT_OK if ok else EXIT_CHECK_FAILED
        raise ValueError(f"invalid input: unknown command {args.command!r}")
    except (ValueError, OSError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except (SolverFailure, ArithmeticError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
