"""Command line front end.

    qcorr info SPEC
    qcorr measure SPEC [gd|min|both] [--trials N] [--seed S] [--no-refine]
    qcorr sweep SPEC --param NAME --from X --to Y --step H --out PATH [--format csv|json]
    qcorr figure2 [--trials N] [--seed S] [--bins B] --out PATH [--format csv|json]

SPEC is ``family[:key=value,...]``, e.g. ``horodecki2x4:a=0.5`` or ``werner:m=4,z=0.3``.
Exit codes: 0 ok, 2 usage/parse error, 3 domain or validation error, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import bloch
from .entanglement import classify_horodecki_3x3, is_ppt, negativity
from .errors import QcorrError, SpecParseError
from .measures import (
    Kind,
    closed_forms,
    eigenspaces,
    gd_exact,
    gd_lower_bound,
    marginal,
    min_exact,
    min_upper_bound,
    normalized_distance,
    preserves_marginal,
    reference_measurements,
)
from .optimizer import SamplerConfig, sample_gd, sample_min
from .states import FAMILY_PARAMS, Family, StateSpec, parse_family_params, upb_tiles, validate

EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_IO = 4


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return value
    return f"{float(value):.12g}"


def _num(value):
    """Round to 12 significant digits for JSON, so both formats agree."""
    if value is None or isinstance(value, (bool, str)):
        return value
    return float(f"{float(value):.12g}")


def cmd_info(spec: StateSpec, out) -> None:
    rho = spec.build()
    v = validate(rho)
    bf = bloch.decompose(rho)
    spaces = eigenspaces(marginal(rho))
    eig = np.linalg.eigvalsh(marginal(rho))
    degenerate = any(b.shape[1] > 1 for _, b in spaces)
    rows = [
        ("state", str(spec)),
        ("dims", f"{rho.dim_a} x {rho.dim_b}"),
        ("hermiticity_defect", fmt(v.hermiticity)),
        ("trace_defect", fmt(v.trace)),
        ("min_eigenvalue", fmt(v.min_eigenvalue)),
        ("marginal_eigenvalues", " ".join(fmt(e) for e in eig)),
        ("marginal_degenerate", fmt(degenerate)),
        ("ppt", fmt(is_ppt(rho))),
        ("negativity", fmt(negativity(rho))),
        ("norm_x", fmt(np.linalg.norm(bf.x))),
        ("norm_y", fmt(np.linalg.norm(bf.y))),
        ("norm_T", fmt(np.linalg.norm(bf.T))),
    ]
    for key, value in rows:
        out.write(f"{key:<22}{value}\n")


def measure_lines(spec: StateSpec, which: str, trials=None, seed=0, refine=False):
    """(measure, kind, source, value) tuples for the report of ``qcorr measure``."""
    rho = spec.build()
    closed = closed_forms(spec)
    refs = reference_measurements(spec)
    lines = []
    if which in ("gd", "both"):
        if closed:
            lines.append(("gd", Kind.EXACT, "closed-form", closed[0].value))
        lines.append(("gd", Kind.LOWER_BOUND, "bloch-bound", gd_lower_bound(rho).value))
        exact = gd_exact(rho)
        if exact is not None:
            lines.append(("gd", Kind.EXACT, "attained-bound", exact.value))
        for label, meas in refs:
            lines.append(("gd", Kind.UPPER_BOUND, label, normalized_distance(rho, meas)))
        if trials:
            rep = sample_gd(rho, SamplerConfig(trials, seed, refine))
            lines.append(("gd", Kind.SAMPLED, f"monte-carlo[{trials}]", rep.best_value))
    if which in ("min", "both"):
        if closed:
            lines.append(("min", Kind.EXACT, "closed-form", closed[1].value))
        lines.append(("min", Kind.UPPER_BOUND, "bloch-bound", min_upper_bound(rho).value))
        exact = min_exact(rho)
        if exact is not None:
            lines.append(("min", Kind.EXACT, "eigenbasis-optimum", exact.value))
        rho_a = marginal(rho)
        for label, meas in refs:
            if preserves_marginal(meas, rho_a):
                lines.append(("min", Kind.LOWER_BOUND, label, normalized_distance(rho, meas)))
        if trials:
            rep = sample_min(rho, SamplerConfig(trials, seed, refine))
            lines.append(("min", Kind.SAMPLED, f"monte-carlo[{trials}]", rep.best_value))
    return lines


def cmd_measure(spec, which, trials, seed, refine, out) -> None:
    out.write(f"# {spec}\n")
    for measure, kind, source, value in measure_lines(spec, which, trials, seed, refine):
        out.write(f"{measure:<4}{kind.value:<13}{source:<22}{fmt(value)}\n")


SWEEP_COLUMNS = [
    "gd_lower", "gd_exact", "gd_closed", "gd_trial",
    "min_upper", "min_exact", "min_closed", "min_trial",
    "negativity", "ppt", "regime",
]


def sweep_row(spec: StateSpec) -> dict:
    rho = spec.build()
    closed = closed_forms(spec)
    gd = gd_exact(rho)
    mn = min_exact(rho)
    row = {
        "gd_lower": gd_lower_bound(rho).value,
        "gd_exact": gd.value if gd else None,
        "gd_closed": closed[0].value if closed else None,
        "gd_trial": None,
        "min_upper": min_upper_bound(rho).value,
        "min_exact": mn.value if mn else None,
        "min_closed": closed[1].value if closed else None,
        "min_trial": None,
        "negativity": negativity(rho),
        "ppt": is_ppt(rho),
        "regime": None,
    }
    refs = reference_measurements(spec)
    if refs:
        label, meas = refs[-1]
        row["gd_trial"] = normalized_distance(rho, meas)
        if preserves_marginal(meas, marginal(rho)):
            row["min_trial"] = row["gd_trial"]
    if spec.family is Family.HORODECKI_3X3:
        row["regime"] = classify_horodecki_3x3(spec.params["beta"]).value
    return row


def sweep_grid(start: float, stop: float, step: float) -> list[float]:
    if step <= 0 or start > stop:
        raise ValueError("sweep needs step > 0 and from <= to")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def cmd_sweep(text, param, start, stop, step, fmt_name) -> str:
    family, params = parse_family_params(text)
    if param not in FAMILY_PARAMS[family]:
        raise SpecParseError(f"family {family.value} has no parameter {param!r}", token=param)
    rows = []
    for value in sweep_grid(start, stop, step):
        spec = StateSpec(family, {**params, param: value})
        rows.append({param: value, **sweep_row(spec)})
    columns = [param] + SWEEP_COLUMNS
    if fmt_name == "json":
        return json.dumps([{k: _num(r[k]) for k in columns} for r in rows], indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([fmt(r[k]) for k in columns])
    return buf.getvalue()


def tiles_gd_bound() -> float:
    theta = math.atan(9 * math.sqrt(1319) / 244) / 3
    return (65 - 2 * math.sqrt(55) * math.cos(theta)) / 576


def cmd_figure2(trials, seed, bins, refine, fmt_name) -> str:
    rep = sample_gd(upb_tiles(), SamplerConfig(trials, seed, refine, bins))
    bound = tiles_gd_bound()
    if fmt_name == "json":
        doc = {
            "trials": trials,
            "seed": seed,
            "bound": _num(bound),
            "best": _num(rep.best_value),
            "bins": [{"bin_lower": _num(lo), "count": c} for lo, c in rep.histogram],
        }
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["record", "bin_lower", "count", "value"])
    for lo, count in rep.histogram:
        writer.writerow(["bin", fmt(lo), count, ""])
    writer.writerow(["bound", "", "", fmt(bound)])
    writer.writerow(["best", "", "", fmt(rep.best_value)])
    return buf.getvalue()


def _write(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qcorr", description=__doc__.split("\n\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("info", help="dimensions, validity, marginal, PPT and Bloch norms")
    p.add_argument("spec")

    p = sub.add_parser("measure", help="GD and MIN: closed forms, bounds, exact and sampled values")
    p.add_argument("spec")
    p.add_argument("which", nargs="?", choices=["gd", "min", "both"], default="both")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--refine", action=argparse.BooleanOptionalAction, default=True,
                   help="polish the best sample by local rotations (default: on)")

    p = sub.add_parser("sweep", help="tabulate measures over a parameter grid")
    p.add_argument("spec", help="family, optionally with the fixed parameters")
    p.add_argument("--param", required=True)
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--step", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")

    p = sub.add_parser("figure2", help="histogram of sampled GD values for the Tiles state")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=60)
    p.add_argument("--refine", action="store_true")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        if args.command == "info":
            cmd_info(StateSpec.parse(args.spec), sys.stdout)
        elif args.command == "measure":
            cmd_measure(StateSpec.parse(args.spec), args.which, args.trials, args.seed,
                        args.refine, sys.stdout)
        elif args.command == "sweep":
            text = cmd_sweep(args.spec, args.param, args.start, args.stop, args.step, args.format)
            _write(args.out, text)
        elif args.command == "figure2":
            if args.trials < 1 or args.bins < 1:
                raise SpecParseError("trials and bins must be >= 1")
            text = cmd_figure2(args.trials, args.seed, args.bins, args.refine, args.format)
            _write(args.out, text)
    except SpecParseError as exc:
        token = f" (at {exc.token!r})" if exc.token is not None else ""
        print(f"qcorr: usage error: {exc}{token}", file=sys.stderr)
        return EXIT_USAGE
    except (QcorrError, ValueError) as exc:
        print(f"qcorr: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"qcorr: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
