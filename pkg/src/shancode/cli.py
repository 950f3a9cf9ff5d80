"""Command-line front end: classification, prediction and exact-value sweeps.

Commands are selected with --command and emit deterministic CSV (canonical)
or a one-to-one JSON mirror:

  classify    chain structure and mode classification of a source
  predict     asymptotic prediction rows over an n range
  exact       ground-truth redundancy rows (Monte Carlo appended on request)
  compare     exact values joined against predictions with |R - omega|
  sweep       compare over a labeled grid of sources read from a config file
  fejer-demo  sandwich functions, their Fejer sums and the error bound

Exit codes: 0 success, 2 validation failure, 3 resource limit.  Failures
additionally print a machine-readable JSON object on stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import asymptotics, fejer, oracle
from .errors import ResourceLimit, ShancodeError, ValidationFailure
from .sources import MarkovSource, classify_structure, validate

REPORT_FLAGS = ("boundary", "degenerate", "heuristic", "snap")


@dataclass
class RunConfig:
    command: str
    source_path: str | None = None
    n_range: tuple = (1, 1)
    xi: float = 0.05
    m_max: int = 64
    samples: int = 0
    seed: int = 0
    output_path: str | None = None
    format: str = "csv"
    limits: oracle.Limits = field(default_factory=oracle.Limits)


def parse_n_range(text: str) -> tuple[int, int]:
    """Parse "N" or an inclusive range "LO..HI"."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
    else:
        lo = hi = int(text)
    if lo < 1 or hi < lo:
        raise ValidationFailure(f"empty or invalid n range {text!r}")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shancode", description=__doc__.splitlines()[0])
    parser.add_argument(
        "--command",
        required=True,
        choices=["classify", "predict", "exact", "compare", "sweep", "fejer-demo"],
    )
    parser.add_argument("--source", help="source description JSON (sweep: grid config JSON)")
    parser.add_argument("--n", default="8", help='block length or inclusive range "LO..HI" (fejer-demo: truncation order)')
    parser.add_argument("--xi", type=float, default=0.05, help="boundary margin in (0, 1/2) (fejer-demo: knot theta)")
    parser.add_argument("--m-max", type=int, default=64, help="scan budget for the oscillation search")
    parser.add_argument("--samples", type=int, default=0, help="Monte Carlo samples to append to exact rows")
    parser.add_argument("--seed", type=int, default=0, help="Monte Carlo seed")
    parser.add_argument("--out", help="output file (default: stdout)")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")
    return parser


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _flags_cell(flags) -> str:
    return ";".join(sorted(set(flags) & set(REPORT_FLAGS)))


def _load_source(config: RunConfig) -> MarkovSource:
    if not config.source_path:
        raise ValidationFailure("--source is required for this command")
    source = MarkovSource.load(config.source_path)
    report = validate(source)
    if not report.ok:
        raise ValidationFailure("; ".join(report.messages))
    return source


def _classification(source, config: RunConfig):
    return asymptotics.classify_mode(source, m_max=config.m_max)


# -- command implementations -------------------------------------------------


def _cmd_classify(config: RunConfig):
    source = _load_source(config)
    structure = classify_structure(source)
    row = {
        "irreducible": structure.irreducible,
        "period": structure.period,
        "positive": structure.positive,
        "mode": "",
        "M": None,
        "s": None,
        "w": "",
        "provenance": "",
        "flags": "",
    }
    if structure.irreducible:
        cls = _classification(source, config)
        row.update(
            mode=cls.mode,
            M=cls.M,
            s=cls.s,
            w="|".join(_fmt(x) for x in cls.w) if cls.w else "",
            provenance=cls.provenance,
            flags=_flags_cell(cls.flags),
        )
    else:
        row["mode"] = "reducible"
        row["flags"] = ""
    columns = ["irreducible", "period", "positive", "mode", "M", "s", "w", "provenance", "flags"]
    return columns, [row]


def _predict_rows(source, cls, config: RunConfig):
    rows = []
    for n in range(config.n_range[0], config.n_range[1] + 1):
        pred = asymptotics.predict(source, cls, n, xi=config.xi)
        rows.append(
            {
                "n": n,
                "mode": cls.mode,
                "M": cls.M,
                "omega": pred.omega,
                "lower": pred.lower,
                "upper": pred.upper,
                "boundary_terms": pred.boundary_terms,
                "flags": _flags_cell(pred.flags),
            }
        )
    return rows


def _cmd_predict(config: RunConfig):
    source = _load_source(config)
    cls = _classification(source, config)
    columns = ["n", "mode", "M", "omega", "lower", "upper", "boundary_terms", "flags"]
    return columns, _predict_rows(source, cls, config)


def _exact_rows(source, config: RunConfig):
    rows = []
    for n in range(config.n_range[0], config.n_range[1] + 1):
        rec = oracle.exact_redundancy(source, n, limits=config.limits)
        rows.append(
            {"n": n, "method": rec.method, "value": rec.value, "stderr": rec.stderr, "flags": _flags_cell(rec.flags)}
        )
        if config.samples > 0:
            mc = oracle.monte_carlo_redundancy(source, n, config.samples, config.seed)
            rows.append(
                {"n": n, "method": mc.method, "value": mc.value, "stderr": mc.stderr, "flags": _flags_cell(mc.flags)}
            )
    return rows


def _cmd_exact(config: RunConfig):
    source = _load_source(config)
    columns = ["n", "method", "value", "stderr", "flags"]
    return columns, _exact_rows(source, config)


def _compare_rows(source, config: RunConfig):
    cls = _classification(source, config)
    rows = []
    for n in range(config.n_range[0], config.n_range[1] + 1):
        rec = oracle.exact_redundancy(source, n, limits=config.limits)
        pred = asymptotics.predict(source, cls, n, xi=config.xi)
        rows.append(
            {
                "n": n,
                "mode": cls.mode,
                "M": cls.M,
                "exact_value": rec.value,
                "method": rec.method,
                "omega": pred.omega,
                "lower": pred.lower,
                "upper": pred.upper,
                "boundary_terms": pred.boundary_terms,
                "abs_diff": abs(rec.value - pred.omega),
                "flags": _flags_cell(set(pred.flags) | set(rec.flags)),
            }
        )
    return rows


_COMPARE_COLUMNS = [
    "n", "mode", "M", "exact_value", "method", "omega", "lower", "upper",
    "boundary_terms", "abs_diff", "flags",
]


def _cmd_compare(config: RunConfig):
    source = _load_source(config)
    return _COMPARE_COLUMNS, _compare_rows(source, config)


def _cmd_sweep(config: RunConfig):
    """Compare over a parameter grid: {"n": "LO..HI", "sources": [{"label", "source"|"path"}]}."""
    if not config.source_path:
        raise ValidationFailure("--source must point to a sweep config JSON")
    with open(config.source_path, "r", encoding="utf-8") as fh:
        grid = json.load(fh)
    if "n" in grid:
        config.n_range = parse_n_range(str(grid["n"]))
    if "xi" in grid:
        config.xi = float(grid["xi"])
    rows = []
    for entry in grid.get("sources", []):
        label = str(entry.get("label", "?"))
        if "path" in entry:
            source = MarkovSource.load(Path(config.source_path).parent / entry["path"])
        else:
            source = MarkovSource.from_dict(entry["source"])
        report = validate(source)
        if not report.ok:
            raise ValidationFailure(f"grid entry {label!r}: " + "; ".join(report.messages))
        for row in _compare_rows(source, config):
            rows.append({"label": label, **row})
    return ["label", *_COMPARE_COLUMNS], rows


def _cmd_fejer_demo(config: RunConfig):
    theta = config.xi
    N = config.n_range[0]
    bound = fejer.error_bound(N, theta)
    grid = np.arange(0.0, 1.0, 1.0 / 512.0)
    rows = []
    for f_id, direct in (
        ("rho_minus", fejer.rho_minus),
        ("delta", fejer.delta),
        ("rho_plus", fejer.rho_plus),
    ):
        approx = fejer.fejer_sum(f_id, grid, theta, N)
        exactv = direct(grid, theta)
        for u, fv, sv in zip(grid, exactv, approx):
            rows.append({"function": f_id, "u": float(u), "f": float(fv), "fejer_sum": float(sv), "bound": bound})
    return ["function", "u", "f", "fejer_sum", "bound"], rows


_COMMANDS = {
    "classify": _cmd_classify,
    "predict": _cmd_predict,
    "exact": _cmd_exact,
    "compare": _cmd_compare,
    "sweep": _cmd_sweep,
    "fejer-demo": _cmd_fejer_demo,
}


# -- output -------------------------------------------------------------------


def render(columns, rows, fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])
        return buf.getvalue()
    doc = {"columns": list(columns), "rows": [{c: row[c] for c in columns} for row in rows]}
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def run(config: RunConfig) -> int:
    try:
        columns, rows = _COMMANDS[config.command](config)
        text = render(columns, rows, config.format)
    except ResourceLimit as exc:
        _emit_error(exc)
        return 3
    except (ShancodeError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        _emit_error(exc)
        return 2
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _emit_error(exc: Exception) -> None:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc)}) + "\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        n_range = parse_n_range(args.n)
        if not (0.0 < args.xi < 0.5):
            raise ValidationFailure(f"xi must lie in (0, 1/2), got {args.xi}")
    except (ValidationFailure, ValueError) as exc:
        _emit_error(exc)
        return 2
    config = RunConfig(
        command=args.command,
        source_path=args.source,
        n_range=n_range,
        xi=args.xi,
        m_max=args.m_max,
        samples=args.samples,
        seed=args.seed,
        output_path=args.out,
        format=args.format,
    )
    return run(config)


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
