"""Command line entry point: dynamics tables, sweeps and the verification suite.

Tables are written as CSV (``#``-prefixed metadata lines followed by a header
row), JSON (``{"metadata": ..., "rows": ...}``) or a static SVG plot. Floats
use the shortest repr that round-trips, so identical runs give identical
bytes. Without ``--output`` files go to ``$GROVER_ENT_OUTDIR`` when set and to
stdout otherwise.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__, analysis
from .analysis import COLUMNS, EntanglementPoint
from .fullsim import ResourceGuardError
from .gme import ConsistencyError, OptimizationError
from .search import PI3_MAX_DEPTH, SearchSpec, SolutionClass, grover_angle, k_opt

OUTDIR_ENV = "GROVER_ENT_OUTDIR"

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_INVALID = 3
EXIT_IO = 4
EXIT_RESOURCE = 5
EXIT_NUMERIC = 6

SUMMARY_COLUMNS = ("n", "k_opt", "max_dev_E_n", "max_dev_E_2")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    n: int | None = None
    n_list: list[int] = field(default_factory=list)
    M: int = 1
    solutions: tuple[int, ...] | None = None
    format: str = "csv"
    output: Path | None = None
    m_max: int = 8
    grid_points: int = 101
    quick: bool = False
    tolerances: dict[str, float] = field(default_factory=dict)

    def validate(self):
        if self.command not in ("grover", "pi3", "sweep", "verify"):
            raise ValueError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json", "svg"):
            raise ValueError(f"unknown format {self.format!r}")
        if self.format == "svg" and self.command == "verify":
            raise ValueError("svg output is available for grover, pi3 and sweep only")
        if self.M not in (1, 2) and self.command != "verify":
            raise ValueError(f"solution count must be 1 or 2, got {self.M}")
        if self.solutions is not None and len(self.solutions) != self.M:
            raise ValueError(f"{len(self.solutions)} solution indices given for M={self.M}")
        if self.command in ("grover", "pi3") and self.n is None:
            raise ValueError(f"{self.command} needs --n")
        if self.command == "sweep" and self.solutions is not None:
            raise ValueError("sweep uses the symmetric instances; --solutions is not accepted")
        if self.command == "sweep" and not self.n_list:
            raise ValueError("sweep needs --n-list")

    def spec(self, n: int | None = None) -> SearchSpec:
        n = self.n if n is None else n
        if self.solutions is not None:
            spec = SearchSpec(n, self.solutions)
        else:
            spec = SearchSpec.single(n) if self.M == 1 else SearchSpec.antipodal(n)
        if spec.solution_class is SolutionClass.GENERIC:
            raise ValueError(f"solutions {spec.solutions} are neither single nor antipodal")
        return spec


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return repr(x)
    return str(x)


def spec_metadata(spec: SearchSpec, **extra) -> dict:
    ang = grover_angle(spec)
    meta = {
        "n": spec.n,
        "M": spec.M,
        "solutions": list(spec.solutions),
        "theta": ang.theta,
        "theta_approx": ang.theta_approx,
        "k_opt": k_opt(spec),
        "version": __version__,
    }
    meta.update(extra)
    return meta


def render_csv(rows: list[dict], columns, metadata: dict) -> str:
    buf = io.StringIO()
    for key, value in metadata.items():
        buf.write(f"# {key}={json.dumps(value) if isinstance(value, (list, dict)) else _fmt(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def render_json(payload: dict) -> str:
    return json.dumps(payload, indent=2) + "\n"


_COLORS = {"E_n": "#1f4fbf", "E_2": "#7b2a8c", "success": "#d9a400"}


def render_svg(series: list[tuple[str, str, list[tuple[float, float]]]], xlabel: str,
               title: str, metadata: dict) -> str:
    """Static line plot; ``series`` holds (label, colour, points) with y in [0, 1]."""
    width, height, left, right, top, bottom = 640, 420, 60, 150, 40, 50
    pw, ph = width - left - right, height - top - bottom
    xmax = max((x for _, _, pts in series for x, _ in pts), default=1.0) or 1.0

    def sx(x):
        return left + pw * x / xmax

    def sy(y):
        return top + ph * (1 - y)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f"<metadata>{json.dumps(metadata, sort_keys=True)}</metadata>",
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left + pw / 2:.1f}" y="22" text-anchor="middle" font-size="14">{title}</text>',
        f'<line class="axis" x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>',
        f'<line class="axis" x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>',
    ]
    for i in range(6):
        y = i / 5
        out.append(f'<text x="{left - 8}" y="{sy(y) + 4:.1f}" text-anchor="end" font-size="11">{y:.1f}</text>')
        xv = xmax * i / 5
        out.append(f'<text x="{sx(xv):.1f}" y="{top + ph + 16}" text-anchor="middle" '
                   f'font-size="11">{xv:.3g}</text>')
    out.append(f'<text class="xlabel" x="{left + pw / 2:.1f}" y="{height - 10}" '
               f'text-anchor="middle" font-size="12">{xlabel}</text>')
    out.append(f'<text class="ylabel" x="16" y="{top + ph / 2:.1f}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 16 {top + ph / 2:.1f})">value</text>')
    for i, (label, colour, pts) in enumerate(series):
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{coords}">'
                   f"<title>{label}</title></polyline>")
        ly = top + 14 + 18 * i
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 32}" y2="{ly}" '
                   f'stroke="{colour}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 38}" y="{ly + 4}" font-size="11">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _table_series(rows: list[EntanglementPoint]):
    return [(name, _COLORS[name], [(float(r.step), getattr(r, name)) for r in rows])
            for name in ("E_n", "E_2", "success")]


def render_table(rows: list[EntanglementPoint], fmt: str, metadata: dict, title: str = "") -> str:
    if not rows:
        raise ValueError("nothing to emit: empty table")
    dicts = [r.as_dict() for r in rows]
    if fmt == "csv":
        return render_csv(dicts, COLUMNS, metadata)
    if fmt == "json":
        return render_json({"metadata": metadata, "rows": dicts})
    if fmt == "svg":
        return render_svg(_table_series(rows), "step", title, metadata)
    raise ValueError(f"unknown format {fmt!r}")


def write_output(text: str, path: Path | None, stdout=None):
    if path is None:
        (stdout or sys.stdout).write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def emit_table(rows: list[EntanglementPoint], fmt: str, path: Path | None,
               metadata: dict | None = None, title: str = ""):
    write_output(render_table(rows, fmt, metadata or {}, title), path)


def read_table(path) -> tuple[dict, list[EntanglementPoint]]:
    """Parse a CSV or JSON table written by :func:`emit_table`."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        payload = json.loads(text)
        return payload["metadata"], [EntanglementPoint(**r) for r in payload["rows"]]
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[2:].partition("=")
            meta[key] = json.loads(value) if value[:1] in "[{" else value
        else:
            body.append(line)
    reader = csv.DictReader(body)
    if tuple(reader.fieldnames or ()) != COLUMNS:
        raise ValueError(f"unexpected columns {reader.fieldnames}")
    rows = [EntanglementPoint(int(r["step"]), *(float(r[c]) for c in COLUMNS[1:])) for r in reader]
    return meta, rows


def _default_path(cfg: RunConfig) -> Path | None:
    if cfg.output is not None:
        return cfg.output
    outdir = os.environ.get(OUTDIR_ENV)
    if not outdir:
        return None
    if cfg.command == "sweep":
        stem = f"sweep_n{'-'.join(map(str, cfg.n_list))}_M{cfg.M}"
    elif cfg.command == "verify":
        stem = "verify"
    else:
        stem = f"{cfg.command}_n{cfg.n}_M{cfg.M}"
    return Path(outdir) / f"{stem}.{cfg.format}"


def _run_sweep(cfg: RunConfig) -> str:
    result = analysis.scale_invariance_sweep(cfg.n_list, cfg.M, cfg.grid_points)
    summary = [{"n": n, "k_opt": d["k_opt"], "max_dev_E_n": d["E_n"], "max_dev_E_2": d["E_2"]}
               for n, d in result.deviation_summary.items()]
    meta = {
        "n_list": result.n_list,
        "M": cfg.M,
        "theta": [grover_angle(cfg.spec(n)).theta for n in result.n_list],
        "theta_approx": [grover_angle(cfg.spec(n)).theta_approx for n in result.n_list],
        "k_opt": [d["k_opt"] for d in result.deviation_summary.values()],
        "relative_step": "k/k_opt with the formula k_opt",
        "version": __version__,
    }
    if cfg.format == "csv":
        return render_csv(summary, SUMMARY_COLUMNS, meta)
    if cfg.format == "json":
        return render_json({"metadata": meta, "summary": summary,
                            "rows": {str(n): [p.as_dict() for p in pts] for n, pts in result.rows.items()}})
    palette = ["#1f4fbf", "#7b2a8c", "#d9a400", "#2a8c4a", "#c0392b", "#555555"]
    series = []
    for i, n in enumerate(result.n_list):
        colour = palette[i % len(palette)]
        pts = result.rows[n]
        series.append((f"E_n n={n}", colour, [(p.relative_step, p.E_n) for p in pts]))
        series.append((f"E_2 n={n}", colour, [(p.relative_step, p.E_2) for p in pts]))
    return render_svg(series, "k / k_opt", f"scale invariance, M={cfg.M}", meta)


def _run_verify(cfg: RunConfig) -> tuple[str, bool]:
    report = analysis.verification_suite(quick=cfg.quick, tolerances=cfg.tolerances)
    if cfg.format == "json":
        return render_json(report.as_dict()), report.passed
    rows = [{"name": c.name, "passed": c.passed, "measured": c.measured,
             "tolerance": c.tolerance, "detail": c.detail} for c in report.checks]
    meta = {"passed": report.passed, "version": __version__}
    return render_csv(rows, ("name", "passed", "measured", "tolerance", "detail"), meta), report.passed


def run(cfg: RunConfig, stdout=None) -> int:
    """Execute a validated configuration and write its output; returns the exit status."""
    cfg.validate()
    path = _default_path(cfg)
    ok = True
    if cfg.command == "grover":
        spec = cfg.spec()
        rows = analysis.grover_dynamics_table(spec)
        meta = spec_metadata(spec, relative_step="k/k_opt with the formula k_opt")
        text = render_table(rows, cfg.format, meta, f"Grover search, n={spec.n}, M={spec.M}")
    elif cfg.command == "pi3":
        spec = cfg.spec()
        rows = analysis.pi3_dynamics_table(spec, cfg.m_max)
        meta = spec_metadata(spec, m_max=cfg.m_max, relative_step="m/m_max")
        text = render_table(rows, cfg.format, meta, f"pi/3 search, n={spec.n}, M={spec.M}")
    elif cfg.command == "sweep":
        text = _run_sweep(cfg)
    else:
        text, ok = _run_verify(cfg)
    write_output(text, path, stdout)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _tolerance(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return name, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance for {name} is not a number: {value!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="grover-ent", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, svg=True):
        p.add_argument("--format", choices=("csv", "json", "svg") if svg else ("csv", "json"),
                       default="csv" if svg else "json")
        p.add_argument("--output", type=Path, help=f"output file (default: ${OUTDIR_ENV} or stdout)")

    for name, help_ in (("grover", "Grover dynamics for k = 0..k_opt"),
                        ("pi3", "pi/3 fixed-point dynamics for m = 0..m_max")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--m", dest="M", type=int, default=1, help="number of solutions (1 or 2)")
        p.add_argument("--solutions", type=_int_list,
                       help="explicit solution indices (default |1..1>, or {|0..0>, |1..1>})")
        if name == "pi3":
            p.add_argument("--m-max", type=int, default=8, help=f"recursion depth, at most {PI3_MAX_DEPTH}")
        common(p)

    p = sub.add_parser("sweep", help="scale-invariance sweep over several register sizes")
    p.add_argument("--n-list", type=_int_list, required=True)
    p.add_argument("--m", dest="M", type=int, default=1)
    p.add_argument("--grid-points", type=int, default=101)
    common(p)

    p = sub.add_parser("verify", help="run all cross-checks; exit 1 if any fails")
    p.add_argument("--quick", action="store_true", help="smaller register ranges")
    p.add_argument("--tol", dest="tolerances", type=_tolerance, action="append", default=[],
                   metavar="CHECK=VALUE", help="override a check tolerance")
    common(p, svg=False)
    return parser


def parse_config(argv) -> RunConfig:
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(command=ns.command, format=ns.format, output=ns.output)
    if ns.command in ("grover", "pi3"):
        cfg.n, cfg.M = ns.n, ns.M
        cfg.solutions = tuple(ns.solutions) if ns.solutions is not None else None
        if ns.command == "pi3":
            cfg.m_max = ns.m_max
    elif ns.command == "sweep":
        cfg.n_list, cfg.M, cfg.grid_points = ns.n_list, ns.M, ns.grid_points
    else:
        cfg.quick = ns.quick
        cfg.tolerances = dict(ns.tolerances)
    return cfg


def _error(kind: str, exc: BaseException, code: int, stderr) -> int:
    record = {"error": kind, "message": str(exc), "exit_code": code}
    (stderr or sys.stderr).write(json.dumps(record) + "\n")
    return code


def main(argv=None, stdout=None, stderr=None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
        return run(cfg, stdout)
    except UsageError as exc:
        return _error("usage", exc, EXIT_USAGE, stderr)
    except ResourceGuardError as exc:
        return _error("resource_guard", exc, EXIT_RESOURCE, stderr)
    except (OptimizationError, ConsistencyError) as exc:
        return _error("numerical", exc, EXIT_NUMERIC, stderr)
    except OSError as exc:
        return _error("io", exc, EXIT_IO, stderr)
    except ValueError as exc:
        return _error("invalid_config", exc, EXIT_INVALID, stderr)


if __name__ == "__main__":
    raise SystemExit(main())
