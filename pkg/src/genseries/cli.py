"""Batch command-line front end for the generating-series engine.

Subcommands: expand, mean-response, respond, moment, diagrams, validate.
Every invocation is deterministic given its arguments (stochastic runs
take an explicit seed), and every run that produces files also writes a
JSON manifest recording the command, options, outputs, seed, and tool
version, so any artifact can be regenerated from its manifest alone.

Exit codes: 0 success, 1 usage or input error, 2 validation failure,
3 term budget exceeded.  The environment variable GENSERIES_TERM_BUDGET
overrides the default expansion budget; an explicit --budget flag beats
the environment.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .borel import format_time_function
from .checks import fixed_point_residual, mc_consistency, oracle_triangle
from .diagrams import expand_shapes, render_dot, term_to_diagram
from .errors import GenseriesError, SpecParseError, TermBudgetError
from .moments import NoiseSpec, equal_time_moment_detail, mean_response_detail
from .oracles import SimulationConfig, integrate_ode, volterra_response
from .render import dump_terms, render_term_list
from .specfile import ParsedSpec, load_spec
from .systems import (
    DEFAULT_TERM_BUDGET,
    build_system,
    iterate,
    order2_listing,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_BUDGET = 3

BUDGET_ENV_VAR = "GENSERIES_TERM_BUDGET"


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures remapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# run manifests


@dataclass(frozen=True)
class RunManifest:
    """Reproducibility record written next to every produced file."""

    command: str
    spec_path: str | None
    options: dict
    output_paths: tuple[str, ...]
    tool_version: str = __version__
    seed: int | None = None

    def to_json(self) -> str:
        payload = {
            "command": self.command,
            "input_spec": self.spec_path,
            "options": self.options,
            "outputs": list(self.output_paths),
            "tool_version": self.tool_version,
            "seed": self.seed,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _write_manifest(manifest: RunManifest, anchor: Path) -> Path:
    path = anchor.with_name(anchor.name + ".manifest.json")
    path.write_text(manifest.to_json(), encoding="utf-8")
    return path


def _emit(text: str, output: str | None, manifest_command: str,
          spec_path: str | None, options: dict, seed: int | None = None) -> None:
    """Print to stdout, or write to a file plus its manifest."""
    if output is None:
        print(text, end="" if text.endswith("\n") else "\n")
        return
    out = Path(output)
    out.write_text(text, encoding="utf-8")
    manifest = RunManifest(
        manifest_command, spec_path, options, (str(out),), seed=seed
    )
    _write_manifest(manifest, out)


# ---------------------------------------------------------------------------
# shared helpers


def _resolve_budget(args) -> int:
    flag = getattr(args, "budget", None)
    if flag is not None:
        return flag
    env = os.environ.get(BUDGET_ENV_VAR)
    if env:
        try:
            return int(env)
        except ValueError:
            raise SpecParseError(
                f"{BUDGET_ENV_VAR} must be an integer, got {env!r}"
            ) from None
    return DEFAULT_TERM_BUDGET


def _fraction_arg(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(
            f"{text!r} is not an exact rational (use forms like 1/10 or 0.1)"
        ) from None


def _order_pair(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"\(?\s*(\d+)\s*,\s*(\d+)\s*\)?", text)
    if not m:
        raise argparse.ArgumentTypeError(
            f"{text!r} is not an order pair like 2,1"
        )
    return int(m.group(1)), int(m.group(2))


def _csv_text(header: list[str], columns: list[np.ndarray]) -> str:
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(f"{float(v):.9e}" for v in row))
    return "\n".join(lines) + "\n"


def _load(args) -> ParsedSpec:
    return load_spec(args.spec)


def _grid_config(args) -> SimulationConfig:
    return SimulationConfig(dt=args.dt, t_end=args.t_end)


# ---------------------------------------------------------------------------
# expand


def cmd_expand(args) -> int:
    parsed = _load(args)
    spec = parsed.spec
    budget = _resolve_budget(args)
    result = iterate(spec, args.order, budget)
    listing = None
    if args.order >= 2 and tuple(p for p, _ in spec.nonlinear) == (2, 3):
        listing = order2_listing(spec)

    sections: list[str] = []
    for k in range(args.order + 1):
        header = (
            f"# g{k}: raw {result.raw_counts[k]} merged {result.merged_counts[k]}"
        )
        terms = result.order(k)
        if k == 2 and listing is not None:
            header += (
                f" listed {listing.total}"
                " (sub-product listing: quadratic-bracket products kept"
                " per source term, cubic-bracket product merged)"
            )
            shown = listing.entries() if args.format == "array" else terms
        else:
            shown = terms
        if args.format == "array":
            body = render_term_list(shown) if shown else "(no terms)"
            sections.append(header + "\n" + body)
        else:
            body = dump_terms(shown, order=k)
            sections.append(header + ("\n" + body if body else ""))
    text = "\n\n".join(sections) + "\n"
    options = {"order": args.order, "format": args.format, "budget": budget}
    _emit(text, args.output, "expand", str(args.spec), options)
    return EXIT_OK


# ---------------------------------------------------------------------------
# mean-response and moment


def _moment_csv(detail, grid: np.ndarray, value_name: str) -> str:
    per_order = [tf.evaluate(grid) for tf in detail.per_order]
    total = np.sum(per_order, axis=0) if per_order else np.zeros_like(grid)
    header = ["t", value_name] + [f"order{k}" for k in range(len(per_order))]
    return _csv_text(header, [grid, total] + per_order)


def _closed_form_lines(detail) -> list[str]:
    lines = []
    for k, tf in enumerate(detail.per_order):
        lines.append(f"# order {k}: {format_time_function(tf)}")
    lines.append(f"# total: {format_time_function(detail.total())}")
    lines.append(
        "# surviving expectation terms: "
        + (
            ", ".join(
                f"order {s.order} index {s.index}/{s.total}"
                for s in detail.survivors
            )
            or "none"
        )
    )
    return lines


def cmd_mean_response(args) -> int:
    parsed = _load(args)
    spec = parsed.spec
    budget = _resolve_budget(args)
    noise = NoiseSpec(args.sigma2)
    detail = mean_response_detail(spec, noise, args.order, budget)
    grid = _grid_config(args).grid()
    csv_text = _moment_csv(detail, grid, "mean")
    listing = "\n".join(_closed_form_lines(detail)) + "\n"
    options = {
        "sigma2": str(args.sigma2),
        "order": args.order,
        "t_end": args.t_end,
        "dt": args.dt,
        "budget": budget,
    }
    if args.output is None:
        print(listing + csv_text, end="")
    else:
        print(listing, end="")
        _emit(csv_text, args.output, "mean-response", str(args.spec), options)
    return EXIT_OK


def cmd_moment(args) -> int:
    parsed = _load(args)
    spec = parsed.spec
    budget = _resolve_budget(args)
    noise = NoiseSpec(args.sigma2)
    detail = equal_time_moment_detail(spec, noise, args.power, args.order, budget)
    grid = _grid_config(args).grid()
    csv_text = _moment_csv(detail, grid, f"y{args.power}")
    listing = "\n".join(_closed_form_lines(detail)) + "\n"
    options = {
        "power": args.power,
        "sigma2": str(args.sigma2),
        "order": args.order,
        "t_end": args.t_end,
        "dt": args.dt,
        "budget": budget,
    }
    if args.output is None:
        print(listing + csv_text, end="")
    else:
        print(listing, end="")
        _emit(csv_text, args.output, "moment", str(args.spec), options)
    return EXIT_OK


# ---------------------------------------------------------------------------
# respond


def _read_signal_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    rows: list[tuple[float, float]] = []
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecParseError(f"cannot read input signal {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2:
            raise SpecParseError(
                f"{path}: need two columns t,x; got {len(parts)}", lineno
            )
        try:
            rows.append((float(parts[0]), float(parts[1])))
        except ValueError:
            if not rows:
                continue  # header row
            raise SpecParseError(
                f"{path}: non-numeric value {raw.strip()!r}", lineno
            ) from None
    if len(rows) < 2:
        raise SpecParseError(f"{path}: need at least two samples")
    t = np.array([r[0] for r in rows])
    x = np.array([r[1] for r in rows])
    dt = t[1] - t[0]
    if abs(t[0]) > 1e-12 or dt <= 0 or not np.allclose(np.diff(t), dt, rtol=1e-6):
        raise SpecParseError(
            f"{path}: time column must be a uniform grid starting at 0"
        )
    return t, x


def cmd_respond(args) -> int:
    parsed = _load(args)
    spec = parsed.spec
    budget = _resolve_budget(args)
    t, x = _read_signal_csv(args.input)
    cfg = SimulationConfig(dt=float(t[1] - t[0]), t_end=float(t[-1]))
    result = iterate(spec, args.order, budget)
    series = volterra_response(
        result.all_terms(), x, cfg, spec.poles, spec.eps_values()
    )
    ode = integrate_ode(spec, x, cfg)
    csv_text = _csv_text(["t", "series", "ode"], [t, series.y, ode.y])
    options = {"order": args.order, "input": str(args.input), "budget": budget}
    _emit(csv_text, args.output, "respond", str(args.spec), options)
    return EXIT_OK


# ---------------------------------------------------------------------------
# diagrams


def cmd_diagrams(args) -> int:
    i, j = args.order
    shapes = [s for s in expand_shapes((i, j)) if s.tree.vertex_count() > 0]
    lines = [f"Y{i}{j}: {len(shapes)} terms"]
    outputs: list[str] = []
    out_dir = Path(args.out_dir)
    if shapes:
        out_dir.mkdir(parents=True, exist_ok=True)
    for k, term in enumerate(shapes, start=1):
        diagram = term_to_diagram(term)
        name = f"Y{i}_{j}_term{k}"
        path = out_dir / f"{name}.dot"
        path.write_text(render_dot(diagram, name), encoding="utf-8")
        outputs.append(str(path))
        lines.append(
            f"  term {k}: multiplicity {term.multiplicity}"
            f" tree {term.tree.serialize()} -> {path}"
        )
    print("\n".join(lines))
    if outputs:
        manifest = RunManifest(
            "diagrams",
            None,
            {"order": [i, j], "out_dir": str(out_dir)},
            tuple(outputs),
        )
        _write_manifest(manifest, out_dir / f"Y{i}_{j}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# validate


def cmd_validate(args) -> int:
    checks: list[tuple[str, bool, str]] = []
    metrics: dict[str, dict] = {}

    try:
        parsed = load_spec(args.spec)
    except SpecParseError:
        raise
    except GenseriesError as exc:
        line = f"FAIL factorization: {exc}"
        print(line)
        print(json.dumps({"passed": False, "checks": {"factorization": False}}))
        return EXIT_VALIDATION
    spec = parsed.spec
    checks.append(("factorization", True, spec.describe()))
    metrics["factorization"] = {"poles": [repr(p) for p in spec.poles]}

    has_nonlinear = bool(spec.nonlinear) and args.order >= 1

    residual_order = args.order if has_nonlinear else 0
    rep = fixed_point_residual(
        spec, max_order=residual_order, word_length=args.word_length
    )
    checks.append(("fixed-point-residual", rep.passed, rep.summary()))
    metrics["fixed-point-residual"] = {
        "word_length": rep.word_length,
        "grades_exercised": [list(g) for g in rep.exercised_grades()],
        "nonzero_words": len(rep.offending()),
    }

    if has_nonlinear:
        base = dict(spec.nonlinear)

        def build(s):
            scaled = {p: c * Fraction(s) for p, c in base.items()}
            return build_system(spec.n, spec.linear_coeffs, scaled)

        trep = oracle_triangle(
            build,
            eps_ladder=(Fraction(1, 50), Fraction(1, 100), Fraction(1, 200)),
            order=args.order,
        )
        checks.append(("oracle-triangle", trep.passed, trep.summary()))
        metrics["oracle-triangle"] = {
            "slope": trep.slope,
            "expected": trep.expected_slope,
            "residuals": list(trep.residuals),
        }
    else:
        from .borel import inverse_laplace_borel, substitute_step

        cfg = SimulationConfig(dt=0.005, t_end=10.0)
        result = iterate(spec, 0)
        stepped = [substitute_step(t, 1) for t in result.all_terms()]
        closed = inverse_laplace_borel(stepped, spec.poles, spec.eps_values(), None)
        ode = integrate_ode(spec, lambda t: 1.0, cfg)
        err = float(np.abs(closed.evaluate(cfg.grid()) - ode.y).max())
        ok = err < 1e-5
        checks.append(
            (
                "linear-response",
                ok,
                f"step response vs ODE max err {err:.3e} "
                "(nonlinear checks skipped: no nonlinear terms at this order)",
            )
        )
        metrics["linear-response"] = {"max_err": err}

    cfg = SimulationConfig(
        dt=args.dt,
        t_end=args.t_end,
        ensemble_size=args.paths,
        rng_seed=args.seed,
    )
    crep = mc_consistency(
        spec, args.sigma2, order=args.order, cfg=cfg, n_times=args.times
    )
    checks.append(("monte-carlo", crep.passed, crep.summary()))
    metrics["monte-carlo"] = {
        "max_z": crep.max_z,
        "threshold": crep.threshold,
        "paths": crep.ensemble_size,
        "diverged": crep.diverged,
        "seed": args.seed,
    }

    all_passed = all(ok for _, ok, _ in checks)
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    summary = {
        "passed": all_passed,
        "checks": {name: ok for name, ok, _ in checks},
        "metrics": metrics,
    }
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK if all_passed else EXIT_VALIDATION


# ---------------------------------------------------------------------------
# parser assembly


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="genseries",
        description=__doc__.splitlines()[0],
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_budget(p):
        p.add_argument(
            "--budget",
            type=int,
            default=None,
            help=f"term budget override (also via {BUDGET_ENV_VAR})",
        )

    def add_grid(p, dt=0.01, t_end=10.0):
        p.add_argument("--t-end", type=float, default=t_end, help="time horizon")
        p.add_argument("--dt", type=float, default=dt, help="output grid step")

    p = sub.add_parser("expand", help="print the series expansion of a system")
    p.add_argument("spec", help="system spec file")
    p.add_argument("--order", type=int, default=1, help="highest grade to expand")
    p.add_argument(
        "--format",
        choices=("array", "dump"),
        default="array",
        help="two-row arrays or machine dump (dump round-trips)",
    )
    p.add_argument("-o", "--output", default=None, help="write listing to a file")
    add_budget(p)
    p.set_defaults(func=cmd_expand)

    p = sub.add_parser(
        "mean-response", help="white-noise mean response, closed form plus CSV"
    )
    p.add_argument("spec")
    p.add_argument("--sigma2", type=_fraction_arg, default=Fraction(1, 10),
                   help="noise power (exact rational)")
    p.add_argument("--order", type=int, default=2)
    add_grid(p)
    p.add_argument("-o", "--output", default=None, help="write CSV here")
    add_budget(p)
    p.set_defaults(func=cmd_mean_response)

    p = sub.add_parser(
        "respond", help="deterministic response to a sampled input, with ODE oracle"
    )
    p.add_argument("spec")
    p.add_argument("input", help="two-column CSV t,x on a uniform grid from 0")
    p.add_argument("--order", type=int, default=1)
    p.add_argument("-o", "--output", default=None, help="write CSV here")
    add_budget(p)
    p.set_defaults(func=cmd_respond)

    p = sub.add_parser("moment", help="equal-time moment <y^n>, closed form plus CSV")
    p.add_argument("spec")
    p.add_argument("--power", type=int, default=2, help="moment power n")
    p.add_argument("--sigma2", type=_fraction_arg, default=Fraction(1, 10))
    p.add_argument("--order", type=int, default=2)
    add_grid(p)
    p.add_argument("-o", "--output", default=None, help="write CSV here")
    add_budget(p)
    p.set_defaults(func=cmd_moment)

    p = sub.add_parser(
        "diagrams", help="tree diagrams and multiplicities of one expansion order"
    )
    p.add_argument(
        "--order",
        type=_order_pair,
        required=True,
        help="order pair i,j (quadratic, cubic vertex counts)",
    )
    p.add_argument("--out-dir", default=".", help="directory for .dot files")
    p.set_defaults(func=cmd_diagrams)

    p = sub.add_parser("validate", help="run the full cross-validation suite")
    p.add_argument("spec")
    p.add_argument("--order", type=int, default=2)
    p.add_argument("--sigma2", type=_fraction_arg, default=Fraction(1, 10))
    p.add_argument("--seed", type=int, default=20260823)
    p.add_argument("--paths", type=int, default=100_000, help="ensemble size")
    p.add_argument("--times", type=int, default=50, help="comparison times")
    p.add_argument("--word-length", type=int, default=8,
                   help="residual check word cutoff")
    add_grid(p, dt=0.0025)
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except TermBudgetError as exc:
        print(f"genseries: error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except GenseriesError as exc:
        print(f"genseries: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"genseries: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
