"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 computation error,
4 verification failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import platform
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .config import ConfigError, RunInput, load_config, validate_config
from .series import format_fraction

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE, EXIT_VERIFY = 0, 2, 3, 4
COMMANDS = ("solve", "reduce", "gamma", "radius", "field", "separatrix", "hopf-check")


class VerificationFailure(RuntimeError):
    pass


@dataclass
class RunConfig:
    command: str
    input: str | None
    out: Path
    truncation: int | None = None
    tolerance: float | None = None
    grid: tuple[int, int] | None = None
    xrange: tuple[float, float] | None = None
    yrange: tuple[float, float] | None = None
    formats: tuple[str, ...] = ()
    artifacts: list[Path] = field(default_factory=list)

    def wants(self, fmt: str) -> bool:
        return not self.formats or fmt in self.formats

    def write(self, name: str, text: str) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        path = self.out / name
        path.write_text(text)
        self.artifacts.append(path)
        return path


def _pair(text: str, sep: str, conv):
    parts = text.split(sep)
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected two values separated by {sep!r}: {text!r}")
    try:
        return conv(parts[0]), conv(parts[1])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dsegrowth", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--input", help="JSON configuration (bundled names such as phi3.json also work)")
    ap.add_argument("--out", default="out", help="output directory (default: ./out)")
    ap.add_argument("--truncation", type=int, help="override the truncation order N")
    ap.add_argument("--tolerance", type=float, help="relative tolerance for checks")
    ap.add_argument("--grid", type=lambda t: _pair(t, "x", int), help="field grid as WxH")
    ap.add_argument("--xrange", type=lambda t: _pair(t, ":", float), help="x range a:b")
    ap.add_argument("--yrange", type=lambda t: _pair(t, ":", float), help="gamma range a:b")
    ap.add_argument("--format", action="append", choices=("csv", "json", "svg", "dat"),
                    help="restrict emitted formats (repeatable)")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


# -- commands ------------------------------------------------------------------------

def _theory(run: RunInput, cfg: RunConfig):
    if run.theory is None:
        raise ConfigError(["$.mellin: this command needs Mellin data"])
    if cfg.truncation is None or cfg.truncation == run.theory.truncation:
        return run.theory
    if cfg.truncation < 1:
        raise ConfigError(["--truncation: must be >= 1"])
    # re-validate so pole-form data is regenerated and short lists are rejected up front
    return validate_config({**run.raw, "truncation": cfg.truncation}).theory


def cmd_solve(run: RunInput, cfg: RunConfig) -> dict:
    from .solver import rhs_residual, solve_system

    spec = _theory(run, cfg)
    table = solve_system(spec)
    residual = rhs_residual(spec, table)
    if any(v for rows in residual.values() for row in rows for v in row):
        raise VerificationFailure("solved table does not satisfy the equation")
    if cfg.wants("csv"):
        cfg.write("gamma_table.csv", table.to_csv())
    return {"truncation": spec.truncation, "convention": spec.convention}


def cmd_reduce(run: RunInput, cfg: RunConfig) -> dict:
    from .reduce import reduce_system, verify_reduction

    spec = _theory(run, cfg)
    result = reduce_system(spec)
    if cfg.wants("csv"):
        cfg.write("reduction.csv", result.to_csv())
    if cfg.wants("json"):
        cfg.write("reduction.json", result.to_json() + "\n")
    if not verify_reduction(spec, result):
        raise VerificationFailure("re-solving with the reduced kernels does not reproduce the table")
    return {"truncation": spec.truncation, "convention": spec.convention, "verified": True}


def _primitives(run: RunInput, cfg: RunConfig, N: int):
    """p-series per residue: direct input, or derived by reduction."""
    from .radius import PrimitiveForm
    from .recursions import p_from_reduction
    from .reduce import reduce_system

    if run.p_series is not None:
        vals = {}
        for r in run.p_series.residues:
            form = run.p_forms.get(r, PrimitiveForm())
            if form.kind in ("lipatov", "inverse_factorial"):
                vals[r] = form.values(N)
            else:
                vals[r] = list(run.p_series.values[r])
        return vals, dict(run.p_forms), "direct"
    spec = _theory(run, RunConfig(cfg.command, cfg.input, cfg.out, truncation=N))
    red = reduce_system(spec)
    ps = p_from_reduction(red)
    return {r: ps.values[r] for r in ps.residues}, {r: PrimitiveForm("sampled") for r in ps.residues}, \
        "reduction"


def _s_for(run: RunInput, residues) -> dict[str, int]:
    return {r: run.s[r] for r in residues}


def cmd_gamma(run: RunInput, cfg: RunConfig) -> dict:
    from .recursions import first_recursion, second_recursion_system

    N = cfg.truncation or run.truncation or 12
    p, _, provenance = _primitives(run, cfg, N)
    s = _s_for(run, p)
    g1 = second_recursion_system(p, s, N)
    if cfg.wants("csv"):
        lines = ["residue,n,value"]
        for r, series in g1.items():
            for n in range(1, N + 1):
                lines.append(f"{r},{n},{format_fraction(series[n])}")
        cfg.write("gamma1.csv", "\n".join(lines) + "\n")
        cfg.write("gamma_table.csv", first_recursion(g1, s).to_csv())
    return {"truncation": N, "p_provenance": provenance}


def cmd_radius(run: RunInput, cfg: RunConfig) -> dict:
    from .radius import MIN_TERMS, InsufficientTerms, analyze
    from .recursions import second_recursion_system

    N = cfg.truncation or run.radius_truncation or run.truncation or 80
    if N < MIN_TERMS:
        raise InsufficientTerms(f"radius estimates need a truncation of at least {MIN_TERMS}, got {N}")
    p, forms, provenance = _primitives(run, cfg, N)
    s = _s_for(run, p)
    g1 = second_recursion_system(p, s, N)
    report = analyze(g1, p, s, forms)
    if cfg.wants("json"):
        cfg.write("radius.json", report.to_json() + "\n")
    if cfg.wants("csv"):
        cfg.write("a_n.csv", report.a_table_csv())
    tol = cfg.tolerance if cfg.tolerance is not None else 0.05
    within = {r: (rep.deviation is None or rep.deviation <= tol) for r, rep in report.residues.items()}
    return {"truncation": N, "p_provenance": provenance, "tolerance": tol, "within_tolerance": within}


def _ode(run: RunInput):
    if run.ode is None:
        raise ConfigError(["$.ode: this command needs an 'ode' section"])
    return run.ode


def cmd_field(run: RunInput, cfg: RunConfig) -> dict:
    from .ode import emit_field, field_svg, integrate, integrate_system

    spec = _ode(run)
    grid = cfg.grid or (30, 30)
    xr = cfg.xrange or spec.xrange
    yr = cfg.yrange or spec.yrange
    if spec.mode == "system2":
        x0 = float(run.ode_extra.get("x0", 0.05))
        x_end = float(run.ode_extra.get("x_end", xr[1]))
        g0 = (x0, x0 * x0)
        xs, ys, term = integrate_system(spec, x0, g0, x_end)
        if cfg.wants("csv"):
            lines = ["x,gamma_plus,gamma_minus"] + [f"{a!r},{b[0]!r},{b[1]!r}" for a, b in zip(xs, ys)]
            cfg.write("system_trajectory.csv", "\n".join(lines) + "\n")
        return {"mode": "system2", "termination": term}
    xa = xr[0] if xr[0] > 0 else (xr[1] - xr[0]) / (grid[0] * 10)
    data = emit_field(spec, grid, (xr[0], xr[1]), yr)
    trajs = []
    for i, g0 in enumerate(run.ode_extra.get("trajectories", [])):
        trajs.append(integrate(spec, float(g0[0]), float(g0[1]), xr[1], window=yr))
    if not trajs:
        # a small fan of trajectories through the left edge of the window
        for k in range(1, 6):
            y0 = yr[0] + (yr[1] - yr[0]) * k / 6
            trajs.append(integrate(spec, xa, y0, xr[1], window=yr))
    if cfg.wants("dat"):
        cfg.write("field.dat", data.to_dat())
    if cfg.wants("svg"):
        cfg.write("field.svg", field_svg(data, spec, trajs))
    if cfg.wants("csv"):
        for i, t in enumerate(trajs):
            cfg.write(f"trajectory_{i}.csv", t.to_csv())
    return {"grid": list(grid), "masked_points": int(data.mask.sum()),
            "terminations": [t.termination for t in trajs]}


def cmd_separatrix(run: RunInput, cfg: RunConfig) -> dict:
    from .ode import asymptotic_series, integrate, qed_p_root, separatrix_search, NoSignChange

    spec = _ode(run)
    if spec.mode != "single":
        raise ConfigError(["$.ode.mode: separatrix search needs a single equation"])
    x0 = float(run.ode_extra.get("x0", 0.01))
    x_probe = float(run.ode_extra.get("x_probe", 0.5))
    tol = cfg.tolerance if cfg.tolerance is not None else 1e-10
    g0 = separatrix_search(spec, x0, x_probe, tol=tol)
    coeffs = asymptotic_series(spec, 5)
    seed = sum(float(c) * x0**n for n, c in enumerate(coeffs[:5]))
    doc = {
        "x0": x0, "x_probe": x_probe, "g0": g0,
        "series_coefficients": [format_fraction(c) for c in coeffs[1:]],
        "four_term_series_value": seed,
        "difference": g0 - seed,
        "truncation_bound": 10 * abs(float(coeffs[5])) * x0**5,
    }
    if "root_interval" in run.ode_extra:
        a, b = run.ode_extra["root_interval"]
        try:
            doc["p_root"] = qed_p_root(spec.P, float(a), float(b))
        except NoSignChange:
            doc["p_root"] = None
    if cfg.wants("json"):
        cfg.write("separatrix.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if cfg.wants("csv"):
        cfg.write("separatrix_trajectory.csv", integrate(spec, x0, g0, x_probe).to_csv())
    return {"g0": g0}


def cmd_hopf(run: RunInput | None, cfg: RunConfig) -> dict:
    from .hopf import check_breaking_apart, combinatorial_dse, exhaustive_axiom_check

    opts = run.hopf if run is not None else {}
    max_nodes = int(opts.get("max_nodes", cfg.truncation or 6))
    decorations = tuple(opts.get("decorations", (1, 2)))
    s_values = list(opts.get("s", (1, 2, 3)))
    k_max = int(opts.get("k_max", 5))
    failures = exhaustive_axiom_check(max_nodes, decorations)
    breaking = {}
    for s in s_values:
        X = combinatorial_dse(s, k_max)
        breaking[str(s)] = [check_breaking_apart(s, k, X) for k in range(k_max + 1)]
    doc = {"max_nodes": max_nodes, "decorations": list(decorations), "axiom_failures": failures,
           "breaking_apart": breaking}
    if cfg.wants("json"):
        cfg.write("hopf_check.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    if any(failures.values()) or not all(all(v) for v in breaking.values()):
        raise VerificationFailure("Hopf identities failed; see hopf_check.json")
    return {"max_nodes": max_nodes}


HANDLERS = {
    "solve": cmd_solve, "reduce": cmd_reduce, "gamma": cmd_gamma, "radius": cmd_radius,
    "field": cmd_field, "separatrix": cmd_separatrix, "hopf-check": cmd_hopf,
}


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(cfg: RunConfig, summary: dict, status: int, wall: float, input_hash: str | None,
                    message: str | None = None) -> None:
    import numpy
    import scipy

    doc = {
        "command": cfg.command,
        "input": cfg.input,
        "input_sha256": input_hash,
        "exit_status": status,
        "message": message,
        "summary": summary,
        "artifacts": {p.name: _sha256(p) for p in cfg.artifacts},
        "versions": {"dsegrowth": __version__, "python": platform.python_version(),
                     "numpy": numpy.__version__, "scipy": scipy.__version__},
        "wall_time_s": round(wall, 6),
    }
    cfg.out.mkdir(parents=True, exist_ok=True)
    (cfg.out / "manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")


def run(cfg: RunConfig) -> int:
    from .ode import DomainError, NoBracket, NoSignChange, SingularPoint
    from .radius import InsufficientTerms
    from .series import InsufficientLaurentOrder, PoleAtOrigin, ZeroConstantTerm

    t0 = time.perf_counter()
    input_hash = None
    summary: dict = {}
    try:
        run_input = None
        if cfg.input is not None:
            run_input = load_config(cfg.input)
            src = Path(cfg.input)
            input_hash = hashlib.sha256(json.dumps(run_input.raw, sort_keys=True).encode()).hexdigest() \
                if not src.exists() else _sha256(src)
        elif cfg.command != "hopf-check":
            raise ConfigError(["--input: required for this command"])
        summary = HANDLERS[cfg.command](run_input, cfg)
        status, message = EXIT_OK, None
    except ConfigError as exc:
        status, message = EXIT_CONFIG, "; ".join(exc.errors)
    except VerificationFailure as exc:
        status, message = EXIT_VERIFY, str(exc)
    except (InsufficientLaurentOrder, ZeroConstantTerm, PoleAtOrigin, SingularPoint, DomainError, NoBracket,
            NoSignChange, InsufficientTerms, ArithmeticError, ValueError) as exc:
        status, message = EXIT_COMPUTE, f"{type(exc).__name__}: {exc}"
    except Exception as exc:  # no traceback escapes to the shell
        status, message = EXIT_COMPUTE, f"unexpected {type(exc).__name__}: {exc}"
    _write_manifest(cfg, summary, status, time.perf_counter() - t0, input_hash, message)
    if message:
        print(f"dsegrowth {cfg.command}: {message}", file=sys.stderr)
    return status


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    cfg = RunConfig(
        command=args.command, input=args.input, out=Path(args.out), truncation=args.truncation,
        tolerance=args.tolerance, grid=args.grid, xrange=args.xrange, yrange=args.yrange,
        formats=tuple(args.format or ()),
    )
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
