"""``psas`` command-line front end.

Exit status: 0 success, 1 adiabaticity report failed, 2 parse/validation
error, 3 numerical failure, 4 adiabatic gate failed under ``--require-adiabatic``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .adiabaticity import adiabaticity_report
from .dressed import AdiabaticityWarning, assemble_psas, dressed_series, psas_components
from .errors import ConfigurationError, InputValidationError, NumericalError
from .interferometry import (fringe_scan, frequency_scan, offset_scan, ramsey_crosscheck,
                             visibility)
from .phases import cone_loop, geometric_phase, phase_record
from .propagator import bare_populations, propagate, propagate_second_order
from .scenario import (RUN_KINDS, Scenario, ScenarioError, apply_overrides, load_scenario,
                       sweep_points, validate_scenario)

EXIT_OK, EXIT_REPORT, EXIT_INPUT, EXIT_NUMERIC, EXIT_GATE = 0, 1, 2, 3, 4
DRESSED_COLUMNS = ("dtw", "big_omega", "lambda_plus", "lambda_minus", "cos_w", "sin_w",
                   "omega_G", "omega_E", "omega_E_eff")


@dataclass
class Table:
    columns: list[str]
    rows: list[list]


@dataclass
class RunResult:
    tables: dict[str, Table]
    summary: dict
    report: dict | None = None
    status: int = EXIT_OK
    notes: list[str] = field(default_factory=list)


# ---------------------------------------------------------------- formatting

def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def write_csv(path: Path, table: Table) -> None:
    lines = [",".join(table.columns)]
    lines += [",".join(fmt(v) for v in row) for row in table.rows]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def to_json(obj, indent: int = 0) -> str:
    """Deterministic JSON with 17-significant-digit floats."""
    pad = "  " * (indent + 1)
    end = "  " * indent
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "NaN"
        if math.isinf(v):
            return "Infinity" if v > 0 else "-Infinity"
        return format(v, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{to_json(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        if all(not isinstance(x, (dict, list, tuple, np.ndarray)) for x in seq):
            return "[" + ", ".join(to_json(x) for x in seq) + "]"
        return "[\n" + ",\n".join(pad + to_json(x, indent + 1) for x in seq) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path: Path, obj) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(to_json(obj) + "\n")


# ---------------------------------------------------------------- runners

def _run_propagate(scn: Scenario) -> RunResult:
    blk = scn.propagate
    system = scn.system.build()
    fld = scn.field.build()
    init = scn.system.initial_state()
    grid = blk.grid()
    if blk.method == "second-order":
        traj = propagate_second_order(system, fld, init, (blk.t_start, blk.t_end), blk.tol, grid)
    else:
        traj = propagate(system, fld, init, (blk.t_start, blk.t_end), blk.tol, grid,
                         quadratures=False)
    pops = bare_populations(traj)
    rows = [[t, g.real, g.imag, e.real, e.imag, pg, pe, n]
            for t, g, e, (_, pg, pe, n) in zip(traj.times, traj.g, traj.e, pops)]
    cols = ["t", "re_g", "im_g", "re_e", "im_e", "pop_g", "pop_e", "norm"]
    summary = {"pop_g_final": pops[-1, 1], "pop_e_final": pops[-1, 2], "norm_final": pops[-1, 3]}
    report = {"n_steps": traj.n_steps, "n_rejected": traj.n_rejected, "tol": traj.tol,
              "error_estimate": traj.error_estimate, "method": traj.method}
    return RunResult({"propagate": Table(cols, rows)}, summary, report)


def _adiabatic_table(rep) -> Table:
    cols = ["t"] + [f"r_n{n}_k{k}" for n in range(rep.n_max + 1) for k in range(n + 2)]
    rows = []
    for i, t in enumerate(rep.grid):
        rows.append([t] + [rep.ratios[n, k, i] for n in range(rep.n_max + 1) for k in range(n + 2)])
    return Table(cols, rows)


def _run_dressed(scn: Scenario, require_adiabatic: bool = False) -> RunResult:
    blk = scn.dressed
    system = scn.system.build()
    fld = scn.field.build()
    grid = blk.grid()
    rep = adiabaticity_report(system, fld, grid, n_max=blk.n_max, threshold=blk.threshold)
    series = dressed_series(system, fld, grid, sgn_zero=blk.sgn_zero)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AdiabaticityWarning)
        comps = psas_components(system, fld, grid, blk.ic, sgn_zero=blk.sgn_zero,
                                check_adiabatic=False)
    G, E = assemble_psas(comps, series)
    cols = ["t"]
    for name in DRESSED_COLUMNS:
        cols += [f"re_{name}", f"im_{name}"]
    for name in ("G_r", "G_v", "E_r", "E_v"):
        cols += [f"re_X_{name}", f"im_X_{name}"]
    rows = []
    for i, t in enumerate(grid):
        row = [t]
        for name in DRESSED_COLUMNS:
            z = getattr(series, name)[i]
            row += [z.real, z.imag]
        for comp in (comps.G_r, comps.G_v, comps.E_r, comps.E_v):
            z = comp.exponent[i]
            row += [z.real, z.imag]
        rows.append(row)
    summary = {"cos_sq_final": abs(series.cos_w[-1]) ** 2, "sin_sq_final": abs(series.sin_w[-1]) ** 2,
               "max_ratio": rep.max_ratio, "pass": rep.passed}
    result = RunResult({"dressed": Table(cols, rows), "adiabaticity": _adiabatic_table(rep)},
                       summary, {"adiabaticity": rep.to_dict(), "ic": blk.ic})
    if not rep.passed:
        result.notes.append(f"adiabatic conditions violated: max ratio {rep.max_ratio:.6g} "
                            f"at n={rep.worst[0]}, k={rep.worst[1]}, t={rep.worst[2]:.6g}")
        if require_adiabatic:
            result.status = EXIT_GATE
    return result


def _run_adiabaticity(scn: Scenario) -> RunResult:
    blk = scn.adiabaticity
    rep = adiabaticity_report(scn.system.build(), scn.field.build(), blk.grid(), n_max=blk.n_max,
                              threshold=blk.threshold)
    result = RunResult({"adiabaticity": _adiabatic_table(rep)},
                       {"max_ratio": rep.max_ratio, "pass": rep.passed}, rep.to_dict())
    if not rep.passed:
        result.status = EXIT_REPORT
        result.notes.append(f"adiabaticity report failed: max ratio {rep.max_ratio:.6g}")
    return result


def _run_phase(scn: Scenario) -> RunResult:
    blk = scn.phase
    system = scn.system.build()
    fld = scn.field.build()
    traj = propagate(system, fld, scn.system.initial_state(), (blk.t_start, blk.t_end), blk.tol,
                     blk.grid(), quadratures=False)
    rec = phase_record(traj, system, fld)
    res = rec.geometric_residual
    rows = [[t, a, b, c] for t, a, b, c in zip(rec.t, rec.total, rec.dynamical, res)]
    summary = {"phi_total_final": rec.total[-1], "phi_dyn_final": rec.dynamical[-1],
               "residual_final": res[-1]}
    result = RunResult({"phase": Table(["t", "phi_total", "phi_dyn", "residual"], rows)}, summary,
                       {"max_step": rec.max_step, "density_ok": rec.density_ok})
    if not rec.density_ok:
        result.notes.append("phase grid too coarse for reliable unwrapping; increase points")
    return result


def _run_berry(scn: Scenario) -> RunResult:
    blk = scn.berry
    system = scn.system.build()
    fld = scn.field.build()
    loop = cone_loop(system, fld.peak_rabi, blk.points, blk.reverse, fld.carrier)
    phase = geometric_phase(loop)
    dw = system.detuning(fld.carrier)
    cos_theta = dw / math.hypot(dw, fld.peak_rabi)
    oracle = (1.0 if blk.reverse else -1.0) * math.pi * (1.0 - cos_theta)
    cols = ["points", "geometric_phase", "cone_oracle"]
    return RunResult({"berry": Table(cols, [[blk.points, phase, oracle]])},
                     {"geometric_phase": phase}, {"cos_theta": cos_theta})


def _run_interferogram(scn: Scenario) -> RunResult:
    blk = scn.interferogram
    if blk.model == "ramsey":
        train = scn.pulses.build()
        taus = blk.values.array() if blk.values is not None else np.array([train.delay])
        ig = ramsey_crosscheck(scn.system.build(), train, taus, blk.tol)
    else:
        wp = scn.wavepacket.build()
        second = scn.second_pulse.build()
        vals = blk.values.array()
        if blk.scan == "delay":
            ig = fringe_scan(wp, second, vals)
        elif blk.scan == "locked_frequency":
            ig = frequency_scan(wp, second, blk.tau, vals)
        else:
            ig = offset_scan(wp, second, blk.tau, vals)
    cols = ["scan_value", "P_analytic"]
    if ig.P_propagated is not None:
        cols.append("P_propagated")
    cols += ["A1sq", "A2sq", "cross"]
    rows = []
    for i, v in enumerate(ig.values):
        row = [v, ig.P[i]]
        if ig.P_propagated is not None:
            row.append(ig.P_propagated[i])
        rows.append(row + [ig.A1sq[i], ig.A2sq[i], ig.cross[i]])
    summary = {"P_analytic_first": ig.P[0]}
    if ig.P_propagated is not None:
        summary["P_propagated_first"] = ig.P_propagated[0]
    summary["visibility"] = visibility(ig.P)
    report = {"scan_variable": ig.scan_variable, "model": ig.model, **ig.info}
    return RunResult({"interferogram": Table(cols, rows)}, summary, report)


def execute(scn: Scenario, require_adiabatic: bool = False) -> RunResult:
    kind = scn.kind
    if kind == "dressed":
        return _run_dressed(scn, require_adiabatic)
    return {"propagate": _run_propagate, "adiabaticity": _run_adiabaticity, "phase": _run_phase,
            "berry": _run_berry, "interferogram": _run_interferogram}[kind](scn)


def _sweep_worker(doc: dict) -> dict:
    return execute(validate_scenario(doc)).summary


def _run_sweep(scn: Scenario, jobs: int) -> RunResult:
    keys, combos, docs = sweep_points(scn)
    if jobs > 1 and len(docs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            summaries = list(pool.map(_sweep_worker, docs))
    else:
        summaries = [_sweep_worker(d) for d in docs]
    cols = list(keys) + list(summaries[0])
    rows = [list(c) + [s[k] for k in summaries[0]] for c, s in zip(combos, summaries)]
    return RunResult({"sweep": Table(cols, rows)}, {}, {"base": scn.sweep.base, "points": len(rows)})


# ---------------------------------------------------------------- driver

def _emit(scn_data: dict, result: RunResult, out_dir: Path, formats: list[str]) -> list[str]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, table in result.tables.items():
        if "csv" in formats:
            write_csv(out_dir / f"{name}.csv", table)
            written.append(f"{name}.csv")
        if "json" in formats:
            payload = {"columns": table.columns,
                       "data": {c: [row[j] for row in table.rows] for j, c in enumerate(table.columns)}}
            if result.report is not None:
                payload["report"] = result.report
            write_json(out_dir / f"{name}.json", payload)
            written.append(f"{name}.json")
    manifest = {"artifact": "psas", "version": __version__, "scenario": scn_data,
                "files": written, "summary": result.summary}
    write_json(out_dir / "manifest.json", manifest)
    return written


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("scenario", help="scenario file (YAML/JSON, or a manifest.json)")
    common.add_argument("--out", help="output directory (overrides output.directory)")
    common.add_argument("--format", choices=("csv", "json", "both"),
                        help="output formats (overrides output.formats)")
    common.add_argument("--jobs", type=int, default=1, help="parallel sweep workers")
    common.add_argument("--tol", type=float, help="integrator tolerance override")
    common.add_argument("--require-adiabatic", action="store_true",
                        help="exit 4 when a dressed run violates the adiabatic conditions")
    parser = argparse.ArgumentParser(prog="psas", description="Phase-sensitive adiabatic states toolkit")
    parser.add_argument("--version", action="version", version=f"psas {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in RUN_KINDS + ("run",):
        helptext = "run whatever the scenario declares" if name == "run" else f"{name} run"
        sub.add_parser(name, parents=[common], help=helptext)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        scn = load_scenario(args.scenario)
        if args.command != "run" and args.command != scn.run:
            raise ScenarioError([f"{args.scenario}: subcommand '{args.command}' does not match "
                                 f"run '{scn.run}'"])
        formats = None
        if args.format is not None:
            formats = ["csv", "json"] if args.format == "both" else [args.format]
        data = apply_overrides(scn.resolved(), tol=args.tol, out=args.out, formats=formats)
        scn = validate_scenario(data, args.scenario)
        data = scn.resolved()
        if scn.run == "sweep":
            result = _run_sweep(scn, args.jobs)
        else:
            result = execute(scn, args.require_adiabatic)
    except ScenarioError as exc:
        for m in exc.messages:
            print(f"error: {m}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"error: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputValidationError, ConfigurationError) as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT

    written = _emit(data, result, Path(scn.output.directory), scn.output.formats)
    for note in result.notes:
        print(f"warning: {note}", file=sys.stderr)
    print(f"{scn.name}: wrote {', '.join(written)} and manifest.json to {scn.output.directory}")
    return result.status


if __name__ == "__main__":
    sys.exit(main())
