"""Command-line runner.

Subcommands::

    rigidkit analyze   scenario.json   rigidity pipeline -> report.json, rigidity_matrix.csv, subspaces.json
    rigidkit modes     scenario.json   hidden-mode analysis -> modes.json
    rigidkit dichotomy scenario.json   impulse experiment -> outcome.json, trajectory.csv [, sweep.csv]
    rigidkit plotdata  RUN_DIR         plot-ready files -> arrows_Ri.csv, arrows_Ti.csv, edge_errors.csv, plane.json

Exit codes: 0 success, 2 input/validation problem, 3 numerical failure.
Output directory: --out, else the RIGIDKIT_OUT environment variable, else
the current directory. Identical scenario and flags produce byte-identical
outputs; every run records its files in manifest.json, and --check re-runs
the command and compares against the recorded outputs within tolerances.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np

from .dynamics import (
    NumericalError,
    controllable_plane,
    shape_recovery_experiment,
    sweep_impulse_angles,
)
from .framework import (
    Scenario,
    ScenarioParseError,
    ValidationError,
    block,
    load_scenario,
    save_scenario,
    scenario_to_dict,
)
from .jsonio import dump_json, format_float, load_json
from .modes import (
    classify_modes,
    global_rotation_subspace,
    hidden_mode_checks,
    linearize,
    uncontrollable_subspace,
    unobservable_subspace,
)
from .subspaces import DEFAULT_TOL, contains
from .rigidity import (
    classify_rigidity,
    deformation_space,
    flex_space,
    rbm_basis,
    rigidity_matrix,
    rigidity_rank,
    self_stress_space,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERICAL = 3

__all__ = ["main", "EXIT_OK", "EXIT_INPUT", "EXIT_NUMERICAL"]


def _axis_names(d: int) -> list[str]:
    if d <= 4:
        return list("xyzw"[:d])
    return [f"c{a + 1}" for a in range(d)]


def _coord_headers(n: int, d: int) -> list[str]:
    names = _axis_names(d)
    return [f"p_{k + 1}{ax}" for k in range(n) for ax in names]


def _write_csv(path: Path, header: list[str], rows: np.ndarray) -> None:
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    if not np.all(np.isfinite(rows)):
        raise NumericalError(f"non-finite value while writing {path.name}")
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_float(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_trajectory_csv(scenario: Scenario, traj, path: Path) -> None:
    """Columns t, p_1x, p_1y, ..., e_1, ..., e_m, V with absolute positions
    and exact edge errors, for either kind of trajectory."""
    from .dynamics import edge_error_series

    fw = scenario.framework
    if traj.kind == "lti":
        positions = traj.states + fw.positions
    else:
        positions = traj.states
    errors = edge_error_series(fw, traj).exact
    potential = 0.5 * np.einsum("tk,tk->t", errors, errors)
    table = np.column_stack([traj.times, positions, errors, potential])
    header = (
        ["t"]
        + _coord_headers(fw.n, fw.d)
        + [f"e_{k + 1}" for k in range(fw.m)]
        + ["V"]
    )
    _write_csv(path, header, table)


def _effective_tols(scenario: Scenario) -> dict:
    return {
        "rank": scenario.tol.rank,
        "subspace": scenario.tol.subspace if scenario.tol.subspace is not None else DEFAULT_TOL,
    }


def _apply_overrides(scenario: Scenario, args) -> Scenario:
    sim = scenario.sim
    if getattr(args, "dt", None) is not None:
        sim = replace(sim, dt=args.dt)
    if getattr(args, "t_end", None) is not None:
        sim = replace(sim, t_end=args.t_end)
    tol = scenario.tol
    if getattr(args, "tol_rank", None) is not None:
        tol = replace(tol, rank=args.tol_rank)
    if getattr(args, "tol_subspace", None) is not None:
        tol = replace(tol, subspace=args.tol_subspace)
    return replace(scenario, sim=sim, tol=tol)


def _resolve_out(args) -> Path:
    out = getattr(args, "out", None) or os.environ.get("RIGIDKIT_OUT") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _update_manifest(out_dir: Path, command: str, files: list[str]) -> None:
    path = out_dir / "manifest.json"
    data = {"runs": {}}
    if path.exists():
        loaded = load_json(path)
        if isinstance(loaded, dict) and isinstance(loaded.get("runs"), dict):
            data = loaded
    data["runs"][command] = {"files": sorted(files)}
    ordered = {"runs": {k: data["runs"][k] for k in sorted(data["runs"])}}
    dump_json(ordered, path)


def _values_match(a, b, rtol=1e-9, atol=1e-12) -> bool:
    if isinstance(a, dict) and isinstance(b, dict):
        return a.keys() == b.keys() and all(_values_match(a[k], b[k], rtol, atol) for k in a)
    if isinstance(a, (list, tuple)) and isinstance(b, (list, tuple)):
        return len(a) == len(b) and all(_values_match(x, y, rtol, atol) for x, y in zip(a, b))
    if isinstance(a, bool) or isinstance(b, bool):
        return a == b
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return bool(np.isclose(a, b, rtol=rtol, atol=atol))
    return a == b


def _files_match(fresh: Path, existing: Path) -> bool:
    if fresh.suffix == ".json":
        return _values_match(load_json(fresh), load_json(existing))
    new_lines = fresh.read_text(encoding="utf-8").splitlines()
    old_lines = existing.read_text(encoding="utf-8").splitlines()
    if not new_lines or not old_lines or new_lines[0] != old_lines[0]:
        return False
    if len(new_lines) != len(old_lines):
        return False
    for ln_new, ln_old in zip(new_lines[1:], old_lines[1:]):
        try:
            a = np.array([float(x) for x in ln_new.split(",")])
            b = np.array([float(x) for x in ln_old.split(",")])
        except ValueError:
            if ln_new != ln_old:
                return False
            continue
        if a.size != b.size or not np.allclose(a, b, rtol=1e-9, atol=1e-12):
            return False
    return True


def _run_command(args, command: str, runner) -> int:
    out_dir = _resolve_out(args)
    if getattr(args, "check", False):
        with tempfile.TemporaryDirectory() as tmp:
            files = runner(Path(tmp))
            for name in files:
                existing = out_dir / name
                if not existing.exists():
                    print(f"check: missing artifact {existing}", file=sys.stderr)
                    return EXIT_INPUT
                if not _files_match(Path(tmp) / name, existing):
                    print(f"check: {name} differs from the recorded run", file=sys.stderr)
                    return EXIT_NUMERICAL
        print(f"check passed for {command}: {len(files)} files match")
        return EXIT_OK
    files = runner(out_dir)
    _update_manifest(out_dir, command, files)
    print(f"{command}: wrote {', '.join(sorted(files))} to {out_dir}")
    return EXIT_OK


def _matrix_cols(m: np.ndarray) -> list[list[float]]:
    return [list(col) for col in np.asarray(m).T]


def cmd_analyze(args) -> int:
    scenario = _apply_overrides(load_scenario(args.scenario), args)
    fw = scenario.framework
    tols = _effective_tols(scenario)

    def runner(out_dir: Path) -> list[str]:
        rm = rigidity_matrix(fw)
        rank = rigidity_rank(rm, tols["rank"])
        classification = classify_rigidity(fw, tols["rank"])
        flex = flex_space(rm, tols["rank"], tols["subspace"])
        stress = self_stress_space(rm, tols["rank"], tols["subspace"])
        deform = deformation_space(rm, tols["rank"], tols["subspace"])
        rbm = rbm_basis(fw)

        save_scenario(scenario, out_dir / "scenario.json")
        _write_csv(out_dir / "rigidity_matrix.csv", _coord_headers(fw.n, fw.d), rm.entries)
        dump_json(
            {
                "ambient_dim": fw.n * fw.d,
                "tolerances": tols,
                "flex": _matrix_cols(flex.basis),
                "self_stress": _matrix_cols(stress.basis),
                "deformation": _matrix_cols(deform.basis),
                "rbm_translations": _matrix_cols(rbm.translations),
                "rbm_rotations": _matrix_cols(rbm.rotations),
            },
            out_dir / "subspaces.json",
        )
        files = ["scenario.json", "rigidity_matrix.csv", "subspaces.json", "report.json"]
        dump_json(
            {
                "command": "analyze",
                "scenario": scenario_to_dict(scenario),
                "classification": classification,
                "rank": rank,
                "edge_count": fw.m,
                "state_dim": fw.n * fw.d,
                "dims": {
                    "flex": flex.dim,
                    "self_stress": stress.dim,
                    "deformation": deform.dim,
                    "rbm": rbm.dim,
                },
                "tolerances": tols,
                "files": sorted(files),
            },
            out_dir / "report.json",
        )
        return files

    return _run_command(args, "analyze", runner)


def cmd_modes(args) -> int:
    scenario = _apply_overrides(load_scenario(args.scenario), args)
    fw = scenario.framework
    tols = _effective_tols(scenario)

    def runner(out_dir: Path) -> list[str]:
        sys_ = linearize(fw, scenario.actuator, scenario.sensor)
        report = classify_modes(sys_, tols["subspace"])
        checks = hidden_mode_checks(sys_, tols["rank"], tols["subspace"])
        unctrl = uncontrollable_subspace(sys_, tols["subspace"])
        unobs = unobservable_subspace(sys_, tols["subspace"])
        same_node = scenario.actuator == scenario.sensor
        save_scenario(scenario, out_dir / "scenario.json")
        dump_json(
            {
                "command": "modes",
                "scenario": scenario_to_dict(scenario),
                "tolerances": tols,
                "uncontrollable_dim": unctrl.dim,
                "unobservable_dim": unobs.dim,
                "actuator_equals_sensor": same_node,
                "uncontrollable_equals_unobservable": bool(
                    contains(unctrl, unobs) and contains(unobs, unctrl)
                ),
                "mode_report": report.to_dict(),
                "checks": checks,
            },
            out_dir / "modes.json",
        )
        return ["scenario.json", "modes.json"]

    return _run_command(args, "modes", runner)


def cmd_dichotomy(args) -> int:
    scenario = _apply_overrides(load_scenario(args.scenario), args)

    def runner(out_dir: Path) -> list[str]:
        outcome = shape_recovery_experiment(scenario, nonlinear=args.nonlinear)
        save_scenario(scenario, out_dir / "scenario.json")
        files = ["scenario.json", "outcome.json", "trajectory.csv"]
        dump_json(
            {
                "command": "dichotomy",
                "scenario": scenario_to_dict(scenario),
                "outcome": outcome.to_dict(),
            },
            out_dir / "outcome.json",
        )
        _write_trajectory_csv(scenario, outcome.trajectory, out_dir / "trajectory.csv")
        if outcome.nonlinear_trajectory is not None:
            _write_trajectory_csv(
                scenario, outcome.nonlinear_trajectory, out_dir / "trajectory_nonlinear.csv"
            )
            files.append("trajectory_nonlinear.csv")
        if args.sweep:
            table = sweep_impulse_angles(scenario, args.sweep)
            _write_csv(
                out_dir / "sweep.csv",
                ["angle", "alignment", "c_r", "max_final_edge_error"],
                table,
            )
            files.append("sweep.csv")
        return files

    return _run_command(args, "dichotomy", runner)


def cmd_plotdata(args) -> int:
    run_dir = Path(args.run_dir)
    scenario_path = run_dir / "scenario.json"
    if not scenario_path.exists():
        print(f"error: missing {scenario_path} (run analyze/modes/dichotomy first)", file=sys.stderr)
        return EXIT_INPUT
    scenario = load_scenario(scenario_path)
    fw = scenario.framework
    if fw.d != 2:
        raise ValidationError(f"plotdata arrows require d=2, got d={fw.d}")
    trajectory_path = run_dir / "trajectory.csv"
    if not trajectory_path.exists():
        print(f"error: missing {trajectory_path} (run dichotomy first)", file=sys.stderr)
        return EXIT_INPUT

    def runner(out_dir: Path) -> list[str]:
        from .modes import elementary_rotations

        pts = fw.points
        rotation = global_rotation_subspace(fw, scenario.actuator).basis[:, 0]
        rows = [
            [k + 1, pts[k, 0], pts[k, 1], rotation[2 * k], rotation[2 * k + 1]]
            for k in range(fw.n)
        ]
        _write_csv(out_dir / "arrows_Ri.csv", ["node", "x", "y", "dx", "dy"], np.array(rows))

        tau_rows = []
        for nbr in fw.neighbors(scenario.actuator):
            tau = elementary_rotations(fw, scenario.actuator, nbr)[:, 0]
            arrow = block(tau, nbr, 2)
            arrow = arrow / np.linalg.norm(arrow)
            tau_rows.append([nbr + 1, pts[nbr, 0], pts[nbr, 1], arrow[0], arrow[1]])
        _write_csv(out_dir / "arrows_Ti.csv", ["node", "x", "y", "dx", "dy"], np.array(tau_rows))

        lines = trajectory_path.read_text(encoding="utf-8").splitlines()
        header = lines[0].split(",")
        keep = [0] + [c for c, name in enumerate(header) if name.startswith("e_")]
        data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
        _write_csv(out_dir / "edge_errors.csv", [header[c] for c in keep], data[:, keep])

        plane = controllable_plane(rbm_basis(fw), scenario.actuator)
        dump_json(plane.to_dict(), out_dir / "plane.json")
        return ["arrows_Ri.csv", "arrows_Ti.csv", "edge_errors.csv", "plane.json"]

    if getattr(args, "out", None) is None and "RIGIDKIT_OUT" not in os.environ:
        args.out = str(run_dir)
    return _run_command(args, "plotdata", runner)


def _add_common(parser: argparse.ArgumentParser, scenario_arg: bool = True) -> None:
    if scenario_arg:
        parser.add_argument("scenario", help="path to a scenario JSON file")
    parser.add_argument("--out", default=None, help="output directory (default: $RIGIDKIT_OUT or .)")
    parser.add_argument("--tol-rank", type=float, default=None, help="rank tolerance override")
    parser.add_argument("--tol-subspace", type=float, default=None, help="subspace tolerance override")
    parser.add_argument("--dt", type=float, default=None, help="integrator step override")
    parser.add_argument("--t-end", type=float, default=None, help="integration horizon override")
    parser.add_argument(
        "--check",
        action="store_true",
        help="recompute and compare against the recorded outputs instead of writing",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rigidkit",
        description="Rigidity, hidden-mode geometry and impulse response of distance-based formations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_analyze = sub.add_parser("analyze", help="rigidity classification and subspaces")
    _add_common(p_analyze)
    p_analyze.set_defaults(func=cmd_analyze)

    p_modes = sub.add_parser("modes", help="hidden-mode classification and subspace checks")
    _add_common(p_modes)
    p_modes.set_defaults(func=cmd_modes)

    p_dich = sub.add_parser("dichotomy", help="impulse experiment: recovery vs distortion")
    _add_common(p_dich)
    p_dich.add_argument("--sweep", type=int, default=0, help="also sweep N input angles")
    p_dich.add_argument(
        "--nonlinear", action="store_true", help="also run the nonlinear comparison trajectory"
    )
    p_dich.set_defaults(func=cmd_dichotomy)

    p_plot = sub.add_parser("plotdata", help="plot-ready files from a completed run directory")
    p_plot.add_argument("run_dir", help="directory holding scenario.json and trajectory.csv")
    p_plot.add_argument("--out", default=None, help="output directory (default: the run directory)")
    p_plot.add_argument("--check", action="store_true", help="compare against recorded outputs")
    p_plot.set_defaults(func=cmd_plotdata)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ScenarioParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
