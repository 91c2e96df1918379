"""Command-line interface: simulation runs, reports, and file formats.

Exit codes: 0 success, 1 configuration error, 2 diverged run (or a suite
whose stabilizing configurations failed to settle), 3 solver failure.

Trajectory CSV format: header ``t,pitch,pitch_rate,u``, one row per
sample, full-precision decimal numbers (shortest round-trip form), LF line
endings. Parsing an emitted file reproduces the samples exactly.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import figures, fuzzy, lqr, metrics, numerics, pid, plant, sim
from .errors import InputError, SolverError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DIVERGED = 2
EXIT_SOLVER = 3

CSV_HEADER = "t,pitch,pitch_rate,u"

CONTROLLER_CHOICES = ("pid", "lqr", "fuzzy-pd", "fuzzy-pdi")

_SUITE_PID_GAINS = ((25.0, 0.8, 0.1), (50.0, 0.8, 0.05), (100.0, 0.8, 0.1), (1000.0, 0.8, 0.05))


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports errors as InputError (exit code 1)."""

    def error(self, message):
        raise InputError(message)


def write_trajectory_csv(tr: sim.Trajectory, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(CSV_HEADER + "\n")
        for t, phi, rate, u in zip(tr.t, tr.pitch, tr.pitch_rate, tr.u):
            handle.write(f"{float(t)!r},{float(phi)!r},{float(rate)!r},{float(u)!r}\n")


def read_trajectory_csv(path) -> sim.Trajectory:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.read().splitlines()
    except OSError as exc:
        raise InputError(f"cannot read trajectory file {path}: {exc}") from exc
    if not lines or lines[0] != CSV_HEADER:
        raise InputError(f"{path}: expected header {CSV_HEADER!r}")
    columns: list[list[float]] = [[], [], [], []]
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise InputError(f"{path}:{lineno}: expected 4 fields, got {len(parts)}")
        try:
            for column, token in zip(columns, parts):
                column.append(float(token))
        except ValueError as exc:
            raise InputError(f"{path}:{lineno}: {exc}") from exc
    if not columns[0]:
        raise InputError(f"{path}: no samples")
    t = np.array(columns[0])
    dt = float(t[1]) if len(t) > 1 else 0.0
    return sim.Trajectory(dt=dt, t=t, pitch=np.array(columns[1]),
                          pitch_rate=np.array(columns[2]), u=np.array(columns[3]))


def _echo_config(settings: dict) -> None:
    for key, value in settings.items():
        print(f"[config] {key}={value}", file=sys.stderr)


def format_poly(coeffs) -> str:
    terms = []
    degree = len(coeffs) - 1
    for i, c in enumerate(coeffs):
        power = degree - i
        if power == 0:
            terms.append(f"{c:.10g}")
        elif power == 1:
            terms.append(f"{c:.10g}*s")
        else:
            terms.append(f"{c:.10g}*s^{power}")
    return " + ".join(terms)


def _add_plant_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mass-m", type=float, default=plant.DEFAULT_PENDULUM_MASS,
                        help="pendulum mass in kg (no published value; default %(default)s)")
    parser.add_argument("--formula-mode", choices=plant.FORMULA_MODES,
                        default=plant.MODE_NATIVE,
                        help="denominator convention of the linearization")


def _add_sim_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dt", type=float, default=0.001, help="integration step, s")
    parser.add_argument("--t-final", type=float, default=10.0, help="run duration, s")
    parser.add_argument("--initial-pitch", type=float, default=0.1, help="initial pitch, rad")
    parser.add_argument("--initial-rate", type=float, default=0.0, help="initial pitch rate, rad/s")
    parser.add_argument("--setpoint", type=float, default=0.0, help="pitch setpoint, rad")
    parser.add_argument("--plant-mode", choices=sim.PLANT_MODES, default=sim.PLANT_NONLINEAR)
    parser.add_argument("--damping", type=float, default=0.0,
                        help="pitch-rate damping for the nonlinear plant")
    parser.add_argument("--disturb-time", type=float, default=None)
    parser.add_argument("--disturb-impulse", type=float, default=None,
                        help="rad/s added to the pitch rate at --disturb-time")
    parser.add_argument("--divergence-threshold", type=float, default=math.pi / 2.0)


def _add_fuzzy_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--rulebase", type=str, default=None,
                        help="path to a 5x5 rule grid file (defaults to the built-in grid)")
    parser.add_argument("--w-error", type=float, default=fuzzy.DEFAULT_ERROR_HALFWIDTH,
                        help="error universe halfwidth, rad")
    parser.add_argument("--w-rate", type=float, default=fuzzy.DEFAULT_RATE_HALFWIDTH,
                        help="error-rate universe halfwidth, rad/s")
    parser.add_argument("--w-output", type=float, default=fuzzy.DEFAULT_OUTPUT_HALFWIDTH,
                        help="output universe halfwidth, force units")
    parser.add_argument("--fuzzy-ki", type=float, default=fuzzy.DEFAULT_INTEGRAL_GAIN,
                        help="integral gain of the PD+I variant")


def _build_sim_config(args) -> sim.SimConfig:
    if (args.disturb_time is None) != (args.disturb_impulse is None):
        raise InputError("--disturb-time and --disturb-impulse must be given together")
    disturbance = None
    if args.disturb_time is not None:
        disturbance = sim.Disturbance(time=args.disturb_time, impulse=args.disturb_impulse)
    return sim.SimConfig(
        t_final=args.t_final,
        dt=args.dt,
        initial=plant.PitchState(args.initial_pitch, args.initial_rate),
        setpoint=args.setpoint,
        plant_mode=args.plant_mode,
        disturbance=disturbance,
        divergence_threshold=args.divergence_threshold,
        damping=args.damping,
    )


def _build_fuzzy_config(args, variant: str) -> fuzzy.FuzzyConfig:
    rules = fuzzy.load_rulebase(args.rulebase) if args.rulebase else None
    return fuzzy.default_config(
        variant,
        error_halfwidth=args.w_error,
        rate_halfwidth=args.w_rate,
        output_halfwidth=args.w_output,
        ki=args.fuzzy_ki,
        rules=rules,
    )


def _build_controller(args) -> sim.Controller:
    name = args.controller
    if name == "pid":
        gains = pid.PidGains(args.kp, args.ki, args.kd)
        return pid.PidConfig(gains=gains, accumulation_mode=args.accumulation_mode,
                             u_max=args.u_max)
    if name == "lqr":
        if args.r <= 0.0:
            raise InputError(f"--r must be positive, got {args.r}")
        return lqr.LqrWeights.from_scalars(args.q11, args.q22, args.r)
    if name == "fuzzy-pd":
        return _build_fuzzy_config(args, fuzzy.VARIANT_PD)
    if name == "fuzzy-pdi":
        return _build_fuzzy_config(args, fuzzy.VARIANT_PDI)
    raise InputError(f"unknown controller {name!r}")


def _controller_echo(args) -> dict:
    name = args.controller
    if name == "pid":
        return {"kp": args.kp, "ki": args.ki, "kd": args.kd,
                "accumulation_mode": args.accumulation_mode, "u_max": args.u_max}
    if name == "lqr":
        return {"q11": args.q11, "q22": args.q22, "r": args.r}
    return {"rulebase": args.rulebase or "<built-in>", "w_error": args.w_error,
            "w_rate": args.w_rate, "w_output": args.w_output, "fuzzy_ki": args.fuzzy_ki}


def _sim_echo(args) -> dict:
    return {
        "mass_m": args.mass_m, "formula_mode": args.formula_mode,
        "dt": args.dt, "t_final": args.t_final,
        "initial_pitch": args.initial_pitch, "initial_rate": args.initial_rate,
        "setpoint": args.setpoint, "plant_mode": args.plant_mode,
        "damping": args.damping, "disturb_time": args.disturb_time,
        "disturb_impulse": args.disturb_impulse,
        "divergence_threshold": args.divergence_threshold,
    }


def _cmd_simulate(args) -> int:
    params = plant.PlantParams(m=args.mass_m)
    controller = _build_controller(args)
    sc = _build_sim_config(args)
    _echo_config({"subcommand": "simulate", "controller": args.controller,
                  **_controller_echo(args), **_sim_echo(args),
                  "out": args.out, "plot": args.plot})
    trajectory = sim.run(params, args.formula_mode, controller, sc)
    write_trajectory_csv(trajectory, args.out)
    if args.plot:
        figures.save_trajectory_figure(trajectory, args.controller, args.plot)
    if trajectory.diverged:
        print(f"diverged: |pitch| exceeded {sc.divergence_threshold:.6g} rad at "
              f"t={float(trajectory.t[-1]):.6g} s", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def _suite_controllers(args) -> list[tuple[str, sim.Controller]]:
    controllers: list[tuple[str, sim.Controller]] = []
    for kp, ki, kd in _SUITE_PID_GAINS:
        controllers.append((f"pid-kp{kp:g}", pid.PidConfig(gains=pid.PidGains(kp, ki, kd))))
    controllers.append(("lqr-q10-100-r0.001", lqr.WEIGHTS_A))
    controllers.append(("lqr-q100-1000-r0.0001", lqr.WEIGHTS_B))
    controllers.append(("fuzzy-pd", fuzzy.default_config(fuzzy.VARIANT_PD)))
    controllers.append(("fuzzy-pdi", fuzzy.default_config(fuzzy.VARIANT_PDI)))
    return controllers


def _oracle_stabilizing(controller: sim.Controller, ss: plant.StateSpace) -> bool | None:
    """Analytic stability verdict where one exists (None for fuzzy)."""
    if isinstance(controller, pid.PidConfig):
        return numerics.routh_hurwitz(pid.pid_stability_poly(controller.gains, ss))
    if isinstance(controller, lqr.LqrWeights):
        try:
            lqr.synthesize(ss, controller)
            return True
        except SolverError:
            return False
    return None


def _cmd_suite(args) -> int:
    params = plant.PlantParams(m=args.mass_m)
    sc = sim.SimConfig(
        t_final=args.t_final, dt=args.dt,
        initial=plant.PitchState(args.initial_pitch, 0.0),
        plant_mode=args.plant_mode, damping=args.damping,
    )
    outdir = Path(args.outdir)
    _echo_config({"subcommand": "suite", "outdir": str(outdir),
                  "mass_m": args.mass_m, "formula_mode": args.formula_mode,
                  "dt": args.dt, "t_final": args.t_final,
                  "initial_pitch": args.initial_pitch, "plant_mode": args.plant_mode,
                  "damping": args.damping, "figures": not args.no_figures})
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        probe = outdir / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise InputError(f"cannot write to output directory {outdir}: {exc}") from exc

    controllers = _suite_controllers(args)
    results = sim.batch_run(params, args.formula_mode, controllers, sc)

    reduced = plant.build_reduced(params, args.formula_mode)
    labeled_metrics: list[tuple[str, metrics.ResponseMetrics]] = []
    named_trajectories: list[tuple[str, sim.Trajectory]] = []
    failures: list[str] = []
    mismatches: list[str] = []
    for (label, controller), result in zip(controllers, results):
        if result.error is not None:
            failures.append(f"{label}: {result.error}")
            continue
        trajectory = result.trajectory
        write_trajectory_csv(trajectory, outdir / f"{label}.csv")
        named_trajectories.append((label, trajectory))
        m = metrics.compute_metrics(trajectory, sc)
        labeled_metrics.append((label, m))
        if _oracle_stabilizing(controller, reduced) and m.verdict != metrics.STABLE:
            mismatches.append(f"{label}: analytically stabilizing but verdict {m.verdict}")

    if not args.no_figures:
        for label, trajectory in named_trajectories:
            figures.save_trajectory_figure(trajectory, label, outdir / f"{label}.png")
        if named_trajectories:
            figures.save_comparison_figure(named_trajectories, outdir / "comparison.png")

    report = metrics.compare(labeled_metrics) if labeled_metrics else "no completed runs"
    (outdir / "report.txt").write_text(report + "\n", encoding="utf-8")
    print(report)

    if failures:
        for line in failures:
            print(f"failed: {line}", file=sys.stderr)
        return EXIT_SOLVER
    if mismatches:
        for line in mismatches:
            print(f"not settled: {line}", file=sys.stderr)
        return EXIT_DIVERGED
    return EXIT_OK


def _cmd_lqr_gain(args) -> int:
    if args.r <= 0.0:
        raise InputError(f"--r must be positive, got {args.r}")
    params = plant.PlantParams(m=args.mass_m)
    ss = plant.build_reduced(params, args.formula_mode)
    a21 = args.a21 if args.a21 is not None else float(ss.a[1, 0])
    b2 = args.b2 if args.b2 is not None else float(ss.b[1, 0])
    a = np.array([[0.0, 1.0], [a21, 0.0]])
    b = np.array([[0.0], [b2]])
    weights = lqr.LqrWeights.from_scalars(args.q11, args.q22, args.r)
    _echo_config({"subcommand": "lqr-gain", "mass_m": args.mass_m,
                  "formula_mode": args.formula_mode, "a21": a21, "b2": b2,
                  "q11": args.q11, "q22": args.q22, "r": args.r})
    p = numerics.solve_care(a, b, weights.q, weights.r)
    k = numerics.lqr_gain(a, b, weights.q, weights.r)
    closed_poly = numerics.char_poly(a - b @ k)
    print(f"k1 = {float(k[0, 0])!r}")
    print(f"k2 = {float(k[0, 1])!r}")
    print(f"care_residual = {numerics.care_residual(a, b, weights.q, weights.r, p):.6e}")
    print(f"closed_loop_poly = {format_poly(closed_poly)}")
    print(f"hurwitz = {'yes' if numerics.routh_hurwitz(closed_poly) else 'no'}")
    return EXIT_OK


def _cmd_fuzzy_eval(args) -> int:
    rules = fuzzy.load_rulebase(args.rulebase) if args.rulebase else None
    cfg = fuzzy.default_config(
        error_halfwidth=args.w_error, rate_halfwidth=args.w_rate,
        output_halfwidth=args.w_output, rules=rules,
    )
    _echo_config({"subcommand": "fuzzy-eval", "error": args.error,
                  "error_rate": args.error_rate,
                  "rulebase": args.rulebase or "<built-in>",
                  "w_error": args.w_error, "w_rate": args.w_rate,
                  "w_output": args.w_output})
    for rule in fuzzy.fired_rules(cfg, args.error, args.error_rate):
        print(f"rule rate={rule.rate_label} error={rule.error_label} "
              f"strength={rule.strength:.6f} -> {rule.output_label}")
    u = fuzzy.infer(cfg, args.error, args.error_rate)
    print(f"u = {u!r}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    _echo_config({"subcommand": "compare", "setpoint": args.setpoint,
                  "csv": args.csv, "files": ",".join(args.files)})
    labeled = []
    for path in args.files:
        trajectory = read_trajectory_csv(path)
        dt = trajectory.dt if trajectory.dt > 0.0 else 1.0
        sc = sim.SimConfig(t_final=max(float(trajectory.t[-1]), dt), dt=dt,
                           setpoint=args.setpoint)
        labeled.append((Path(path).stem, metrics.compute_metrics(trajectory, sc)))
    print(metrics.report_csv(labeled) if args.csv else metrics.compare(labeled))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="balancebench",
                     description="Pitch-control test bench: PID, LQR and fuzzy "
                                 "controllers on an inverted-pendulum robot model.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run one closed-loop simulation to CSV")
    p_sim.add_argument("--controller", choices=CONTROLLER_CHOICES, required=True)
    p_sim.add_argument("--kp", type=float, default=50.0)
    p_sim.add_argument("--ki", type=float, default=0.8)
    p_sim.add_argument("--kd", type=float, default=0.05)
    p_sim.add_argument("--accumulation-mode", choices=pid.ACCUMULATION_MODES,
                       default=pid.DT_SCALED)
    p_sim.add_argument("--u-max", type=float, default=None,
                       help="optional symmetric PID output saturation")
    p_sim.add_argument("--q11", type=float, default=10.0)
    p_sim.add_argument("--q22", type=float, default=100.0)
    p_sim.add_argument("--r", type=float, default=0.001)
    _add_fuzzy_flags(p_sim)
    _add_plant_flags(p_sim)
    _add_sim_flags(p_sim)
    p_sim.add_argument("--out", required=True, help="trajectory CSV output path")
    p_sim.add_argument("--plot", default=None, help="optional figure output path")
    p_sim.set_defaults(func=_cmd_simulate)

    p_suite = sub.add_parser("suite", help="run the eight-configuration comparison suite")
    _add_plant_flags(p_suite)
    p_suite.add_argument("--outdir", default="suite-out")
    p_suite.add_argument("--dt", type=float, default=0.001)
    p_suite.add_argument("--t-final", type=float, default=10.0)
    p_suite.add_argument("--initial-pitch", type=float, default=0.1)
    p_suite.add_argument("--plant-mode", choices=sim.PLANT_MODES, default=sim.PLANT_NONLINEAR)
    p_suite.add_argument("--damping", type=float, default=0.0)
    p_suite.add_argument("--no-figures", action="store_true",
                         help="skip rendering PNG figures next to the CSVs")
    p_suite.set_defaults(func=_cmd_suite)

    p_gain = sub.add_parser("lqr-gain", help="print the LQR gain and closed-loop polynomial")
    p_gain.add_argument("--q11", type=float, default=10.0)
    p_gain.add_argument("--q22", type=float, default=100.0)
    p_gain.add_argument("--r", type=float, default=0.001)
    _add_plant_flags(p_gain)
    p_gain.add_argument("--a21", type=float, default=None,
                        help="override the plant's pitch coefficient A21")
    p_gain.add_argument("--b2", type=float, default=None,
                        help="override the plant's input coefficient B2")
    p_gain.set_defaults(func=_cmd_lqr_gain)

    p_fuzzy = sub.add_parser("fuzzy-eval", help="evaluate one fuzzy inference")
    p_fuzzy.add_argument("--error", type=float, required=True)
    p_fuzzy.add_argument("--error-rate", type=float, required=True)
    _add_fuzzy_flags(p_fuzzy)
    p_fuzzy.set_defaults(func=_cmd_fuzzy_eval)

    p_cmp = sub.add_parser("compare", help="rank trajectory CSVs by response metrics")
    p_cmp.add_argument("files", nargs="+", help="trajectory CSV files")
    p_cmp.add_argument("--setpoint", type=float, default=0.0)
    p_cmp.add_argument("--csv", action="store_true", help="emit the machine-readable report")
    p_cmp.set_defaults(func=_cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
