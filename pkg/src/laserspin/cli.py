"""Command-line front end.

Exit codes: 0 success, 1 validation failure, 2 config error,
3 runtime or domain error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
import warnings

import numpy as np

from . import analysis, closedform, validation
from .config import RunConfig, load_config
from .elliptic import DomainError
from .model import CIRCULAR_EPSILON, ConfigError, larmor_components
from .propagator import (
    IntegratorSpec,
    PropagationError,
    SpinState,
    StepSizeError,
    sample_trajectory,
)

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3

SIMULATE_COLUMNS = [
    "t", "re_up", "im_up", "re_down", "im_down",
    "bx", "by", "bz", "omega1", "omega2", "omega3",
]
PERIOD_COLUMNS = [
    "eta", "epsilon", "beta_z", "period_exact", "period_expansion",
    "period_measured", "rel_dev",
]
SWEEP_COLUMNS = PERIOD_COLUMNS + ["phase", "phase_minus_pi"]
PHASE_COLUMNS = ["eta", "beta_z", "phase", "phase_minus_pi", "eigenphase_deviation"]


def fmt(value) -> str:
    """Shortest round-trip float text (at most 17 significant digits)."""
    if value is None:
        return ""
    return repr(float(value))


def to_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(row[c]) for c in columns])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, (np.floating, np.integer)):
        return _jsonable(obj.item())
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def to_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2) + "\n"


def matrix_pairs(m) -> list:
    """2x2 complex matrix as nested [re, im] pairs."""
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _physics_dict(cfg) -> dict:
    d = cfg.derived
    return {
        "eta": cfg.eta,
        "epsilon": cfg.epsilon,
        "omega": cfg.omega,
        "beta_z": cfg.beta_z,
        "kappa": cfg.kappa,
        "omega3_uses_omega_prime": cfg.omega3_uses_omega_prime,
        "gamma_z": d.gamma_z,
        "omega_prime": d.omega_prime,
        "epsilon_prime": d.epsilon_prime,
        "mu2": d.mu2,
    }


def _rows_output(args, columns, rows) -> str:
    if args.format == "json":
        return to_json([{c: r[c] for c in columns} for r in rows])
    return to_csv(columns, rows)


# --------------------------------------------------------------------------
# subcommands


def cmd_simulate(run: RunConfig, args) -> tuple[str, int]:
    cfg = run.physics
    opts = run.section("simulate")
    (ur, ui), (dr, di) = opts["initial_state"]
    state0 = SpinState.normalized(complex(ur, ui), complex(dr, di))
    samples = opts["samples"]
    total = opts["periods"] * cfg.drive_period
    times = np.arange(samples + 1) * (total / samples)
    points = sample_trajectory(state0, cfg, times, run.integrator)
    omega = larmor_components(cfg, times)
    rows = []
    for p, om in zip(points, omega):
        rows.append(
            dict(zip(SIMULATE_COLUMNS, [
                p.t, p.state.up.real, p.state.up.imag, p.state.down.real,
                p.state.down.imag, *p.bloch, *om,
            ]))
        )
    return _rows_output(args, SIMULATE_COLUMNS, rows), EXIT_OK


def monodromy_report(cfg) -> dict:
    report = {"physics": _physics_dict(cfg), "reference_phase": math.pi}
    if cfg.eta == 0.0:
        # free-field limit: phase -> pi sign(kappa), M -> -I, e^{i pi} M -> I
        phase = closedform.quantum_phase(cfg)
        minus_eye = -np.eye(2)
        report.update(
            limit=True, delta=None, beta=None,
            rabi=math.copysign(cfg.derived.omega_prime, cfg.kappa),
            phase=phase, phase_mod_2pi=phase % (2 * math.pi),
            phase_minus_pi=phase - math.pi,
            matrix=matrix_pairs(minus_eye), diagonal=matrix_pairs(minus_eye),
            printed_matrix=matrix_pairs(minus_eye), eigenphases=[-math.pi, math.pi],
        )
        return report
    sol = closedform.circular_params(cfg)
    mono = closedform.monodromy(cfg)
    report.update(
        limit=False, delta=sol.delta, beta=sol.beta, rabi=sol.rabi,
        phase=mono.phase, phase_mod_2pi=mono.phase_mod_2pi,
        phase_minus_pi=mono.phase - math.pi,
        matrix=matrix_pairs(mono.matrix), diagonal=matrix_pairs(mono.diagonal),
        printed_matrix=matrix_pairs(mono.printed),
        eigenphases=[float(x) for x in mono.eigenphases],
    )
    return report


def _circular(cfg):
    if cfg.is_circular:
        return cfg
    print(f"note: epsilon={cfg.epsilon} replaced by 1/sqrt(2)", file=sys.stderr)
    return cfg.replace(epsilon=CIRCULAR_EPSILON)


def cmd_monodromy(run: RunConfig, args) -> tuple[str, int]:
    return to_json(monodromy_report(_circular(run.physics))), EXIT_OK


def _period_row(record: analysis.SweepRecord) -> dict:
    row = dataclasses.asdict(record)
    row["phase"] = record.quantum_phase
    return row


def cmd_period(run: RunConfig, args) -> tuple[str, int]:
    cfg = run.physics
    opts = run.section("period")
    est = closedform.period(cfg, opts["gamma_power"])
    rec = analysis.find_recurrence(cfg, run.integrator, max_periods=opts["max_periods"])
    if rec is None:
        print("warning: no recurrence found", file=sys.stderr)
    measured = rec.period if rec else None
    row = {
        "eta": cfg.eta, "epsilon": cfg.epsilon, "beta_z": cfg.beta_z,
        "period_exact": est.exact, "period_expansion": est.expansion2,
        "period_measured": measured,
        "rel_dev": abs(measured - est.exact) / est.exact if rec else None,
    }
    return _rows_output(args, PERIOD_COLUMNS, [row]), EXIT_OK


def sweep_spec(run: RunConfig) -> analysis.SweepSpec:
    opts = run.section("sweep")
    return analysis.SweepSpec(
        eta=tuple(opts["eta"]),
        epsilon=tuple(opts["epsilon"]),
        beta_z=tuple(opts["beta_z"]),
        kappa=run.physics.kappa,
        omega=run.physics.omega,
        integrator=run.integrator,
        gamma_power=opts["gamma_power"],
    )


def cmd_sweep(run: RunConfig, args) -> tuple[str, int]:
    records = analysis.frequency_shift_curve(sweep_spec(run), jobs=args.jobs)
    for rec in records:
        if rec.error:
            print(f"warning: eta={rec.eta} epsilon={rec.epsilon}: {rec.error}", file=sys.stderr)
    if args.format == "json":
        return to_json([r.as_dict() for r in records]), EXIT_OK
    return to_csv(SWEEP_COLUMNS, [_period_row(r) for r in records]), EXIT_OK


def cmd_phase(run: RunConfig, args) -> tuple[str, int]:
    spec = analysis.SweepSpec(
        eta=tuple(run.section("phase")["eta"]),
        epsilon=(CIRCULAR_EPSILON,),
        beta_z=(run.physics.beta_z,),
        kappa=run.physics.kappa,
        omega=run.physics.omega,
        outputs=("phase",),
    )
    rows = [dataclasses.asdict(r) for r in analysis.phase_curve(spec)]
    return _rows_output(args, PHASE_COLUMNS, rows), EXIT_OK


def cmd_reconcile(run: RunConfig, args) -> tuple[str, int]:
    cfg = _circular(run.physics)
    opts = run.section("reconcile")
    spec = IntegratorSpec(run.integrator.method, opts["steps_per_period"])
    if args.steps_per_period is not None:
        spec = run.integrator
    report = analysis.reconcile_conventions(
        cfg, spec, samples=opts["samples"], tolerance=opts["tolerance"]
    )
    out = {"physics": _physics_dict(cfg), "method": spec.method, **report.as_dict()}
    return to_json(out), EXIT_OK


def cmd_validate(run: RunConfig, args) -> tuple[str, int]:
    tolerances = run.section("validate")["tolerances"]
    try:
        summary = validation.run_validation(seed=args.seed, tolerances=tolerances)
    except KeyError as exc:
        raise ConfigError(f"{run.source}: validate.tolerances: {exc.args[0]}") from None
    code = EXIT_OK if summary["passed"] else EXIT_VALIDATION
    if args.json or args.format == "json":
        return to_json(summary), code
    lines = [
        f"{'PASS' if c['passed'] else 'FAIL'} {c['name']}: {c['value']:.3e} <= {c['tolerance']:.1e}"
        for c in summary["checks"]
    ]
    verdict = "all checks passed" if summary["passed"] else "FAILED: " + ", ".join(summary["failed"])
    return "\n".join(lines + [verdict]) + "\n", code


COMMANDS = {
    "simulate": (cmd_simulate, "spin trajectory with Bloch vector and Larmor vector", "csv"),
    "monodromy": (cmd_monodromy, "closed-form circular monodromy report", "json"),
    "period": (cmd_period, "exact, expanded and measured period", "csv"),
    "sweep": (cmd_sweep, "period and phase over an (eta, epsilon, beta_z) grid", "csv"),
    "phase": (cmd_phase, "quantum phase against eta (circular)", "csv"),
    "reconcile": (cmd_reconcile, "closed form vs numerics over sign/scale conventions", "json"),
    "validate": (cmd_validate, "run the invariant suite", "text"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="laserspin",
        description="Spin-1/2 precession in a strong plane-wave laser field.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text, _) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=["csv", "json"], default=None)
        p.add_argument("--steps-per-period", type=int, default=None)
        p.add_argument("--method", choices=["midpoint", "magnus4"], default=None)
        p.add_argument("--seed", type=int, default=0, help="seed for randomized validation")
        p.add_argument("--json", action="store_true", help="machine-readable validate summary")
        p.add_argument("--jobs", type=int, default=1, help="worker processes for sweep")
    return parser


def _apply_flags(run: RunConfig, args) -> RunConfig:
    integ = run.integrator
    if args.method is not None or args.steps_per_period is not None:
        try:
            integ = IntegratorSpec(
                method=args.method or integ.method,
                steps_per_period=args.steps_per_period or integ.steps_per_period,
                step=None if args.steps_per_period else integ.step,
                target_error=None if args.steps_per_period else integ.target_error,
            )
        except (ValueError, StepSizeError) as exc:
            raise ConfigError(f"command line: {exc}") from None
    if integ.target_error is None:
        try:
            integ.step_size(run.physics)
        except StepSizeError as exc:
            raise ConfigError(f"{run.source}: integrator: {exc}") from None
    return dataclasses.replace(run, integrator=integ)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed < 0 or args.seed >= 2**64:
        parser.error("--seed must be an unsigned 64-bit integer")
    func, _, default_format = COMMANDS[args.command]
    if args.format is None:
        args.format = default_format
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            run = _apply_flags(load_config(args.config), args)
            text, code = func(run, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, StepSizeError, PropagationError, ArithmeticError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if args.out:
        try:
            with open(args.out, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"error: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
            return EXIT_RUNTIME
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
