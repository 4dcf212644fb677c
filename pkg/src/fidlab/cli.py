"""Command-line interface.

Subcommands: ``run`` (estimator sweep to CSV + JSON sidecar), ``fit``
(exponential decay rate from a CSV), ``verify-theorem`` (Haar-moment identity
check), ``separability`` (probe-register product-state certificate).

Exit codes: 0 success, 2 configuration error, 3 numeric error, 4 resource
guard, 5 failed verification.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import dqc1, experiment, spinsys
from .errors import (ConfigError, InputError, NumericError,
                     ResourceLimitError, VerificationError)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_RESOURCE = 4
EXIT_VERIFY = 5


def _add_system_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--system", choices=["kicked_top", "random_unitary"])
    parser.add_argument("--j", type=float, help="kicked top spin j")
    parser.add_argument("--k", type=float, help="kicked top kick strength")
    parser.add_argument("--dim", type=int, help="random unitary dimension")
    parser.add_argument("--system-seed", type=int,
                        help="seed for the random unitary system")
    parser.add_argument("--delta", type=float, help="perturbation strength")
    parser.add_argument("--generator",
                        help="register_z, collective_z, or a JSON matrix file")
    parser.add_argument("--n-max", type=int, help="number of map steps")
    parser.add_argument("--seed", type=int, help="root seed")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fidlab",
        description="Average fidelity decay of perturbed unitary maps",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run configured estimators, write CSV")
    run.add_argument("--config", help="JSON config file (flags override it)")
    _add_system_flags(run)
    run.add_argument("--estimators",
                     help="comma-separated subset of exact,mc,dqc1")
    run.add_argument("--mc-samples", type=int)
    run.add_argument("--mc-sampler", choices=["haar", "basis"])
    run.add_argument("--gamma", type=float, help="probe polarization")
    run.add_argument("--shots", type=int, help="shots per readout axis")
    run.add_argument("--readout-noise-sd", type=float)
    run.add_argument("--output", help="CSV output path (sidecar: same stem .json)")

    fit = sub.add_parser("fit", help="fit an exponential decay rate")
    fit.add_argument("--input", required=True, help="CSV written by run")
    fit.add_argument("--column", default="exact",
                     choices=["exact", "mc", "dqc1"])
    fit.add_argument("--window", type=int, nargs=2, metavar=("LO", "HI"))
    fit.add_argument("--background", default="0",
                     help="float, or 'saturation' for 3x the asymptotic floor")
    fit.add_argument("--dim", type=int,
                     help="system dimension (read from sidecar when omitted)")

    verify = sub.add_parser("verify-theorem",
                            help="check the Haar-moment identity numerically")
    verify.add_argument("--ell", type=int, default=2)
    verify.add_argument("--dim", type=int, default=3)
    verify.add_argument("--trials", type=int, default=5)
    verify.add_argument("--samples", type=int, default=100_000)
    verify.add_argument("--seed", type=int, default=0)

    sep = sub.add_parser("separability",
                         help="certify the probe-register state is separable")
    sep.add_argument("--config", help="JSON config file (flags override it)")
    _add_system_flags(sep)
    sep.add_argument("--tolerance", type=float, default=1e-8)
    return parser


def _config_from_args(args: argparse.Namespace) -> experiment.ExperimentConfig:
    if args.config:
        data = experiment.load_config(args.config).to_dict()
    else:
        data = experiment.ExperimentConfig().to_dict()
    system = data["system"]
    if args.system is not None:
        system["kind"] = args.system
    for flag, key in (("j", "j"), ("k", "k"), ("dim", "dim"),
                      ("system_seed", "seed")):
        value = getattr(args, flag)
        if value is not None:
            system[key] = value
    if args.delta is not None:
        data["perturbation"]["delta"] = args.delta
    if args.generator is not None:
        data["perturbation"]["generator"] = args.generator
    if args.n_max is not None:
        data["n_max"] = args.n_max
    if getattr(args, "estimators", None) is not None:
        data["estimators"] = [e.strip() for e in args.estimators.split(",") if e.strip()]
    if getattr(args, "mc_samples", None) is not None:
        data["mc"]["samples"] = args.mc_samples
    if getattr(args, "mc_sampler", None) is not None:
        data["mc"]["sampler"] = args.mc_sampler
    if getattr(args, "gamma", None) is not None:
        data["dqc1"]["gamma"] = args.gamma
    if getattr(args, "shots", None) is not None:
        data["dqc1"]["shots"] = args.shots
    if getattr(args, "readout_noise_sd", None) is not None:
        data["dqc1"]["readout_noise_sd"] = args.readout_noise_sd
    if args.seed is not None:
        data["seed"] = args.seed
    if getattr(args, "output", None) is not None:
        data["output"] = args.output
    return experiment.config_from_dict(data)


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    result = experiment.run_experiment(cfg)
    print(f"wrote {result.csv_path} and {result.sidecar_path}")
    if result.fit is not None:
        print(f"decay fit: gamma = {result.fit.gamma:.6g} over window "
              f"{result.fit.window} (background {result.fit.background:.4g})")
    return EXIT_OK


def _cmd_fit(args: argparse.Namespace) -> int:
    series = experiment.read_series_csv(args.input)
    if args.dim is not None:
        series.dim = args.dim
    if series.dim <= 0:
        raise ConfigError("dimension unknown; pass --dim or keep the sidecar "
                          "next to the CSV")
    if args.background == "saturation":
        background = experiment.fgr_background(series.dim)
    else:
        try:
            background = float(args.background)
        except ValueError as exc:
            raise ConfigError(f"bad --background value: {args.background!r}") from exc
    window = tuple(args.window) if args.window else None
    fit = experiment.fit_decay(series, window=window, background=background,
                               column=args.column)
    print(json.dumps({
        "gamma": fit.gamma,
        "window": list(fit.window),
        "residual_rms": fit.residual_rms,
        "background": fit.background,
        "model": fit.model,
    }, indent=2))
    return EXIT_OK


def _cmd_verify_theorem(args: argparse.Namespace) -> int:
    report = experiment.verify_theorem(args.ell, args.dim, args.trials,
                                       args.samples, args.seed)
    print(f"ell={report.ell} dim={report.dim} samples={report.samples}")
    for row in report.trials:
        print(f"  trial {row.trial}: lhs={row.lhs:.8f} rhs={row.rhs:.8f} "
              f"stderr={row.stderr:.2e} |diff|={row.deviation:.2e} "
              f"{'PASS' if row.passed else 'FAIL'}")
    if report.closed_form_residual is not None:
        print(f"  closed-form residual (ell=2): {report.closed_form_residual:.2e}")
    print("PASS" if report.passed else "FAIL")
    if not report.passed:
        raise VerificationError("Haar-moment identity check failed")
    return EXIT_OK


def _cmd_separability(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)
    pair = experiment.build_map_pair(cfg)
    u_dag = pair.u.conj().T
    s = np.eye(pair.dim, dtype=np.complex128)
    amp = 1 / np.sqrt(2)
    worst = 0.0
    ok = True
    for n in range(1, cfg.n_max + 1):
        s = pair.u_p @ s @ u_dag
        state = dqc1.ProbeRegisterState(alpha=amp, beta=amp, s_accum=s,
                                        dim=pair.dim, step_count=n)
        report = dqc1.separability_check(state, tol=args.tolerance)
        worst = max(worst, report.frobenius_distance)
        ok = ok and report.passed
        factor = dqc1.decoherence_factor(state)
        print(f"n={n}: distance={report.frobenius_distance:.3e} "
              f"decoherence_factor={factor:.6f} "
              f"{'PASS' if report.passed else 'FAIL'}")
    print(f"worst distance {worst:.3e} (tolerance {args.tolerance:.1e}): "
          f"{'PASS' if ok else 'FAIL'}")
    if not ok:
        raise VerificationError("separability certificate failed")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "fit": _cmd_fit,
        "verify-theorem": _cmd_verify_theorem,
        "separability": _cmd_separability,
    }
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceLimitError as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except NumericError as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
