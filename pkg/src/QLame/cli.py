"""
Command-line entry point.

    qlame verify --m 1,2 --out report.json
    qlame curve --m 1 --count 40 --out curve/
    qlame bethe --m 2 --c 0.25

Exit codes: 0 all checks pass, 1 a check failed, 2 usage or configuration
error, 3 numerical failure, 4 no Bethe solution found for some m.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from QLame import __version__
from QLame.backend import make_backend
from QLame.bethe import BetheSolver
from QLame.data_wrangling.config_loader import (
    BACKEND_NAMES,
    DEFAULT_TOLERANCES,
    RunConfig,
    load_config_file,
)
from QLame.data_wrangling.serialization import (
    bethe_point_to_dict,
    dumps,
    spectral_fit_to_dict,
    write_json,
    write_samples_csv,
)
from QLame.errors import ConfigError, ContinuationStallError, DomainError, NumericalError
from QLame.spectral_curve import DEFAULT_C_WINDOW, collect_samples, fit_P
from QLame.verifier import Report, Verifier

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_NO_SOLUTION = 4


def _tol_flag(name: str) -> str:
    return "--tol-" + name.replace("_", "-")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key = value config file; flags override it")
    parser.add_argument("--gamma-re", type=float)
    parser.add_argument("--gamma-im", type=float)
    parser.add_argument("--tau-re", type=float)
    parser.add_argument("--tau-im", type=float)
    parser.add_argument("--m", help="comma separated coupling indices, e.g. 1,2")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--samples", type=int, help="sample points per operator comparison")
    parser.add_argument("--backend", choices=BACKEND_NAMES, help="least-squares backend of the curve fit")
    parser.add_argument("--out", help="output file (verify) or directory (curve)")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    for name in DEFAULT_TOLERANCES:
        parser.add_argument(_tol_flag(name), dest=f"tol_{name}", type=float, metavar="TOL")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qlame",
        description="Numerical verification of the q-Lame operator, its commutant and spectral curve.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    verify = sub.add_parser("verify", help="run the verification suites and write a report")
    _add_common(verify)

    curve = sub.add_parser("curve", help="sample the spectral curve and fit Y^2 = P(X^2)")
    _add_common(curve)
    curve.add_argument("--count", type=int, default=40, help="number of curve samples")
    curve.add_argument("--c-start", type=complex, default=DEFAULT_C_WINDOW[0])
    curve.add_argument("--c-end", type=complex, default=DEFAULT_C_WINDOW[1])

    bethe = sub.add_parser("bethe", help="solve the Bethe equations at one value of c")
    _add_common(bethe)
    bethe.add_argument("--c", type=complex, required=True)
    bethe.add_argument("--starts", type=int, default=64, help="number of Newton starting points")
    return parser


def _parse_m_list(value: str) -> list[int]:
    try:
        return [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--m: cannot parse {value!r} as a comma separated list of integers") from None


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then command-line flags."""
    kwargs = load_config_file(args.config) if args.config else {}
    if args.gamma_re is not None or args.gamma_im is not None:
        base = complex(kwargs.get("gamma", RunConfig.gamma))
        kwargs["gamma"] = complex(
            args.gamma_re if args.gamma_re is not None else base.real,
            args.gamma_im if args.gamma_im is not None else base.imag,
        )
    if args.tau_re is not None or args.tau_im is not None:
        base = complex(kwargs.get("tau", RunConfig.tau))
        kwargs["tau"] = complex(
            args.tau_re if args.tau_re is not None else base.real,
            args.tau_im if args.tau_im is not None else base.imag,
        )
    if args.m is not None:
        kwargs["m_list"] = _parse_m_list(args.m)
    if args.seed is not None:
        kwargs["seed"] = args.seed
    if args.samples is not None:
        kwargs["sample_count"] = args.samples
    if args.backend is not None:
        kwargs["fit_backend"] = args.backend
    if args.out is not None:
        kwargs["output_path"] = args.out
    tolerances = dict(kwargs.get("tolerances", {}))
    for name in DEFAULT_TOLERANCES:
        value = getattr(args, f"tol_{name}")
        if value is not None:
            tolerances[name] = value
    kwargs["tolerances"] = tolerances
    return RunConfig(**kwargs)


def _print_report(report: Report) -> None:
    for entry in report.entries:
        params = ", ".join(f"{k}={v}" for k, v in entry.as_dict()["params"].items())
        status = "ok  " if entry.passed else "FAIL"
        print(f"{status} {entry.name:<32} {entry.residual_display:>10} < {entry.threshold:.0e}  {params}")
    s = report.summary()
    print(f"{s['passed']}/{s['total']} checks passed")


def cmd_verify(config: RunConfig) -> Report:
    verifier = Verifier(config)
    verifier.add_default_suite()
    report = verifier.run()
    if config.output_path:
        path = write_json(report.to_dict(), config.output_path)
        logger.info("wrote report to %s", path)
    _print_report(report)
    return report


def cmd_curve(config: RunConfig, c_window: tuple[complex, complex], count: int) -> list[Path]:
    out_dir = Path(config.output_path or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    md = config.modular_data
    backend = make_backend(config.fit_backend)
    written: list[Path] = []
    for m in config.m_list:
        try:
            samples = collect_samples(m, md, count, c_window, seed=config.seed)
        except ContinuationStallError as exc:
            if exc.last_point is not None:
                print(f"m={m}: continuation stalled, last good point {dumps(bethe_point_to_dict(exc.last_point))}")
            raise
        fit = fit_P(samples, m, md, backend)
        written.append(write_samples_csv(samples, out_dir / f"curve_m{m}_samples.csv"))
        written.append(write_json(spectral_fit_to_dict(fit), out_dir / f"curve_m{m}_fit.json"))
        print(
            f"m={m}: {len(samples)} samples, degree {len(fit.coeffs) - 1}, "
            f"fit {fit.fit_residual:.2e}, validation {fit.validation_residual:.2e}, "
            f"cond {fit.cond_estimate:.2e}"
        )
    return written


def cmd_bethe(config: RunConfig, c: complex, starts: int = 64) -> dict:
    """Solve at fixed c for every m. An m without solutions keeps an empty list."""
    md = config.modular_data
    points = {}
    for m in config.m_list:
        solutions = BetheSolver(m, md, seed=config.seed).solve_given_c(c, starts)
        if not solutions:
            logger.warning(f"no Bethe solution found for m={m} at c={c}")
        points[str(m)] = [bethe_point_to_dict(p) for p in solutions]
    result = {"c": [c.real, c.imag], "points": points}
    print(dumps(result), end="")
    return result


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(asctime)s %(name)s %(levelname)s %(message)s")

    try:
        config = config_from_args(args)
        if args.command == "verify":
            report = cmd_verify(config)
            return EXIT_OK if report.passed else EXIT_CHECK_FAILED
        if args.command == "curve":
            cmd_curve(config, (args.c_start, args.c_end), args.count)
        elif args.command == "bethe":
            result = cmd_bethe(config, args.c, args.starts)
            if not all(result["points"].values()):
                print("no Bethe solution found", file=sys.stderr)
                return EXIT_NO_SOLUTION
    except (ConfigError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
