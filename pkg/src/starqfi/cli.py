"""
Command-line front end.

Every subcommand writes ``{"meta": {...}, "data": [...]}`` JSON (or CSV rows)
to ``--out`` or stdout. Exit status: 0 success, 2 configuration error,
3 numerical failure, 4 optimizer budget exhausted.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from . import __version__
from .fisher import (
    DivergentFisherError,
    biased_qfi_phi,
    biased_qfi_theta,
    cramer_rao_bound,
    dual_qfi,
    qfi_max,
)
from .io import dumps_csv, dumps_json, get_or_optimize_ut, save_ut, write_atomic
from .states import ACETONITRILE_GAMMA_RATIO, BlochAngles, Family, StateFamily, StrConfig, bloch_vector
from .sweeps import fig2_surface, scaling_in_eps, scaling_in_n, table2_pipeline
from .tomography import (
    IndeterminateStateError,
    OptimizerBudgetError,
    OptimizerConfig,
    RankDeficientError,
    calibrate_noise,
    constraint_matrix,
    optimize_ut,
    str_qst,
)

log = logging.getLogger("starqfi")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_BUDGET = 0, 2, 3, 4
DEFAULT_SEED = 20180301


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    n_qubits: int = 4
    eps_a1: float = 1e-3
    eps_t1: float | None = None
    gamma_ratio: float = ACETONITRILE_GAMMA_RATIO
    theta0: float = math.pi / 2
    phi0: float = 0.0
    seed: int = DEFAULT_SEED
    noise_sigma: float = 0.0
    output_format: str = "json"
    output_path: str | None = None
    threads: int | None = None
    ut_cache: str | None = None

    def __post_init__(self):
        def finite(name, lo=None, hi=None):
            v = getattr(self, name)
            if v is None:
                return
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"{name} must be a finite number, got {v!r}")
            if lo is not None and v < lo or hi is not None and v > hi:
                raise ConfigError(f"{name}={v} outside [{lo}, {hi}]")

        if not isinstance(self.n_qubits, int) or not 2 <= self.n_qubits <= 12:
            raise ConfigError(f"n must be an integer in [2, 12], got {self.n_qubits!r}")
        finite("eps_a1", 0.0, 1.0)
        finite("eps_t1", 0.0, 1.0)
        finite("gamma_ratio", 1e-12)
        finite("theta0", 0.0, math.pi)
        finite("phi0")
        finite("noise_sigma", 0.0)
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if self.threads is not None and (not isinstance(self.threads, int) or self.threads < 1):
            raise ConfigError("threads must be a positive integer")
        if self.output_format not in ("json", "csv"):
            raise ConfigError(f"format must be json or csv, got {self.output_format!r}")

    @property
    def target_eps(self):
        return self.eps_a1 / self.gamma_ratio if self.eps_t1 is None else self.eps_t1

    def str_config(self):
        return StrConfig(self.n_qubits, self.target_eps, self.eps_a1)

    def angles(self):
        return BlochAngles(self.theta0, self.phi0)

    def optimizer(self):
        return OptimizerConfig(seed=self.seed, threads=self.threads)


_FLAG_TO_FIELD = {
    "n": "n_qubits",
    "eps_a1": "eps_a1",
    "eps_t1": "eps_t1",
    "gamma_ratio": "gamma_ratio",
    "theta0": "theta0",
    "phi0": "phi0",
    "seed": "seed",
    "noise_sigma": "noise_sigma",
    "format": "output_format",
    "out": "output_path",
    "threads": "threads",
    "ut_cache": "ut_cache",
}


def _load_config_file(path):
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config file must hold a JSON object")
    known = {f.name for f in fields(RunConfig)}
    out = {}
    for key, value in raw.items():
        key = key.lstrip("-").replace("-", "_")
        name = _FLAG_TO_FIELD.get(key, key)
        if name not in known:
            raise ConfigError(f"unknown config key {key!r}")
        out[name] = value
    return out


def build_run_config(args):
    values = _load_config_file(args.config) if args.config else {}
    for flag, name in _FLAG_TO_FIELD.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[name] = v
    return RunConfig(**values)


def _number(kind):
    def parse(text):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid {kind.__name__} value: {text!r}") from None
        if kind is float and not math.isfinite(value):
            raise argparse.ArgumentTypeError(f"value must be finite: {text!r}")
        return value

    parse.__name__ = kind.__name__
    return parse


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def make_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with default values for the flags below")
    common.add_argument("--n", type=_number(int), help="total qubits in the register")
    common.add_argument("--eps-a1", type=_number(float), help="ancilla per-qubit purity")
    common.add_argument("--eps-t1", type=_number(float), help="target per-qubit purity (default eps_a1 / gamma_ratio)")
    common.add_argument("--gamma-ratio", type=_number(float), help="gamma_ancilla / gamma_target")
    common.add_argument("--theta0", type=_number(float), help="target polar angle (rad)")
    common.add_argument("--phi0", type=_number(float), help="target azimuth (rad)")
    common.add_argument("--seed", type=_number(int))
    common.add_argument("--noise-sigma", type=_number(float), help="relative intensity noise for tomography")
    common.add_argument("--format", choices=("json", "csv"))
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--threads", type=_number(int))
    common.add_argument("--ut-cache", help="directory of cached tomography unitaries")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="starqfi", description="Quantum Fisher information of star-topology registers")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("qfi-single", parents=[common], help="single-qubit QFI, biased QFI and Cramer-Rao bounds")
    p.add_argument("--eps", type=_number(float), help="purity of the qubit (default eps_t1)")
    p.add_argument("--dtheta0", type=_number(float), default=0.0)
    p.add_argument("--dphi0", type=_number(float), default=0.0)
    p.add_argument("--k", type=_number(float), default=1e15, help="number of independent measurements")

    p = sub.add_parser("qfi-str", parents=[common], help="register QFI for correlated and uncorrelated states")
    p.add_argument("--k", type=_number(float), default=1e15)

    p = sub.add_parser("qst", parents=[common], help="single-shot ancilla tomography of the target")
    p.add_argument("--calibrate-c", type=_number(float), help="choose noise so the expected correlation is this")

    sub.add_parser("table2", parents=[common], help="QFI table for the five reference states")

    p = sub.add_parser("fig2", parents=[common], help="biased polar QFI surface")
    p.add_argument("--grid", type=_number(int), default=51, help="points per axis")
    p.add_argument("--eps-max", type=_number(float), default=1.0)

    p = sub.add_parser("scaling", parents=[common], help="QFI scaling with N or purity")
    p.add_argument("--axis", choices=("N", "eps"), default="N")
    p.add_argument("--n-min", type=_number(int), default=2)
    p.add_argument("--n-max", type=_number(int), default=8)
    p.add_argument("--samples", type=_number(int), default=20)
    p.add_argument("--eps-values", help="comma-separated purities for --axis eps", default="1e-4,2e-4,1e-3,2e-3")

    sub.add_parser("optimize-ut", parents=[common], help="optimize and cache a tomography unitary")
    return parser


def _check_eps_arg(name, value):
    if value is None:
        return
    if not 0.0 <= value <= 1.0:
        raise ConfigError(f"{name}={value} outside [0, 1]")


def cmd_qfi_single(cfg, args):
    eps = cfg.target_eps if args.eps is None else args.eps
    _check_eps_arg("eps", eps)
    if args.k < 1:
        raise ConfigError("k must be >= 1")
    a = cfg.angles()
    fam = StateFamily.single(a.theta0, a.phi0, eps)
    f_theta = qfi_max(fam, "theta").value
    f_phi = qfi_max(fam, "phi").value
    dual = dual_qfi(f_theta, f_phi)
    rows = [
        {"quantity": "F_theta", "value": f_theta},
        {"quantity": "F_phi", "value": f_phi},
        {"quantity": "F_dual", "value": dual},
        {"quantity": "F_theta_biased", "value": biased_qfi_theta(a.theta0, a.phi0, args.dtheta0, args.dphi0, eps)},
        {"quantity": "F_phi_biased", "value": biased_qfi_phi(a.theta0, a.phi0, args.dphi0, eps)},
    ]
    for name, f in (("theta", f_theta), ("phi", f_phi), ("dual", dual)):
        rows.append({"quantity": f"crb_{name}", "value": cramer_rao_bound(f, args.k) if f > 0 else None})
    return {"eps": eps, "dtheta0": args.dtheta0, "dphi0": args.dphi0, "k": args.k}, rows


def cmd_qfi_str(cfg, args):
    sc = cfg.str_config()
    a = cfg.angles()
    rows = []
    for kind in (Family.STR_CORRELATED, Family.STR_UNCORRELATED):
        fam = StateFamily(kind, a, sc)
        f_theta = qfi_max(fam, "theta").value
        f_phi = qfi_max(fam, "phi").value
        dual = dual_qfi(f_theta, f_phi)
        rows.append(
            {
                "family": kind.value,
                "F_theta": f_theta,
                "F_phi": f_phi,
                "F_dual": dual,
                "F_theta_over_eps_a2": f_theta / sc.eps_a1**2 if sc.eps_a1 else None,
                "F_dual_over_eps_a2": dual / sc.eps_a1**2 if sc.eps_a1 else None,
                "r": f_phi / (sc.eps_a1**2 * (sc.n_qubits - 1)) if kind is Family.STR_CORRELATED and sc.eps_a1 else None,
                "crb_theta": cramer_rao_bound(f_theta, args.k) if f_theta > 0 else None,
            }
        )
    return {"k": args.k}, rows


def _ut(cfg):
    return get_or_optimize_ut(cfg.str_config(), cfg.optimizer(), cfg.ut_cache)


def cmd_qst(cfg, args):
    sc = cfg.str_config()
    ut = _ut(cfg)
    sigma = cfg.noise_sigma
    if args.calibrate_c is not None:
        sigma = calibrate_noise(constraint_matrix(sc, ut), args.calibrate_c)
    a = cfg.angles()
    rho = StateFamily(Family.STR_CORRELATED, a, sc).evaluate()
    res = str_qst(rho, ut, sc, bloch_vector(a), sigma, np.random.default_rng(cfg.seed))
    if res.indeterminate:
        raise IndeterminateStateError("reconstructed Bloch vector is zero")
    row = res.to_dict()
    row["noise_sigma"] = sigma
    row["ut"] = ut.to_dict()
    return {"noise_sigma": sigma}, [row]


def cmd_table2(cfg, args):
    ut = _ut(cfg)
    rows = table2_pipeline(cfg.str_config(), cfg.gamma_ratio, ut, cfg.noise_sigma, cfg.seed)
    return {"ut": ut.to_dict()}, rows


def cmd_fig2(cfg, args):
    if args.grid < 2:
        raise ConfigError("grid must be >= 2")
    _check_eps_arg("eps_max", args.eps_max)
    report = fig2_surface(np.linspace(-np.pi / 2, np.pi / 2, args.grid), np.linspace(0, args.eps_max, args.grid))
    return {"checks": report.checks, "grid": args.grid}, report.points


def cmd_scaling(cfg, args):
    if args.axis == "N":
        if not 2 <= args.n_min <= args.n_max <= 12:
            raise ConfigError("need 2 <= n-min <= n-max <= 12")
        if args.samples < 1:
            raise ConfigError("samples must be >= 1")
        report = scaling_in_n(cfg.eps_a1, range(args.n_min, args.n_max + 1), args.samples, cfg.seed, cfg.threads)
    else:
        try:
            eps_values = [float(x) for x in args.eps_values.split(",")]
        except ValueError:
            raise ConfigError(f"bad --eps-values {args.eps_values!r}") from None
        for e in eps_values:
            _check_eps_arg("eps", e)
        report = scaling_in_eps(cfg.n_qubits, eps_values, cfg.angles())
    return {"fit": report.fit, "checks": report.checks}, report.points


def cmd_optimize_ut(cfg, args):
    opt = cfg.optimizer()
    ut = optimize_ut(cfg.str_config(), opt)
    extra = {}
    if cfg.ut_cache:
        extra["cache_file"] = str(save_ut(ut, opt, cfg.ut_cache))
    return extra, [ut.to_dict()]


COMMANDS = {
    "qfi-single": cmd_qfi_single,
    "qfi-str": cmd_qfi_str,
    "qst": cmd_qst,
    "table2": cmd_table2,
    "fig2": cmd_fig2,
    "scaling": cmd_scaling,
    "optimize-ut": cmd_optimize_ut,
}


def run(argv=None):
    """Run the CLI and return the serialized output text (raises on error)."""
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        cfg = build_run_config(args)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    extra, data = COMMANDS[args.command](cfg, args)
    config = {k: v for k, v in asdict(cfg).items() if k not in ("output_path", "ut_cache", "threads")}
    meta = {"version": __version__, "command": args.command, "config": config, "seed": cfg.seed, **extra}
    if cfg.output_format == "csv":
        text = dumps_csv(data)
    else:
        text = dumps_json(meta, data)
    if cfg.output_path:
        write_atomic(cfg.output_path, text)
    else:
        sys.stdout.write(text)
    return text


def main(argv=None):
    try:
        run(argv)
    except ConfigError as exc:
        print(f"starqfi: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OptimizerBudgetError as exc:
        print(f"starqfi: optimizer budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (DivergentFisherError, RankDeficientError, IndeterminateStateError, ArithmeticError) as exc:
        print(f"starqfi: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"starqfi: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
