"""Command-line front end: coverage sweeps, PDF curves and the validation suite.

Settings come from an optional flat ``key = value`` file (``--config``) and
from flags named after the keys in kebab case; flags win. Thresholds are
given in dB and converted to linear exactly once, here.

Exit status: 0 success, 1 configuration error, 2 numerical failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import acceptance
from .coverage import CoverageQuery, NetworkConfig, coverage_closed_form, coverage_radial_integral, db_to_linear
from .errors import InvalidArgumentError
from .fading import (DEFAULT_GHQ_ORDER, DoubleShadowedParams, KappaMuShadowedParams, build_ghq_mixture,
                     double_shadowed_pdf_exact, double_shadowed_pdf_ghq, kms_pdf)
from .interference import parse_fading_model
from .simulator import SimConfig, simulate_coverage_sweep

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3
THREADS_ENV = "PPPCOV_THREADS"


class ConfigError(InvalidArgumentError):
    pass


@dataclass(frozen=True)
class RunConfig:
    density: float = 1e-7
    path_loss_exponent: float = 4.0
    tx_power: float = 1.0
    desired: str = "kms:kappa=1,mu=1,m=1,sigma_db=0"
    interferer: str = "rayleigh"
    ghq_order: int = DEFAULT_GHQ_ORDER
    theta_db: float | None = None
    theta_db_start: float = -10.0
    theta_db_stop: float = 20.0
    theta_db_step: float = 1.0
    h_min: float = 0.01
    h_max: float = 20.0
    points: int = 200
    realizations: int = 100_000
    window_radius_factor: float = 15.0
    seed: int = 0
    workers: int = 1
    mc: bool = False
    check: bool = False
    exact: bool = False
    quick: bool = False
    output: str = "-"
    format: str = "csv"

    def __post_init__(self):
        if not self.theta_db_step > 0:
            raise ConfigError(f"theta_db_step must be > 0, got {self.theta_db_step!r}")
        if not self.theta_db_start <= self.theta_db_stop:
            raise ConfigError("theta_db_start must not exceed theta_db_stop")
        if not 0 < self.h_min < self.h_max:
            raise ConfigError("need 0 < h_min < h_max")
        if self.points < 2:
            raise ConfigError(f"points must be >= 2, got {self.points}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")

    def network(self) -> NetworkConfig:
        return NetworkConfig(self.density, self.path_loss_exponent, self.tx_power)

    def desired_params(self) -> DoubleShadowedParams:
        return parse_desired(self.desired)

    def sim(self) -> SimConfig:
        return SimConfig(self.realizations, self.window_radius_factor, self.seed, effective_workers(self.workers))

    def thetas_db(self) -> list[float]:
        if self.theta_db is not None:
            return [float(self.theta_db)]
        n = int(math.floor((self.theta_db_stop - self.theta_db_start) / self.theta_db_step + 1e-9)) + 1
        return [round(self.theta_db_start + k * self.theta_db_step, 12) for k in range(n)]


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_BOOL_WORDS = {"1": True, "true": True, "yes": True, "on": True,
               "0": False, "false": False, "no": False, "off": False}


def parse_desired(text: str) -> DoubleShadowedParams:
    """``kms:kappa=<k>,mu=<int>,m=<int>[,sigma_db=<dB>]``."""
    head, _, body = text.strip().partition(":")
    if head.strip().lower() != "kms":
        raise ConfigError(f"desired fading must look like kms:kappa=..,mu=..,m=..,sigma_db=.., got {text!r}")
    values = {}
    for item in filter(None, (p.strip() for p in body.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ConfigError(f"expected key=value in desired fading, got {item!r}")
        values[key.strip()] = val.strip()
    unknown = set(values) - {"kappa", "mu", "m", "sigma_db"}
    if unknown or not {"kappa", "mu", "m"} <= set(values):
        raise ConfigError(f"desired fading needs kappa, mu, m and optionally sigma_db, got {text!r}")
    try:
        base = KappaMuShadowedParams(float(values["kappa"]), _to_int(values["mu"]), _to_int(values["m"]))
        return DoubleShadowedParams(base, float(values.get("sigma_db", "0")))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _to_int(text: str) -> int:
    value = float(text)
    if value != int(value):
        raise ConfigError(f"expected an integer, got {text!r}")
    return int(value)


def _convert(key: str, raw: str):
    kind = _FIELD_TYPES[key]
    raw = raw.strip()
    if "bool" in kind:
        word = raw.strip().lower()
        if word not in _BOOL_WORDS:
            raise ValueError(f"expected a boolean, got {raw!r}")
        return _BOOL_WORDS[word]
    if "int" in kind:
        return _to_int(raw)
    if "float" in kind:
        return float(raw)
    return raw.strip()


def read_config_file(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, blank lines are skipped."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            key, eq, raw = text.partition("=")
            key = key.strip().replace("-", "_")
            if not eq or not key:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            if key not in _FIELD_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            try:
                out[key] = _convert(key, raw)
            except ValueError as exc:
                raise ConfigError(f"{path}:{lineno}: {key}: {exc}") from None
    return out


def effective_workers(requested: int) -> int:
    cap = os.environ.get(THREADS_ENV)
    if cap is None or not cap.strip():
        return requested
    try:
        limit = int(cap)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {cap!r}") from None
    if limit < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {cap!r}")
    return min(requested, limit)


def fmt(x: float) -> str:
    """Locale-independent decimal with 15 significant digits."""
    return format(float(x), ".15g")


def _write_table(config: RunConfig, command: str, columns: list[str], rows: list[list[float]], summary: dict):
    if config.format == "json":
        doc = {"command": command, "columns": columns,
               "rows": [dict(zip(columns, map(float, r))) for r in rows], "summary": summary}
        text = json.dumps(doc, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows([fmt(v) for v in r] for r in rows)
        text = buf.getvalue()
    if config.output == "-":
        sys.stdout.write(text)
    else:
        with open(config.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def cmd_coverage(config: RunConfig) -> int:
    net = config.network()
    desired = config.desired_params()
    interferer = parse_fading_model(config.interferer)
    thetas_db = config.thetas_db()
    thetas = db_to_linear(thetas_db)
    sim = config.sim() if config.mc else None
    queries = [CoverageQuery(float(t), desired, interferer, config.ghq_order) for t in thetas]

    closed = [coverage_closed_form(net, q) for q in queries]
    columns = ["theta_db", "closed_form"]
    cols = [thetas_db, closed]
    summary = {}
    if config.check:
        radial = [coverage_radial_integral(net, q) for q in queries]
        columns.append("radial_integral")
        cols.append(radial)
        gap = max(abs(a - b) for a, b in zip(closed, radial))
        summary["max_abs_closed_minus_radial"] = gap
        print(f"max |closed_form - radial_integral| = {gap:.3e}", file=sys.stderr)
    if sim is not None:
        estimates = simulate_coverage_sweep(net, queries[0], sim, thetas)
        columns += ["mc_estimate", "mc_ci_halfwidth"]
        cols += [[e.p_hat for e in estimates], [e.half_width_95 for e in estimates]]
        gap = max(abs(c - e.p_hat) for c, e in zip(closed, estimates))
        summary["max_abs_closed_minus_mc"] = gap
        print(f"max |closed_form - mc_estimate| = {gap:.3e} ({sim.realizations} realizations)", file=sys.stderr)
    rows = [list(r) for r in zip(*cols)]
    _write_table(config, "coverage", columns, rows, summary)
    print(f"{len(rows)} threshold(s) written", file=sys.stderr)
    return EXIT_OK


def cmd_pdf(config: RunConfig) -> int:
    params = config.desired_params()
    h = np.geomspace(config.h_min, config.h_max, config.points)
    mix = build_ghq_mixture(params, config.ghq_order)
    ghq = np.asarray(double_shadowed_pdf_ghq(mix, h))
    columns, cols, summary = ["h", "pdf_ghq"], [h, ghq], {}
    if config.exact:
        if params.sigma_s_db == 0:
            exact = np.asarray(kms_pdf(mix.base, h))
        else:
            exact = np.array([double_shadowed_pdf_exact(params, float(x)) for x in h])
        err = np.abs(ghq - exact)
        columns += ["pdf_exact", "abs_err"]
        cols += [exact, err]
        summary["max_abs_err"] = float(err.max())
        print(f"max abs_err = {err.max():.3e}", file=sys.stderr)
    rows = [list(r) for r in zip(*cols)]
    _write_table(config, "pdf", columns, rows, summary)
    return EXIT_OK


def cmd_validate(config: RunConfig) -> int:
    lines = []

    def report(res):
        lines.append(res.line())
        print(res.line(), file=sys.stderr, flush=True)

    results = acceptance.run_suite(quick=config.quick, workers=effective_workers(config.workers), report=report)
    passed = sum(r.passed for r in results)
    tail = f"{passed}/{len(results)} checks passed"
    print(tail, file=sys.stderr)
    if config.output != "-":
        with open(config.output, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines + [tail]) + "\n")
    return EXIT_OK if passed == len(results) else EXIT_NUMERIC


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pppcov", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value settings file; flags override it")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        if "bool" in f.type:
            common.add_argument(flag, dest=f.name, action="store_const", const=True, default=None)
        else:
            common.add_argument(flag, dest=f.name, default=None, metavar=f.name.upper())
    sub.add_parser("coverage", parents=[common], help="coverage probability over a threshold sweep")
    sub.add_parser("pdf", parents=[common], help="double shadowed density on a log grid")
    sub.add_parser("validate", parents=[common], help="run the acceptance suite")
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    values = read_config_file(args.config) if args.config else {}
    for f in fields(RunConfig):
        raw = getattr(args, f.name)
        if raw is None:
            continue
        if isinstance(raw, bool):
            values[f.name] = raw
            continue
        try:
            values[f.name] = _convert(f.name, raw)
        except ValueError as exc:
            raise ConfigError(f"--{f.name.replace('_', '-')}: {exc}") from None
    return RunConfig(**values)


_COMMANDS = {"coverage": cmd_coverage, "pdf": cmd_pdf, "validate": cmd_validate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args)
        # validate every model before any computation starts
        config.network()
        config.desired_params()
        parse_fading_model(config.interferer)
        config.sim()
        CoverageQuery(1.0, config.desired_params(), ghq_order=config.ghq_order)
        return _COMMANDS[args.command](config)
    except OSError as exc:
        print(f"pppcov: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"pppcov: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ArithmeticError as exc:
        print(f"pppcov: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
