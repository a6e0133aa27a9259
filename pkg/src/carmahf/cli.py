"""Command-line harness for reproducible experiments.

Subcommands: simulate, sample-arma, alpha, riemann, recover,
kernel-study. Each prints a JSON result to stdout and, where configured
with --out, writes CSV/JSON artifacts whose headers embed the package
version, the resolved configuration, and the master seed, so runs are
reproducible byte for byte. Exit codes: 0 success, 2 configuration
error, 3 numeric failure, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from . import alpha as alpha_mod
from .errors import CarmaError, ConfigError, ModelStructureError
from .levy import (
    driver_from_spec,
    driver_spec_string,
    export_path_csv,
    generate_increments,
    simulate_path,
)
from .model import CarmaModel, kernel, model_from_dict, model_to_dict
from .recovery import carma2_error_closed_form, estimate_kernel, recovery_error_mc
from .riemann import match_h_numerically, optimal_rules, riemann_arma_coefficients
from .spectral import asymptotic_arma, sampled_arma

_STUDY_MODELS = (
    ("carma21", dict(ar_roots=(-0.7, -1.2), ma_mu=(3.0,))),
    ("car2", dict(ar_roots=(-0.7, -1.2))),
    ("car3", dict(ar_roots=(-0.7, -1.2, -2.6))),
)
_STUDY_DELTAS = (0.25, 0.015625)
_FIXED_RULES = (0.0, 0.5, 1.0)
_STUDY_POINTS = 8


@dataclass
class ExperimentConfig:
    """Resolved parameters of one experiment run."""

    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    out: Optional[str] = None
    workers: int = 1

    def echo(self) -> str:
        body = {"kind": self.kind, "seed": self.seed, "workers": self.workers}
        if self.out is not None:
            body["out"] = self.out
        body.update(self.params)
        return json.dumps(body, sort_keys=True)


def _load_model(spec: str) -> CarmaModel:
    """Accept an inline JSON object or a path to a JSON file."""
    if spec is None:
        raise ConfigError("a --model is required")
    text = spec
    if not spec.lstrip().startswith("{"):
        try:
            text = Path(spec).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read model file {spec!r}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"model is not valid JSON: {exc}") from exc
    try:
        return model_from_dict(data)
    except ModelStructureError as exc:
        raise ConfigError(f"invalid model: {exc}") from exc


def _header_lines(config: ExperimentConfig) -> dict:
    return {
        "carmahf": __version__,
        "config": config.echo(),
        "seed": config.seed,
    }


def _emit(config: ExperimentConfig, result: dict) -> None:
    out = {
        "version": __version__,
        "config": json.loads(config.echo()),
        "seed": config.seed,
    }
    out.update(result)
    print(json.dumps(out, sort_keys=True))


def _write_json(config: ExperimentConfig, name: str, result: dict) -> None:
    if config.out is None:
        return
    directory = Path(config.out)
    directory.mkdir(parents=True, exist_ok=True)
    payload = {
        "version": __version__,
        "config": json.loads(config.echo()),
        "seed": config.seed,
    }
    payload.update(result)
    (directory / name).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def run(config: ExperimentConfig) -> int:
    """Execute one experiment; returns the process exit status."""
    handler = {
        "simulate": _run_simulate,
        "sample-arma": _run_sample_arma,
        "alpha": _run_alpha,
        "riemann": _run_riemann,
        "recover": _run_recover,
        "kernel-study": _run_kernel_study,
    }.get(config.kind)
    if handler is None:
        raise ConfigError(f"unknown experiment kind {config.kind!r}")
    handler(config)
    return 0


def _require(config: ExperimentConfig, *names):
    missing = [n for n in names if config.params.get(n) is None]
    if missing:
        raise ConfigError(
            f"{config.kind} needs {', '.join('--' + m.replace('_', '-') for m in missing)}"
        )


def _positive(config: ExperimentConfig, name: str) -> float:
    value = config.params[name]
    if not value > 0:
        raise ConfigError(f"--{name.replace('_', '-')} must be positive, got {value}")
    return value


def _run_simulate(config: ExperimentConfig) -> None:
    _require(config, "model", "delta", "steps")
    if config.out is None:
        raise ConfigError("simulate writes a CSV and needs --out DIR")
    model = _load_model(config.params["model"])
    delta = _positive(config, "delta")
    steps = int(_positive(config, "steps"))
    driver = driver_from_spec(config.params.get("driver") or "brownian")
    subgrid = config.params.get("subgrid")
    increments = generate_increments(
        driver, config.seed, delta, steps,
        subgrid_factor=int(subgrid) if subgrid else None,
    )
    init = config.params.get("init") or "stationary"
    burn = config.params.get("burn_in")
    path = simulate_path(
        model,
        increments,
        init=init,
        burn_in=int(burn) if burn is not None else None,
        keep_states=bool(config.params.get("keep_states")),
    )
    directory = Path(config.out)
    directory.mkdir(parents=True, exist_ok=True)
    target = directory / "simulate.csv"
    meta = _header_lines(config)
    meta["model"] = json.dumps(model_to_dict(model), sort_keys=True)
    meta["driver"] = driver_spec_string(driver)
    export_path_csv(path, target, metadata=meta)
    _emit(config, {"written": str(target), "observations": int(path.y_values.size)})


def _run_sample_arma(config: ExperimentConfig) -> None:
    _require(config, "model", "delta")
    model = _load_model(config.params["model"])
    delta = _positive(config, "delta")
    if config.params.get("asymptotic"):
        arma = asymptotic_arma(model, delta)
    else:
        arma = sampled_arma(model, delta)
    _emit(config, {"arma": arma.to_dict()})
    _write_json(config, "sample_arma.json", {"arma": arma.to_dict()})


def _run_alpha(config: ExperimentConfig) -> None:
    _require(config, "n")
    n = int(config.params["n"])
    if n < 0:
        raise ConfigError("--n must be nonnegative")
    fn = alpha_mod.alpha_by_recursion(n)
    result = {
        "n": n,
        "numerator": [int(c) for c in fn.numerator],
        "denominator_factorial": int(fn.denominator_factorial),
    }
    if n >= 1:
        roots = alpha_mod.xi_roots(n)
        result["xi_roots"] = [float(r) for r in roots]
        result["eta"] = [float(v) for v in alpha_mod.eta(roots)]
    _emit(config, result)
    _write_json(config, "alpha.json", result)


def _run_riemann(config: ExperimentConfig) -> None:
    if config.params.get("action") == "match":
        _require(config, "pq")
        pq = int(config.params["pq"])
        rules = optimal_rules(pq)
        result = {"p_minus_q": pq, "rules": rules}
        if pq in (2, 3):
            result["numeric_matching_h"] = match_h_numerically(pq)
        _emit(config, result)
        _write_json(config, "riemann_match.json", result)
        return
    _require(config, "model", "delta", "h")
    model = _load_model(config.params["model"])
    delta = _positive(config, "delta")
    arma = riemann_arma_coefficients(model, delta, float(config.params["h"]))
    _emit(config, {"riemann_arma": arma.to_dict()})
    _write_json(config, "riemann_arma.json", {"riemann_arma": arma.to_dict()})


def _run_recover(config: ExperimentConfig) -> None:
    _require(config, "model", "delta", "t", "paths")
    model = _load_model(config.params["model"])
    delta = _positive(config, "delta")
    t = _positive(config, "t")
    n_paths = int(_positive(config, "paths"))
    driver = driver_from_spec(config.params.get("driver") or "brownian")
    subgrid = config.params.get("subgrid")
    estimate = recovery_error_mc(
        model,
        delta,
        t,
        n_paths,
        driver=driver,
        seed=config.seed,
        workers=config.workers,
        subgrid_factor=int(subgrid) if subgrid else None,
    )
    result = {
        "mse": estimate.mean_sq_error,
        "stderr": estimate.mc_stderr,
        "n_paths": estimate.n_paths,
        "driver": driver_spec_string(driver),
    }
    if model.p == 2 and model.q <= 1:
        result["closed_form"] = carma2_error_closed_form(model, delta, t)
        result["closed_form_limit"] = carma2_error_closed_form(model, None, t)
    _emit(config, result)
    _write_json(config, "recover.json", result)


def _study_rules(model: CarmaModel):
    """Rule-candidate offsets from the matching analysis, possibly empty."""
    rules = optimal_rules(model.p - model.q)
    matching = rules["matching_h"]
    if isinstance(matching, str):
        return [], rules["invertible_matching_h"]
    return list(matching), rules["invertible_matching_h"]


def _format_float(x: float) -> str:
    return repr(float(x))


def _run_kernel_study(config: ExperimentConfig) -> None:
    if config.out is None:
        raise ConfigError("kernel-study writes CSVs and needs --out DIR")
    deltas = config.params.get("deltas")
    if deltas is None:
        deltas = list(_STUDY_DELTAS)
    if not deltas:
        raise ConfigError("kernel-study needs a nonempty delta list")
    directory = Path(config.out)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for tag, kwargs in _STUDY_MODELS:
        model = CarmaModel(**kwargs)
        candidates, invertible = _study_rules(model)
        for delta in deltas:
            if not delta > 0:
                raise ConfigError(f"delta must be positive, got {delta}")
            j = np.arange(_STUDY_POINTS)
            t_j = j * delta
            ghat = estimate_kernel(model, delta, t_j)
            columns = ["j", "t", "ghat"]
            offsets = list(_FIXED_RULES) + candidates
            names = [f"g_h{h:g}" for h in _FIXED_RULES]
            names += [f"g_hc{i+1}" for i in range(len(candidates))]
            columns += names
            meta = _header_lines(config)
            meta["model"] = json.dumps(model_to_dict(model), sort_keys=True)
            meta["model_tag"] = tag
            meta["delta"] = _format_float(delta)
            meta["h_fixed"] = json.dumps(list(_FIXED_RULES))
            meta["h_candidates"] = json.dumps([float(h) for h in candidates])
            meta["h_invertible"] = json.dumps(
                invertible if isinstance(invertible, str)
                else [float(h) for h in invertible]
            )
            study_name = f"kernel_study_{tag}_delta{delta:g}.csv"
            with open(directory / study_name, "w") as fh:
                for key, val in meta.items():
                    fh.write(f"# {key}: {val}\n")
                fh.write(",".join(columns) + "\n")
                for jj in range(_STUDY_POINTS):
                    row = [str(jj), _format_float(t_j[jj]), _format_float(ghat[jj])]
                    for h in offsets:
                        row.append(_format_float(kernel(model, t_j[jj] + h * delta)))
                    fh.write(",".join(row) + "\n")
            curve_name = f"kernel_curve_{tag}_delta{delta:g}.csv"
            t_dense = np.linspace(0.0, _STUDY_POINTS * delta, 321)
            g_dense = kernel(model, t_dense)
            with open(directory / curve_name, "w") as fh:
                for key, val in meta.items():
                    fh.write(f"# {key}: {val}\n")
                fh.write("t,g\n")
                for tt, gg in zip(t_dense, g_dense):
                    fh.write(f"{_format_float(tt)},{_format_float(gg)}\n")
            written += [str(directory / study_name), str(directory / curve_name)]
    _emit(config, {"written": written})


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON file with defaults for this command")
    parser.add_argument("--out", help="directory for output artifacts")
    parser.add_argument("--seed", type=int, help="master seed (default 0)")
    parser.add_argument(
        "--workers", type=int,
        help="worker processes (default: CARMAHF_WORKERS or 1)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carmahf",
        description="Sampled CARMA processes: simulation, ARMA structure, "
        "noise recovery, kernel estimation",
    )
    parser.add_argument("--version", action="version", version=f"carmahf {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a CARMA path to CSV")
    p.add_argument("--model", help="model JSON (inline or file path)")
    p.add_argument("--delta", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--driver", help="brownian | cpn:RATE | gamma:SHAPE:SCALE | vg:NU")
    p.add_argument("--init", choices=["stationary", "zero", "burnin"])
    p.add_argument("--burn-in", dest="burn_in", type=int)
    p.add_argument("--subgrid", type=int, help="subgrid factor for jump drivers")
    p.add_argument("--keep-states", action="store_true", default=None)
    _add_common(p)

    p = sub.add_parser("sample-arma", help="sampled ARMA(p,p-1) representation")
    p.add_argument("--model")
    p.add_argument("--delta", type=float)
    p.add_argument(
        "--asymptotic", action="store_true", default=None,
        help="use the small-delta closed form instead of exact factorization",
    )
    _add_common(p)

    p = sub.add_parser("alpha", help="alpha_n numerator polynomial and xi roots")
    p.add_argument("--n", type=int)
    _add_common(p)

    p = sub.add_parser("riemann", help="Riemann-sum ARMA structure and matching rules")
    p.add_argument(
        "action", nargs="?", choices=["coeffs", "match"], default="coeffs",
        help="coeffs (default): MA coefficients; match: optimal rules",
    )
    p.add_argument("--model")
    p.add_argument("--delta", type=float)
    p.add_argument("--h", type=float)
    p.add_argument("--pq", type=int, help="p minus q, for the match action")
    _add_common(p)

    p = sub.add_parser("recover", help="Monte Carlo noise-recovery error")
    p.add_argument("--model")
    p.add_argument("--delta", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--paths", type=int)
    p.add_argument("--driver")
    p.add_argument("--subgrid", type=int)
    _add_common(p)

    p = sub.add_parser(
        "kernel-study",
        help="kernel estimates vs offset kernel values for the study models",
    )
    p.add_argument(
        "--deltas", help="comma-separated grid steps (default 0.25,0.015625)"
    )
    _add_common(p)
    return parser


_PARAM_KEYS = {
    "simulate": ["model", "delta", "steps", "driver", "init", "burn_in",
                 "subgrid", "keep_states"],
    "sample-arma": ["model", "delta", "asymptotic"],
    "alpha": ["n"],
    "riemann": ["action", "model", "delta", "h", "pq"],
    "recover": ["model", "delta", "t", "paths", "driver", "subgrid"],
    "kernel-study": ["deltas"],
}


def _resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge command-line arguments over --config file values."""
    file_values = {}
    if getattr(args, "config", None):
        try:
            file_values = json.loads(Path(args.config).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(file_values, dict):
            raise ConfigError("config file must hold a JSON object")

    def pick(name, fallback=None):
        value = getattr(args, name, None)
        if value is None:
            value = file_values.get(name, fallback)
        return value

    params = {key: pick(key) for key in _PARAM_KEYS[args.command]}
    if args.command == "kernel-study" and isinstance(params.get("deltas"), str):
        try:
            params["deltas"] = [float(v) for v in params["deltas"].split(",") if v]
        except ValueError as exc:
            raise ConfigError(f"bad --deltas list: {exc}") from exc
    workers = pick("workers")
    if workers is None:
        env = os.environ.get("CARMAHF_WORKERS")
        if env is not None:
            try:
                workers = int(env)
            except ValueError as exc:
                raise ConfigError(f"CARMAHF_WORKERS must be an integer: {env!r}") from exc
        else:
            workers = 1
    if workers < 1:
        raise ConfigError(f"worker count must be at least 1, got {workers}")
    seed = pick("seed", 0)
    return ExperimentConfig(
        kind=args.command,
        params=params,
        seed=int(seed),
        out=pick("out"),
        workers=int(workers),
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _resolve_config(args)
        return run(config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except CarmaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
