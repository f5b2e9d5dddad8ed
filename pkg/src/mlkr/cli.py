"""Command-line surface: config parsing, run dispatch, and artifact emission.

One subcommand per mode (classical, poincare, lyapunov, quantum, sweep,
entangle).  A JSON config file may supply any key; command-line flags
override file values; the effective config is echoed into the run manifest.
Config parsing is strict: unknown keys are rejected rather than ignored.

Each run writes its CSV artifacts to ``<output_dir>``, staging them with a
``.partial`` suffix until the run completes, then writes ``manifest.json``
(config echo, wall time, library version, invariant summary).  A directory
holding a manifest is a completed run and is never overwritten.  On failure
a machine-readable ``error.json`` is written and the exit status is nonzero.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .classical import evolve_ensemble, momentum_histogram, poincare_section
from .entanglement import entanglement_series
from .errors import MlkrError, ValidationError
from .lyapunov import analytic_lyapunov_estimate, lyapunov_jacobian_product, lyapunov_tangent
from .output import publish, write_csv, write_json
from .params import ModelParams, make_params, uniform_angle_ensemble
from .quantum import MomentumGrid, evolve, initial_state, momentum_marginal
from .transport import default_fit_window, fit_beta, sweep_phase_diagram

MODES = ("classical", "poincare", "lyapunov", "quantum", "sweep", "entangle")

_COMMON_KEYS = {
    "mode": str,
    "K": float,
    "k_p": float,
    "alpha1": float,
    "alpha2": float,
    "T": float,
    "hbar": float,
    "seed": int,
    "output_dir": str,
    "n_kicks": int,
    "record_every": int,
}
_MODE_KEYS = {
    "classical": {"ensemble": int, "bins": int},
    "poincare": {"ensemble": int},
    "lyapunov": {"n_samples": int, "renorm_every": int, "Ks_values": list},
    "quantum": {"grid": int, "save_state": bool},
    "sweep": {"resolution": int, "K_range": list, "kp_range": list, "grid": int},
    "entangle": {"grid": int},
}
_REQUIRED = {
    "classical": ("ensemble",),
    "poincare": ("ensemble",),
    "lyapunov": (),
    "quantum": ("grid",),
    "sweep": (),
    "entangle": ("grid",),
}
_ALWAYS_REQUIRED = ("mode", "K", "k_p", "n_kicks")
_RECORD_DEFAULTS = {
    "classical": 10,
    "poincare": 1,
    "lyapunov": 1,
    "quantum": 10,
    "sweep": 10,
    "entangle": 5,
}


@dataclass
class RunConfig:
    """Validated run description; every field is ready for the engines."""

    params: ModelParams
    mode: str
    n_kicks: int
    seed: int = 0
    output_dir: str = "."
    record_every: int = 1
    ensemble: int | None = None
    bins: int = 201
    grid: int | None = None
    save_state: bool = False
    n_samples: int = 100
    renorm_every: int = 10
    Ks_values: list = field(default_factory=list)
    resolution: int = 32
    K_range: list = field(default_factory=lambda: [0.1, 10.0])
    kp_range: list = field(default_factory=lambda: [0.1, 10.0])

    def echo(self) -> dict:
        """Plain-dict view of the effective configuration for the manifest."""
        out = {
            "mode": self.mode,
            "K": self.params.K,
            "k_p": self.params.k_p,
            "alpha1": self.params.alpha1,
            "alpha2": self.params.alpha2,
            "T": self.params.T,
            "hbar": self.params.hbar,
            "seed": self.seed,
            "output_dir": self.output_dir,
            "n_kicks": self.n_kicks,
            "record_every": self.record_every,
        }
        if self.mode in ("classical", "poincare"):
            out["ensemble"] = self.ensemble
        if self.mode == "classical":
            out["bins"] = self.bins
        if self.mode in ("quantum", "sweep", "entangle"):
            out["grid"] = self.grid
        if self.mode == "quantum":
            out["save_state"] = self.save_state
        if self.mode == "lyapunov":
            out["n_samples"] = self.n_samples
            out["renorm_every"] = self.renorm_every
            out["Ks_values"] = list(self.Ks_values)
        if self.mode == "sweep":
            out["resolution"] = self.resolution
            out["K_range"] = list(self.K_range)
            out["kp_range"] = list(self.kp_range)
        return out


def _coerce(key: str, value, expected_type):
    if expected_type is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ValidationError(f"{key}: expected a number, got {value!r}")
        return float(value)
    if expected_type is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"{key}: expected an integer, got {value!r}")
        return int(value)
    if expected_type is bool:
        if not isinstance(value, bool):
            raise ValidationError(f"{key}: expected true/false, got {value!r}")
        return value
    if expected_type is str:
        if not isinstance(value, str):
            raise ValidationError(f"{key}: expected a string, got {value!r}")
        return value
    if expected_type is list:
        if not isinstance(value, (list, tuple)):
            raise ValidationError(f"{key}: expected a list, got {value!r}")
        return list(value)
    raise AssertionError(f"unhandled type for {key}")


def parse_config(data: dict) -> RunConfig:
    """Validate a flat config mapping into a :class:`RunConfig`.

    Strict mode: every key must be known for the requested mode; offenders
    are listed.  Missing required fields and type mismatches name the field.
    """
    if not isinstance(data, dict):
        raise ValidationError("config must be a JSON object")
    mode = data.get("mode")
    if mode is None:
        raise ValidationError("missing required field: mode")
    if mode not in MODES:
        raise ValidationError(f"mode: expected one of {MODES}, got {mode!r}")
    allowed = dict(_COMMON_KEYS)
    allowed.update(_MODE_KEYS[mode])
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ValidationError(f"unknown config keys for mode {mode!r}: {unknown}")
    for key in _ALWAYS_REQUIRED + _REQUIRED[mode]:
        if key not in data:
            raise ValidationError(f"missing required field: {key}")
    clean = {k: _coerce(k, v, allowed[k]) for k, v in data.items()}

    params = make_params(
        clean["K"],
        clean["k_p"],
        alpha1=clean.get("alpha1", ModelParams.__dataclass_fields__["alpha1"].default),
        alpha2=clean.get("alpha2", ModelParams.__dataclass_fields__["alpha2"].default),
        T=clean.get("T", 1.0),
        hbar=clean.get("hbar", 1.0),
    )
    cfg = RunConfig(
        params=params,
        mode=mode,
        n_kicks=clean["n_kicks"],
        seed=clean.get("seed", 0),
        output_dir=clean.get("output_dir", "."),
        record_every=clean.get("record_every", _RECORD_DEFAULTS[mode]),
        ensemble=clean.get("ensemble"),
        bins=clean.get("bins", 201),
        grid=clean.get("grid"),
        save_state=clean.get("save_state", False),
        n_samples=clean.get("n_samples", 100),
        renorm_every=clean.get("renorm_every", 10),
        Ks_values=clean.get("Ks_values", []),
        resolution=clean.get("resolution", 32),
        K_range=clean.get("K_range", [0.1, 10.0]),
        kp_range=clean.get("kp_range", [0.1, 10.0]),
    )
    if cfg.n_kicks < 1:
        raise ValidationError(f"n_kicks: must be >= 1, got {cfg.n_kicks}")
    if cfg.record_every < 1:
        raise ValidationError(f"record_every: must be >= 1, got {cfg.record_every}")
    if cfg.mode in ("classical", "poincare") and cfg.ensemble < 1:
        raise ValidationError(f"ensemble: must be >= 1, got {cfg.ensemble}")
    if cfg.grid is not None:
        try:
            MomentumGrid(cfg.grid, cfg.grid)
        except ValidationError as exc:
            raise ValidationError(f"grid: {exc}") from None
    for key in ("Ks_values", "K_range", "kp_range"):
        values = getattr(cfg, key)
        if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
            raise ValidationError(f"{key}: entries must be numbers")
        setattr(cfg, key, [float(v) for v in values])
    return cfg


def load_config(path: str | None, overrides: dict) -> RunConfig:
    """Merge a JSON config file (if given) with flag overrides, then validate."""
    data: dict = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ValidationError(f"cannot read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ValidationError("config file must hold a JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return parse_config(data)


# ---------------------------------------------------------------------------
# run dispatch


def _run_classical(cfg: RunConfig, out):
    ens = uniform_angle_ensemble(cfg.ensemble, cfg.seed)
    series, final = evolve_ensemble(ens, cfg.params, cfg.n_kicks, cfg.record_every)
    series.to_csv(out("energy.csv"))
    momentum_histogram(final, axis=1, bins=cfg.bins).to_csv(out("histogram_p1.csv"))
    momentum_histogram(final, axis=2, bins=cfg.bins).to_csv(out("histogram_p2.csv"))
    return {
        "final_mean_energy": float(series.values[-1]),
        "max_abs_p": float(max(np.abs(final.p1).max(), np.abs(final.p2).max())),
    }


def _run_poincare(cfg: RunConfig, out):
    ens = uniform_angle_ensemble(cfg.ensemble, cfg.seed)
    section = poincare_section(ens, cfg.params, cfg.n_kicks)
    section.to_csv(out("section.csv"))
    return {"points": int(section.t.size), "kicks": section.kicks}


def _run_lyapunov(cfg: RunConfig, out):
    ks_values = cfg.Ks_values or [cfg.params.Ks]
    rows = []
    for Ks in ks_values:
        if Ks <= 0:
            raise ValidationError(f"Ks_values: entries must be > 0, got {Ks}")
        p = make_params(
            K=Ks, k_p=1.0, alpha1=cfg.params.alpha1, alpha2=cfg.params.alpha2,
            T=cfg.params.T, hbar=cfg.params.hbar,
        )
        tangent = lyapunov_tangent(
            p, n_kicks=cfg.n_kicks, n_samples=cfg.n_samples,
            renorm_every=cfg.renorm_every, seed=cfg.seed,
        )
        jprod = lyapunov_jacobian_product(
            p, n_kicks=cfg.n_kicks, n_samples=cfg.n_samples, seed=cfg.seed,
        )
        rows.append((Ks, tangent.value, jprod.value, analytic_lyapunov_estimate(p), tangent.stderr))
    write_csv(
        out("lyapunov.csv"),
        ("Ks", "lambda_map", "lambda_jprod", "lambda_analytic", "stderr"),
        rows,
    )
    return {"points": len(rows)}


def _run_quantum(cfg: RunConfig, out):
    grid = MomentumGrid(cfg.grid, cfg.grid)
    series, final = evolve(initial_state(grid), cfg.params, cfg.n_kicks, cfg.record_every)
    series.to_csv(out("energy.csv"))
    momentum_marginal(final, axis=1).to_csv(out("marginal_p1.csv"))
    momentum_marginal(final, axis=2).to_csv(out("marginal_p2.csv"))
    if cfg.save_state:
        final.to_csv(out("state.csv"))
    fit = fit_beta(series, default_fit_window(cfg.n_kicks))
    return {
        "beta": fit.beta,
        "beta_window": list(fit.window),
        "beta_r_squared": fit.r_squared,
        "norm_drift": abs(final.norm() - 1.0),
        "edge_mass": final.edge_mass(),
    }


def _run_sweep(cfg: RunConfig, out):
    diagram = sweep_phase_diagram(
        K_range=cfg.K_range,
        kp_range=cfg.kp_range,
        resolution=cfg.resolution,
        n_kicks=cfg.n_kicks,
        grid_size=cfg.grid if cfg.grid else 256,
        record_every=cfg.record_every,
        base_params=cfg.params,
    )
    diagram.to_csv(out("phase_diagram.csv"))
    diagram.metadata_sidecar(
        out("phase_diagram.meta.json"),
        n_kicks=cfg.n_kicks,
        grid=cfg.grid if cfg.grid else 256,
        version=__version__,
    )
    return {"invalid_cells": int(np.count_nonzero(~diagram.valid))}


def _run_entangle(cfg: RunConfig, out):
    grid = MomentumGrid(cfg.grid, cfg.grid)
    series = entanglement_series(
        cfg.params, n_kicks=cfg.n_kicks, record_every=cfg.record_every, grid=grid
    )
    series.to_csv(out("entanglement.csv"))
    return {
        "final_entropy": float(series.S[-1]),
        "max_entropy_bound": series.max_entropy,
    }


_RUNNERS = {
    "classical": _run_classical,
    "poincare": _run_poincare,
    "lyapunov": _run_lyapunov,
    "quantum": _run_quantum,
    "sweep": _run_sweep,
    "entangle": _run_entangle,
}


def run(cfg: RunConfig) -> dict:
    """Execute a validated config; returns {artifact name: final path}.

    Artifacts are staged as ``.partial`` files and promoted only when the
    whole run has succeeded, so a completed directory is always consistent.
    """
    os.makedirs(cfg.output_dir, exist_ok=True)
    manifest_path = os.path.join(cfg.output_dir, "manifest.json")
    if os.path.exists(manifest_path):
        raise ValidationError(
            f"output directory {cfg.output_dir!r} already holds a completed run; "
            "refusing to overwrite"
        )
    staged = []

    def out(name: str) -> str:
        path = os.path.join(cfg.output_dir, name + ".partial")
        staged.append(path)
        return path

    start = time.perf_counter()
    invariants = _RUNNERS[cfg.mode](cfg, out)
    wall = time.perf_counter() - start
    written = {}
    for partial in staged:
        final = publish(partial)
        written[os.path.basename(final)] = final
    write_json(
        manifest_path,
        {
            "config": cfg.echo(),
            "version": __version__,
            "wall_time_s": wall,
            "invariants": invariants,
            "artifacts": sorted(written),
        },
    )
    written["manifest.json"] = manifest_path
    return written


# ---------------------------------------------------------------------------
# argument parsing


def _add_common_flags(sub):
    sub.add_argument("--config", help="JSON config file; flags override its values")
    sub.add_argument("--K", type=float, dest="K")
    sub.add_argument("--kp", type=float, dest="k_p")
    sub.add_argument("--alpha1", type=float)
    sub.add_argument("--alpha2", type=float)
    sub.add_argument("--T", type=float, dest="T")
    sub.add_argument("--hbar", type=float)
    sub.add_argument("--seed", type=int)
    sub.add_argument("--output-dir", dest="output_dir")
    sub.add_argument("--n-kicks", type=int, dest="n_kicks")
    sub.add_argument("--record-every", type=int, dest="record_every")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlkr",
        description="Momentum-coupled two-rotor kicked-map simulations",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        sub = subs.add_parser(mode)
        _add_common_flags(sub)
        if mode in ("classical", "poincare"):
            sub.add_argument("--ensemble", type=int)
        if mode == "classical":
            sub.add_argument("--bins", type=int)
        if mode in ("quantum", "sweep", "entangle"):
            sub.add_argument("--grid", type=int)
        if mode == "quantum":
            sub.add_argument("--save-state", action="store_true", dest="save_state", default=None)
        if mode == "lyapunov":
            sub.add_argument("--n-samples", type=int, dest="n_samples")
            sub.add_argument("--renorm-every", type=int, dest="renorm_every")
            sub.add_argument(
                "--ks-values", dest="Ks_values", type=float, nargs="+",
                help="scaled chaos parameters to sweep",
            )
        if mode == "sweep":
            sub.add_argument("--resolution", type=int)
            sub.add_argument("--k-range", dest="K_range", type=float, nargs=2)
            sub.add_argument("--kp-range", dest="kp_range", type=float, nargs=2)
    return parser


def _error_record(cfg_dir: str | None, exc: Exception) -> None:
    record = {"error": type(exc).__name__, "message": str(exc)}
    if cfg_dir:
        try:
            os.makedirs(cfg_dir, exist_ok=True)
            write_json(os.path.join(cfg_dir, "error.json"), record)
            return
        except OSError:
            pass
    json.dump(record, sys.stderr)
    sys.stderr.write("\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    config_path = args.pop("config", None)
    mode = args.pop("mode")
    overrides = {k: v for k, v in args.items() if v is not None}
    overrides["mode"] = mode
    out_dir = overrides.get("output_dir")
    try:
        cfg = load_config(config_path, overrides)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        _error_record(out_dir, exc)
        return 2
    try:
        written = run(cfg)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        _error_record(cfg.output_dir, exc)
        return 2
    except MlkrError as exc:
        print(f"error: {exc}", file=sys.stderr)
        _error_record(cfg.output_dir, exc)
        return 3
    for name in sorted(written):
        print(written[name])
    return 0


if __name__ == "__main__":
    sys.exit(main())
