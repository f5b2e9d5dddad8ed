"""Transport-exponent fitting and the (K, k_p) phase diagram.

The exponent beta in <E> ~ t^beta separates the dynamical regimes:

    I   classically regular, localized      Ks < 1 and beta below the
                                            localization threshold
    II  dynamical localization              Ks >= 1, beta below threshold
    III quantum subdiffusion                threshold <= beta < 0.8
    IV  (near-)normal quantum diffusion     beta >= 0.8

The localization threshold is 0.15: reported localized exponents cluster at
~0.0 and subdiffusion starts around 0.2, so the split sits in the gap.  The
boundaries are not sharp physically; the classifier is deterministic with
these documented thresholds.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .classical import EnergySeries
from .errors import GridTooSmallError, ValidationError
from .params import ModelParams, make_params
from .output import write_csv, write_json
from . import quantum

BETA_LOC = 0.15
BETA_DIFFUSIVE = 0.8
BETA_REPORT_RANGE = (-0.1, 2.2)

REGIMES = ("I", "II", "III", "IV")


@dataclass(frozen=True)
class BetaFit:
    """Power-law fit of an energy series over a time window.

    ``beta`` is clamped to the report range; ``out_of_range`` flags when the
    raw slope fell outside it.
    """

    beta: float
    intercept: float
    window: tuple
    r_squared: float
    out_of_range: bool = False


def default_fit_window(t_max: int) -> tuple:
    """Skip the early transient: [max(100, 0.1 * t_max), t_max]."""
    return (max(100, int(round(0.1 * t_max))), int(t_max))


def fit_beta(series: EnergySeries, window: tuple | None = None) -> BetaFit:
    """Least-squares slope of log E against log t over the window.

    Requires at least 10 recorded points in the window; every energy in the
    window must be positive (in practice only t = 0 is ever excluded).
    """
    if window is None:
        window = default_fit_window(int(series.times[-1]))
    t_min, t_max = window
    if t_min >= t_max:
        raise ValidationError(f"empty fit window {window}")
    mask = (series.times >= t_min) & (series.times <= t_max)
    if int(mask.sum()) < 10:
        raise ValidationError(
            f"need >= 10 points in fit window {window}, found {int(mask.sum())}"
        )
    t = series.times[mask].astype(float)
    e = series.values[mask]
    if np.any(e <= 0):
        raise ValidationError("non-positive energies in fit window; log-log fit undefined")
    lt = np.log(t)
    le = np.log(e)
    slope, intercept = np.polyfit(lt, le, 1)
    resid = le - (slope * lt + intercept)
    ss_tot = float(np.sum((le - le.mean()) ** 2))
    r_squared = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    lo, hi = BETA_REPORT_RANGE
    out = not (lo <= slope <= hi)
    return BetaFit(
        beta=float(min(max(slope, lo), hi)),
        intercept=float(intercept),
        window=(int(t_min), int(t_max)),
        r_squared=r_squared,
        out_of_range=out,
    )


def classify_regime(beta: float, params: ModelParams) -> str:
    """Regime label from a fitted exponent and the chaos parameter."""
    if not np.isfinite(beta):
        raise ValidationError(f"beta must be finite, got {beta}")
    if beta >= BETA_DIFFUSIVE:
        return "IV"
    if beta >= BETA_LOC:
        return "III"
    return "I" if params.Ks < 1.0 else "II"


@dataclass(frozen=True)
class PhaseDiagram:
    """Fitted exponents and regime labels over a (K, k_p) grid.

    ``valid`` is False for cells whose evolution violated the edge-mass
    safety band; such cells carry no exponent or regime.
    """

    K_values: np.ndarray
    kp_values: np.ndarray
    beta: np.ndarray
    regime: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        shape = (len(self.K_values), len(self.kp_values))
        for name in ("beta", "regime", "valid"):
            if getattr(self, name).shape != shape:
                raise ValidationError(f"{name} must have shape {shape}")

    def to_csv(self, path) -> None:
        rows = []
        for i, K in enumerate(self.K_values):
            for j, kp in enumerate(self.kp_values):
                rows.append(
                    (
                        float(K),
                        float(kp),
                        float(self.beta[i, j]),
                        str(self.regime[i, j]),
                        bool(self.valid[i, j]),
                    )
                )
        write_csv(path, ("K", "k_p", "beta", "regime", "valid"), rows)

    def metadata_sidecar(self, path, **extra) -> None:
        payload = {
            "K_values": [float(v) for v in self.K_values],
            "kp_values": [float(v) for v in self.kp_values],
            "beta_loc": BETA_LOC,
            "beta_diffusive": BETA_DIFFUSIVE,
            "cells": int(len(self.K_values) * len(self.kp_values)),
            "invalid_cells": int(np.count_nonzero(~self.valid)),
        }
        payload.update(extra)
        write_json(path, payload)


def _sweep_cell(K, kp, base: ModelParams, grid_size, n_kicks, record_every, window):
    params = make_params(
        K, kp, alpha1=base.alpha1, alpha2=base.alpha2, T=base.T, hbar=base.hbar
    )
    grid = quantum.MomentumGrid(grid_size, grid_size)
    try:
        series, _ = quantum.evolve(
            quantum.initial_state(grid), params, n_kicks, record_every=record_every
        )
        fit = fit_beta(series, window)
    except GridTooSmallError:
        return np.nan, "", False
    return fit.beta, classify_regime(fit.beta, params), True


def worker_count() -> int:
    """Bounded sweep parallelism; MLKR_THREADS caps it."""
    env = os.environ.get("MLKR_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def sweep_phase_diagram(
    K_range: Sequence[float] = (0.1, 10.0),
    kp_range: Sequence[float] = (0.1, 10.0),
    resolution: int = 32,
    n_kicks: int = 10000,
    grid_size: int = 256,
    record_every: int = 10,
    base_params: ModelParams | None = None,
    fit_window: tuple | None = None,
) -> PhaseDiagram:
    """Fit beta on a log-spaced (K, k_p) grid and classify each cell.

    Cells run as independent jobs on a bounded worker pool; results are
    assembled in deterministic cell order regardless of completion order.
    Edge-mass violations mark the cell invalid instead of filling it.
    """
    if resolution < 2:
        raise ValidationError(f"resolution must be >= 2, got {resolution}")
    if min(K_range) <= 0 or min(kp_range) <= 0:
        raise ValidationError("sweep ranges must be positive")
    base = base_params if base_params is not None else make_params(1.0, 1.0)
    K_values = np.geomspace(K_range[0], K_range[1], resolution)
    kp_values = np.geomspace(kp_range[0], kp_range[1], resolution)
    beta = np.full((resolution, resolution), np.nan)
    regime = np.full((resolution, resolution), "", dtype=object)
    valid = np.zeros((resolution, resolution), dtype=bool)
    cells = [(i, j) for i in range(resolution) for j in range(resolution)]

    def job(ij):
        i, j = ij
        return _sweep_cell(
            float(K_values[i]), float(kp_values[j]), base, grid_size, n_kicks,
            record_every, fit_window,
        )

    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        results = list(pool.map(job, cells))
    for (i, j), (b, r, ok) in zip(cells, results):
        beta[i, j] = b
        regime[i, j] = r
        valid[i, j] = ok
    return PhaseDiagram(
        K_values=K_values, kp_values=kp_values, beta=beta, regime=regime, valid=valid
    )
