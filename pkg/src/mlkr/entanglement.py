"""Entanglement between the two rotors: entropy, effective dimension, RMT rate.

The bipartite amplitude grid is an n1 x n2 matrix whose squared singular
values are the eigenvalues of the reduced density matrix of either rotor.
Entropies are reported in nats.

The random-matrix estimate of the instantaneous entanglement uses effective
subsystem dimensions from inverse participation ratios of the momentum
marginals, with the standard random-state average

    S_rmt = ln(N1_eff) - N1_eff / (2 N2_eff),        N1_eff <= N2_eff,

whose equal-dimension limit is ln(N) - 1/2 and whose large-ratio limit is
ln(N1_eff).  The marginal-probability reading of the participation ratio
reduces to the pure-subsystem formula for a product state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .output import write_csv
from .params import ModelParams
from . import quantum

# Singular values at or below the decomposition noise floor count as zero.
SINGULAR_VALUE_FLOOR = 1e-14


@dataclass(frozen=True)
class SchmidtSpectrum:
    """Squared Schmidt coefficients, descending; sums to 1 for a normalized state."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1 or values.size == 0:
            raise ValidationError("spectrum must be a non-empty 1-d array")
        if np.any(values < -1e-12):
            raise ValidationError("squared Schmidt coefficients must be non-negative")
        if np.any(np.diff(values) > 1e-12):
            raise ValidationError("spectrum must be sorted in descending order")
        total = float(values.sum())
        if abs(total - 1.0) > 1e-10:
            raise ValidationError(f"spectrum sums to {total!r}, not 1")
        values = np.clip(values, 0.0, None)
        values.flags.writeable = False
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class EntanglementSeries:
    """Entropy, RMT estimate, and effective dimensions at recorded kick counts."""

    times: np.ndarray
    S: np.ndarray
    S_rmt: np.ndarray
    N1_eff: np.ndarray
    N2_eff: np.ndarray
    max_entropy: float

    def __post_init__(self):
        if not (self.times.shape == self.S.shape == self.S_rmt.shape
                == self.N1_eff.shape == self.N2_eff.shape):
            raise ValidationError("series columns must have equal shapes")
        if np.any(self.S < -1e-12) or np.any(self.S > self.max_entropy + 1e-9):
            raise ValidationError("entropy outside [0, ln(min(n1, n2))]")

    def to_csv(self, path) -> None:
        rows = zip(
            self.times.tolist(),
            self.S.tolist(),
            self.S_rmt.tolist(),
            self.N1_eff.tolist(),
            self.N2_eff.tolist(),
        )
        write_csv(path, ("t", "S", "S_rmt", "N1_eff", "N2_eff"), rows)


def schmidt_spectrum(state: quantum.QuantumState) -> SchmidtSpectrum:
    """Squared singular values of the amplitude matrix (reduced-density eigenvalues)."""
    s = np.linalg.svd(state.amps, compute_uv=False)
    lam = np.sort(s ** 2)[::-1]
    total = lam.sum()
    if not 0.999 < total < 1.001:
        raise ValidationError(f"state norm {total!r} too far from 1 for a Schmidt spectrum")
    return SchmidtSpectrum(values=lam / total)


def von_neumann_entropy(spectrum: SchmidtSpectrum) -> float:
    """S = -sum(lambda * ln(lambda)) in nats, with 0 ln 0 = 0.

    Coefficients from singular values at or below the numerical noise floor
    are treated as exact zeros.
    """
    lam = spectrum.values
    lam = lam[lam > SINGULAR_VALUE_FLOOR ** 2]
    if lam.size == 0:
        return 0.0
    return float(-np.sum(lam * np.log(lam)))


def effective_dimension(state: quantum.QuantumState, subsystem: int = 1) -> float:
    """Participation-based effective Hilbert dimension of one rotor.

    The inverse participation ratio 1 / sum_i P(i)^2 of the momentum marginal
    P of the chosen rotor counts the momentum sites it effectively occupies:
    1 for the initial delta state, M for a uniform marginal over M sites.
    """
    if subsystem not in (1, 2):
        raise ValidationError(f"subsystem must be 1 or 2, got {subsystem}")
    prob = state.amps.real ** 2 + state.amps.imag ** 2
    marginal = prob.sum(axis=2 - subsystem)
    total = marginal.sum()
    if total <= 0:
        raise ValidationError("state carries no probability")
    marginal = marginal / total
    return float(1.0 / np.sum(marginal ** 2))


def rmt_entropy_estimate(N1_eff: float, N2_eff: float) -> float:
    """Random-state entanglement entropy for effective dimensions (N1_eff, N2_eff).

    Dimensions are swapped if needed so the correction uses the smaller one;
    the result is clamped at zero (an effective dimension of 1 is unentangled).
    """
    if N1_eff < 1 or N2_eff < 1:
        raise ValidationError("effective dimensions must be >= 1")
    small, large = sorted((float(N1_eff), float(N2_eff)))
    return max(0.0, float(np.log(small) - small / (2.0 * large)))


def entanglement_series(
    params: ModelParams,
    n_kicks: int = 500,
    record_every: int = 5,
    grid: quantum.MomentumGrid | None = None,
) -> EntanglementSeries:
    """Entropy production from the unentangled momentum origin state.

    Evolves with the quantum engine and, at every record time, computes the
    von Neumann entropy from the Schmidt spectrum and the RMT estimate from
    the instantaneous effective dimensions.  Snapshots are analyzed on
    copies; evolution state is never shared.
    """
    if n_kicks < 1:
        raise ValidationError(f"n_kicks must be >= 1, got {n_kicks}")
    if record_every < 1:
        raise ValidationError(f"record_every must be >= 1, got {record_every}")
    if grid is None:
        grid = quantum.MomentumGrid(512, 512)
    state = quantum.initial_state(grid)
    prop = quantum.Propagator(grid, params)
    amps = state.amps.copy()
    times, S, S_rmt, N1, N2 = [], [], [], [], []

    def record(t, a):
        snap = quantum.QuantumState(grid=grid, amps=a.copy())
        times.append(t)
        S.append(von_neumann_entropy(schmidt_spectrum(snap)))
        N1.append(effective_dimension(snap, 1))
        N2.append(effective_dimension(snap, 2))
        S_rmt.append(rmt_entropy_estimate(N1[-1], N2[-1]))

    record(0, amps)
    for t in range(1, n_kicks + 1):
        amps = prop.step(amps)
        prop.check_edges(amps, t)
        if t % record_every == 0 or t == n_kicks:
            record(t, amps)
    return EntanglementSeries(
        times=np.array(times),
        S=np.array(S),
        S_rmt=np.array(S_rmt),
        N1_eff=np.array(N1),
        N2_eff=np.array(N2),
        max_entropy=float(np.log(min(grid.n1, grid.n2))),
    )
