"""Quantum evolution on the two-rotor integer-momentum lattice.

One kick period is the unitary

    F = exp(-i K (cos x1 + cos x2) / hbar)
        * exp(-i T (2 pi alpha1 m1 + 2 pi alpha2 m2 + k_p m1 m2) / hbar)

applied right-to-left: the free and interaction phases act together in the
momentum basis (they commute, both being diagonal in momentum), then the kick
phase acts in the position basis.  The basis change is a 2D discrete Fourier
transform with kernel exp(+i m x) from momentum to position, realized with
unitary ("ortho") FFTs so both representations stay normalized.

Momenta are integers (angles live on [0, 2 pi) and hbar = 1), truncated to a
finite window per axis.  The grid never resizes itself: if probability
reaches the outer band, evolution aborts so a run is either trustworthy or
absent, never silently degraded.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .classical import EnergySeries, MomentumHistogram
from .errors import GridTooSmallError, ValidationError
from .output import write_csv
from .params import TWO_PI, ModelParams

# Fraction of each momentum axis (per side) treated as the safety band.
EDGE_BAND_FRACTION = 0.05
EDGE_MASS_LIMIT = 1e-8


def _fft_workers() -> int:
    env = os.environ.get("MLKR_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


@dataclass(frozen=True)
class MomentumGrid:
    """Truncated integer-momentum lattice, n1 x n2 sites.

    Momentum values per axis are {-n/2, ..., n/2 - 1} stored in FFT order;
    conjugate positions are x_j = 2 pi j / n.
    """

    n1: int
    n2: int

    def __post_init__(self):
        for name, n in (("n1", self.n1), ("n2", self.n2)):
            if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
                raise ValidationError(f"{name} must be an integer, got {n!r}")
            if n < 8 or n % 2 != 0:
                raise ValidationError(f"{name} must be even and >= 8, got {n}")
        object.__setattr__(self, "n1", int(self.n1))
        object.__setattr__(self, "n2", int(self.n2))

    def momenta(self, axis: int) -> np.ndarray:
        n = self.n1 if axis == 1 else self.n2
        return sfft.fftfreq(n, d=1.0 / n)

    def positions(self, axis: int) -> np.ndarray:
        n = self.n1 if axis == 1 else self.n2
        return TWO_PI * np.arange(n) / n


@dataclass
class QuantumState:
    """Complex amplitudes over the momentum lattice, indexed (m1, m2) in FFT order."""

    grid: MomentumGrid
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape != (self.grid.n1, self.grid.n2):
            raise ValidationError(
                f"amplitude shape {amps.shape} does not match grid ({self.grid.n1}, {self.grid.n2})"
            )
        self.amps = amps

    def norm(self) -> float:
        return float(np.sum(self.amps.real ** 2 + self.amps.imag ** 2))

    def edge_mass(self) -> float:
        """Largest probability found in the outer 10% band of either axis."""
        prob = self.amps.real ** 2 + self.amps.imag ** 2
        return _edge_mass(prob, self.grid)

    def mean_energy(self) -> float:
        """Kinetic-energy expectation <m1^2 + m2^2> (hbar = 1 units)."""
        prob = self.amps.real ** 2 + self.amps.imag ** 2
        m1 = self.grid.momenta(1)
        m2 = self.grid.momenta(2)
        return float(prob.sum(axis=1) @ m1 ** 2 + prob.sum(axis=0) @ m2 ** 2)

    def to_csv(self, path) -> None:
        """Flat snapshot (m1, m2, Re, Im), sorted by momentum values."""
        m1 = self.grid.momenta(1)
        m2 = self.grid.momenta(2)
        o1 = np.argsort(m1)
        o2 = np.argsort(m2)
        a = self.amps[np.ix_(o1, o2)]
        mm1 = np.repeat(m1[o1], self.grid.n2)
        mm2 = np.tile(m2[o2], self.grid.n1)
        rows = zip(
            mm1.astype(int).tolist(),
            mm2.astype(int).tolist(),
            a.real.ravel().tolist(),
            a.imag.ravel().tolist(),
        )
        write_csv(path, ("m1", "m2", "Re", "Im"), rows)


def _edge_mass(prob: np.ndarray, grid: MomentumGrid) -> float:
    b1 = max(1, int(round(EDGE_BAND_FRACTION * grid.n1)))
    b2 = max(1, int(round(EDGE_BAND_FRACTION * grid.n2)))
    # FFT ordering puts the largest |m| around index n/2
    e1 = float(prob[grid.n1 // 2 - b1 : grid.n1 // 2 + b1, :].sum())
    e2 = float(prob[:, grid.n2 // 2 - b2 : grid.n2 // 2 + b2].sum())
    return max(e1, e2)


def initial_state(grid: MomentumGrid) -> QuantumState:
    """Momentum eigenstate: amplitude 1 at (m1, m2) = (0, 0)."""
    amps = np.zeros((grid.n1, grid.n2), dtype=complex)
    amps[0, 0] = 1.0
    return QuantumState(grid=grid, amps=amps)


class Propagator:
    """Precomputed phase tables for repeated kick cycles on one grid.

    Build once per (grid, params) pair and reuse across many steps; the
    convenience wrappers below construct one per call.
    """

    def __init__(self, grid: MomentumGrid, params: ModelParams):
        self.grid = grid
        self.workers = _fft_workers()
        m1 = grid.momenta(1)[:, None]
        m2 = grid.momenta(2)[None, :]
        x1 = grid.positions(1)[:, None]
        x2 = grid.positions(2)[None, :]
        free = TWO_PI * params.alpha1 * m1 + TWO_PI * params.alpha2 * m2 + params.k_p * m1 * m2
        self.momentum_phase = np.exp(-1j * params.T * free / params.hbar)
        self.kick_phase = np.exp(-1j * params.K * (np.cos(x1) + np.cos(x2)) / params.hbar)
        self.esq1 = np.asarray(m1[:, 0]) ** 2
        self.esq2 = np.asarray(m2[0, :]) ** 2

    def step(self, amps: np.ndarray) -> np.ndarray:
        amps = amps * self.momentum_phase
        pos = sfft.ifft2(amps, norm="ortho", overwrite_x=True, workers=self.workers)
        pos *= self.kick_phase
        return sfft.fft2(pos, norm="ortho", overwrite_x=True, workers=self.workers)

    def check_edges(self, amps: np.ndarray, t: int) -> None:
        prob = amps.real ** 2 + amps.imag ** 2
        mass = _edge_mass(prob, self.grid)
        if mass > EDGE_MASS_LIMIT:
            raise GridTooSmallError(
                f"edge band holds probability {mass:.3e} (> {EDGE_MASS_LIMIT:.0e}) "
                f"after kick {t}; grid {self.grid.n1}x{self.grid.n2} is too small for this run"
            )

    def energy(self, amps: np.ndarray) -> float:
        prob = amps.real ** 2 + amps.imag ** 2
        return float(prob.sum(axis=1) @ self.esq1 + prob.sum(axis=0) @ self.esq2)


def floquet_step(state: QuantumState, params: ModelParams) -> QuantumState:
    """Apply one kick period; raises GridTooSmallError on edge-band violation."""
    prop = Propagator(state.grid, params)
    amps = prop.step(state.amps)
    prop.check_edges(amps, 1)
    return QuantumState(grid=state.grid, amps=amps)


def evolve(
    state: QuantumState,
    params: ModelParams,
    n_kicks: int,
    record_every: int = 10,
):
    """Repeated kick cycles with energy recorded along the way.

    Returns ``(EnergySeries, final_state)`` with the kinetic-energy
    expectation at t = 0 and every ``record_every`` kicks (final kick always
    included).  The edge band is checked after every step.  Internal FFT
    parallelism (MLKR_THREADS) does not change results beyond floating-point
    reduction order (< 1e-12).
    """
    if n_kicks < 1:
        raise ValidationError(f"n_kicks must be >= 1, got {n_kicks}")
    if record_every < 1:
        raise ValidationError(f"record_every must be >= 1, got {record_every}")
    prop = Propagator(state.grid, params)
    amps = state.amps.copy()
    times = [0]
    values = [prop.energy(amps)]
    for t in range(1, n_kicks + 1):
        amps = prop.step(amps)
        prop.check_edges(amps, t)
        if t % record_every == 0 or t == n_kicks:
            times.append(t)
            values.append(prop.energy(amps))
    series = EnergySeries(np.array(times), np.array(values))
    return series, QuantumState(grid=state.grid, amps=amps)


def momentum_marginal(state: QuantumState, axis: int = 1) -> MomentumHistogram:
    """Marginal momentum distribution f(m) for one rotor as unit-width bins."""
    if axis not in (1, 2):
        raise ValidationError(f"axis must be 1 or 2, got {axis}")
    prob = state.amps.real ** 2 + state.amps.imag ** 2
    f = prob.sum(axis=2 - axis)  # sum over the other rotor
    m = state.grid.momenta(axis)
    order = np.argsort(m)
    m = m[order]
    f = f[order]
    total = f.sum()
    if total <= 0:
        raise ValidationError("state carries no probability")
    f = f / total
    edges = np.concatenate([m - 0.5, [m[-1] + 0.5]])
    return MomentumHistogram(bin_edges=edges, density=f)


def dense_floquet_matrix(grid: MomentumGrid, params: ModelParams) -> np.ndarray:
    """Explicit (n1*n2) x (n1*n2) one-period unitary, for small-grid checks.

    Uses the same unitary-DFT convention as the split-step engine: the
    momentum-to-position matrix has entries exp(+i m x) / sqrt(n).
    """
    if grid.n1 * grid.n2 > 4096:
        raise ValidationError("dense operator is intended for grids up to 64x64 sites")
    prop = Propagator(grid, params)

    def dft(n):
        j = np.arange(n)
        m = sfft.fftfreq(n, d=1.0 / n)
        return np.exp(2j * np.pi * np.outer(j, m) / n) / np.sqrt(n)

    U = np.kron(dft(grid.n1), dft(grid.n2))
    return (
        U.conj().T
        @ np.diag(prop.kick_phase.ravel())
        @ U
        @ np.diag(prop.momentum_phase.ravel())
    )
