"""Classical stroboscopic map: iteration, energy series, sections, histograms.

One kick cycle updates momenta first, then drifts the angles with the *new*
momenta (this ordering is normative), with the couplings crossed between the
rotors:

    p1 <- p1 + K sin(x1)
    p2 <- p2 + K sin(x2)
    x1 <- (x1 + 2 pi alpha1 + k_p p2) mod 2 pi
    x2 <- (x2 + 2 pi alpha2 + k_p p1) mod 2 pi

In coupling-scaled coordinates P_i = k_p p_i the same map depends only on
Ks = K k_p, which is what makes Ks the single chaos parameter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError, ValidationError
from .output import write_csv
from .params import (
    TWO_PI,
    ClassicalEnsemble,
    ClassicalState,
    ModelParams,
    ScaledState,
    ensemble_from_arrays,
    reduce_angle,
)

# Momentum magnitude beyond which a run is considered numerically divergent.
# Far above any physical excursion at the parameters studied here; exists to
# catch NaN cascades early.
DEFAULT_P_BOUND = 1e12


@dataclass(frozen=True)
class EnergySeries:
    """Mean energy <p1^2 + p2^2> sampled at integer kick counts."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=int)
        values = np.asarray(self.values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape:
            raise ValidationError("times and values must be 1-d arrays of equal length")
        if times.size and np.any(np.diff(times) <= 0):
            raise ValidationError("times must be strictly increasing")
        if np.any(values < 0):
            raise ValidationError("energies must be non-negative")
        times.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "values", values)

    def to_csv(self, path) -> None:
        write_csv(path, ("t", "E_mean"), zip(self.times.tolist(), self.values.tolist()))


@dataclass(frozen=True)
class SectionData:
    """Stroboscopic (x1, p1) section points tagged by trajectory index."""

    traj_id: np.ndarray
    t: np.ndarray
    x1: np.ndarray
    p1: np.ndarray
    kicks: int

    def __post_init__(self):
        if not (self.traj_id.shape == self.t.shape == self.x1.shape == self.p1.shape):
            raise ValidationError("section columns must have equal shapes")
        if self.x1.size and (self.x1.min() < 0 or self.x1.max() >= TWO_PI):
            raise ValidationError("section angles must lie in [0, 2*pi)")

    def to_csv(self, path) -> None:
        rows = zip(
            self.traj_id.tolist(), self.t.tolist(), self.x1.tolist(), self.p1.tolist()
        )
        write_csv(path, ("traj_id", "t", "x1", "p1"), rows)


@dataclass(frozen=True)
class MomentumHistogram:
    """Normalized momentum density: sum(density * bin_width) == 1."""

    bin_edges: np.ndarray
    density: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.bin_edges, dtype=float)
        dens = np.asarray(self.density, dtype=float)
        if edges.ndim != 1 or dens.ndim != 1 or edges.size != dens.size + 1:
            raise ValidationError("need len(bin_edges) == len(density) + 1")
        widths = np.diff(edges)
        if np.any(widths <= 0):
            raise ValidationError("bin edges must be strictly increasing")
        total = float(np.sum(dens * widths))
        if abs(total - 1.0) > 1e-12:
            raise ValidationError(f"histogram integrates to {total!r}, not 1")
        edges.flags.writeable = False
        dens.flags.writeable = False
        object.__setattr__(self, "bin_edges", edges)
        object.__setattr__(self, "density", dens)

    def variance(self) -> float:
        """Second central moment of the density using bin midpoints."""
        mids = 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])
        w = self.density * np.diff(self.bin_edges)
        mean = float(np.sum(mids * w))
        return float(np.sum((mids - mean) ** 2 * w))

    def to_csv(self, path) -> None:
        rows = zip(
            self.bin_edges[:-1].tolist(), self.bin_edges[1:].tolist(), self.density.tolist()
        )
        write_csv(path, ("p_lo", "p_hi", "density"), rows)


def _advance(x1, x2, p1, p2, params: ModelParams) -> None:
    """One kick cycle, in place, on scalar or array phase coordinates."""
    p1 += params.K * np.sin(x1)
    p2 += params.K * np.sin(x2)
    x1 += TWO_PI * params.alpha1 + params.k_p * p2
    x2 += TWO_PI * params.alpha2 + params.k_p * p1
    np.mod(x1, TWO_PI, out=x1)
    np.mod(x2, TWO_PI, out=x2)
    # mod can round a tiny negative input up to the full period
    np.copyto(x1, 0.0, where=x1 >= TWO_PI)
    np.copyto(x2, 0.0, where=x2 >= TWO_PI)


def map_step(state: ClassicalState, params: ModelParams) -> ClassicalState:
    """Apply one kick cycle to a single phase point."""
    x1 = np.array(state.x1)
    x2 = np.array(state.x2)
    p1 = np.array(state.p1)
    p2 = np.array(state.p2)
    _advance(x1, x2, p1, p2, params)
    return ClassicalState(float(x1), float(x2), float(p1), float(p2))


def scaled_map_step(state: ScaledState, params: ModelParams) -> ScaledState:
    """One kick cycle in coupling-scaled momenta; depends on params only via Ks.

    Floating-point association matches :func:`map_step`, so for couplings that
    scale exactly (powers of two, e.g. the reference values 1, 2, 256) the
    angle sequences of the scaled and unscaled maps agree bitwise; other
    couplings inject sub-ulp differences that chaos amplifies over long runs.
    """
    Ks = params.Ks
    P1 = state.P1 + Ks * np.sin(state.x1)
    P2 = state.P2 + Ks * np.sin(state.x2)
    x1 = reduce_angle(state.x1 + (TWO_PI * params.alpha1 + P2))
    x2 = reduce_angle(state.x2 + (TWO_PI * params.alpha2 + P1))
    return ScaledState(float(x1), float(x2), float(P1), float(P2))


def quasilinear_D0(params: ModelParams) -> float:
    """Random-phase (quasi-linear) estimate of the energy diffusion rate: K^2."""
    return params.K ** 2


def _check_bound(p1, p2, t, p_bound) -> None:
    m = max(float(np.max(np.abs(p1))), float(np.max(np.abs(p2))))
    if not np.isfinite(m) or m > p_bound:
        raise DivergenceError(
            f"momentum magnitude {m:.3e} exceeded bound {p_bound:.3e} at kick {t}"
        )


def evolve_ensemble(
    ens: ClassicalEnsemble,
    params: ModelParams,
    n_kicks: int,
    record_every: int = 1,
    p_bound: float = DEFAULT_P_BOUND,
):
    """Iterate the map over the whole ensemble.

    Returns ``(EnergySeries, final_ensemble)``.  The series holds the ensemble
    mean of p1^2 + p2^2 at t = 0 and every ``record_every`` kicks (the final
    kick is always included).  Members evolve independently; the vectorized
    update is deterministic for a given ensemble.
    """
    if n_kicks < 1:
        raise ValidationError(f"n_kicks must be >= 1, got {n_kicks}")
    if record_every < 1:
        raise ValidationError(f"record_every must be >= 1, got {record_every}")
    x1 = ens.x1.copy()
    x2 = ens.x2.copy()
    p1 = ens.p1.copy()
    p2 = ens.p2.copy()
    times = [0]
    values = [float(np.mean(p1 ** 2 + p2 ** 2))]
    for t in range(1, n_kicks + 1):
        _advance(x1, x2, p1, p2, params)
        _check_bound(p1, p2, t, p_bound)
        if t % record_every == 0 or t == n_kicks:
            times.append(t)
            values.append(float(np.mean(p1 ** 2 + p2 ** 2)))
    series = EnergySeries(np.array(times), np.array(values))
    final = ensemble_from_arrays(x1, x2, p1, p2, seed=ens.seed)
    return series, final


def poincare_section(
    ens: ClassicalEnsemble,
    params: ModelParams,
    n_kicks: int,
    p_bound: float = DEFAULT_P_BOUND,
) -> SectionData:
    """Record (x1, p1) after every kick for each trajectory.

    Intended for small ensembles (tens of trajectories); any size is accepted.
    """
    if n_kicks < 1:
        raise ValidationError(f"n_kicks must be >= 1, got {n_kicks}")
    n = len(ens)
    x1 = ens.x1.copy()
    x2 = ens.x2.copy()
    p1 = ens.p1.copy()
    p2 = ens.p2.copy()
    xs = np.empty((n_kicks, n))
    ps = np.empty((n_kicks, n))
    for t in range(1, n_kicks + 1):
        _advance(x1, x2, p1, p2, params)
        _check_bound(p1, p2, t, p_bound)
        xs[t - 1] = x1
        ps[t - 1] = p1
    # trajectory-major ordering: all kicks of trajectory 0, then 1, ...
    traj = np.repeat(np.arange(n), n_kicks)
    tcol = np.tile(np.arange(1, n_kicks + 1), n)
    return SectionData(
        traj_id=traj, t=tcol, x1=xs.T.ravel(), p1=ps.T.ravel(), kicks=n_kicks
    )


def momentum_histogram(ens: ClassicalEnsemble, axis: int = 1, bins: int = 201) -> MomentumHistogram:
    """Normalized density of p1 (axis=1) or p2 (axis=2) over the ensemble.

    Bins are uniform over [mean - 5*sigma, mean + 5*sigma] of the empirical
    distribution, wide enough to resolve both exponential and Gaussian
    profiles.  A degenerate (zero-spread) sample falls back to unit half-width.
    """
    if bins < 2:
        raise ValidationError(f"bins must be >= 2, got {bins}")
    if axis not in (1, 2):
        raise ValidationError(f"axis must be 1 or 2, got {axis}")
    p = ens.p1 if axis == 1 else ens.p2
    if p.size == 0:
        raise ValidationError("empty ensemble")
    mean = float(np.mean(p))
    sigma = float(np.std(p))
    half = 5.0 * sigma if sigma > 0 else 1.0
    edges = np.linspace(mean - half, mean + half, bins + 1)
    counts, edges = np.histogram(p, bins=edges)
    density = counts / (p.size * np.diff(edges))
    return MomentumHistogram(bin_edges=edges, density=density)


def energy_slope(series: EnergySeries, tail_fraction: float = 0.8) -> float:
    """Ordinary least-squares slope of E against t over the last ``tail_fraction``
    of the recorded series (the early transient is discarded)."""
    if not 0 < tail_fraction <= 1:
        raise ValidationError("tail_fraction must lie in (0, 1]")
    n = len(series.times)
    start = n - max(2, int(round(tail_fraction * n)))
    t = series.times[start:].astype(float)
    e = series.values[start:]
    if t.size < 2:
        raise ValidationError("need at least two points to fit a slope")
    return float(np.polyfit(t, e, 1)[0])
