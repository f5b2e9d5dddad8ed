"""Model parameters and phase-space state types for the coupled two-rotor map.

The model is a pair of linear kicked rotors whose free motion winds at rates
``2*pi*alpha1`` and ``2*pi*alpha2`` and whose momenta are coupled with strength
``k_p``.  Both rotors feel the same cosine kick of strength ``K`` once per
period ``T``.  The single combination ``Ks = K * k_p`` controls the character
of the classical dynamics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

TWO_PI = 2.0 * math.pi

DEFAULT_ALPHA1 = math.sqrt(3.0)
DEFAULT_ALPHA2 = math.sqrt(5.0)

# Keys of the canonical JSON representation, in emission order.
PARAM_JSON_KEYS = ("K", "k_p", "alpha1", "alpha2", "T", "hbar")


def reduce_angle(x):
    """Reduce an angle (scalar or array) to the canonical branch [0, 2*pi).

    Idempotent: a second reduction returns its input bitwise.  The guard
    against ``2*pi`` handles tiny negative inputs whose remainder rounds up
    to the full period.
    """
    r = np.mod(x, TWO_PI)
    return np.where(r >= TWO_PI, 0.0, r) if isinstance(r, np.ndarray) else (0.0 if r >= TWO_PI else r)


def _require_finite(name, value):
    if not math.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class ModelParams:
    """Validated parameter set.

    Fields
    ------
    K : kick strength (dimensionless action units, hbar = 1)
    k_p : momentum coupling strength (dimensionless)
    alpha1, alpha2 : winding numbers; intended irrational, but any distinct
        positive reals are accepted.  Floating-point numbers are all rational,
        so "irrational" is honoured only in the far-from-resonance sense.
    T : kick period (default 1)
    hbar : Planck constant (default 1; the quantum engine assumes integer
        momentum quantization, which presumes hbar = 1)
    """

    K: float
    k_p: float
    alpha1: float = DEFAULT_ALPHA1
    alpha2: float = DEFAULT_ALPHA2
    T: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        for name in PARAM_JSON_KEYS:
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ValidationError(f"{name} must be a real number, got {value!r}")
            object.__setattr__(self, name, float(value))
            _require_finite(name, getattr(self, name))
        if self.K < 0:
            raise ValidationError(f"K must be >= 0, got {self.K}")
        if self.k_p < 0:
            raise ValidationError(f"k_p must be >= 0, got {self.k_p}")
        if self.T <= 0:
            raise ValidationError(f"T must be > 0, got {self.T}")
        if self.hbar <= 0:
            raise ValidationError(f"hbar must be > 0, got {self.hbar}")
        if self.alpha1 <= 0 or self.alpha2 <= 0:
            raise ValidationError("winding numbers alpha1, alpha2 must be positive")
        if self.alpha1 == self.alpha2:
            raise ValidationError("alpha1 and alpha2 must differ")

    @property
    def Ks(self) -> float:
        """Scaled chaos parameter K * k_p."""
        return self.K * self.k_p

    @property
    def kp_scaled(self) -> float:
        """Coupling in winding-scaled momentum coordinates, k_p / (alpha1 * alpha2)."""
        return self.k_p / (self.alpha1 * self.alpha2)

    @property
    def K_scaled(self) -> float:
        """Kick strength per unit period, K / T."""
        return self.K / self.T

    @property
    def hbar_scaled(self) -> float:
        """Planck constant per unit period, hbar / T."""
        return self.hbar / self.T

    def to_json(self) -> str:
        return json.dumps({k: getattr(self, k) for k in PARAM_JSON_KEYS})

    @classmethod
    def from_json(cls, text: str) -> "ModelParams":
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ValidationError("parameter JSON must be an object")
        unknown = sorted(set(data) - set(PARAM_JSON_KEYS))
        if unknown:
            raise ValidationError(f"unknown parameter keys: {unknown}")
        missing = sorted(set(PARAM_JSON_KEYS) - set(data))
        if missing:
            raise ValidationError(f"missing parameter keys: {missing}")
        return cls(**data)


def make_params(K, k_p, alpha1=DEFAULT_ALPHA1, alpha2=DEFAULT_ALPHA2, T=1.0, hbar=1.0) -> ModelParams:
    """Build a validated :class:`ModelParams`; see the class for field meanings."""
    return ModelParams(K=K, k_p=k_p, alpha1=alpha1, alpha2=alpha2, T=T, hbar=hbar)


@dataclass(frozen=True)
class ClassicalState:
    """One phase point: angles in [0, 2*pi), momenta unbounded."""

    x1: float
    x2: float
    p1: float
    p2: float

    def __post_init__(self):
        for name in ("x1", "x2", "p1", "p2"):
            _require_finite(name, float(getattr(self, name)))
        object.__setattr__(self, "x1", float(reduce_angle(self.x1)))
        object.__setattr__(self, "x2", float(reduce_angle(self.x2)))
        object.__setattr__(self, "p1", float(self.p1))
        object.__setattr__(self, "p2", float(self.p2))


@dataclass(frozen=True)
class ScaledState:
    """Phase point with momenta P_i = k_p * p_i (coupling-scaled coordinates)."""

    x1: float
    x2: float
    P1: float
    P2: float

    def __post_init__(self):
        object.__setattr__(self, "x1", float(reduce_angle(self.x1)))
        object.__setattr__(self, "x2", float(reduce_angle(self.x2)))
        object.__setattr__(self, "P1", float(self.P1))
        object.__setattr__(self, "P2", float(self.P2))


def scale_state(state: ClassicalState, params: ModelParams) -> ScaledState:
    """Map (x, p) to (x, P = k_p * p).

    Round-trips with :func:`unscale_state` exactly when k_p is a power of two
    (both directions are then exact in binary floating point); for other
    couplings the round trip is exact to one ulp.
    """
    if params.k_p <= 0:
        raise ValidationError("scaling requires k_p > 0")
    return ScaledState(state.x1, state.x2, params.k_p * state.p1, params.k_p * state.p2)


def unscale_state(state: ScaledState, params: ModelParams) -> ClassicalState:
    if params.k_p <= 0:
        raise ValidationError("unscaling requires k_p > 0")
    return ClassicalState(state.x1, state.x2, state.P1 / params.k_p, state.P2 / params.k_p)


@dataclass(frozen=True)
class ClassicalEnsemble:
    """A population of phase points stored as parallel arrays.

    Construction from a seed is bit-reproducible: sampling uses numpy's
    seeded PCG64 generator, whose stream is platform-independent.
    Arrays are frozen read-only; engines copy before evolving.
    """

    x1: np.ndarray
    x2: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    seed: int

    def __post_init__(self):
        arrays = {}
        n = None
        for name in ("x1", "x2", "p1", "p2"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 1 or arr.size == 0:
                raise ValidationError(f"{name} must be a non-empty 1-d array")
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name} contains non-finite entries")
            if n is None:
                n = arr.size
            elif arr.size != n:
                raise ValidationError("member arrays must have equal length")
            arrays[name] = arr
        for name in ("x1", "x2"):
            arrays[name] = np.asarray(reduce_angle(arrays[name]))
        for name, arr in arrays.items():
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.x1.size

    def __getitem__(self, i: int) -> ClassicalState:
        return ClassicalState(self.x1[i], self.x2[i], self.p1[i], self.p2[i])

    def __iter__(self):
        return (self[i] for i in range(len(self)))


def uniform_angle_ensemble(n: int, seed: int) -> ClassicalEnsemble:
    """n states with angles i.i.d. uniform on [0, 2*pi) and zero momenta.

    Zero initial momenta mirror the quantum delta-function initial state;
    use :func:`ensemble_from_arrays` for anything else.
    """
    if n < 1:
        raise ValidationError(f"ensemble size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    x1 = rng.uniform(0.0, TWO_PI, n)
    x2 = rng.uniform(0.0, TWO_PI, n)
    zeros = np.zeros(n)
    return ClassicalEnsemble(x1=x1, x2=x2, p1=zeros, p2=zeros.copy(), seed=int(seed))


def ensemble_from_arrays(x1, x2, p1, p2, seed: int = 0) -> ClassicalEnsemble:
    """Explicit constructor for ensembles with arbitrary (finite) momenta."""
    return ClassicalEnsemble(x1=x1, x2=x2, p1=p1, p2=p2, seed=int(seed))
