"""Simulation toolkit for the momentum-coupled two-body linear kicked rotor.

Subpackages by concern:

- :mod:`mlkr.params` -- parameters, phase-space state types, ensembles
- :mod:`mlkr.classical` -- stroboscopic map, energy series, sections, histograms
- :mod:`mlkr.lyapunov` -- largest Lyapunov exponent (tangent and Jacobian-product)
- :mod:`mlkr.quantum` -- split-step Floquet evolution on the momentum lattice
- :mod:`mlkr.transport` -- transport exponents and the (K, k_p) phase diagram
- :mod:`mlkr.entanglement` -- Schmidt spectra, entropy, RMT growth estimate
- :mod:`mlkr.cli` -- command-line runner emitting CSV artifacts
"""

__version__ = "0.1.0"

from .params import (  # noqa: F401
    ClassicalEnsemble,
    ClassicalState,
    ModelParams,
    ScaledState,
    ensemble_from_arrays,
    make_params,
    reduce_angle,
    scale_state,
    unscale_state,
    uniform_angle_ensemble,
)
from .classical import (  # noqa: F401
    EnergySeries,
    MomentumHistogram,
    SectionData,
    energy_slope,
    evolve_ensemble,
    map_step,
    momentum_histogram,
    poincare_section,
    quasilinear_D0,
    scaled_map_step,
)
from .lyapunov import (  # noqa: F401
    JacobianAtPoint,
    LyapunovEstimate,
    analytic_lyapunov_estimate,
    fixed_points,
    jacobian,
    lyapunov_jacobian_product,
    lyapunov_tangent,
)
from .quantum import (  # noqa: F401
    MomentumGrid,
    QuantumState,
    dense_floquet_matrix,
    evolve,
    floquet_step,
    initial_state,
    momentum_marginal,
)
from .transport import (  # noqa: F401
    BetaFit,
    PhaseDiagram,
    classify_regime,
    default_fit_window,
    fit_beta,
    sweep_phase_diagram,
)
from .entanglement import (  # noqa: F401
    EntanglementSeries,
    SchmidtSpectrum,
    effective_dimension,
    entanglement_series,
    rmt_entropy_estimate,
    schmidt_spectrum,
    von_neumann_entropy,
)
from .errors import (  # noqa: F401
    DivergenceError,
    GridTooSmallError,
    MlkrError,
    ValidationError,
)
