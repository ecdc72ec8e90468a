"""Numerical laboratory for the Willmore energy of tori in S^3 near the Clifford torus."""
from .errors import (
    ConfigError,
    DegenerateCloud,
    DegenerateImmersion,
    EmptyCloud,
    KernelObstruction,
    NotGraphLike,
    PoleSingularity,
    ResolutionError,
    SingularCovariance,
    UnsupportedOrder,
    WillmoreLabError,
)
from .spectral import TorusGrid, sobolev_norm, sup_norm
from .torus import (
    Immersion,
    Mode,
    PerturbationSpec,
    SurfaceGeometry,
    area,
    clifford_immersion,
    compute_geometry,
    perturb_immersion,
    perturbed_clifford,
    tracefree_energy,
    willmore_energy,
)

__version__ = "0.1.0"
