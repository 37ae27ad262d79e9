"""Constant-mean-curvature foliations of asymptotically Schwarzschild-AdS 3-manifolds."""
from .background import BackgroundModel, horizon_radius
from .errors import (AdsCmcError, BoundaryNotMinimalError, ConfigError, DivergenceError,
                     FoliationAbort, MatchingError, ResonanceError)
from .foliation import (FoliationReport, LeafRecord, decay_diagnostics, foliate,
                        mass_limit_estimate, matching_check, monotonicity_report,
                        penrose_report)
from .geometry import GraphSurface, compute_geometry, hawking_mass, mean_curvature
from .metric import (FAMILIES, PerturbationSpec, PerturbedMetric, background_family,
                     sphere_block_family, standard_family)
from .solver import SolveSettings, solve_free_cmc, solve_prescribed_cmc, stability_eigenvalue
from .sphere import SphereField, SphereGrid

__version__ = "0.1.0"

__all__ = [
    "AdsCmcError",
    "background_family",
    "BackgroundModel",
    "BoundaryNotMinimalError",
    "compute_geometry",
    "ConfigError",
    "decay_diagnostics",
    "DivergenceError",
    "FAMILIES",
    "foliate",
    "FoliationAbort",
    "FoliationReport",
    "GraphSurface",
    "hawking_mass",
    "horizon_radius",
    "LeafRecord",
    "mass_limit_estimate",
    "matching_check",
    "MatchingError",
    "mean_curvature",
    "monotonicity_report",
    "penrose_report",
    "PerturbationSpec",
    "PerturbedMetric",
    "ResonanceError",
    "solve_free_cmc",
    "solve_prescribed_cmc",
    "SolveSettings",
    "sphere_block_family",
    "SphereField",
    "SphereGrid",
    "stability_eigenvalue",
    "standard_family",
]
