"""Thermodynamics of a 1D unbounded-spin lattice chain.

Thin Python surface over the C++ core: model construction, transfer-operator
quadrature, ensemble free energies, the Fourier-inverted density at zero,
and the Metropolis/Kawasaki samplers.
"""

from spinlab._core import (  # noqa: F401
    ChainConfig,
    ConfigError,
    ConsistencyError,
    ConvergenceError,
    DegenerateFitError,
    LatticeModel,
    QuadratureGrid,
    ResolutionError,
    a_ce,
    a_gce,
    build_grid,
    char_fn,
    conditional_site,
    config_digest,
    covariance,
    decay_study,
    density_at_zero,
    gce_moments,
    h_bar,
    h_bar_direct,
    hamiltonian,
    kawasaki_ce,
    legendre_HK,
    load_model,
    load_model_file,
    log_partition,
    make_model,
    metropolis_gce,
    serialize_model,
    sigma_of_m,
    thermo_report,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
