"""Local versus joint estimation of phase-conjugate coherent-state pairs."""

from .phase_space import (
    GaussianPrior,
    QuadraturePair,
    amplitude_from_quadratures,
    beamsplitter,
    concentrate,
    conjugate,
    overlap2,
    quadratures,
    sample_prior,
)
from .strategies import (
    FidelityEstimate,
    ScenarioConfig,
    correspondence_gap,
    local_estimate,
    local_fidelity_bound,
    nonlocal_estimate,
    nonlocal_fidelity_bound,
    run_local_mc,
    run_nonlocal_mc,
)

__version__ = "0.1.0"
