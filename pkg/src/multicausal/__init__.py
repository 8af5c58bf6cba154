"""Causal order for probability measures on N-particle configuration spacetime.

Point-level light-cone predicates, finitely supported slice measures, a
max-flow decision of causal precedence with witnesses and Hall-type
violators, trajectory measures built from causal evolutions, and a spectral
simulator for free photons and Dirac fermions whose densities can be
certified against the order.
"""
__version__ = "0.1.0"

from .curves import (TrajectoryMeasure, build_trajectory_measure, evaluate_pushforward,
                     verify_causal_evolution)
from .errors import (DimensionError, MeasureError, MulticausalError, NonCausalEvolutionError,
                     ResourceLimitError)
from .measures import (Evolution, SliceMeasure, dirac, measure_of_region, particle_marginal,
                       product_measure, symmetrize)
from .order import (Coupling, PrecedenceCertificate, check_causal_function_condition,
                    check_cauchy_slice_condition, check_equivalences, check_future_set_condition,
                    compose_couplings, generate_test_compacts, oracle_subset_condition,
                    precedes_measures)
from .spacetime import (CompactRegion, ConfigEvent, ModelParams, causal_mask,
                        chronologically_precedes_point, future_contains, precedes_point,
                        precedes_point_tolerant, slice_future_region)

__all__ = [
    "__version__",
    "ModelParams",
    "ConfigEvent",
    "CompactRegion",
    "causal_mask",
    "precedes_point",
    "precedes_point_tolerant",
    "chronologically_precedes_point",
    "future_contains",
    "slice_future_region",
    "SliceMeasure",
    "Evolution",
    "dirac",
    "product_measure",
    "symmetrize",
    "particle_marginal",
    "measure_of_region",
    "Coupling",
    "PrecedenceCertificate",
    "precedes_measures",
    "oracle_subset_condition",
    "check_future_set_condition",
    "check_causal_function_condition",
    "check_cauchy_slice_condition",
    "check_equivalences",
    "compose_couplings",
    "generate_test_compacts",
    "TrajectoryMeasure",
    "build_trajectory_measure",
    "evaluate_pushforward",
    "verify_causal_evolution",
    "MulticausalError",
    "DimensionError",
    "MeasureError",
    "ResourceLimitError",
    "NonCausalEvolutionError",
]
