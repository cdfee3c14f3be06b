"""Linear-optics polarization Bell-state analysis."""

from .analysis import (
    CapacityRegime,
    EventProbabilityMap,
    RuleSet,
    analyze,
    capacity,
    derive_rules,
    event_probabilities,
    multi_pair_success,
    single_pair_success,
    success_curve,
)
from .circuit import Circuit, Element, build_symmetric, build_symmetry_broken, element_matrix, validate
from .dsl import DSLError, parse, serialize
from .evolution import (
    CoefficientTable,
    TwoPhotonAmplitudeMap,
    brute_force_two_photon,
    coefficient_table,
    combine_two_photon,
    evolve_single,
    evolve_to_tap,
)
from .montecarlo import ConfusionMatrix, EvidencePolicy, classify, estimate_confusion, sample_event
from .states import BellState, LocalOp, Polarization, PhotonMode, SpatialMode, decompose_bell, local_transform

__version__ = "0.1.0"
