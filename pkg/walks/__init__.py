from walks.errors import CertificationError, DomainError, LabError
from walks.rng import RngStreamSpec, open_streams
from walks.process import (
    InitialHistory,
    OccupationState,
    RepulsionParams,
    TangentVector,
    WalkPairState,
    initial_state,
    interpolated_times,
    noise_realization,
    occupation,
    occupation_array,
    pi_array,
    pi_array_psi_form,
    pi_map,
    psi,
    right_probabilities,
    step,
    transition_indicator,
)
from walks.ensemble import WalkEnsemble, WalkTrace, trace_walk

__all__ = [
    "CertificationError",
    "DomainError",
    "LabError",
    "RngStreamSpec",
    "open_streams",
    "InitialHistory",
    "OccupationState",
    "RepulsionParams",
    "TangentVector",
    "WalkPairState",
    "initial_state",
    "interpolated_times",
    "noise_realization",
    "occupation",
    "occupation_array",
    "pi_array",
    "pi_array_psi_form",
    "pi_map",
    "psi",
    "right_probabilities",
    "step",
    "transition_indicator",
    "WalkEnsemble",
    "WalkTrace",
    "trace_walk",
]
