"""Exact simulation of quantum-memory erasure, recovery and its energy cost."""

__version__ = "0.1.0"

from .core import (
    DensityMatrix,
    DimensionMismatchError,
    InvalidStateError,
    SeededRng,
    StateVector,
    UnitaryOperator,
    apply,
    fidelity,
    haar_random_state,
    inner_product,
    measure_projective,
    nonselective_measure,
    partial_trace,
    tensor_state,
    trace_distance,
)
from .protocols import (
    CorruptedMemoryError,
    ErasureRecord,
    NotAnErasureUnitaryError,
    Protocol,
    attempt_recover,
    decohere_ancilla,
    decohere_erase,
    environment_determinism_check,
    generic_ancilla_erase,
    nonunitarity_witness,
    perpetual_erase,
    standard_state,
    swap_erase,
    swap_operator,
    swap_recover,
)
