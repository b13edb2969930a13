"""Erasure and recovery of a quantum memory cell.

Reversible erasure swaps the memory with an ancilla prepared in the standard
state; recovery swaps back. Measurement of the memory or dephasing of the
ancilla makes the erasure permanent.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .core import (
    DensityMatrix,
    DimensionMismatchError,
    InvalidStateError,
    SeededRng,
    StateVector,
    UnitaryOperator,
    apply,
    conjugate,
    fidelity,
    inner_product,
    measure_projective,
    partial_trace,
    tensor_density,
    tensor_state,
)

# Accumulates two matrix applications, hence looser than NORM_TOL.
ERASE_TOL = 1e-10
STANDARD_TOL = 1e-12


class NotAnErasureUnitaryError(ValueError):
    """The unitary does not leave the system factor in the standard state."""

    def __init__(self, detail: str = ""):
        msg = "not an erasure unitary"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class CorruptedMemoryError(ValueError):
    """The system factor of a joint state was expected to be standard but is not."""


class Protocol(str, Enum):
    SWAP = "swap"
    GENERIC_UNITARY = "generic-unitary"
    PERPETUAL_MEASURE = "perpetual-measure"
    DECOHERE = "decohere"


def standard_state(dim: int) -> StateVector:
    """The reset state |0> of a ``dim``-level memory."""
    return StateVector.basis(0, dim)


def _is_standard(s: StateVector, tol: float) -> bool:
    return abs(1.0 - abs(s.amplitudes[0]) ** 2) <= tol


@dataclass(frozen=True, eq=False)
class ErasureRecord:
    """Provenance of one erasure run.

    ``recoverable`` means the record is guaranteed to reconstruct every input,
    so it is true only for unitary protocols without dephasing. A false flag
    does not rule out a lucky recovery, e.g. measuring a basis state.
    ``unitary`` is the joint operator that performed the erasure, kept so that
    recovery can invert it; it is absent when erasure went through a
    measurement.
    """

    protocol: Protocol
    pre_system: StateVector
    post_system: StateVector
    ancilla_out: DensityMatrix
    outcome: int | None = None
    dephasing_strength: float | None = None
    recoverable: bool = False
    unitary: UnitaryOperator | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "protocol", Protocol(self.protocol))
        if self.dephasing_strength is not None and not 0.0 <= self.dephasing_strength <= 1.0:
            raise ValueError("dephasing strength must lie in [0, 1]")
        expected = self.protocol in (Protocol.SWAP, Protocol.GENERIC_UNITARY) and (
            self.dephasing_strength in (None, 0.0)
        )
        if self.recoverable != expected:
            raise ValueError(
                f"recoverable={self.recoverable} inconsistent with protocol "
                f"{self.protocol.value!r} and dephasing {self.dephasing_strength!r}"
            )
        if not _is_standard(self.post_system, STANDARD_TOL):
            raise ValueError("post-erasure system is not the standard state")


def swap_operator(d: int) -> UnitaryOperator:
    """Unitary on C^d (x) C^d mapping |i>|j> to |j>|i>."""
    if d < 1:
        raise ValueError("swap dimension must be at least 1")
    u = np.zeros((d * d, d * d), dtype=np.complex128)
    for i in range(d):
        for j in range(d):
            u[j * d + i, i * d + j] = 1.0
    return UnitaryOperator(u)


def _single_factor(system: StateVector, d: int) -> None:
    if system.dims != (d,):
        raise DimensionMismatchError(f"expected a single {d}-level factor, got dims {system.dims}")


def swap_erase(system: StateVector, d: int) -> tuple[StateVector, ErasureRecord]:
    """Swap ``system`` into a fresh ancilla in |0>.

    Returns the joint ``system (x) ancilla`` state, which is ``|0> (x) system``,
    and the record of the run.
    """
    _single_factor(system, d)
    U = swap_operator(d)
    joint = apply(U, tensor_state(system, standard_state(d)))
    record = ErasureRecord(
        protocol=Protocol.SWAP,
        pre_system=system,
        post_system=standard_state(d),
        ancilla_out=partial_trace(joint.density(), 1),
        recoverable=True,
        unitary=U,
    )
    return joint, record


def swap_recover(joint: StateVector, d: int) -> StateVector:
    """Swap the ancilla content back into a standard system factor."""
    if joint.dims != (d, d):
        raise DimensionMismatchError(f"expected joint dims ({d}, {d}), got {joint.dims}")
    block = joint.amplitudes.reshape(d, d)
    leak = np.linalg.norm(block[1:])
    if leak**2 > STANDARD_TOL:
        raise CorruptedMemoryError(
            f"system factor is not in the standard state (off-standard weight {leak**2:.3e})"
        )
    swapped = apply(swap_operator(d), joint).amplitudes.reshape(d, d)
    return StateVector.from_amplitudes(swapped[:, 0], normalize=True)


class GenericErasure(NamedTuple):
    post_system: StateVector
    ancilla_out: DensityMatrix
    record: ErasureRecord
    joint: StateVector


def generic_ancilla_erase(
    U: UnitaryOperator, system: StateVector, ancilla: StateVector
) -> GenericErasure:
    """Erase ``system`` by a joint unitary with an arbitrary ancilla.

    The output must factor as |0> (x) |e>; this is verified, not assumed.
    """
    joint = apply(U, tensor_state(system, ancilla))
    rho = joint.density()
    ns = len(system.dims)
    sys_marginal = partial_trace(rho, list(range(ns)))
    std = standard_state(system.dim)
    deficit = 1.0 - fidelity(
        StateVector(sys_marginal.dims, std.amplitudes), sys_marginal
    )
    if deficit > ERASE_TOL:
        raise NotAnErasureUnitaryError(f"system overlap with |0> falls short by {deficit:.3e}")
    ancilla_out = partial_trace(rho, list(range(ns, len(joint.dims))))
    if abs(1.0 - ancilla_out.purity) > ERASE_TOL:
        raise NotAnErasureUnitaryError("ancilla output is not pure")
    post = StateVector(system.dims, std.amplitudes)
    record = ErasureRecord(
        protocol=Protocol.GENERIC_UNITARY,
        pre_system=system,
        post_system=post,
        ancilla_out=ancilla_out,
        recoverable=True,
        unitary=U,
    )
    return GenericErasure(post, ancilla_out, record, joint)


def _ancilla_ket(joint: StateVector, system_dim: int) -> StateVector:
    # joint = |0>|e> up to ERASE_TOL, so row 0 of the reshaped block is |e>
    row = joint.amplitudes.reshape(system_dim, -1)[0]
    return StateVector.from_amplitudes(row, normalize=True)


class DeterminismCheck(NamedTuple):
    lhs: complex
    rhs: complex
    gap: float


def environment_determinism_check(
    U: UnitaryOperator, phi0: StateVector, phi1: StateVector, ancilla: StateVector
) -> DeterminismCheck:
    """Compare <phi0|phi1> with the overlap <e0|e1> of the ancilla outputs."""
    if phi0.dims != phi1.dims:
        raise DimensionMismatchError(f"incompatible spaces: dims {phi0.dims} vs {phi1.dims}")
    out0 = generic_ancilla_erase(U, phi0, ancilla)
    out1 = generic_ancilla_erase(U, phi1, ancilla)
    e0 = _ancilla_ket(out0.joint, phi0.dim)
    e1 = _ancilla_ket(out1.joint, phi1.dim)
    lhs = inner_product(phi0, phi1)
    rhs = inner_product(e0, e1)
    return DeterminismCheck(lhs, rhs, abs(lhs - rhs))


def nonunitarity_witness(phi0: StateVector, phi1: StateVector) -> float:
    """|<phi0|phi1> - 1|: how far a single unitary eraser is from being possible.

    Any unitary sending both states to |0> would have to turn their overlap
    into <0|0> = 1, so the value is zero only for identical states.
    """
    return abs(inner_product(phi0, phi1) - 1.0)


def transposition(d: int, k: int) -> UnitaryOperator:
    """Permutation exchanging basis states |0> and |k>."""
    perm = np.arange(d)
    perm[[0, k]] = perm[[k, 0]]
    return UnitaryOperator(np.eye(d, dtype=np.complex128)[perm])


def perpetual_erase(system: StateVector, rng: SeededRng) -> ErasureRecord:
    """Measure the memory, then rotate the observed basis state to |0>.

    The measured basis state is kept as ``ancilla_out``: it is all the
    environment retains about the input.
    """
    if len(system.dims) != 1:
        raise DimensionMismatchError("perpetual erasure acts on a single factor")
    d = system.dim
    m = measure_projective(system, 0, rng)
    post = apply(transposition(d, m.outcome), m.post)
    # drop the global phase the measurement leaves on |k>
    post = standard_state(d) if _is_standard(post, STANDARD_TOL) else post
    return ErasureRecord(
        protocol=Protocol.PERPETUAL_MEASURE,
        pre_system=system,
        post_system=post,
        ancilla_out=StateVector.basis(m.outcome, d).density(),
        outcome=m.outcome,
        recoverable=False,
    )


def _phase_damping_kraus(dims: tuple[int, ...], subsystem: int, strength: float) -> list[np.ndarray]:
    """Kraus set sqrt(1-l) I, sqrt(l) (I (x) P_k (x) I) for each basis projector P_k."""
    ops = [np.sqrt(1.0 - strength) * np.eye(int(np.prod(dims)), dtype=np.complex128)]
    for k in range(dims[subsystem]):
        local = np.zeros((dims[subsystem], dims[subsystem]), dtype=np.complex128)
        local[k, k] = 1.0
        factors = [np.eye(dim) for dim in dims]
        factors[subsystem] = local
        op = factors[0]
        for f in factors[1:]:
            op = np.kron(op, f)
        ops.append(np.sqrt(strength) * op)
    return ops


def decohere_ancilla(joint: DensityMatrix, strength: float) -> DensityMatrix:
    """Phase-damp the ancilla (second factor) of a two-factor state.

    Evaluated as a Kraus sum, so it equals
    ``(1 - strength) rho + strength * nonselective_measure(rho, 1)`` without
    sharing code with :func:`nonselective_measure`.
    """
    if not 0.0 <= strength <= 1.0:
        raise ValueError(f"dephasing strength must lie in [0, 1], got {strength}")
    if len(joint.dims) != 2:
        raise DimensionMismatchError(f"expected a two-factor state, got dims {joint.dims}")
    rho = joint.entries
    out = sum(K @ rho @ K.conj().T for K in _phase_damping_kraus(joint.dims, 1, strength))
    return DensityMatrix(joint.dims, 0.5 * (out + out.conj().T))


def decohere_erase(system: StateVector, d: int, strength: float) -> ErasureRecord:
    """Swap-erase ``system`` and let the ancilla dephase with ``strength``.

    With ``strength == 0`` nothing irreversible happens and the run is
    recorded as a plain swap erasure.
    """
    joint, swap_record = swap_erase(system, d)
    if strength == 0.0:
        return ErasureRecord(
            protocol=Protocol.SWAP,
            pre_system=system,
            post_system=swap_record.post_system,
            ancilla_out=swap_record.ancilla_out,
            dephasing_strength=0.0,
            recoverable=True,
            unitary=swap_record.unitary,
        )
    rho = decohere_ancilla(joint.density(), strength)
    return ErasureRecord(
        protocol=Protocol.DECOHERE,
        pre_system=system,
        post_system=swap_record.post_system,
        ancilla_out=partial_trace(rho, 1),
        dephasing_strength=float(strength),
        recoverable=False,
        unitary=swap_record.unitary,
    )


class Recovery(NamedTuple):
    recovered: DensityMatrix
    fidelity_to_original: float


def attempt_recover(record: ErasureRecord) -> Recovery:
    """Run the inverse of the erasure on (standard system, ancilla_out).

    For swap-based records the inverse is the swap itself. Measurement
    records have no stored unitary; the swap then hands back the measured
    basis state, the best guess the record allows.
    """
    system = record.post_system
    rho = tensor_density(system.density(), record.ancilla_out)
    U = record.unitary if record.unitary is not None else swap_operator(system.dim)
    if U.dim != rho.dim:
        raise DimensionMismatchError("stored unitary does not match the record's spaces")
    back = conjugate(U.dagger, rho)
    recovered = partial_trace(back, list(range(len(system.dims))))
    return Recovery(recovered, fidelity(record.pre_system, recovered))
