"""Dense state-vector and density-matrix primitives for small qudit registers.

Subsystem 0 is the leftmost tensor factor, so a joint ``system (x) ancilla``
vector is laid out with the system index varying slowest.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-12
PSD_FLOOR = -1e-10

# Largest total Hilbert-space dimension accepted by the constructors.
MAX_DIM = 2**10


class DimensionMismatchError(ValueError):
    """Raised when two objects live on incompatible Hilbert spaces."""


class InvalidStateError(ValueError):
    """Raised when an amplitude vector or matrix violates its invariants."""


def set_max_dim(value: int) -> None:
    """Change the cap on total Hilbert-space dimension."""
    global MAX_DIM
    if value < 1:
        raise ValueError("max dimension must be positive")
    MAX_DIM = int(value)


def _check_dims(dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise InvalidStateError(f"subsystem dimensions must be positive, got {dims}")
    total = math.prod(dims)
    if total > MAX_DIM:
        raise InvalidStateError(f"total dimension {total} exceeds cap {MAX_DIM}")
    return dims


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=np.complex128, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state on a composite space.

    Parameters
    ----------
    dims : tuple of int
        Subsystem dimensions, leftmost factor first.
    amplitudes : ndarray
        Complex vector of length ``prod(dims)``.
    """

    dims: tuple[int, ...]
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        dims = _check_dims(self.dims)
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.shape != (math.prod(dims),):
            raise InvalidStateError(
                f"{amps.size} amplitudes do not match dims {dims}"
            )
        if not np.all(np.isfinite(amps)):
            raise InvalidStateError("amplitudes must be finite")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise InvalidStateError(f"state is not normalized (norm={norm!r})")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_amplitudes(
        cls, amplitudes, dims: Sequence[int] | None = None, normalize: bool = False
    ) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=np.complex128).ravel()
        if normalize:
            norm = np.linalg.norm(amps)
            if norm == 0 or not np.isfinite(norm):
                raise InvalidStateError("cannot normalize a zero or non-finite vector")
            amps = amps / norm
        return cls(tuple(dims) if dims is not None else (amps.size,), amps)

    @classmethod
    def basis(cls, index: int, dims: Sequence[int] | int) -> "StateVector":
        dims = (dims,) if isinstance(dims, int) else tuple(dims)
        total = math.prod(dims)
        if not 0 <= index < total:
            raise IndexError(f"basis index {index} out of range for dimension {total}")
        amps = np.zeros(total, dtype=np.complex128)
        amps[index] = 1.0
        return cls(dims, amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.dims, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator."""

    dims: tuple[int, ...]
    entries: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        dims = _check_dims(self.dims)
        rho = _frozen(self.entries)
        side = math.prod(dims)
        if rho.shape != (side, side):
            raise InvalidStateError(f"matrix of shape {rho.shape} does not match dims {dims}")
        if not np.all(np.isfinite(rho)):
            raise InvalidStateError("density matrix entries must be finite")
        if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
            raise InvalidStateError("density matrix is not Hermitian")
        trace = np.trace(rho)
        if abs(trace - 1.0) > NORM_TOL:
            raise InvalidStateError(f"density matrix trace is {trace!r}, expected 1")
        if np.linalg.eigvalsh(rho).min() < PSD_FLOOR:
            raise InvalidStateError("density matrix has a negative eigenvalue")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "entries", rho)

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int] | int) -> "DensityMatrix":
        dims = (dims,) if isinstance(dims, int) else tuple(dims)
        side = math.prod(dims)
        return cls(dims, np.eye(side, dtype=np.complex128) / side)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.entries @ self.entries)))


@dataclass(frozen=True, eq=False)
class UnitaryOperator:
    """Square matrix certified unitary at construction."""

    entries: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        u = _frozen(self.entries)
        if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] < 1:
            raise InvalidStateError(f"unitary must be a square matrix, got shape {u.shape}")
        if u.shape[0] > MAX_DIM:
            raise InvalidStateError(f"operator dimension {u.shape[0]} exceeds cap {MAX_DIM}")
        deviation = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
        if deviation > UNITARY_TOL:
            raise InvalidStateError(f"matrix is not unitary (max deviation {deviation:.3e})")
        object.__setattr__(self, "entries", u)

    @classmethod
    def identity(cls, dim: int) -> "UnitaryOperator":
        return cls(np.eye(dim, dtype=np.complex128))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def dagger(self) -> "UnitaryOperator":
        return UnitaryOperator(self.entries.conj().T)

    def __matmul__(self, other: "UnitaryOperator") -> "UnitaryOperator":
        if not isinstance(other, UnitaryOperator):
            return NotImplemented
        if other.dim != self.dim:
            raise DimensionMismatchError("cannot compose operators of different dimension")
        return UnitaryOperator(self.entries @ other.entries)

    def kron(self, other: "UnitaryOperator") -> "UnitaryOperator":
        return UnitaryOperator(np.kron(self.entries, other.entries))


class SeededRng:
    """Reproducible random source backed by numpy's PCG64.

    Identical seeds produce identical streams. Not safe to share between
    threads; derive one child per lane with :meth:`child` instead.
    """

    GENERATOR = "numpy.random.PCG64"

    def __init__(self, seed: int = 0):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self._gen = np.random.Generator(np.random.PCG64(seed))

    def __repr__(self) -> str:
        return f"SeededRng(seed={self.seed})"

    def child(self, lane: int) -> "SeededRng":
        """Independent generator for parallel lane ``lane``.

        The child seed is the first 64-bit word of
        ``SeedSequence(entropy=seed, spawn_key=(lane,))``, so it depends only
        on the parent seed and the lane index, never on the parent's state.
        """
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(int(lane),))
        return SeededRng(int(seq.generate_state(1, dtype=np.uint64)[0]))

    def uniform(self) -> float:
        return float(self._gen.random())

    def standard_normal(self, size) -> np.ndarray:
        return self._gen.standard_normal(size)


# --------------------------------------------------------------------------
# operations


def _require_same_dims(a, b) -> None:
    if tuple(a.dims) != tuple(b.dims):
        raise DimensionMismatchError(f"incompatible spaces: dims {a.dims} vs {b.dims}")


def _check_subsystem(index: int, dims: tuple[int, ...]) -> int:
    if isinstance(index, bool) or not isinstance(index, (int, np.integer)):
        raise TypeError("subsystem index must be an integer")
    if not 0 <= index < len(dims):
        raise IndexError(f"subsystem {index} does not exist in dims {dims}")
    return int(index)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """Return <a|b>, conjugate-linear in ``a``."""
    _require_same_dims(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def tensor_state(a: StateVector, b: StateVector) -> StateVector:
    return StateVector(a.dims + b.dims, np.kron(a.amplitudes, b.amplitudes))


def tensor_density(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(a.dims + b.dims, np.kron(a.entries, b.entries))


def apply(U: UnitaryOperator, s: StateVector) -> StateVector:
    if U.dim != s.dim:
        raise DimensionMismatchError(
            f"operator of dimension {U.dim} cannot act on state of dimension {s.dim}"
        )
    return StateVector(s.dims, U.entries @ s.amplitudes)


def conjugate(U: UnitaryOperator, rho: DensityMatrix) -> DensityMatrix:
    """Return U rho U^dagger."""
    if U.dim != rho.dim:
        raise DimensionMismatchError(
            f"operator of dimension {U.dim} cannot act on matrix of dimension {rho.dim}"
        )
    out = U.entries @ rho.entries @ U.entries.conj().T
    # re-symmetrize so roundoff cannot trip the Hermiticity check
    return DensityMatrix(rho.dims, 0.5 * (out + out.conj().T))


def partial_trace(rho: DensityMatrix, keep: int | Sequence[int]) -> DensityMatrix:
    """Reduced state on the subsystem(s) ``keep``; everything else is traced out."""
    n = len(rho.dims)
    if isinstance(keep, (int, np.integer)) and not isinstance(keep, bool):
        keep_idx = [_check_subsystem(keep, rho.dims)]
    else:
        keep_idx = sorted({_check_subsystem(k, rho.dims) for k in keep})
        if not keep_idx:
            raise IndexError("at least one subsystem must be kept")
    if 2 * n > len(string.ascii_letters):
        raise InvalidStateError("too many subsystems for partial trace")
    rows = list(string.ascii_letters[:n])
    cols = list(string.ascii_letters[n : 2 * n])
    for i in range(n):
        if i not in keep_idx:
            cols[i] = rows[i]
    out = [rows[i] for i in keep_idx] + [cols[i] for i in keep_idx]
    tensor = rho.entries.reshape(rho.dims + rho.dims)
    reduced = np.einsum(f"{''.join(rows)}{''.join(cols)}->{''.join(out)}", tensor)
    kept_dims = tuple(rho.dims[i] for i in keep_idx)
    side = math.prod(kept_dims)
    reduced = reduced.reshape(side, side)
    return DensityMatrix(kept_dims, 0.5 * (reduced + reduced.conj().T))


def _subsystem_labels(dims: tuple[int, ...], subsystem: int) -> np.ndarray:
    """Basis label of ``subsystem`` for every joint basis index."""
    return np.unravel_index(np.arange(math.prod(dims)), dims)[subsystem]


class Measurement(NamedTuple):
    outcome: int
    probability: float
    post: StateVector


def measure_projective(s: StateVector, subsystem: int, rng: SeededRng) -> Measurement:
    """Sample a computational-basis measurement of one subsystem.

    ``probability`` is the exact Born weight of the sampled outcome, not a
    frequency. A uniform draw landing exactly on a cumulative boundary resolves
    to the lower label.
    """
    subsystem = _check_subsystem(subsystem, s.dims)
    labels = _subsystem_labels(s.dims, subsystem)
    weights = np.abs(s.amplitudes) ** 2
    probs = np.bincount(labels, weights=weights, minlength=s.dims[subsystem])
    cumulative = np.cumsum(probs)
    u = rng.uniform() * cumulative[-1]
    support = np.flatnonzero(probs > 0)
    hits = support[cumulative[support] >= u]
    outcome = int(hits[0]) if hits.size else int(support[-1])
    p = float(probs[outcome])
    if p <= 0.0:
        raise RuntimeError("sampled an outcome with zero Born weight")
    projected = np.where(labels == outcome, s.amplitudes, 0.0)
    return Measurement(outcome, p, StateVector(s.dims, projected / math.sqrt(p)))


def nonselective_measure(rho: DensityMatrix, subsystem: int) -> DensityMatrix:
    """Outcome-averaged computational-basis measurement of one subsystem.

    Coherences between different basis sectors of ``subsystem`` are zeroed;
    everything else, including the diagonal, is left alone.
    """
    subsystem = _check_subsystem(subsystem, rho.dims)
    labels = _subsystem_labels(rho.dims, subsystem)
    mask = labels[:, None] == labels[None, :]
    return DensityMatrix(rho.dims, np.where(mask, rho.entries, 0.0))


def haar_random_state(dims: Sequence[int] | int, rng: SeededRng) -> StateVector:
    """Haar-distributed pure state from normalized complex Gaussians."""
    dims = _check_dims((dims,) if isinstance(dims, int) else dims)
    total = math.prod(dims)
    raw = rng.standard_normal((2, total))
    vec = raw[0] + 1j * raw[1]
    return StateVector(dims, vec / np.linalg.norm(vec))


def fidelity(a: StateVector, rho: DensityMatrix) -> float:
    """<a|rho|a>, clipped to [0, 1] against roundoff."""
    _require_same_dims(a, rho)
    value = np.real(np.vdot(a.amplitudes, rho.entries @ a.amplitudes))
    return float(min(1.0, max(0.0, value)))


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    _require_same_dims(rho, sigma)
    eigs = np.linalg.eigvalsh(rho.entries - sigma.entries)
    return float(min(1.0, 0.5 * np.sum(np.abs(eigs))))
