"""Monte-Carlo sweeps that check the erasure protocols statistically."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    SeededRng,
    StateVector,
    haar_random_state,
    measure_projective,
    nonselective_measure,
)
from .protocols import (
    attempt_recover,
    decohere_ancilla,
    environment_determinism_check,
    perpetual_erase,
    standard_state,
    swap_erase,
    swap_operator,
)


@dataclass(frozen=True)
class TrialSummary:
    """Aggregate of a sweep.

    ``values`` holds the per-trial quantity in trial order: recovery fidelity
    for fidelity sweeps, the overlap gap for :func:`determinism_sweep`.
    ``max_gap`` is 0.0 for sweeps that do not measure a gap.
    """

    n_trials: int
    mean_fidelity: float
    min_fidelity: float
    max_gap: float
    seed: int
    values: tuple[float, ...] = ()

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("a summary needs at least one trial")
        if not self.min_fidelity <= self.mean_fidelity + 1e-15 or self.mean_fidelity > 1.0:
            raise ValueError("expected min_fidelity <= mean_fidelity <= 1")

    @property
    def std_fidelity(self) -> float:
        """Sample standard deviation of ``values``."""
        if len(self.values) < 2:
            return 0.0
        return float(np.std(self.values, ddof=1))


@dataclass(frozen=True)
class FrequencyReport:
    shots: int
    counts: dict[int, int]
    expected: dict[int, float]
    max_sigma_deviation: float

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts must sum to shots")
        if abs(math.fsum(self.expected.values()) - 1.0) > 1e-12:
            raise ValueError("expected probabilities must sum to 1")

    def frequency(self, label: int) -> float:
        return self.counts.get(label, 0) / self.shots


def _fidelity_summary(fids: list[float], seed: int, max_gap: float = 0.0) -> TrialSummary:
    return TrialSummary(
        n_trials=len(fids),
        mean_fidelity=math.fsum(fids) / len(fids),
        min_fidelity=min(fids),
        max_gap=max_gap,
        seed=seed,
        values=tuple(fids),
    )


def _check_trials(n: int) -> None:
    if n < 1:
        raise ValueError(f"need at least one trial, got {n}")


def roundtrip_sweep(n_trials: int, d: int, rng: SeededRng) -> TrialSummary:
    """Swap-erase then recover ``n_trials`` Haar-random d-level states."""
    _check_trials(n_trials)
    if d < 2:
        raise ValueError("roundtrip sweep needs d >= 2")
    fids = []
    for _ in range(n_trials):
        phi = haar_random_state(d, rng)
        _, record = swap_erase(phi, d)
        fids.append(attempt_recover(record).fidelity_to_original)
    return _fidelity_summary(fids, rng.seed)


def determinism_sweep(n_pairs: int, rng: SeededRng, d: int = 2) -> TrialSummary:
    """Worst mismatch between <phi0|phi1> and <e0|e1> under swap erasure.

    The fidelity fields report how well the ancilla output reproduces the
    corresponding input.
    """
    _check_trials(n_pairs)
    U = swap_operator(d)
    ancilla = standard_state(d)
    gaps = []
    fids = []
    for _ in range(n_pairs):
        phi0 = haar_random_state(d, rng)
        phi1 = haar_random_state(d, rng)
        check = environment_determinism_check(U, phi0, phi1, ancilla)
        gaps.append(check.gap)
        _, record = swap_erase(phi0, d)
        fids.append(attempt_recover(record).fidelity_to_original)
    summary = _fidelity_summary(fids, rng.seed, max_gap=max(gaps))
    return TrialSummary(
        summary.n_trials, summary.mean_fidelity, summary.min_fidelity,
        summary.max_gap, summary.seed, tuple(gaps),
    )


def measurement_statistics(phi: StateVector, shots: int, rng: SeededRng) -> FrequencyReport:
    """Measure fresh copies of ``phi`` (first factor) and compare with Born weights."""
    if shots < 100:
        raise ValueError(f"need at least 100 shots, got {shots}")
    d = phi.dims[0]
    counts = dict.fromkeys(range(d), 0)
    for _ in range(shots):
        counts[measure_projective(phi, 0, rng).outcome] += 1
    weights = np.abs(phi.amplitudes.reshape(d, -1)) ** 2
    expected = {k: float(p) for k, p in enumerate(weights.sum(axis=1))}
    worst = 0.0
    for k, p in expected.items():
        if p <= 0.0 or p >= 1.0:
            continue
        sigma = math.sqrt(p * (1.0 - p) / shots)
        worst = max(worst, abs(counts[k] / shots - p) / sigma)
    return FrequencyReport(shots, counts, expected, worst)


def haar_expected_recovery(d: int) -> float:
    """E[sum_k |a_k|^4] = 2/(d+1) for a Haar-random d-level state."""
    return 2.0 / (d + 1)


def irreversibility_sweep(n_trials: int, rng: SeededRng, d: int = 2) -> TrialSummary:
    """Recovery fidelity after perpetual (measurement) erasure of Haar states.

    The mean estimates 2/(d+1), i.e. 2/3 for a qubit.
    """
    _check_trials(n_trials)
    fids = []
    for _ in range(n_trials):
        phi = haar_random_state(d, rng)
        record = perpetual_erase(phi, rng)
        fids.append(attempt_recover(record).fidelity_to_original)
    return _fidelity_summary(fids, rng.seed)


def dephasing_equivalence_check(phi: StateVector) -> float:
    """Max entrywise gap between full ancilla dephasing and ancilla measurement."""
    if len(phi.dims) != 1:
        raise ValueError("expected a single-factor state")
    joint, _ = swap_erase(phi, phi.dim)
    rho = joint.density()
    dephased = decohere_ancilla(rho, 1.0)
    measured = nonselective_measure(rho, 1)
    return float(np.max(np.abs(dephased.entries - measured.entries)))
