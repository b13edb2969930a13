"""Energy cost of erasing one memory cell coupled to a thermal mode.

The cell exchanges energy with its environment in quanta of hbar*omega. The
mean exchange is the thermal average over n = 0, 1, 2, ... quanta weighted by
exp(-n*eps0/kT), which sums to eps0 / (exp(eps0/kT) - 1) and tends to kT when
hbar -> 0.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

# exp(x) overflows double precision shortly past this point
UNDERFLOW_X = 700.0
MAX_SERIES_TERMS = 50_000_000


class EnergyUnderflowWarning(RuntimeWarning):
    """The average energy is below double-precision resolution and reported as 0."""


@dataclass(frozen=True)
class UnitSystem:
    label: str
    hbar: float
    k_boltzmann: float

    def __post_init__(self):
        if self.hbar <= 0 or self.k_boltzmann <= 0:
            raise ValueError("hbar and k_boltzmann must be positive")

    @classmethod
    def from_label(cls, label: str) -> "UnitSystem":
        try:
            return {"natural": NATURAL, "SI": SI, "si": SI}[label]
        except KeyError:
            raise ValueError(f"unknown unit system {label!r}; expected 'natural' or 'SI'") from None


NATURAL = UnitSystem("natural", 1.0, 1.0)
# CODATA 2018: k_B exact by definition, hbar = h / 2pi with h exact
SI = UnitSystem("SI", 1.054571817e-34, 1.380649e-23)


@dataclass(frozen=True)
class ThermalMode:
    omega: float
    temperature: float
    units: UnitSystem = NATURAL

    def __post_init__(self):
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise ValueError(f"omega must be positive and finite, got {self.omega}")
        if not (self.temperature > 0 and math.isfinite(self.temperature)):
            raise ValueError(f"temperature must be positive and finite, got {self.temperature}")


@dataclass(frozen=True)
class EnergyQuantum:
    value: float

    def __post_init__(self):
        if not (self.value > 0 and math.isfinite(self.value)):
            raise ValueError(f"energy quantum must be positive, got {self.value}")


def energy_quantum(mode: ThermalMode) -> EnergyQuantum:
    return EnergyQuantum(mode.units.hbar * mode.omega)


def _check_temperature(T: float) -> None:
    if not (T > 0 and math.isfinite(T)):
        raise ValueError(f"temperature must be positive and finite, got {T}")


def reduced_energy(eps0: EnergyQuantum, T: float, units: UnitSystem) -> float:
    """The dimensionless ratio x = eps0 / (k_B T)."""
    _check_temperature(T)
    return eps0.value / (units.k_boltzmann * T)


def average_erasure_energy(eps0: EnergyQuantum, T: float, units: UnitSystem) -> float:
    """Closed-form mean energy exchanged per erased cell, eps0 / (e^x - 1).

    Uses ``expm1`` so the x -> 0 limit keeps full precision. For x above
    ``UNDERFLOW_X`` the result is returned as 0 and an
    :class:`EnergyUnderflowWarning` is emitted.
    """
    x = reduced_energy(eps0, T, units)
    if x > UNDERFLOW_X:
        warnings.warn(
            f"eps0/kT = {x:g} exceeds {UNDERFLOW_X:g}; average energy reported as 0",
            EnergyUnderflowWarning,
            stacklevel=2,
        )
        return 0.0
    return eps0.value / math.expm1(x)


def partition_average_series(
    eps0: EnergyQuantum, T: float, units: UnitSystem, rel_tol: float = 1e-15
) -> float:
    """Mean energy from the explicit Boltzmann sums over n quanta.

    Both sums start at n = 0. Summation stops once a numerator term drops
    below ``rel_tol`` times the running numerator; the numerator decays one
    power of n slower than the denominator, so it governs convergence.
    """
    if not 0 < rel_tol <= 1e-6:
        raise ValueError(f"rel_tol must lie in (0, 1e-6], got {rel_tol}")
    x = reduced_energy(eps0, T, units)
    num_terms: list[float] = []
    den_terms: list[float] = []
    running = 0.0
    n = 0
    while True:
        weight = math.exp(-n * x)
        term = n * eps0.value * weight
        num_terms.append(term)
        den_terms.append(weight)
        running += term
        if n > 0 and term <= rel_tol * running:
            break
        n += 1
        if n > MAX_SERIES_TERMS:
            raise RuntimeError(f"series did not converge within {MAX_SERIES_TERMS} terms (x={x:g})")
    return math.fsum(num_terms) / math.fsum(den_terms)


def classical_limit_energy(T: float, units: UnitSystem) -> float:
    """k_B T, the hbar -> 0 limit of the average erasure energy."""
    _check_temperature(T)
    return units.k_boltzmann * T


class DissipationReport(NamedTuple):
    per_qubit: float
    total: float


def dissipation_report(n_qubits: int, mode: ThermalMode) -> DissipationReport:
    """Average heat left in the environment by erasing ``n_qubits`` cells."""
    if isinstance(n_qubits, bool) or int(n_qubits) != n_qubits or n_qubits < 1:
        raise ValueError(f"n_qubits must be a positive integer, got {n_qubits!r}")
    per_qubit = average_erasure_energy(energy_quantum(mode), mode.temperature, mode.units)
    return DissipationReport(per_qubit, int(n_qubits) * per_qubit)
