"""Scenario runner emitting JSON lines.

Each scenario writes one record per trial followed by one summary record.
The exit status is 0 when the scenario's built-in check passes, 1 when it
fails, 2 on a usage error and 3 when the output cannot be written.

Metric keys per scenario (trial record / summary record):

erase-recover
    fidelity / n_trials, mean_fidelity, min_fidelity, threshold
perpetual
    fidelity / n_trials, mean_fidelity, min_fidelity, expected_mean,
    mean_deviation, deviation_bound, shots, freq0_plus, max_sigma_deviation
decohere
    fidelity, predicted_fidelity, equivalence_gap / n_trials, lambda,
    mean_fidelity, min_fidelity, max_law_gap, max_equivalence_gap,
    monotone_violations
determinism
    gap / n_trials, max_gap, threshold
thermo
    (no trial records) / eps0, x, avg_energy, heat_dissipation,
    oracle_energy, oracle_rel_gap, classical_limit, ratio_to_kT, n_qubits,
    total_dissipation, underflow
witness
    overlap_abs, witness / witness, witness_identical, witness_partial,
    min_random_witness
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from typing import IO, Any, Iterable

import numpy as np

from . import __version__
from .analysis import (
    dephasing_equivalence_check,
    determinism_sweep,
    haar_expected_recovery,
    irreversibility_sweep,
    measurement_statistics,
    roundtrip_sweep,
)
from .core import SeededRng, StateVector, haar_random_state
from .protocols import attempt_recover, decohere_erase, nonunitarity_witness
from .thermo import (
    EnergyUnderflowWarning,
    ThermalMode,
    UnitSystem,
    average_erasure_energy,
    classical_limit_energy,
    dissipation_report,
    energy_quantum,
    partition_average_series,
    reduced_energy,
)

SCENARIOS = ("erase-recover", "perpetual", "decohere", "determinism", "thermo", "witness")

DEFAULT_TOLERANCE = {
    "erase-recover": 1e-12,
    "perpetual": 4.0,
    "decohere": 1e-12,
    "determinism": 1e-12,
    "thermo": 1e-10,
    "witness": 1e-12,
}

LAMBDA_GRID = (0.0, 0.25, 0.5, 0.75, 1.0)
# below this x the series needs too many terms; a Taylor expansion stands in
SERIES_MIN_X = 1e-4

PARAMETER_ORDER = (
    "scenario", "seed", "trials", "dim", "shots", "lambda",
    "omega", "temperature", "units", "tolerance",
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    seed: int = 0
    trials: int = 1000
    dim: int = 2
    shots: int = 100_000
    lam: float = 1.0
    omega: float = 1.0
    temperature: float = 1.0
    units: str = "natural"
    tolerance: float | None = None

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.dim < 2:
            raise ValueError("dim must be at least 2")
        if self.shots < 1:
            raise ValueError("shots must be positive")
        if self.scenario == "perpetual" and self.shots < 100:
            raise ValueError("the perpetual scenario needs at least 100 shots")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lambda must lie in [0, 1]")
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise ValueError("omega must be positive")
        if not (self.temperature > 0 and math.isfinite(self.temperature)):
            raise ValueError("temperature must be positive")
        UnitSystem.from_label(self.units)
        if self.tolerance is not None and not math.isfinite(self.tolerance):
            raise ValueError("tolerance must be finite")

    @property
    def threshold(self) -> float:
        return DEFAULT_TOLERANCE[self.scenario] if self.tolerance is None else self.tolerance

    def parameters(self) -> dict[str, Any]:
        params = asdict(self)
        params["lambda"] = params.pop("lam")
        params["tolerance"] = self.threshold
        return {key: params[key] for key in PARAMETER_ORDER}


@dataclass
class ResultRecord:
    scenario: str
    kind: str
    index: int | None
    seed: int
    parameters: dict[str, Any]
    metrics: dict[str, float]
    passed: bool | None
    timestamp: str
    version: str = __version__
    rng: str = SeededRng.GENERATOR

    FIELD_ORDER = (
        "scenario", "kind", "index", "seed", "rng", "parameters",
        "metrics", "passed", "timestamp", "version",
    )

    def __post_init__(self):
        for key, value in self.metrics.items():
            if not math.isfinite(value):
                raise ValueError(f"metric {key!r} is not finite: {value!r}")

    def to_json(self) -> str:
        return _render({k: getattr(self, k) for k in self.FIELD_ORDER})


def _render(obj: Any) -> str:
    """JSON with floats written to 17 significant digits."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return json.dumps(obj)
    if isinstance(obj, float):
        # '#' keeps trailing zeros, so every value carries exactly 17 digits
        return format(obj, "#.17g")
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_render(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_render(v) for v in obj) + "]"
    raise TypeError(f"cannot render {type(obj).__name__}")


class _Builder:
    def __init__(self, config: ScenarioConfig):
        self.config = config
        self.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        self.records: list[ResultRecord] = []

    def trial(self, index: int, **metrics: float) -> None:
        self._add("trial", index, metrics, None)

    def summary(self, passed: bool, **metrics: float) -> None:
        self._add("summary", None, metrics, bool(passed))

    def _add(self, kind, index, metrics, passed):
        self.records.append(
            ResultRecord(
                scenario=self.config.scenario,
                kind=kind,
                index=index,
                seed=self.config.seed,
                parameters=self.config.parameters(),
                metrics={k: float(v) for k, v in metrics.items()},
                passed=passed,
                timestamp=self.timestamp,
            )
        )


def _erase_recover(cfg: ScenarioConfig, rng: SeededRng, out: _Builder) -> None:
    summary = roundtrip_sweep(cfg.trials, cfg.dim, rng)
    for i, f in enumerate(summary.values):
        out.trial(i, fidelity=f)
    out.summary(
        summary.min_fidelity >= 1.0 - cfg.threshold,
        n_trials=summary.n_trials,
        mean_fidelity=summary.mean_fidelity,
        min_fidelity=summary.min_fidelity,
        threshold=cfg.threshold,
    )


def _perpetual(cfg: ScenarioConfig, rng: SeededRng, out: _Builder) -> None:
    summary = irreversibility_sweep(cfg.trials, rng.child(0), cfg.dim)
    for i, f in enumerate(summary.values):
        out.trial(i, fidelity=f)
    plus = StateVector.from_amplitudes(np.ones(cfg.dim), normalize=True)
    report = measurement_statistics(plus, cfg.shots, rng.child(1))
    expected = haar_expected_recovery(cfg.dim)
    deviation = abs(summary.mean_fidelity - expected)
    bound = 4.0 * summary.std_fidelity / math.sqrt(summary.n_trials)
    out.summary(
        deviation <= bound and report.max_sigma_deviation <= cfg.threshold,
        n_trials=summary.n_trials,
        mean_fidelity=summary.mean_fidelity,
        min_fidelity=summary.min_fidelity,
        expected_mean=expected,
        mean_deviation=deviation,
        deviation_bound=bound,
        shots=report.shots,
        freq0_plus=report.frequency(0),
        max_sigma_deviation=report.max_sigma_deviation,
    )


def _decohere(cfg: ScenarioConfig, rng: SeededRng, out: _Builder) -> None:
    fids, law_gaps, eq_gaps = [], [], []
    violations = 0
    for i in range(cfg.trials):
        phi = haar_random_state(cfg.dim, rng)
        weights = np.abs(phi.amplitudes) ** 2
        predicted = (1.0 - cfg.lam) + cfg.lam * float(np.sum(weights**2))
        fid = attempt_recover(decohere_erase(phi, cfg.dim, cfg.lam)).fidelity_to_original
        curve = [
            attempt_recover(decohere_erase(phi, cfg.dim, lam)).fidelity_to_original
            for lam in LAMBDA_GRID
        ]
        violations += sum(b > a + 1e-12 for a, b in zip(curve, curve[1:]))
        gap = dephasing_equivalence_check(phi)
        fids.append(fid)
        law_gaps.append(abs(fid - predicted))
        eq_gaps.append(gap)
        out.trial(i, fidelity=fid, predicted_fidelity=predicted, equivalence_gap=gap)
    tol = cfg.threshold
    out.summary(
        max(law_gaps) <= tol and max(eq_gaps) <= tol and violations == 0,
        n_trials=cfg.trials,
        **{"lambda": cfg.lam},
        mean_fidelity=math.fsum(fids) / len(fids),
        min_fidelity=min(fids),
        max_law_gap=max(law_gaps),
        max_equivalence_gap=max(eq_gaps),
        monotone_violations=violations,
    )


def _determinism(cfg: ScenarioConfig, rng: SeededRng, out: _Builder) -> None:
    summary = determinism_sweep(cfg.trials, rng, cfg.dim)
    for i, g in enumerate(summary.values):
        out.trial(i, gap=g)
    out.summary(
        summary.max_gap <= cfg.threshold,
        n_trials=summary.n_trials,
        max_gap=summary.max_gap,
        threshold=cfg.threshold,
    )


def _taylor_ratio(x: float) -> float:
    # x / (e^x - 1) = 1 - x/2 + x^2/12 - x^4/720 + O(x^6)
    return 1.0 - x / 2.0 + x * x / 12.0 - x**4 / 720.0


def _thermo(cfg: ScenarioConfig, rng: SeededRng, out: _Builder) -> None:
    units = UnitSystem.from_label(cfg.units)
    mode = ThermalMode(cfg.omega, cfg.temperature, units)
    eps0 = energy_quantum(mode)
    x = reduced_energy(eps0, cfg.temperature, units)
    kT = classical_limit_energy(cfg.temperature, units)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", EnergyUnderflowWarning)
        avg = average_erasure_energy(eps0, cfg.temperature, units)
        report = dissipation_report(cfg.trials, mode)
    underflow = any(issubclass(w.category, EnergyUnderflowWarning) for w in caught)
    if x >= SERIES_MIN_X:
        oracle = partition_average_series(eps0, cfg.temperature, units)
    else:
        oracle = kT * _taylor_ratio(x)
    if underflow:
        # the closed form is pinned to 0; the oracle is below resolution too
        rel_gap = 0.0 if oracle < 1e-300 * max(eps0.value, 1.0) else 1.0
    else:
        rel_gap = abs(avg - oracle) / avg
    out.summary(
        rel_gap <= cfg.threshold and 0.0 <= avg < kT,
        eps0=eps0.value,
        x=x,
        avg_energy=avg,
        heat_dissipation=report.per_qubit,
        oracle_energy=oracle,
        oracle_rel_gap=rel_gap,
        classical_limit=kT,
        ratio_to_kT=avg / kT,
        n_qubits=cfg.trials,
        total_dissipation=report.total,
        underflow=float(underflow),
    )


def _witness(cfg: ScenarioConfig, rng: SeededRng, out: _Builder) -> None:
    d = cfg.dim
    zero = StateVector.basis(0, d)
    one = StateVector.basis(1, d)
    partial = StateVector.from_amplitudes([0.6, 0.8] + [0.0] * (d - 2))
    w_orth = nonunitarity_witness(zero, one)
    w_same = nonunitarity_witness(partial, partial)
    w_part = nonunitarity_witness(zero, partial)
    randoms = []
    for i in range(cfg.trials):
        a = haar_random_state(d, rng)
        b = haar_random_state(d, rng)
        w = nonunitarity_witness(a, b)
        randoms.append(w)
        out.trial(i, overlap_abs=abs(np.vdot(a.amplitudes, b.amplitudes)), witness=w)
    tol = cfg.threshold
    out.summary(
        abs(w_orth - 1.0) <= tol and abs(w_same) <= tol and abs(w_part - 0.4) <= tol
        and min(randoms) > 0.0,
        witness=w_orth,
        witness_identical=w_same,
        witness_partial=w_part,
        min_random_witness=min(randoms),
    )


_RUNNERS = {
    "erase-recover": _erase_recover,
    "perpetual": _perpetual,
    "decohere": _decohere,
    "determinism": _determinism,
    "thermo": _thermo,
    "witness": _witness,
}


def run_scenario(config: ScenarioConfig) -> list[ResultRecord]:
    """Run one scenario; the last record is the summary."""
    builder = _Builder(config)
    _RUNNERS[config.scenario](config, SeededRng(config.seed), builder)
    return builder.records


def emit_records(records: Iterable[ResultRecord], destination: str | IO[str] = "-") -> None:
    """Write one JSON object per line to a path, an open stream, or ``-`` for stdout."""
    lines = "".join(r.to_json() + "\n" for r in records)
    if hasattr(destination, "write"):
        destination.write(lines)
    elif destination == "-":
        sys.stdout.write(lines)
    else:
        with open(destination, "w", encoding="utf-8") as fh:
            fh.write(lines)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qerase", description="Seeded quantum-memory erasure scenarios (JSON lines output)"
    )
    parser.add_argument("--scenario", required=True, choices=SCENARIOS)
    parser.add_argument(
        "--seed",
        type=lambda value: int(value, 0),
        default=None,
        help="64-bit seed (decimal or 0x hex); QERASE_SEED is used when absent, else 0",
    )
    parser.add_argument("--trials", type=int, default=1000)
    parser.add_argument("--dim", type=int, default=2, help="memory dimension")
    parser.add_argument("--shots", type=int, default=100_000)
    parser.add_argument("--lambda", dest="lam", type=float, default=1.0, help="dephasing strength")
    parser.add_argument("--omega", type=float, default=1.0, help="angular frequency of the mode")
    parser.add_argument("--temperature", type=float, default=1.0)
    parser.add_argument("--units", choices=("natural", "SI"), default="natural")
    parser.add_argument(
        "--tolerance",
        type=float,
        default=None,
        help="override the scenario's pass threshold (see module docs for its meaning)",
    )
    parser.add_argument("--out", default="-", help="output path, '-' for stdout")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    seed = args.seed
    if seed is None:
        env = os.environ.get("QERASE_SEED")
        try:
            seed = int(env, 0) if env else 0
        except ValueError:
            parser.error(f"QERASE_SEED is not an integer: {env!r}")
    try:
        config = ScenarioConfig(
            scenario=args.scenario,
            seed=seed,
            trials=args.trials,
            dim=args.dim,
            shots=args.shots,
            lam=args.lam,
            omega=args.omega,
            temperature=args.temperature,
            units=args.units,
            tolerance=args.tolerance,
        )
    except ValueError as exc:
        parser.error(str(exc))
    records = run_scenario(config)
    try:
        emit_records(records, args.out)
    except OSError as exc:
        print(f"qerase: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK if records[-1].passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
