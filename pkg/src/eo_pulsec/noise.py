"""Quasi-static Monte-Carlo simulation of timed pulse schedules on six spins.

Each shot draws one Zeeman offset per spin and one fractional exchange error
per dot pair, holds them fixed for the whole schedule, and integrates the
piecewise-constant Hamiltonian step by step. Exchange amplitudes are chosen so
that a noiseless step reproduces the ideal partial swaps exactly (up to phase).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .pulses import ExchangePulse, PulseSequence, compute_layers, swap_permutation
from .verifier import GATES, certify, coded_block, leakage_of

N_SPINS = 6
DIM = 2**N_SPINS


class NoiseError(ValueError):
    pass


@dataclass(frozen=True)
class NoiseModel:
    T2_star: float = math.inf
    delta_J: float = 0.0
    t_pulse: float = 1.0
    epsilon_z: float = 0.0
    shots: int = 20
    seed: int = 0

    def __post_init__(self):
        if not self.T2_star > 0:
            raise NoiseError("T2_star must be positive")
        if self.delta_J < 0:
            raise NoiseError("delta_J must be non-negative")
        if not self.t_pulse > 0:
            raise NoiseError("t_pulse must be positive")
        if self.shots < 1:
            raise NoiseError("shots must be at least 1")

    @property
    def zeeman_sigma(self) -> float:
        return math.sqrt(2.0) / self.T2_star


@dataclass(frozen=True)
class TimedSchedule:
    """Steps of disjoint pulses on a six-dot register; every step lasts one t_pulse."""

    dots: tuple[int, ...]
    steps: tuple[tuple[ExchangePulse, ...], ...]
    initial_map: Mapping[int, str]
    final_map: Mapping[int, str]
    gate: str = ""
    topology: str | None = None
    meta: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        for k, step in enumerate(self.steps):
            used = [d for p in step for d in p.pair]
            if len(used) != len(set(used)):
                raise NoiseError(f"overlapping pulses in step {k}")

    @property
    def duration(self) -> int:
        return len(self.steps)

    @property
    def pulse_count(self) -> int:
        return sum(len(s) for s in self.steps)

    def idle(self, k: int) -> list[int]:
        busy = {d for p in self.steps[k] for d in p.pair}
        return [d for d in self.dots if d not in busy]

    def as_sequence(self) -> PulseSequence:
        pulses = tuple(p for s in self.steps for p in s)
        return PulseSequence(self.gate, self.dots, pulses, self.initial_map, self.final_map, self.topology)

    @classmethod
    def from_sequence(cls, seq: PulseSequence) -> "TimedSchedule":
        """Fully parallel schedule: one step per layer."""
        steps = tuple(tuple(seq.pulses[i] for i in layer) for layer in compute_layers(seq.pulses))
        return cls(seq.dots, steps, dict(seq.initial_map), dict(seq.final_map), seq.gate, seq.topology)

    @classmethod
    def serial(cls, seq: PulseSequence) -> "TimedSchedule":
        return cls(seq.dots, tuple((p,) for p in seq.pulses), dict(seq.initial_map), dict(seq.final_map),
                   seq.gate, seq.topology)


@dataclass(frozen=True)
class NoiseInstance:
    zeeman: np.ndarray  # offset per tensor position, rad/s
    exchange: Mapping[tuple[int, int], float]  # fractional error per dot pair


def sample_instance(model: NoiseModel, rng: np.random.Generator, dots: Sequence[int] = tuple(range(6))) -> NoiseInstance:
    """Draw one shot: N(0, sqrt(2)/T2*) per spin, N(0, delta_J) per dot pair."""
    z = rng.normal(0.0, model.zeeman_sigma, len(dots)) if math.isfinite(model.T2_star) else np.zeros(len(dots))
    pairs = list(itertools.combinations(sorted(dots), 2))
    dj = rng.normal(0.0, model.delta_J, len(pairs)) if model.delta_J > 0 else np.zeros(len(pairs))
    return NoiseInstance(z, dict(zip(pairs, dj.tolist())))


def zero_instance(dots: Sequence[int] = tuple(range(6))) -> NoiseInstance:
    return NoiseInstance(np.zeros(len(dots)), {p: 0.0 for p in itertools.combinations(sorted(dots), 2)})


# ---------------------------------------------------------------- operators


@lru_cache(maxsize=1)
def _sz_diagonals() -> np.ndarray:
    """SZ[i] = diagonal of S_i^z (bit 0 = up => +1/2)."""
    idx = np.arange(DIM)
    return np.stack([0.5 - ((idx >> (N_SPINS - 1 - i)) & 1) for i in range(N_SPINS)]).astype(float)


@lru_cache(maxsize=1)
def _sectors() -> list[np.ndarray]:
    total = _sz_diagonals().sum(axis=0)
    return [np.flatnonzero(np.isclose(total, m)) for m in np.unique(total)]


@lru_cache(maxsize=None)
def _dot_product(i: int, j: int) -> np.ndarray:
    """S_i . S_j = (SWAP_ij - 1/2) / 2."""
    m = np.eye(DIM)[swap_permutation(N_SPINS, i, j)]
    return (m - 0.5 * np.eye(DIM)) / 2.0


def step_hamiltonian(step: Sequence[ExchangePulse], index: Mapping[int, int], inst: NoiseInstance,
                     model: NoiseModel) -> np.ndarray:
    """Hamiltonian (rad/s) of one step; exchange enters as -J S.S with J t_pulse = theta."""
    h = np.diag((model.epsilon_z + inst.zeeman) @ _sz_diagonals())
    for p in step:
        j = p.theta / model.t_pulse * (1.0 + inst.exchange.get(p.pair, 0.0))
        h = h - j * _dot_product(index[p.pair[0]], index[p.pair[1]])
    return h


def _expm_hermitian(h: np.ndarray, t: float) -> np.ndarray:
    """exp(-i h t) using the conserved total S_z to block-diagonalize."""
    u = np.zeros((DIM, DIM), dtype=complex)
    for idx in _sectors():
        block = h[np.ix_(idx, idx)]
        w, v = np.linalg.eigh(block)
        u[np.ix_(idx, idx)] = (v * np.exp(-1j * w * t)) @ v.conj().T
    return u


def evolve(schedule: TimedSchedule, inst: NoiseInstance, model: NoiseModel) -> np.ndarray:
    index = {d: k for k, d in enumerate(schedule.dots)}
    u = np.eye(DIM, dtype=complex)
    for step in schedule.steps:
        u = _expm_hermitian(step_hamiltonian(step, index, inst, model), model.t_pulse) @ u
    return u


# ---------------------------------------------------------------- fidelity


@dataclass(frozen=True)
class InfidelityResult:
    infidelity: float
    leakage: float
    unitary_error: float
    stderr: float
    shots: int


def average_gate_fidelity(m: np.ndarray, t: np.ndarray) -> float:
    d = t.shape[0]
    return (abs(np.trace(t.conj().T @ m)) ** 2 + d) / (d * (d + 1))


def gate_infidelity(schedule: TimedSchedule, model: NoiseModel, target: np.ndarray | str,
                    rng: np.random.Generator | None = None) -> InfidelityResult:
    """Mean of leakage + unitary error over ``model.shots`` quasi-static instances."""
    target = GATES[target] if isinstance(target, str) else np.asarray(target, dtype=complex)
    seq = schedule.as_sequence()
    ideal = evolve(schedule, zero_instance(schedule.dots), model)
    cert = certify(seq, target, unitary=ideal)
    if not cert.ok:
        raise NoiseError("schedule does not implement target")
    ref = np.kron(cert.logical, cert.gauge_factor)
    rng = rng if rng is not None else np.random.default_rng(model.seed)
    per_shot = np.zeros((model.shots, 2))
    for s in range(model.shots):
        inst = sample_instance(model, rng, schedule.dots)
        m = coded_block(seq, evolve(schedule, inst, model))
        leak = leakage_of(m)
        kept = max(1.0 - leak, 1e-300)
        per_shot[s] = leak, 1.0 - average_gate_fidelity(m / math.sqrt(kept), ref)
    totals = per_shot.sum(axis=1)
    err = float(totals.std(ddof=1) / math.sqrt(model.shots)) if model.shots > 1 else 0.0
    return InfidelityResult(float(totals.mean()), float(per_shot[:, 0].mean()), float(per_shot[:, 1].mean()),
                            err, model.shots)


NOISE_HEADER = ("gate", "topology", "schedule_duration_steps", "pulse_count", "t_pulse_over_T2", "delta_J",
                "infidelity", "leakage", "stderr", "shots", "seed")


def noise_row(schedule: TimedSchedule, model: NoiseModel, res: InfidelityResult) -> tuple:
    ratio = model.t_pulse / model.T2_star if math.isfinite(model.T2_star) else 0.0
    return (schedule.gate, schedule.topology or "", schedule.duration, schedule.pulse_count, f"{ratio:.6g}",
            f"{model.delta_J:.6g}", f"{res.infidelity:.6e}", f"{res.leakage:.6e}", f"{res.stderr:.6e}",
            res.shots, model.seed)
