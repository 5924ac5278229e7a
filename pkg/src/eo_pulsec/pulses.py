"""Exchange pulses, pulse sequences, fusion, layering and the sequence library format."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

LABELS: tuple[str, ...] = ("A1", "A2", "A3", "B1", "B2", "B3")
TWO_PI = 2.0 * math.pi
# angles closer than this to a multiple of pi/4 are snapped onto it
_SNAP_TOL = 1e-9


def label_qubit(label: str) -> str:
    return label[0]


def label_index(label: str) -> int:
    return int(label[1])


def swap_qubit_letter(label: str) -> str:
    return ("B" if label[0] == "A" else "A") + label[1]


def normalize_angle(theta: float) -> float:
    """Reduce ``theta`` into [0, 2pi), snapping near multiples of pi/4 onto them exactly."""
    theta = math.fmod(float(theta), TWO_PI)
    if theta < 0:
        theta += TWO_PI
    k = round(theta / (math.pi / 4))
    if abs(theta - k * math.pi / 4) < _SNAP_TOL:
        theta = (k % 8) * math.pi / 4
    return theta


def wraps(theta_sum: float) -> int:
    """Number of 2pi wraps removed when ``theta_sum`` is normalized (each wrap is a -1 phase)."""
    return int(math.floor((theta_sum + _SNAP_TOL) / TWO_PI))


def format_angle(theta: float) -> str | float:
    """Serialize an angle as ``"k/4"`` (units of pi) when exact, else as float radians."""
    k = theta / (math.pi / 4)
    if abs(k - round(k)) < _SNAP_TOL:
        return f"{int(round(k))}/4"
    return float(theta)


def parse_angle(value: str | float | int) -> float:
    if isinstance(value, str):
        return normalize_angle(float(Fraction(value)) * math.pi)
    return normalize_angle(float(value))


def _pair(a: int, b: int) -> tuple[int, int]:
    if a == b:
        raise ValueError(f"exchange pulse needs two distinct dots, got ({a}, {b})")
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class ExchangePulse:
    pair: tuple[int, int]
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "pair", _pair(*self.pair))
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    def touches(self, dot: int) -> bool:
        return dot in self.pair


@dataclass(frozen=True)
class PulseSequence:
    """Ordered exchange pulses acting on dots, with the spin maps before and after.

    ``dots`` fixes the tensor-factor order used for simulation (first dot is the
    most significant qubit of the 64-dim spin space). ``phase`` is the global
    phase accumulated by fusion, so that ``phase * sequence_unitary`` is the
    unitary of the unfused pulses.
    """

    gate: str
    dots: tuple[int, ...]
    pulses: tuple[ExchangePulse, ...]
    initial_map: Mapping[int, str]
    final_map: Mapping[int, str]
    topology: str | None = None
    phase: complex = 1.0 + 0.0j
    meta: Mapping[str, object] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.pulses)

    @property
    def layers(self) -> list[list[int]]:
        return compute_layers(self.pulses)

    @property
    def depth(self) -> int:
        return len(compute_layers(self.pulses))

    def inverse(self) -> "PulseSequence":
        inv = tuple(ExchangePulse(p.pair, -p.theta) for p in reversed(self.pulses))
        return replace(self, pulses=inv, initial_map=self.final_map, final_map=self.initial_map,
                       phase=np.conj(self.phase))

    def with_pulses(self, pulses: Iterable[ExchangePulse], **changes) -> "PulseSequence":
        return replace(self, pulses=tuple(pulses), **changes)


def compute_layers(pulses: Sequence[ExchangePulse]) -> list[list[int]]:
    """ASAP layering: each pulse goes one layer after the latest earlier pulse sharing a dot."""
    last: dict[int, int] = {}
    layers: list[list[int]] = []
    for i, p in enumerate(pulses):
        a, b = p.pair
        k = max(last.get(a, -1), last.get(b, -1)) + 1
        if k == len(layers):
            layers.append([])
        layers[k].append(i)
        last[a] = last[b] = k
    return layers


def fuse_pulses(pulses: Sequence[ExchangePulse]) -> tuple[list[ExchangePulse], complex]:
    """Merge same-pair pulses with no intervening pulse on either dot, until nothing changes.

    Returns the fused list and the phase ``c`` such that U(original) = c * U(fused).
    """
    out: list[ExchangePulse | None] = list(pulses)
    phase = 1.0 + 0.0j
    changed = True
    while changed:
        changed = False
        last: dict[int, int] = {}
        for i, p in enumerate(out):
            if p is None:
                continue
            a, b = p.pair
            j = last.get(a)
            if j is not None and j == last.get(b) and out[j].pair == p.pair:
                total = out[j].theta + p.theta
                if wraps(total) % 2:
                    phase = -phase
                merged = normalize_angle(total)
                out[i] = None
                changed = True
                if merged == 0.0:
                    out[j] = None
                    break  # dots a, b now expose older pulses; rescan
                out[j] = ExchangePulse(p.pair, merged)
                continue
            last[a] = last[b] = i
        out = [p for p in out if p is not None]
    return out, phase


def fuse(seq: PulseSequence) -> PulseSequence:
    pulses, phase = fuse_pulses(seq.pulses)
    return replace(seq, pulses=tuple(pulses), phase=seq.phase * phase)


def two_spin_unitary(theta: float) -> np.ndarray:
    """cos(theta/2) I + i sin(theta/2) SWAP on two spins (basis uu, ud, du, dd)."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    u = np.zeros((4, 4), dtype=complex)
    u[0, 0] = u[3, 3] = c + 1j * s
    u[1, 1] = u[2, 2] = c
    u[1, 2] = u[2, 1] = 1j * s
    return u


@lru_cache(maxsize=None)
def swap_permutation(n: int, i: int, j: int) -> np.ndarray:
    """Basis permutation of SWAP between tensor positions i and j of n spins (position 0 = MSB)."""
    idx = np.arange(2**n)
    bi = (idx >> (n - 1 - i)) & 1
    bj = (idx >> (n - 1 - j)) & 1
    diff = bi ^ bj
    return idx ^ (diff << (n - 1 - i)) ^ (diff << (n - 1 - j))


def apply_pulse(u: np.ndarray, pos: tuple[int, int], theta: float, n: int = 6) -> np.ndarray:
    """Left-multiply ``u`` by the partial swap on tensor positions ``pos``."""
    perm = swap_permutation(n, *pos)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return c * u + 1j * s * u[perm]


def pulse_unitary(pulse: ExchangePulse, dots: Sequence[int]) -> np.ndarray:
    n = len(dots)
    index = {d: k for k, d in enumerate(dots)}
    pos = (index[pulse.pair[0]], index[pulse.pair[1]])
    return apply_pulse(np.eye(2**n, dtype=complex), pos, pulse.theta, n)


def pulses_unitary(pulses: Iterable[ExchangePulse], dots: Sequence[int]) -> np.ndarray:
    n = len(dots)
    index = {d: k for k, d in enumerate(dots)}
    u = np.eye(2**n, dtype=complex)
    for p in pulses:
        u = apply_pulse(u, (index[p.pair[0]], index[p.pair[1]]), p.theta, n)
    return u


def sequence_unitary(seq: PulseSequence) -> np.ndarray:
    """Ordered product of the pulse unitaries (first pulse acts first). Excludes ``seq.phase``."""
    return pulses_unitary(seq.pulses, seq.dots)


# ---------------------------------------------------------------- library I/O


def to_record(seq: PulseSequence) -> dict:
    meta = dict(seq.meta)
    if abs(seq.phase - 1) > 1e-12:
        meta["phase"] = [float(np.real(seq.phase)), float(np.imag(seq.phase))]
    return {
        "gate": seq.gate,
        "topology": seq.topology,
        "dots": list(seq.dots),
        "initial_spins": {str(d): seq.initial_map[d] for d in seq.dots},
        "final_spins": {str(d): seq.final_map[d] for d in seq.dots},
        "pulses": [[p.pair[0], p.pair[1], format_angle(p.theta)] for p in seq.pulses],
        "layers": seq.layers,
        "meta": meta,
    }


def from_record(rec: Mapping) -> PulseSequence:
    try:
        initial = {int(k): v for k, v in rec["initial_spins"].items()}
        final = {int(k): v for k, v in rec["final_spins"].items()}
        dots = tuple(rec.get("dots") or sorted(initial))
        pulses = tuple(ExchangePulse((int(a), int(b)), parse_angle(t)) for a, b, t in rec["pulses"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed sequence record: {exc}") from exc
    meta = dict(rec.get("meta") or {})
    phase = complex(*meta.pop("phase")) if "phase" in meta else 1.0 + 0.0j
    return PulseSequence(rec["gate"], dots, pulses, initial, final, rec.get("topology"), phase, meta)


def write_library(path: str | Path, seqs: Iterable[PulseSequence]) -> None:
    with open(path, "w") as fh:
        for s in seqs:
            fh.write(json.dumps(to_record(s), sort_keys=True) + "\n")


def read_library(path: str | Path) -> list[PulseSequence]:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(from_record(json.loads(line)))
            except (ValueError, json.JSONDecodeError) as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from exc
    return out
