"""Certification of pulse sequences against logical two-qubit gates on the DFS encoding.

Each exchange-only qubit lives in three spins. Logical |0> puts spins 1,2 in a
singlet, logical |1> puts them in the j12 = 1 triplet; spin 3 (the gauge)
completes a total spin-1/2 doublet whose m = +-1/2 is the gauge degree of freedom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .pulses import LABELS, PulseSequence, sequence_unitary

EXACT_TOL = 1e-8

CX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
CZ = np.diag([1, 1, 1, -1]).astype(complex)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
ISWAP = np.array([[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=complex)
CXSWAP = SWAP @ CX
IDENTITY = np.eye(4, dtype=complex)

GATES: dict[str, np.ndarray] = {
    "cx": CX,
    "cz": CZ,
    "iswap": ISWAP,
    "swap": SWAP,
    "cxswap": CXSWAP,
    "lccx": CX,
    "lccz": CZ,
    "id": IDENTITY,
}


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def _single_qubit_states() -> np.ndarray:
    """8x4 matrix of |q, m> on three spins (columns q0m+, q0m-, q1m+, q1m-); basis bit 0 = up."""
    def ket(bits: str) -> np.ndarray:
        v = np.zeros(8)
        v[int(bits.replace("u", "0").replace("d", "1"), 2)] = 1.0
        return v

    zero_up = (ket("udu") - ket("duu")) / math.sqrt(2)
    t0_up = (ket("udu") + ket("duu")) / math.sqrt(2)
    one_up = math.sqrt(2 / 3) * ket("uud") - math.sqrt(1 / 3) * t0_up

    lower = np.zeros((8, 8))
    for b in range(8):
        for k in range(3):
            bit = 1 << (2 - k)
            if not b & bit:
                lower[b | bit, b] = 1.0
    zero_dn = lower @ zero_up
    one_dn = lower @ one_up
    zero_dn /= np.linalg.norm(zero_dn)
    one_dn /= np.linalg.norm(one_dn)
    return np.stack([zero_up, zero_dn, one_up, one_dn], axis=1)


_QUBIT_STATES = _single_qubit_states()


@dataclass(frozen=True)
class EncodedBasis:
    """64x16 isometry; column index = qA*8 + qB*4 + mA*2 + mB (m = 0 is +1/2)."""

    spin_map: Mapping[int, str]
    dots: tuple[int, ...]
    matrix: np.ndarray


def build_encoded_basis(spin_map: Mapping[int, str], dots: Sequence[int] | None = None) -> EncodedBasis:
    dots = tuple(dots) if dots is not None else tuple(sorted(spin_map))
    labels = [spin_map[d] for d in dots]
    if sorted(labels) != sorted(LABELS):
        raise ValueError(f"spin map is not a bijection onto {LABELS}: {dict(spin_map)}")
    # columns ordered (qA, mA, qB, mB) in the raw kron; reorder to (qA, qB, mA, mB)
    raw = np.kron(_QUBIT_STATES, _QUBIT_STATES).reshape((2,) * 6 + (2, 2, 2, 2))
    raw = raw.transpose(*range(6), 6, 8, 7, 9).reshape((2,) * 6 + (16,))
    axes = [LABELS.index(lab) for lab in labels]
    mat = raw.transpose(*axes, 6).reshape(64, 16)
    return EncodedBasis(dict(spin_map), dots, mat.astype(complex))


def output_roles(seq: PulseSequence) -> dict[int, str]:
    """Encoding roles of each dot after the sequence.

    The qubit is the one the dot belonged to initially and the spin index is that
    of the label now sitting there, so intraqubit shuffles change the encoding
    while a complete A<->B exchange shows up as a logical SWAP.
    """
    return {d: seq.initial_map[d][0] + seq.final_map[d][1] for d in seq.dots}


def coded_block(seq: PulseSequence, unitary: np.ndarray | None = None) -> np.ndarray:
    """16x16 matrix B_out^dag U B_in of the sequence (or of ``unitary``) on the coded space."""
    u = sequence_unitary(seq) if unitary is None else unitary
    roles = output_roles(seq)
    if sorted(roles.values()) != sorted(LABELS):
        # final map mixes the qubits; nothing in the coded space survives
        return np.zeros((16, 16), dtype=complex)
    b_in = build_encoded_basis(seq.initial_map, seq.dots).matrix
    b_out = build_encoded_basis(roles, seq.dots).matrix
    return b_out.conj().T @ u @ b_in


@dataclass
class GateCertificate:
    status: str
    leakage: float
    residual: float
    phase: complex
    gauge_factor: np.ndarray
    logical: np.ndarray

    @property
    def ok(self) -> bool:
        return self.status in ("exact", "exact_up_to_phase")

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "leakage": float(self.leakage),
            "residual": float(self.residual),
            "phase": [float(self.phase.real), float(self.phase.imag)],
            "gauge_factor": [[[float(z.real), float(z.imag)] for z in row] for row in self.gauge_factor],
        }


def leakage_of(block: np.ndarray) -> float:
    return max(0.0, 1.0 - float(np.vdot(block, block).real) / block.shape[1])


def kron_factor(block: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Best approximation block ~ V (x) G with V 4x4 logical, G 4x4 gauge.

    V is scaled unitary-like (Frobenius norm 2) and the returned residual is the
    relative Frobenius distance of the rank-1 Kronecker fit.
    """
    r = block.reshape(4, 4, 4, 4).transpose(0, 2, 1, 3).reshape(16, 16)
    u, s, vh = np.linalg.svd(r)
    norm = math.sqrt(float(np.sum(s**2))) or 1.0
    v = u[:, 0].reshape(4, 4) * 2.0
    g = vh[0].reshape(4, 4) * s[0] / 2.0
    resid = math.sqrt(max(0.0, 1.0 - (s[0] / norm) ** 2))
    return v, g, resid


def certify(seq: PulseSequence, target: np.ndarray | str, tol: float = EXACT_TOL,
            unitary: np.ndarray | None = None) -> GateCertificate:
    target = GATES[target] if isinstance(target, str) else np.asarray(target, dtype=complex)
    m = coded_block(seq, unitary)
    leak = leakage_of(m)
    i, j = np.unravel_index(np.argmax(np.abs(target)), target.shape)
    g = m[4 * i:4 * i + 4, 4 * j:4 * j + 4] / target[i, j]
    recon = np.kron(target, g)
    mnorm = np.linalg.norm(m) or 1.0
    resid = float(np.linalg.norm(m - recon) / mnorm)
    phase = g[0, 0] / abs(g[0, 0]) if abs(g[0, 0]) > 1e-12 else 1.0 + 0.0j
    if leak < tol and resid < tol:
        status = "exact" if abs(phase - 1) < tol and np.allclose(g / phase, np.eye(4), atol=1e-6) \
            else "exact_up_to_phase"
        return GateCertificate(status, leak, resid, complex(phase), g / phase, target * phase)

    v, gk, kres = kron_factor(m)
    status = "fail"
    if leak < tol and kres < tol:
        if np.allclose(local_invariants(_to_unitary(v)), local_invariants(target), atol=1e-6):
            status = "locally_equivalent"
    return GateCertificate(status, leak, resid, complex(phase), gk, v)


def _to_unitary(v: np.ndarray) -> np.ndarray:
    u, _, vh = np.linalg.svd(v)
    return u @ vh


def logical_action(seq: PulseSequence, unitary: np.ndarray | None = None) -> np.ndarray:
    """Logical 4x4 gate of a leakage-free, gauge-independent sequence (phase fixed by the ++ gauge sector)."""
    m = coded_block(seq, unitary)
    v, g, _ = kron_factor(m)
    v = v * g[0, 0] / abs(g[0, 0]) if abs(g[0, 0]) > 1e-12 else v
    return v


def gauge_blocks(seq: PulseSequence) -> list[np.ndarray]:
    """Logical 4x4 blocks for the four diagonal gauge sectors (mA, mB)."""
    m = coded_block(seq).reshape(4, 4, 4, 4)
    return [m[:, g, :, g] for g in range(4)]


_MAGIC = np.array([[1, 0, 0, 1j], [0, 1j, 1, 0], [0, 1j, -1, 0], [1, 0, 0, -1j]], dtype=complex) / math.sqrt(2)


def local_invariants(u: np.ndarray) -> tuple[complex, float]:
    """Makhlin invariants (G1, G2) of a two-qubit unitary."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (4, 4):
        raise ValueError("local invariants need a 4x4 matrix")
    if not np.allclose(u.conj().T @ u, np.eye(4), atol=1e-9):
        raise ValueError("local invariants need a unitary matrix")
    ub = _MAGIC.conj().T @ u @ _MAGIC
    m = ub.T @ ub
    det = np.linalg.det(u)
    tr = np.trace(m)
    g1 = tr**2 / (16 * det)
    g2 = (tr**2 - np.trace(m @ m)) / (4 * det)
    return complex(g1), float(np.real(g2))


def is_permutation_matrix(p: np.ndarray) -> bool:
    p = np.asarray(p)
    return bool(p.ndim == 2 and p.shape[0] == p.shape[1]
                and np.all((p == 0) | (p == 1))
                and np.all(p.sum(axis=0) == 1) and np.all(p.sum(axis=1) == 1))


def truth_table_overlap(p_meas: np.ndarray, p_ideal: np.ndarray) -> float:
    """Tr(P_meas P_ideal^-1) / 2^n for column-stochastic P_meas and permutation P_ideal."""
    p_meas = np.asarray(p_meas, dtype=float)
    p_ideal = np.asarray(p_ideal)
    if not is_permutation_matrix(p_ideal):
        raise ValueError("ideal truth table not invertible as permutation")
    if p_meas.shape != p_ideal.shape:
        raise ValueError(f"shape mismatch {p_meas.shape} vs {p_ideal.shape}")
    if not np.allclose(p_meas.sum(axis=0), 1.0, atol=1e-9):
        raise ValueError("measured truth table columns must sum to 1")
    return float(np.trace(p_meas @ p_ideal.T)) / p_meas.shape[0]


def ideal_truth_table(gate: np.ndarray) -> np.ndarray:
    return (np.abs(np.asarray(gate)) ** 2).round(12)


def simulate_truth_table(seq: PulseSequence, gauge_config: tuple[int, int] = (0, 0),
                         unitary: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Computational-basis transfer matrix P[out, in] for one gauge sector.

    ``gauge_config`` gives (mA, mB) with 0 meaning m=+1/2. Leaked population is
    dropped and each column renormalized; the raw leakage per input is returned
    alongside.
    """
    m = coded_block(seq, unitary)
    g = gauge_config[0] * 2 + gauge_config[1]
    cols = [4 * q + g for q in range(4)]
    amps = m[:, cols].reshape(4, 4, 4)  # (q_out, gauge_out, q_in)
    probs = np.sum(np.abs(amps) ** 2, axis=1)
    kept = probs.sum(axis=0)
    leak = 1.0 - kept
    return probs / np.where(kept > 0, kept, 1.0), leak
