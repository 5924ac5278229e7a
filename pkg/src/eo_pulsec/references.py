"""Bundled all-to-all reference sequences, validated by the verifier on load."""

from __future__ import annotations

from pathlib import Path

from .pulses import LABELS, ExchangePulse, PulseSequence, read_library
from .router import ReferenceSequence
from .verifier import GATES, certify

BUNDLED = Path(__file__).with_name("data") / "references.jsonl"


class ReferenceError(ValueError):
    pass


def all_to_all_sequence(ref: ReferenceSequence) -> PulseSequence:
    """Place a reference on dots 0..5 holding A1..B3."""
    idx = {lab: i for i, lab in enumerate(LABELS)}
    spins = dict(enumerate(LABELS))
    pulses = tuple(ExchangePulse((idx[a], idx[b]), t) for a, b, t in ref.pulses)
    return PulseSequence(ref.gate, tuple(range(6)), pulses, spins, spins, None, meta=dict(ref.meta))


def validate_reference(seq: PulseSequence, where: str = "<reference>") -> None:
    if seq.gate not in GATES:
        raise ReferenceError(f"{where}: unknown gate {seq.gate!r}")
    cert = certify(seq, GATES[seq.gate])
    if not cert.ok:
        raise ReferenceError(f"{where}: {seq.gate} reference does not certify ({cert.status}, "
                             f"residual {cert.residual:.2e}, leakage {cert.leakage:.2e})")


def load_references(path: str | Path | None = None) -> dict[str, ReferenceSequence]:
    """Gate name -> reference; every record must certify as its gate."""
    path = Path(path) if path is not None else BUNDLED
    try:
        seqs = read_library(path)
    except FileNotFoundError:
        raise ReferenceError(f"reference file not found: {path}") from None
    except ValueError as exc:
        raise ReferenceError(str(exc)) from None
    out = {}
    for k, seq in enumerate(seqs, 1):
        validate_reference(seq, f"{path}:{k}")
        out[seq.gate] = ReferenceSequence.from_sequence(seq)
    return out


def reference(gate: str, path: str | Path | None = None) -> ReferenceSequence:
    refs = load_references(path)
    if gate not in refs:
        raise ReferenceError(f"no reference for gate {gate!r}; available: {sorted(refs)}")
    return refs[gate]
