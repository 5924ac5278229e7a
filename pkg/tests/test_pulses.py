import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eo_pulsec.pulses import (LABELS, ExchangePulse, PulseSequence, compute_layers, format_angle, fuse,
                              fuse_pulses, normalize_angle, parse_angle, pulse_unitary, pulses_unitary,
                              read_library, sequence_unitary, two_spin_unitary, write_library)

SPINS = dict(enumerate(LABELS))
pair_st = st.tuples(st.integers(0, 5), st.integers(0, 5)).filter(lambda p: p[0] != p[1])
angle_st = st.one_of(st.integers(0, 7).map(lambda k: k * math.pi / 4), st.floats(0.01, 6.2))
pulses_st = st.lists(st.builds(ExchangePulse, pair_st, angle_st), max_size=8)


def test_pi_pulse_is_swap():
    u = two_spin_unitary(math.pi)
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.allclose(u, 1j * swap)


def test_two_spin_unitary_form():
    th = 0.731
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.allclose(two_spin_unitary(th), math.cos(th / 2) * np.eye(4) + 1j * math.sin(th / 2) * swap)


@pytest.mark.parametrize("theta,expected", [(2 * math.pi, 0.0), (-math.pi / 2, 1.5 * math.pi),
                                            (math.pi / 4 + 1e-12, math.pi / 4), (9.0, 9.0 - 2 * math.pi)])
def test_normalize_angle(theta, expected):
    assert normalize_angle(theta) == pytest.approx(expected, abs=1e-15)


def test_angle_roundtrip_exact_for_quarter_multiples():
    for k in range(8):
        assert format_angle(k * math.pi / 4) == f"{k}/4"
        assert parse_angle(f"{k}/4") == k * math.pi / 4
    assert format_angle(1.0) == 1.0


def test_pair_is_sorted_and_distinct():
    assert ExchangePulse((4, 1), 1.0).pair == (1, 4)
    with pytest.raises(ValueError):
        ExchangePulse((2, 2), 1.0)


def test_layers_asap():
    ps = [ExchangePulse((0, 1), 1), ExchangePulse((2, 3), 1), ExchangePulse((1, 2), 1), ExchangePulse((4, 5), 1)]
    assert compute_layers(ps) == [[0, 1, 3], [2]]


@settings(max_examples=60, deadline=None)
@given(pulses_st)
def test_fusion_preserves_unitary(pulses):
    fused, phase = fuse_pulses(pulses)
    dots = tuple(range(6))
    assert len(fused) <= len(pulses)
    assert np.allclose(pulses_unitary(pulses, dots), phase * pulses_unitary(fused, dots), atol=1e-10)


def test_fusion_removes_cancelling_pair():
    ps = [ExchangePulse((0, 1), 1.0), ExchangePulse((0, 1), 2 * math.pi - 1.0)]
    fused, phase = fuse_pulses(ps)
    assert fused == []
    assert phase == -1


def test_fusion_exposes_older_pulses():
    ps = [ExchangePulse((0, 1), 1.0), ExchangePulse((1, 2), 0.5), ExchangePulse((1, 2), -0.5),
          ExchangePulse((0, 1), 0.25)]
    fused, _ = fuse_pulses(ps)
    assert [p.pair for p in fused] == [(0, 1)]
    assert fused[0].theta == pytest.approx(1.25)


def test_pulse_unitary_is_unitary():
    u = pulse_unitary(ExchangePulse((1, 4), 0.3), tuple(range(6)))
    assert np.allclose(u.conj().T @ u, np.eye(64))


def test_inverse_cancels():
    seq = PulseSequence("x", tuple(range(6)), (ExchangePulse((0, 1), 0.4), ExchangePulse((1, 3), 2.2)), SPINS, SPINS)
    u = sequence_unitary(seq)
    assert np.allclose(sequence_unitary(seq.inverse()) @ u, np.eye(64))


def test_library_roundtrip(tmp_path):
    seq = PulseSequence("cx", (3, 1, 4, 0, 5, 2), (ExchangePulse((3, 1), math.pi / 2), ExchangePulse((0, 5), 0.123456789)),
                        {3: "A1", 1: "A2", 4: "A3", 0: "B1", 5: "B2", 2: "B3"},
                        {3: "A2", 1: "A1", 4: "A3", 0: "B1", 5: "B2", 2: "B3"}, "topo", -1.0 + 0j, {"k": 1})
    path = tmp_path / "lib.jsonl"
    write_library(path, [seq, fuse(seq)])
    back = read_library(path)
    assert back[0] == seq
    assert back[0].phase == -1


def test_library_error_names_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"gate": "cx"}\n')
    with pytest.raises(ValueError, match="bad.jsonl:1"):
        read_library(path)
