import itertools
import math

import numpy as np
import pytest
from scipy.stats import unitary_group

from eo_pulsec.pulses import LABELS, ExchangePulse, PulseSequence
from eo_pulsec.verifier import (CX, CZ, GATES, ISWAP, SWAP, build_encoded_basis, certify, coded_block,
                                ideal_truth_table, is_permutation_matrix, kron_factor, leakage_of,
                                local_invariants, logical_action, rz, simulate_truth_table,
                                truth_table_overlap)

SPINS = dict(enumerate(LABELS))


def seq_of(pairs_angles, gate="x", final=None):
    pulses = tuple(ExchangePulse(p, t) for p, t in pairs_angles)
    return PulseSequence(gate, tuple(range(6)), pulses, SPINS, final or SPINS)


def test_encoded_basis_orthonormal():
    b = build_encoded_basis(SPINS).matrix
    assert np.abs(b.conj().T @ b - np.eye(16)).max() < 1e-12


@pytest.mark.parametrize("perm", list(itertools.islice(itertools.permutations(LABELS), 0, 720, 97)))
def test_encoded_basis_orthonormal_any_map(perm):
    b = build_encoded_basis(dict(enumerate(perm))).matrix
    assert np.abs(b.conj().T @ b - np.eye(16)).max() < 1e-12


def test_logical_value_is_spin12_pair_state():
    # logical 0 is the (1,2) singlet with S1.S2 = -3/4, logical 1 the triplet with +1/4
    from eo_pulsec.noise import _dot_product
    b = build_encoded_basis(SPINS).matrix
    s12 = _dot_product(0, 1)
    v = b[:, 0]
    assert np.allclose(s12 @ v, -0.75 * v)
    v1 = b[:, 8]  # qA = 1
    assert np.allclose(s12 @ v1, 0.25 * v1)


def test_spin_map_must_be_bijection():
    with pytest.raises(ValueError):
        build_encoded_basis({0: "A1", 1: "A1", 2: "A3", 3: "B1", 4: "B2", 5: "B3"})


@pytest.mark.parametrize("theta", np.linspace(0, 2 * np.pi, 16, endpoint=False))
@pytest.mark.parametrize("pair,qubit", [((0, 1), "A"), ((3, 4), "B")])
def test_encoded_z_rotation_law(theta, pair, qubit):
    u = logical_action(seq_of([(pair, theta)]))
    single = rz(theta)
    expected = np.kron(single, np.eye(2)) if qubit == "A" else np.kron(np.eye(2), single)
    ph = np.vdot(expected, u) / abs(np.vdot(expected, u))
    assert np.abs(u - ph * expected).max() < 1e-9


def test_identity_certifies_exact():
    cert = certify(seq_of([]), "id")
    assert cert.status == "exact" and cert.ok


def test_interqubit_pi_pulse_leaks():
    block = coded_block(seq_of([((2, 3), math.pi / 2)]))
    assert leakage_of(block) > 0.1
    assert certify(seq_of([((2, 3), math.pi / 2)]), CX).status == "fail"


def test_full_spin_exchange_is_logical_swap():
    s = seq_of([((0, 3), math.pi), ((1, 4), math.pi), ((2, 5), math.pi)])
    assert certify(s, SWAP).ok


def test_bundled_cx_is_exact(refs):
    from eo_pulsec.references import all_to_all_sequence
    seq = all_to_all_sequence(refs["cx"])
    assert len(seq) == 16
    cert = certify(seq, CX)
    assert cert.status == "exact"
    assert cert.leakage < 1e-12 and cert.residual < 1e-9


def test_local_dressing_gives_locally_equivalent(refs):
    from eo_pulsec.references import all_to_all_sequence
    base = all_to_all_sequence(refs["cx"])
    dressed = base.with_pulses((ExchangePulse((0, 1), 0.3),) + base.pulses + (ExchangePulse((4, 5), 1.1),))
    assert certify(dressed, CX).status == "locally_equivalent"
    assert certify(dressed, ISWAP).status == "fail"


def test_wrong_target_fails(refs):
    from eo_pulsec.references import all_to_all_sequence
    assert certify(all_to_all_sequence(refs["cx"]), SWAP).status == "fail"


def test_makhlin_invariants_of_known_gates():
    g1, g2 = local_invariants(CX)
    assert abs(g1) < 1e-12 and g2 == pytest.approx(1.0)
    assert local_invariants(CZ) == pytest.approx(local_invariants(CX))
    g1, g2 = local_invariants(SWAP)
    assert g1 == pytest.approx(-1) and g2 == pytest.approx(-3)


def test_makhlin_local_invariance_random_dressings():
    rng = np.random.default_rng(3)
    for gate in (CX, ISWAP, SWAP):
        ref = np.array(local_invariants(gate), dtype=complex)
        for _ in range(100 // 3 + 1):
            a, b, c, d = (unitary_group.rvs(2, random_state=rng) for _ in range(4))
            u = np.kron(a, b) @ gate @ np.kron(c, d)
            assert np.abs(np.array(local_invariants(u), dtype=complex) - ref).max() < 1e-10


def test_local_invariants_rejects_bad_input():
    with pytest.raises(ValueError):
        local_invariants(np.eye(3))
    with pytest.raises(ValueError):
        local_invariants(2 * np.eye(4))


def test_kron_factor_exact_product():
    rng = np.random.default_rng(0)
    v = unitary_group.rvs(4, random_state=rng)
    g = unitary_group.rvs(4, random_state=rng)
    fv, fg, res = kron_factor(np.kron(v, g))
    assert res < 1e-12
    assert np.allclose(np.kron(fv, fg), np.kron(v, g))


@pytest.mark.parametrize("gate", ["cx", "cz", "swap", "iswap"])
def test_ideal_truth_tables_are_permutations(gate):
    assert is_permutation_matrix(ideal_truth_table(GATES[gate]).astype(int))


def test_truth_table_overlap_formula():
    p_ideal = ideal_truth_table(CX).astype(int)
    assert truth_table_overlap(p_ideal.astype(float), p_ideal) == 1.0
    noisy = 0.9 * p_ideal + 0.1 * np.full((4, 4), 0.25)
    assert truth_table_overlap(noisy, p_ideal) == pytest.approx(0.9 + 0.1 * 0.25)


def test_truth_table_overlap_rejects_non_permutation():
    with pytest.raises(ValueError, match="not invertible as permutation"):
        truth_table_overlap(np.eye(4), np.full((4, 4), 0.25))


@pytest.mark.parametrize("gauge", [(0, 0), (0, 1), (1, 0), (1, 1)])
def test_simulated_truth_table_matches_ideal(refs, gauge):
    from eo_pulsec.references import all_to_all_sequence
    p, leak = simulate_truth_table(all_to_all_sequence(refs["cx"]), gauge)
    assert np.allclose(p, ideal_truth_table(CX), atol=1e-9)
    assert np.all(leak < 1e-9)
