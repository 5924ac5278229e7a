import math

import numpy as np
import pytest

from eo_pulsec.noise import (NoiseError, NoiseModel, TimedSchedule, average_gate_fidelity, evolve, gate_infidelity,
                             noise_row, sample_instance, zero_instance)
from eo_pulsec.pulses import pulses_unitary
from eo_pulsec.references import all_to_all_sequence


@pytest.fixture(scope="module")
def cx_sched(refs):
    return TimedSchedule.from_sequence(all_to_all_sequence(refs["cx"]))


@pytest.mark.parametrize("gate", ["cx", "cz", "swap"])
def test_noiseless_is_exact(refs, gate):
    sched = TimedSchedule.from_sequence(all_to_all_sequence(refs[gate]))
    res = gate_infidelity(sched, NoiseModel(shots=2), gate)
    assert res.infidelity < 1e-9


def test_noiseless_evolution_matches_pulse_product(cx_sched):
    m = NoiseModel()
    u = evolve(cx_sched, zero_instance(), m)
    ideal = pulses_unitary(cx_sched.as_sequence().pulses, cx_sched.dots)
    overlap = abs(np.trace(ideal.conj().T @ u)) / 64
    assert overlap == pytest.approx(1.0, abs=1e-10)


def test_nonzero_epsilon_z_still_exact(cx_sched):
    # a uniform field commutes with exchange and only adds a gauge phase on the codespace
    res = gate_infidelity(cx_sched, NoiseModel(epsilon_z=0.3, shots=1), "cx")
    assert res.infidelity < 1e-9


@pytest.mark.parametrize("kind", ["t2", "dj"])
def test_quadratic_scaling(cx_sched, kind):
    xs = [1e-3, 4e-3]
    ys = []
    for x in xs:
        m = NoiseModel(T2_star=1 / x, shots=40, seed=3) if kind == "t2" else NoiseModel(delta_J=x, shots=40, seed=3)
        ys.append(gate_infidelity(cx_sched, m, "cx").infidelity)
    slope = math.log(ys[1] / ys[0]) / math.log(xs[1] / xs[0])
    assert slope == pytest.approx(2.0, abs=0.1)


def test_same_seed_same_result(cx_sched):
    m = NoiseModel(T2_star=100.0, shots=5, seed=9)
    assert gate_infidelity(cx_sched, m, "cx") == gate_infidelity(cx_sched, m, "cx")


def test_longer_serial_schedule_is_worse(cx_sched):
    m = NoiseModel(T2_star=200.0, shots=30, seed=1)
    par = gate_infidelity(cx_sched, m, "cx").infidelity
    ser = gate_infidelity(TimedSchedule.serial(cx_sched.as_sequence()), m, "cx").infidelity
    assert ser > par


def test_wrong_target_raises(cx_sched):
    with pytest.raises(NoiseError):
        gate_infidelity(cx_sched, NoiseModel(shots=1), "swap")


@pytest.mark.parametrize("kw", [dict(T2_star=0.0), dict(delta_J=-0.1), dict(t_pulse=0.0), dict(shots=0)])
def test_model_validation(kw):
    with pytest.raises(NoiseError):
        NoiseModel(**kw)


def test_overlapping_step_rejected(cx_sched):
    p = cx_sched.steps[0][0]
    with pytest.raises(NoiseError, match="step 0"):
        TimedSchedule(cx_sched.dots, ((p, p),), cx_sched.initial_map, cx_sched.final_map)


def test_sampling_statistics():
    m = NoiseModel(T2_star=2.0, delta_J=0.05)
    rng = np.random.default_rng(0)
    z = np.array([sample_instance(m, rng).zeeman for _ in range(4000)])
    assert z.std() == pytest.approx(math.sqrt(2) / 2.0, rel=0.05)
    assert len(sample_instance(m, rng).exchange) == 15


def test_fidelity_of_identity():
    assert average_gate_fidelity(np.eye(16), np.eye(16)) == pytest.approx(1.0)


def test_noise_row_fields(cx_sched):
    m = NoiseModel(T2_star=50.0, shots=2)
    row = noise_row(cx_sched, m, gate_infidelity(cx_sched, m, "cx"))
    assert row[2] == cx_sched.duration and row[3] == cx_sched.pulse_count
    assert float(row[4]) == pytest.approx(0.02)
