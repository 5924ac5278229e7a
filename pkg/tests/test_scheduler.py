from collections import Counter

import numpy as np
import pytest

from eo_pulsec.pulses import pulses_unitary
from eo_pulsec.router import GateSpec, shortest_route
from eo_pulsec.scheduler import (LAYOUT_SPECS, RULES, QecCycleSpec, ScheduleError, SequenceLibrary,
                                 asap_schedule, build_layout, check_schedule, compile_qec_round,
                                 extract_gate_schedules, initial_spins, load_cycle, load_layout, pair_topology,
                                 save_layout, surface_code_cycle)
from eo_pulsec.topology import all_topologies


@pytest.fixture(scope="module")
def lib(refs):
    return SequenceLibrary(refs["cx"])


@pytest.fixture(scope="module")
def compiled(lib):
    out = {}
    for name in LAYOUT_SPECS:
        lay = build_layout(name, 4, 4)
        out[name] = (lay, compile_qec_round(lay, surface_code_cycle(lay), lib))
    return out


@pytest.mark.parametrize("name", list(LAYOUT_SPECS))
def test_layout_geometry(name):
    lay = build_layout(name, 4, 3)
    assert len(lay.qubit_dots) == 12
    assert len(lay.coords) == 36
    assert len(set(lay.coords.values())) == 36
    dq = lay.dot_qubit
    for a, b in lay.couplers:
        assert any(dq[x] != dq[y] for x, y in lay.pair_edges(a, b))


@pytest.mark.parametrize("name", list(LAYOUT_SPECS))
def test_cycle_pairs_induce_known_topologies(name):
    keys = {t.key for t in all_topologies()}
    lay = build_layout(name, 4, 4)
    cyc = surface_code_cycle(lay)
    coupled = {frozenset(c) for c in lay.couplers}
    spins = initial_spins(lay)
    assert len(cyc.layers) == 4
    for layer in cyc.layers:
        assert layer
        for c, t in layer:
            assert frozenset((c, t)) in coupled
            assert pair_topology(lay, c, t, spins).key in keys


def test_cycle_spec_validation():
    with pytest.raises(ScheduleError, match="four"):
        QecCycleSpec([[], []])
    with pytest.raises(ScheduleError, match="reuses"):
        QecCycleSpec([[("a", "b"), ("b", "c")], [], [], []])


def test_layout_and_cycle_json_roundtrip(tmp_path):
    lay = build_layout("HexTri", 3, 3)
    save_layout(tmp_path / "l.json", lay)
    back = load_layout(tmp_path / "l.json")
    assert back.coords == lay.coords and back.edges == lay.edges and back.couplers == lay.couplers
    cyc = surface_code_cycle(lay)
    (tmp_path / "c.json").write_text(__import__("json").dumps(cyc.to_json()))
    assert load_cycle(tmp_path / "c.json").layers == cyc.layers


def test_bad_layout_json_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{\n\n oops")
    with pytest.raises(ScheduleError, match="bad.json:3"):
        load_layout(p)


def test_single_cx_cycle_equals_routed_sequence(refs, lib):
    lay = build_layout("HexLinear", 2, 1)
    (a, b), = lay.couplers
    comp = compile_qec_round(lay, QecCycleSpec([[(a, b)], [], [], []]), lib)
    topo = pair_topology(lay, a, b, initial_spins(lay))
    direct = shortest_route(topo, refs["cx"], GateSpec.named("cx", "intraqubit_any"))
    assert [(p.pair, p.theta) for p in comp.pulses] == [(p.pair, p.theta) for p in direct.pulses]


def test_disjoint_pairs_union(lib):
    lay = build_layout("GridL", 4, 1)
    pairs = [("q0_0", "q1_0"), ("q2_0", "q3_0")]
    both = compile_qec_round(lay, QecCycleSpec([pairs, [], [], []]), lib)
    single = [compile_qec_round(lay, QecCycleSpec([[p], [], [], []]), lib) for p in pairs]
    assert Counter(both.pulses) == Counter(single[0].pulses) + Counter(single[1].pulses)


def test_spin_trace_stays_within_qubits(compiled):
    lay, comp = compiled["GridL"]
    for spins in comp.spin_trace:
        for q, dots in lay.qubit_dots.items():
            assert sorted(spins[d] for d in dots) == ["1", "2", "3"]


def test_missing_entry_names_topology_and_spins(refs):
    lay = build_layout("HexTri", 2, 1)
    lib = SequenceLibrary(refs["cx"], allow_routing=False)
    with pytest.raises(ScheduleError, match=r"no library sequence for topology .* with spins"):
        compile_qec_round(lay, QecCycleSpec([[lay.couplers[0]], [], [], []]), lib)


@pytest.mark.parametrize("name", list(LAYOUT_SPECS))
def test_schedules_valid_and_nested(compiled, name):
    lay, comp = compiled[name]
    durations = []
    for rule in RULES:
        s = asap_schedule(comp.pulses, lay, rule)
        check_schedule(comp.pulses, s, lay)
        assert len(s.step_of) == len(comp.pulses)
        durations.append(s.duration)
    assert durations[0] <= durations[1] <= durations[2]


def test_check_schedule_catches_violation(compiled):
    lay, comp = compiled["HexTri"]
    s = asap_schedule(comp.pulses, lay, "full")
    s.rule = "NN"
    with pytest.raises(ScheduleError):
        check_schedule(comp.pulses, s, lay)


def test_unknown_rule(compiled):
    lay, comp = compiled["HexTri"]
    with pytest.raises(ScheduleError):
        asap_schedule(comp.pulses, lay, "half")


def test_extracted_gates_preserve_unitary(compiled):
    lay, comp = compiled["HexLinear"]
    s = asap_schedule(comp.pulses, lay, "NN")
    for g, ts in zip(comp.gates[:6], extract_gate_schedules(comp, s)):
        assert ts.pulse_count == len(g)
        u_sched = pulses_unitary([p for step in ts.steps for p in step], g.dots)
        assert np.allclose(u_sched, pulses_unitary(g.pulses, g.dots), atol=1e-10)


def test_full_parallel_first_layer_durations_equal_layer_count(compiled):
    lay, comp = compiled["DenseHexTri"]
    s = asap_schedule(comp.pulses, lay, "full")
    n_first = len(surface_code_cycle(lay).layers[0])
    for g, ts in list(zip(comp.gates, extract_gate_schedules(comp, s)))[:n_first]:
        assert ts.duration == g.depth
        assert ts.meta["start"] == 0


def test_nn_stretches_some_gates(compiled):
    lay, comp = compiled["HexLinear"]
    s = asap_schedule(comp.pulses, lay, "NN")
    ext = extract_gate_schedules(comp, s)
    assert any(ts.duration > g.depth for g, ts in zip(comp.gates, ext))
    assert all(ts.duration >= g.depth for g, ts in zip(comp.gates, ext))


def test_empty_cycle(lib):
    lay = build_layout("GridL", 2, 2)
    comp = compile_qec_round(lay, QecCycleSpec([[], [], [], []]), lib)
    s = asap_schedule(comp.pulses, lay, "NN")
    assert s.duration == 0
    assert extract_gate_schedules(comp, s) == []


def test_extracted_schedule_feeds_noise(compiled):
    from eo_pulsec.noise import NoiseModel, gate_infidelity
    lay, comp = compiled["HexTri"]
    s = asap_schedule(comp.pulses, lay, "N")
    ts = extract_gate_schedules(comp, s)[0]
    res = gate_infidelity(ts, NoiseModel(shots=1), "cx")
    assert res.infidelity < 1e-9
