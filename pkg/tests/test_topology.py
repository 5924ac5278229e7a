import json

import pytest

from eo_pulsec.topology import (DotTopology, TopologyError, all_topologies, all_to_all, classify,
                                enumerate_square_lattice_topologies, enumerate_triangular_lattice_topologies,
                                intraqubit_relabelings, lattice_adjacent, lattice_animals, linear,
                                linear_parallel, load_topologies, load_triangular_topologies, ring,
                                save_topologies, two_triangles)


@pytest.fixture(scope="module")
def everything():
    return all_topologies()


def test_total_count(everything):
    assert len(everything) == 450
    assert len(set(t.key for t in everything)) == 450


def test_square_count_and_classes():
    sq = enumerate_square_lattice_topologies()
    assert len(sq) == 261
    assert len(classify(sq)) == 12


def test_triangular_curated_classes():
    tri = load_triangular_topologies()
    assert len(tri) == 189
    assert len(classify(tri)) == 10
    square_keys = {t.key for t in enumerate_square_lattice_topologies()}
    assert not square_keys & {t.key for t in tri}


def test_class_sizes_bounded(everything):
    classes = classify(everything)
    assert all(1 <= c.size <= 36 for c in classes)
    assert sum(c.size for c in classes) == 450


def test_linear_class_has_36_members():
    keys = {t.key for t in intraqubit_relabelings(linear())}
    assert len(keys) == 36


def test_linear_parallel_class_size():
    # mirror symmetry of the ladder identifies relabelings pairwise
    keys = {t.key for t in intraqubit_relabelings(linear_parallel())}
    assert len(keys) == 18


def test_two_triangles_single_edge_class_has_nine():
    # both triangles are fully symmetric, so only the choice of the bridged spins matters
    keys = {t.key for t in intraqubit_relabelings(two_triangles())}
    assert len(keys) == 9


def test_all_to_all_class_is_single():
    assert len({t.key for t in intraqubit_relabelings(all_to_all())}) == 1


def test_identity_is_edge_set_not_embedding():
    a = linear()
    b = DotTopology(a.dots[::-1], a.edges, a.qubit_of, a.initial_spin)
    assert a == b and hash(a) == hash(b)
    c = two_triangles((("A1", "B2"),))
    swapped = c.with_spins({d: ("B" if s[0] == "A" else "A") + s[1] for d, s in c.initial_spin.items()})
    assert swapped.key != c.key


def test_validate_rejects_disconnected_qubit():
    spins = {0: "A1", 1: "B1", 2: "A2", 3: "B2", 4: "A3", 5: "B3"}
    t = DotTopology(tuple(range(6)), frozenset((i, i + 1) for i in range(5)), {d: s[0] for d, s in spins.items()}, spins)
    with pytest.raises(TopologyError, match="qubit A dots not connected"):
        t.validate()


def test_validate_rejects_disconnected_graph():
    t = two_triangles(())
    with pytest.raises(TopologyError, match="graph not connected"):
        t.validate()


def test_validate_rejects_non_lattice_edge():
    t = linear()
    bad = DotTopology(t.dots, t.edges | {(0, 5)}, t.qubit_of, t.initial_spin, t.coords, "square")
    with pytest.raises(TopologyError, match="lattice adjacent"):
        bad.validate()


def test_enumerated_topologies_validate(everything):
    for t in everything[::7]:
        t.validate()


@pytest.mark.parametrize("n,count", [(1, 1), (2, 2), (3, 6), (4, 19), (5, 63), (6, 216)])
def test_square_lattice_animals_counts(n, count):
    # fixed polyominoes
    assert len(lattice_animals(n, "square")) == count


@pytest.mark.parametrize("n,count", [(2, 3), (3, 11), (4, 44)])
def test_triangular_lattice_animals_counts(n, count):
    # fixed polyhexes (sites of the triangular lattice)
    assert len(lattice_animals(n, "triangular")) == count


def test_lattice_adjacency():
    assert lattice_adjacent((0, 0), (1, 0))
    assert not lattice_adjacent((0, 0), (1, 1))
    assert lattice_adjacent((0, 0), (1, -1), "triangular")


def test_curated_list_is_subset_of_triangular_enumeration():
    full = {t.key for t in enumerate_triangular_lattice_topologies()}
    assert {t.key for t in load_triangular_topologies()} <= full


def test_save_load_roundtrip(tmp_path):
    topos = [linear(), linear_parallel(), ring()]
    path = tmp_path / "t.json"
    save_topologies(path, topos)
    assert load_topologies(path) == topos


def test_load_single_object_and_empty(tmp_path):
    p = tmp_path / "one.json"
    p.write_text(json.dumps(linear().to_json()))
    assert load_topologies(p) == [linear()]
    e = tmp_path / "empty.json"
    e.write_text("")
    assert load_topologies(e) == []


def test_load_reports_line_of_bad_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n "dots": [\n')
    with pytest.raises(TopologyError, match="bad.json:3"):
        load_topologies(p)


def test_load_reports_missing_field(tmp_path):
    p = tmp_path / "bad.json"
    obj = linear().to_json()
    del obj["spins"]
    p.write_text(json.dumps([obj]))
    with pytest.raises(TopologyError, match="missing field 'spins'"):
        load_topologies(p)
