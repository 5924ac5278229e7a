"""Six-dot topologies hosting two exchange-only qubits: enumeration, validation, classes.

A topology is stored on dots with an edge set, a qubit partition and an initial
spin assignment. Its identity is the edge set rewritten in spin labels, so two
embeddings that differ only by lattice symmetry or dot renaming compare equal,
while swapping the roles of qubits A and B gives a different topology.
"""

from __future__ import annotations

import itertools
import json
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .pulses import LABELS

SQUARE_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1))
# axial coordinates; a site has six neighbours
TRIANGULAR_STEPS = ((1, 0), (-1, 0), (0, 1), (0, -1), (1, -1), (-1, 1))
LATTICE_STEPS = {"square": SQUARE_STEPS, "triangular": TRIANGULAR_STEPS}

_A_PERMS = list(itertools.permutations(("A1", "A2", "A3")))
_B_PERMS = list(itertools.permutations(("B1", "B2", "B3")))


class TopologyError(ValueError):
    """A topology violates one of its invariants, or its file is malformed."""


def _edge(a, b) -> tuple:
    return (a, b) if a < b else (b, a)


def lattice_adjacent(a: Sequence[int], b: Sequence[int], lattice: str = "square") -> bool:
    return (b[0] - a[0], b[1] - a[1]) in LATTICE_STEPS[lattice]


def is_connected(nodes: Iterable, edges: Iterable[tuple]) -> bool:
    nodes = list(nodes)
    if not nodes:
        return True
    adj = {n: set() for n in nodes}
    for a, b in edges:
        if a in adj and b in adj:
            adj[a].add(b)
            adj[b].add(a)
    seen = {nodes[0]}
    todo = [nodes[0]]
    while todo:
        for m in adj[todo.pop()]:
            if m not in seen:
                seen.add(m)
                todo.append(m)
    return len(seen) == len(nodes)


def label_edges_key(edges: Iterable[tuple[str, str]]) -> str:
    return ",".join(a + b for a, b in sorted(_edge(a, b) for a, b in edges))


def class_key_of_label_edges(edges: Iterable[tuple[str, str]]) -> str:
    """Minimum label-edge encoding over the 36 intraqubit relabelings."""
    edges = list(edges)
    best = None
    for pa in _A_PERMS:
        for pb in _B_PERMS:
            m = dict(zip(LABELS, pa + pb))
            k = tuple(sorted(_edge(m[a], m[b]) for a, b in edges))
            if best is None or k < best:
                best = k
    return label_edges_key(best)


@dataclass(frozen=True)
class DotTopology:
    dots: tuple[int, ...]
    edges: frozenset[tuple[int, int]]
    qubit_of: Mapping[int, str]
    initial_spin: Mapping[int, str]
    coords: Mapping[int, tuple[int, int]] | None = None
    lattice: str | None = None
    name: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset(_edge(a, b) for a, b in self.edges))

    # identity -----------------------------------------------------------
    @property
    def label_edges(self) -> frozenset[tuple[str, str]]:
        s = self.initial_spin
        return frozenset(_edge(s[a], s[b]) for a, b in self.edges)

    @property
    def key(self) -> str:
        """Stable string naming this topology including its spin assignment."""
        return label_edges_key(self.label_edges)

    @property
    def class_key(self) -> str:
        return class_key_of_label_edges(self.label_edges)

    def __eq__(self, other):
        return isinstance(other, DotTopology) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    # structure ----------------------------------------------------------
    def neighbors(self, dot: int) -> list[int]:
        return sorted({b for a, b in self.edges if a == dot} | {a for a, b in self.edges if b == dot})

    def distances(self) -> dict[int, dict[int, int]]:
        return _all_distances(self.dots, self.edges)

    def dot_of(self) -> dict[str, int]:
        return {lab: d for d, lab in self.initial_spin.items()}

    def with_spins(self, spins: Mapping[int, str]) -> "DotTopology":
        return DotTopology(self.dots, self.edges, dict(self.qubit_of), dict(spins), self.coords, self.lattice, self.name)

    def validate(self) -> "DotTopology":
        if len(self.dots) != 6 or len(set(self.dots)) != 6:
            raise TopologyError("topology needs exactly six distinct dots")
        for a, b in self.edges:
            if a not in self.dots or b not in self.dots or a == b:
                raise TopologyError(f"edge ({a}, {b}) does not join two distinct dots")
        if set(self.qubit_of) != set(self.dots) or sorted(self.qubit_of.values()) != ["A"] * 3 + ["B"] * 3:
            raise TopologyError("qubit partition must put three dots on A and three on B")
        if set(self.initial_spin) != set(self.dots) or sorted(self.initial_spin.values()) != sorted(LABELS):
            raise TopologyError("spin map is not a bijection onto A1..B3")
        for d, lab in self.initial_spin.items():
            if lab[0] != self.qubit_of[d]:
                raise TopologyError(f"spin {lab} sits on dot {d} of qubit {self.qubit_of[d]}")
        if not is_connected(self.dots, self.edges):
            raise TopologyError("graph not connected")
        for q in "AB":
            sub = [d for d in self.dots if self.qubit_of[d] == q]
            if not is_connected(sub, self.edges):
                raise TopologyError(f"qubit {q} dots not connected")
        if self.coords is not None:
            lattice = self.lattice or "square"
            if lattice not in LATTICE_STEPS:
                raise TopologyError(f"unknown lattice {lattice!r}")
            for a, b in self.edges:
                if not lattice_adjacent(self.coords[a], self.coords[b], lattice):
                    raise TopologyError(f"edge ({a}, {b}) is not lattice adjacent")
        return self

    # serialization --------------------------------------------------------
    def to_json(self) -> dict:
        dots = []
        for d in self.dots:
            entry = {"id": d}
            if self.coords is not None:
                entry["xy"] = list(self.coords[d])
            dots.append(entry)
        out = {
            "dots": dots,
            "edges": [list(e) for e in sorted(self.edges)],
            "qubit": {str(d): self.qubit_of[d] for d in self.dots},
            "spins": {str(d): self.initial_spin[d] for d in self.dots},
        }
        if self.lattice:
            out["lattice"] = self.lattice
        if self.name:
            out["name"] = self.name
        return out


@lru_cache(maxsize=4096)
def _all_distances_cached(dots: tuple, edges: frozenset) -> tuple:
    adj = {d: [] for d in dots}
    for a, b in sorted(edges):
        adj[a].append(b)
        adj[b].append(a)
    out = {}
    for s in dots:
        dist = {s: 0}
        q = deque([s])
        while q:
            u = q.popleft()
            for v in adj[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    q.append(v)
        out[s] = dist
    return tuple(sorted((k, tuple(sorted(v.items()))) for k, v in out.items()))


def _all_distances(dots, edges) -> dict[int, dict[int, int]]:
    return {k: dict(v) for k, v in _all_distances_cached(tuple(dots), frozenset(edges))}


def topology_from_json(obj: Mapping, where: str = "<topology>") -> DotTopology:
    """Build and validate a topology from its JSON object form."""
    try:
        dots_raw = obj["dots"]
        ids = [int(d["id"]) for d in dots_raw]
        coords = None
        if all("xy" in d for d in dots_raw) and dots_raw:
            coords = {int(d["id"]): tuple(int(v) for v in d["xy"]) for d in dots_raw}
        edges = [(int(a), int(b)) for a, b in obj["edges"]]
        qubit = {int(k): str(v) for k, v in obj["qubit"].items()}
        spins = {int(k): str(v) for k, v in obj["spins"].items()}
    except KeyError as exc:
        raise TopologyError(f"{where}: missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise TopologyError(f"{where}: malformed field ({exc})") from None
    topo = DotTopology(tuple(ids), frozenset(edges), qubit, spins, coords, obj.get("lattice"), obj.get("name"))
    try:
        return topo.validate()
    except TopologyError as exc:
        raise TopologyError(f"{where}: {exc}") from None


def load_topologies(path: str | Path) -> list[DotTopology]:
    """Read a topology file: one JSON object, a JSON list, or {"topologies": [...]}."""
    path = Path(path)
    text = path.read_text()
    if not text.strip():
        return []
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TopologyError(f"{path}:{exc.lineno}: {exc.msg}") from None
    if isinstance(data, Mapping) and "topologies" in data:
        data = data["topologies"]
    if isinstance(data, Mapping):
        data = [data]
    if not isinstance(data, list):
        raise TopologyError(f"{path}: expected a topology object or a list of them")
    return [topology_from_json(obj, f"{path}[{i}]") for i, obj in enumerate(data)]


def load_triangular_topologies(path: str | Path | None = None) -> list[DotTopology]:
    """Curated triangular-lattice topologies; the bundled list when ``path`` is None."""
    if path is None:
        path = Path(__file__).with_name("data") / "triangular.json"
    return load_topologies(path)


def save_topologies(path: str | Path, topologies: Iterable[DotTopology]) -> None:
    Path(path).write_text(json.dumps({"topologies": [t.to_json() for t in topologies]}, indent=1) + "\n")


# enumeration ----------------------------------------------------------------


def lattice_animals(n: int, lattice: str = "square") -> list[tuple[tuple[int, int], ...]]:
    """Fixed (translation-reduced) connected n-site sets on a lattice, sorted."""
    steps = LATTICE_STEPS[lattice]
    cur = {frozenset([(0, 0)])}
    for _ in range(n - 1):
        nxt = set()
        for shape in cur:
            for x, y in shape:
                for dx, dy in steps:
                    q = (x + dx, y + dy)
                    if q in shape:
                        continue
                    s = shape | {q}
                    mx = min(a for a, _ in s)
                    my = min(b for _, b in s)
                    nxt.add(frozenset((a - mx, b - my) for a, b in s))
        cur = nxt
    return sorted(tuple(sorted(s)) for s in cur)


def _embeddings(lattice: str, keep=None) -> dict[str, DotTopology]:
    """First embedding found for every distinct labeled topology on the lattice."""
    found: dict[str, DotTopology] = {}
    for sites in lattice_animals(6, lattice):
        edges = [(i, j) for i, j in itertools.combinations(range(6), 2)
                 if lattice_adjacent(sites[i], sites[j], lattice)]
        coords = {i: sites[i] for i in range(6)}
        for a_dots in itertools.combinations(range(6), 3):
            b_dots = tuple(d for d in range(6) if d not in a_dots)
            if not (is_connected(a_dots, edges) and is_connected(b_dots, edges)):
                continue
            qubit = {d: ("A" if d in a_dots else "B") for d in range(6)}
            if keep is not None and not keep(a_dots, b_dots, edges):
                continue
            for pa in _A_PERMS:
                for pb in _B_PERMS:
                    spins = dict(zip(a_dots + b_dots, pa + pb))
                    key = label_edges_key(_edge(spins[a], spins[b]) for a, b in edges)
                    if key not in found:
                        found[key] = DotTopology(tuple(range(6)), frozenset(edges), qubit, spins, coords, lattice)
    return found


@lru_cache(maxsize=1)
def _square_cached() -> tuple[DotTopology, ...]:
    return tuple(_embeddings("square").values())


def enumerate_square_lattice_topologies() -> list[DotTopology]:
    """Every connected six-site induced subgraph of the square lattice with connected qubits."""
    return list(_square_cached())


def enumerate_triangular_lattice_topologies(require_triangle: bool = True) -> list[DotTopology]:
    """Induced six-site subgraphs of the triangular lattice, optionally only those with a triangle qubit."""

    def keep(a_dots, b_dots, edges):
        if not require_triangle:
            return True
        es = set(edges)
        return any(all(_edge(x, y) in es for x, y in itertools.combinations(q, 2)) for q in (a_dots, b_dots))

    return list(_embeddings("triangular", keep).values())


def all_topologies(triangular: str | Path | None = None, square: bool = True,
                   include_triangular: bool = True) -> list[DotTopology]:
    out = enumerate_square_lattice_topologies() if square else []
    if include_triangular:
        out += load_triangular_topologies(triangular)
    return out


# classes ------------------------------------------------------------------


@dataclass
class TopologyClass:
    canonical_key: str
    members: list[DotTopology] = field(default_factory=list)

    @property
    def size(self) -> int:
        return len(self.members)


def classify(topologies: Iterable[DotTopology]) -> list[TopologyClass]:
    """Group topologies that differ only by intraqubit spin permutations (first-seen order)."""
    classes: dict[str, TopologyClass] = {}
    for t in topologies:
        k = t.class_key
        classes.setdefault(k, TopologyClass(k)).members.append(t)
    return list(classes.values())


def intraqubit_relabelings(topo: DotTopology) -> list[DotTopology]:
    """All 36 intraqubit spin reassignments of ``topo`` (possibly with repeats)."""
    out = []
    for pa in _A_PERMS:
        for pb in _B_PERMS:
            m = dict(zip(LABELS, pa + pb))
            out.append(topo.with_spins({d: m[lab] for d, lab in topo.initial_spin.items()}))
    return out


# named examples --------------------------------------------------------------


def _line(order: Sequence[str]) -> DotTopology:
    spins = dict(enumerate(order))
    return DotTopology(tuple(range(6)), frozenset((i, i + 1) for i in range(5)),
                       {d: s[0] for d, s in spins.items()}, spins,
                       {i: (i, 0) for i in range(6)}, "square", "linear")


def linear(order: Sequence[str] = ("A3", "A2", "A1", "B1", "B2", "B3")) -> DotTopology:
    return _line(order)


def linear_parallel(a_row: Sequence[str] = ("A1", "A2", "A3"), b_row: Sequence[str] = ("B1", "B2", "B3")) -> DotTopology:
    """2x3 block with qubit A on the bottom row and B on the top row."""
    coords = {i: (i % 3, i // 3) for i in range(6)}
    edges = [(i, j) for i, j in itertools.combinations(range(6), 2) if lattice_adjacent(coords[i], coords[j])]
    spins = dict(enumerate(list(a_row) + list(b_row)))
    return DotTopology(tuple(range(6)), frozenset(edges), {d: s[0] for d, s in spins.items()}, spins,
                       coords, "square", "linear-parallel")


def all_to_all(spins: Sequence[str] = LABELS) -> DotTopology:
    sp = dict(enumerate(spins))
    return DotTopology(tuple(range(6)), frozenset(itertools.combinations(range(6), 2)),
                       {d: s[0] for d, s in sp.items()}, sp, None, None, "all-to-all")


def ring(spins: Sequence[str] = LABELS) -> DotTopology:
    sp = dict(enumerate(spins))
    edges = [(i, (i + 1) % 6) for i in range(6)]
    return DotTopology(tuple(range(6)), frozenset(edges), {d: s[0] for d, s in sp.items()}, sp, None, None, "ring")


def two_triangles(inter: Sequence[tuple[str, str]] = (("A1", "B1"),)) -> DotTopology:
    """Two fully connected three-dot qubits joined by the given inter-qubit label edges."""
    dot = {lab: i for i, lab in enumerate(LABELS)}
    edges = [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)] + [(dot[a], dot[b]) for a, b in inter]
    sp = dict(enumerate(LABELS))
    return DotTopology(tuple(range(6)), frozenset(edges), {d: s[0] for d, s in sp.items()}, sp, None, None,
                       "two-triangles")
