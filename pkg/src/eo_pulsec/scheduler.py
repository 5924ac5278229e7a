"""QEC-round compilation and ASAP pulse scheduling on multi-qubit dot layouts.

A layout tiles the plane with three-dot qubits. Qubit (m, n) occupies the shape
translated by m*u + n*v; dots are lattice sites and every lattice-adjacent
pair of dots may exchange. The CX couplers used by the syndrome-extraction
cycle are a subset of qubit neighbours (a grid or a brick-wall hex pattern).
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .noise import TimedSchedule
from .pulses import ExchangePulse, PulseSequence
from .router import GateSpec, ReferenceSequence, shortest_route
from .topology import DotTopology, LATTICE_STEPS

RULES = ("full", "N", "NN")
# forbidden graph distance between dots of simultaneous pulses, per rule
_RULE_RADIUS = {"full": 0, "N": 1, "NN": 2}

LAYOUT_SPECS = {
    # name: lattice, qubit shape, u, v, coupler pattern
    "GridL": ("square", ((0, 0), (1, 0), (0, 1)), (1, 1), (2, -1), "grid"),
    "HexLinear": ("square", ((0, 0), (1, 0), (2, 0)), (3, 0), (2, 1), "hex"),
    "HexTri": ("triangular", ((0, 0), (1, 0), (0, 1)), (-2, 0), (0, -2), "hex"),
    "DenseHexTri": ("triangular", ((0, 0), (1, 0), (0, 1)), (-2, 1), (-1, -1), "hex"),
}


class ScheduleError(ValueError):
    pass


@dataclass
class DeviceLayout:
    name: str
    lattice: str
    coords: dict[int, tuple[int, int]]
    qubit_dots: dict[str, tuple[int, int, int]]
    qubit_coord: dict[str, tuple[int, int]]
    couplers: list[tuple[str, str]]
    edges: set[tuple[int, int]] = field(default_factory=set)

    def __post_init__(self):
        if not self.edges:
            ids = sorted(self.coords)
            at = {self.coords[d]: d for d in ids}
            for d in ids:
                x, y = self.coords[d]
                for dx, dy in LATTICE_STEPS[self.lattice]:
                    e = at.get((x + dx, y + dy))
                    if e is not None and d < e:
                        self.edges.add((d, e))
        self._dist: dict[int, dict[int, int]] | None = None

    @property
    def dot_qubit(self) -> dict[int, str]:
        return {d: q for q, ds in self.qubit_dots.items() for d in ds}

    def distances(self) -> dict[int, dict[int, int]]:
        """All-pairs graph distance over lattice adjacency (cached)."""
        if self._dist is None:
            adj = {d: [] for d in self.coords}
            for a, b in self.edges:
                adj[a].append(b)
                adj[b].append(a)
            self._dist = {}
            for s in self.coords:
                dist = {s: 0}
                q = deque([s])
                while q:
                    x = q.popleft()
                    if dist[x] >= 3:
                        continue
                    for y in adj[x]:
                        if y not in dist:
                            dist[y] = dist[x] + 1
                            q.append(y)
                self._dist[s] = dist
        return self._dist

    def pair_edges(self, q1: str, q2: str) -> list[tuple[int, int]]:
        ds = set(self.qubit_dots[q1]) | set(self.qubit_dots[q2])
        return sorted(e for e in self.edges if e[0] in ds and e[1] in ds)

    def to_json(self) -> dict:
        dq = self.dot_qubit
        return {
            "name": self.name,
            "lattice": self.lattice,
            "dots": [{"id": d, "xy": list(self.coords[d]), "qubit": dq[d]} for d in sorted(self.coords)],
            "edges": [list(e) for e in sorted(self.edges)],
            "qubits": {q: {"dots": list(ds), "coord": list(self.qubit_coord[q])} for q, ds in self.qubit_dots.items()},
            "couplers": [list(c) for c in self.couplers],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "DeviceLayout":
        try:
            coords = {int(d["id"]): tuple(d["xy"]) for d in obj["dots"]}
            qd = {q: tuple(v["dots"]) for q, v in obj["qubits"].items()}
            qc = {q: tuple(v["coord"]) for q, v in obj["qubits"].items()}
            edges = {tuple(sorted(map(int, e))) for e in obj["edges"]}
            couplers = [tuple(c) for c in obj["couplers"]]
            return cls(obj["name"], obj["lattice"], coords, qd, qc, couplers, edges)
        except (KeyError, TypeError, ValueError) as exc:
            raise ScheduleError(f"malformed layout: {exc}") from None


def _qname(m: int, n: int) -> str:
    return f"q{m}_{n}"


def build_layout(name: str, cols: int = 5, rows: int = 5) -> DeviceLayout:
    """Bulk patch of ``cols`` x ``rows`` qubits for one of the named layouts."""
    if name not in LAYOUT_SPECS:
        raise ScheduleError(f"unknown layout {name!r}; expected one of {sorted(LAYOUT_SPECS)}")
    lattice, shape, u, v, pattern = LAYOUT_SPECS[name]
    coords: dict[int, tuple[int, int]] = {}
    qd: dict[str, tuple[int, int, int]] = {}
    qc: dict[str, tuple[int, int]] = {}
    for n in range(rows):
        for m in range(cols):
            off = (m * u[0] + n * v[0], m * u[1] + n * v[1])
            ids = []
            for sx, sy in shape:
                d = len(coords)
                coords[d] = (sx + off[0], sy + off[1])
                ids.append(d)
            q = _qname(m, n)
            qd[q] = tuple(ids)
            qc[q] = (m, n)
    if len(set(coords.values())) != len(coords):
        raise ScheduleError(f"layout {name} tiles overlap")
    couplers = []
    for n in range(rows):
        for m in range(cols):
            if m + 1 < cols:
                couplers.append((_qname(m, n), _qname(m + 1, n)))
            if n + 1 < rows and (pattern == "grid" or (m + n) % 2 == 0):
                couplers.append((_qname(m, n), _qname(m, n + 1)))
    layout = DeviceLayout(name, lattice, coords, qd, qc, couplers)
    for a, b in couplers:
        if not layout.pair_edges(a, b) or not any(
                (x in qd[a]) != (y in qd[a]) for x, y in layout.pair_edges(a, b)):
            raise ScheduleError(f"coupler {a}-{b} has no inter-qubit dot edge")
    return layout


# ------------------------------------------------------------------ cycles


@dataclass
class QecCycleSpec:
    layers: list[list[tuple[str, str]]]
    layout: str = ""

    def __post_init__(self):
        if len(self.layers) != 4:
            raise ScheduleError("a QEC cycle has exactly four CX layers")
        for k, layer in enumerate(self.layers):
            used = [q for pair in layer for q in pair]
            if len(used) != len(set(used)):
                raise ScheduleError(f"layer {k} reuses a qubit")

    def to_json(self) -> dict:
        return {"layout": self.layout, "layers": [[list(p) for p in layer] for layer in self.layers]}

    @classmethod
    def from_json(cls, obj: Mapping) -> "QecCycleSpec":
        try:
            layers = [[(str(c), str(t)) for c, t in layer] for layer in obj["layers"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ScheduleError(f"malformed cycle: {exc}") from None
        return cls(layers, obj.get("layout", ""))


def surface_code_cycle(layout: DeviceLayout) -> QecCycleSpec:
    """Four CX layers on the layout's coupler graph.

    Qubits with odd m + n are measure qubits. On a grid each measure qubit
    visits its four neighbours (X type controls, Z type targets). On the hex
    brick wall it visits left, vertical, right, then the vertical partner
    again with the roles reversed.
    """
    coord = layout.qubit_coord
    at = {c: q for q, c in coord.items()}
    pattern = LAYOUT_SPECS[layout.name][4] if layout.name in LAYOUT_SPECS else "grid"
    coupled = {frozenset(c) for c in layout.couplers}

    def measure(q):
        m, n = coord[q]
        return (m + n) % 2 == 1

    if pattern == "grid":
        x_order = [(0, 1), (1, 0), (-1, 0), (0, -1)]
        z_order = [(0, 1), (-1, 0), (1, 0), (0, -1)]
    else:
        x_order = z_order = None
    layers: list[list[tuple[str, str]]] = [[], [], [], []]
    for q in sorted(coord, key=lambda q: (coord[q][1], coord[q][0])):
        if not measure(q):
            continue
        m, n = coord[q]
        x_type = m % 2 == 1
        if pattern == "grid":
            steps = x_order if x_type else z_order
        else:
            # a brick-wall vertical coupler exists from (m, n) upward iff m + n is even
            vert = (0, 1) if (m + n) % 2 == 0 else (0, -1)
            steps = [(-1, 0), vert, (1, 0), vert]
        for k, (dm, dn) in enumerate(steps):
            other = at.get((m + dm, n + dn))
            if other is None or frozenset((q, other)) not in coupled:
                continue
            reverse = pattern == "hex" and k == 3
            ctrl_is_measure = x_type != reverse
            layers[k].append((q, other) if ctrl_is_measure else (other, q))
    return QecCycleSpec(layers, layout.name)


# --------------------------------------------------------------- compile


def pair_topology(layout: DeviceLayout, control: str, target: str, spins: Mapping[int, str]) -> DotTopology:
    """Six-dot topology of a CX: control dots become qubit A, target dots qubit B."""
    a, b = layout.qubit_dots[control], layout.qubit_dots[target]
    dots = tuple(a) + tuple(b)
    qubit = {d: "A" for d in a} | {d: "B" for d in b}
    init = {d: "A" + spins[d] for d in a} | {d: "B" + spins[d] for d in b}
    topo = DotTopology(dots, frozenset(layout.pair_edges(control, target)), qubit, init,
                       {d: layout.coords[d] for d in dots}, layout.lattice)
    try:
        return topo.validate()
    except ValueError as exc:
        raise ScheduleError(f"CX {control}->{target} does not induce a valid topology: {exc}") from None


class SequenceLibrary:
    """Routed CX sequences keyed by topology key, stored on spin labels and routed on demand."""

    def __init__(self, ref: ReferenceSequence, spec: GateSpec | None = None, router: Callable | None = None,
                 entries: Mapping[str, PulseSequence] | None = None, allow_routing: bool = True):
        self.ref = ref
        self.spec = spec or GateSpec.named(ref.gate, "intraqubit_any")
        self.router = router or shortest_route
        self.entries: dict[str, PulseSequence] = dict(entries or {})
        self.allow_routing = allow_routing

    def get(self, topo: DotTopology) -> PulseSequence:
        key = topo.key
        if key not in self.entries:
            if not self.allow_routing:
                raise ScheduleError(f"no library sequence for topology {key} with spins {dict(topo.initial_spin)}")
            self.entries[key] = self.router(topo, self.ref, self.spec)
        return self.entries[key]

    def realize(self, topo: DotTopology) -> PulseSequence:
        """Library sequence transplanted onto the dots of ``topo`` via spin labels."""
        seq = self.get(topo)
        label_of = seq.initial_map
        dot_of = topo.dot_of()
        mp = {d: dot_of[label_of[d]] for d in seq.dots}
        pulses = tuple(ExchangePulse((mp[p.pair[0]], mp[p.pair[1]]), p.theta) for p in seq.pulses)
        final = {mp[d]: lab for d, lab in seq.final_map.items()}
        return PulseSequence(seq.gate, topo.dots, pulses, dict(topo.initial_spin), final, topo.key, seq.phase,
                             dict(seq.meta))


@dataclass
class CompiledRound:
    layout: DeviceLayout
    pulses: list[ExchangePulse]
    owner: list[int]  # gate index per pulse
    gates: list[PulseSequence]
    gate_pairs: list[tuple[str, str]]
    spin_trace: list[dict[int, str]]  # dot -> spin index digit after each CX layer

    @property
    def average_pulses_per_cx(self) -> float:
        return len(self.pulses) / len(self.gates) if self.gates else 0.0


def initial_spins(layout: DeviceLayout) -> dict[int, str]:
    return {d: str(i + 1) for q, ds in layout.qubit_dots.items() for i, d in enumerate(ds)}


def compile_qec_round(layout: DeviceLayout, cycle: QecCycleSpec, library: SequenceLibrary,
                      spins: Mapping[int, str] | None = None) -> CompiledRound:
    """Concatenate per-CX sequences layer by layer while tracking spin positions."""
    spins = dict(spins or initial_spins(layout))
    pulses: list[ExchangePulse] = []
    owner: list[int] = []
    gates: list[PulseSequence] = []
    pairs: list[tuple[str, str]] = []
    trace = []
    for layer in cycle.layers:
        for control, target in layer:
            topo = pair_topology(layout, control, target, spins)
            seq = library.realize(topo)
            for d, lab in seq.final_map.items():
                spins[d] = lab[1]
            pulses.extend(seq.pulses)
            owner.extend([len(gates)] * len(seq.pulses))
            gates.append(seq)
            pairs.append((control, target))
        trace.append(dict(spins))
    return CompiledRound(layout, pulses, owner, gates, pairs, trace)


# -------------------------------------------------------------- schedule


@dataclass
class RoundSchedule:
    step_of: list[int]
    duration: int
    rule: str

    def steps(self, pulses: Sequence[ExchangePulse]) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.duration)]
        for i, s in enumerate(self.step_of):
            out[s].append(i)
        return out


def asap_schedule(pulses: Sequence[ExchangePulse], layout: DeviceLayout, rule: str = "full") -> RoundSchedule:
    """Place each pulse, in order, at the earliest step allowed by dot order, disjointness and ``rule``."""
    if rule not in _RULE_RADIUS:
        raise ScheduleError(f"unknown parallelism rule {rule!r}")
    radius = _RULE_RADIUS[rule]
    dist = layout.distances()
    ready: dict[int, int] = {}
    busy: list[set[int]] = []  # dots active per step
    step_of = []
    for p in pulses:
        a, b = p.pair
        t = max(ready.get(a, 0), ready.get(b, 0))
        blocked = set()
        if radius:
            for x in (a, b):
                blocked.update(y for y, dd in dist[x].items() if dd <= radius)
        else:
            blocked = {a, b}
        while True:
            if t >= len(busy):
                busy.extend(set() for _ in range(t - len(busy) + 1))
            if not (busy[t] & blocked) and a not in busy[t] and b not in busy[t]:
                break
            t += 1
        busy[t].update((a, b))
        ready[a] = ready[b] = t + 1
        step_of.append(t)
    return RoundSchedule(step_of, len(busy), rule)


def check_schedule(pulses: Sequence[ExchangePulse], sched: RoundSchedule, layout: DeviceLayout) -> None:
    """Raise if a step violates disjointness, the rule, or per-dot order."""
    radius = _RULE_RADIUS[sched.rule]
    dist = layout.distances()
    for step in sched.steps(pulses):
        for i in step:
            for j in step:
                if i >= j:
                    continue
                for x in pulses[i].pair:
                    for y in pulses[j].pair:
                        if x == y:
                            raise ScheduleError("two pulses share a dot in one step")
                        if radius and dist[x].get(y, 99) <= radius:
                            raise ScheduleError(f"rule {sched.rule} violated between dots {x} and {y}")
    last: dict[int, int] = {}
    for i, p in enumerate(pulses):
        for d in p.pair:
            if last.get(d, -1) >= sched.step_of[i]:
                raise ScheduleError(f"dot {d} order not preserved")
            last[d] = sched.step_of[i]


def extract_gate_schedules(compiled: CompiledRound, sched: RoundSchedule) -> list[TimedSchedule]:
    """Per-CX timed schedules over the gate's own step window, idle steps included."""
    out = []
    for g, seq in enumerate(compiled.gates):
        idx = [i for i, o in enumerate(compiled.owner) if o == g]
        if not idx:
            out.append(TimedSchedule(seq.dots, (), dict(seq.initial_map), dict(seq.final_map), seq.gate,
                                     seq.topology, {"start": None}))
            continue
        t0 = min(sched.step_of[i] for i in idx)
        t1 = max(sched.step_of[i] for i in idx)
        steps: list[list[ExchangePulse]] = [[] for _ in range(t1 - t0 + 1)]
        for i in idx:
            steps[sched.step_of[i] - t0].append(compiled.pulses[i])
        out.append(TimedSchedule(seq.dots, tuple(tuple(s) for s in steps), dict(seq.initial_map),
                                 dict(seq.final_map), seq.gate, seq.topology, {"start": t0}))
    return out


def save_layout(path: str | Path, layout: DeviceLayout) -> None:
    Path(path).write_text(json.dumps(layout.to_json(), indent=1) + "\n")


def load_layout(path: str | Path) -> DeviceLayout:
    try:
        return DeviceLayout.from_json(json.loads(Path(path).read_text()))
    except json.JSONDecodeError as exc:
        raise ScheduleError(f"{path}:{exc.lineno}: {exc.msg}") from None


def load_cycle(path: str | Path) -> QecCycleSpec:
    try:
        return QecCycleSpec.from_json(json.loads(Path(path).read_text()))
    except json.JSONDecodeError as exc:
        raise ScheduleError(f"{path}:{exc.lineno}: {exc.msg}") from None

