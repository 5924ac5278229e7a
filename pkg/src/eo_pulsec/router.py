"""Map all-to-all reference sequences onto restricted dot topologies by spin-swap insertion.

The optimal router runs a 0-1 shortest-path search over states
``(k, config, unblocked)``: ``k`` reference pulses have been applied, ``config``
says which spin label sits on each dot, and ``unblocked`` is the matching of dot
pairs whose last pulse is still open for merging. A move either inserts a swap
(pi pulse) on a topology edge or applies the next reference pulse; it costs
nothing when it merges into an unblocked pulse on the same pair, and one pulse
otherwise. The search graph is materialized lazily, layer by layer.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .pulses import LABELS, ExchangePulse, PulseSequence, fuse_pulses, normalize_angle, swap_qubit_letter
from .topology import DotTopology, TopologyClass, TopologyError, is_connected
from .verifier import GATES, SWAP
from . import _search

CONSTRAINTS = ("identity", "qubit_swap", "intraqubit_any")
_LABEL_INDEX = {lab: i for i, lab in enumerate(LABELS)}


class RoutingError(ValueError):
    pass


@dataclass(frozen=True)
class ReferenceSequence:
    """Topology-independent pulse list acting on spin labels."""

    gate: str
    pulses: tuple[tuple[str, str, float], ...]
    meta: Mapping[str, object] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.pulses)

    @classmethod
    def from_sequence(cls, seq: PulseSequence) -> "ReferenceSequence":
        m = seq.initial_map
        return cls(seq.gate, tuple((m[p.pair[0]], m[p.pair[1]], p.theta) for p in seq.pulses), dict(seq.meta))

    def on(self, topology: DotTopology) -> PulseSequence:
        """The reference placed directly on ``topology`` (valid only where every pair is an edge)."""
        dot = topology.dot_of()
        pulses = tuple(ExchangePulse((dot[a], dot[b]), t) for a, b, t in self.pulses)
        return PulseSequence(self.gate, topology.dots, pulses, dict(topology.initial_spin),
                             dict(topology.initial_spin), topology.key, meta={"source": "reference"})


@dataclass(frozen=True)
class GateSpec:
    gate: str
    target: np.ndarray
    final_constraint: str | tuple = "identity"

    @classmethod
    def named(cls, gate: str, constraint: str | tuple = "identity") -> "GateSpec":
        return cls(gate, GATES[gate], constraint)

    def routed_target(self) -> np.ndarray:
        """Logical gate expected from a route honouring this spec's final constraint."""
        if self.final_constraint == "qubit_swap":
            return SWAP @ self.target
        return self.target


def destination_maps(topology: DotTopology, constraint) -> list[dict[int, str]]:
    init = topology.initial_spin
    if constraint == "identity":
        return [dict(init)]
    if constraint == "qubit_swap":
        return [{d: swap_qubit_letter(lab) for d, lab in init.items()}]
    if constraint == "intraqubit_any":
        out = []
        a_dots = [d for d in topology.dots if init[d][0] == "A"]
        b_dots = [d for d in topology.dots if init[d][0] == "B"]
        for pa in itertools.permutations(sorted(init[d] for d in a_dots)):
            for pb in itertools.permutations(sorted(init[d] for d in b_dots)):
                m = dict(zip(a_dots, pa))
                m.update(zip(b_dots, pb))
                out.append(m)
        return out
    if isinstance(constraint, (list, tuple)):
        out = [dict(m) for m in constraint]
        if not out:
            raise RoutingError("no destination")
        return out
    raise RoutingError(f"unknown final constraint {constraint!r}")


class _Problem:
    """Precomputed integer encodings of a (topology, reference, spec) instance."""

    def __init__(self, topology: DotTopology, ref: ReferenceSequence, spec: GateSpec):
        if not is_connected(topology.dots, topology.edges):
            raise TopologyError("graph not connected")
        self.topology = topology
        self.ref = ref
        self.dots = topology.dots
        pos = {d: i for i, d in enumerate(self.dots)}
        self.edges = tuple(sorted(tuple(sorted((pos[a], pos[b]))) for a, b in topology.edges))
        self.edge_index = {}
        for e, (i, j) in enumerate(self.edges):
            self.edge_index[(i, j)] = e
            self.edge_index[(j, i)] = e
        self.touch = [0] * len(self.dots)
        for e, (i, j) in enumerate(self.edges):
            self.touch[i] |= 1 << e
            self.touch[j] |= 1 << e
        self.start = tuple(_LABEL_INDEX[topology.initial_spin[d]] for d in self.dots)
        maps = destination_maps(topology, spec.final_constraint)
        if not maps:
            raise RoutingError("no destination")
        self.dest_maps = maps
        self.dest = {tuple(_LABEL_INDEX[m[d]] for d in self.dots): i for i, m in enumerate(maps)}
        self.ref_pairs = [(_LABEL_INDEX[a], _LABEL_INDEX[b]) for a, b, _ in ref.pulses]
        self.ref_angles = [t for _, _, t in ref.pulses]

    def pay(self, unblocked: int, e: int) -> int:
        i, j = self.edges[e]
        return (unblocked & ~self.touch[i] & ~self.touch[j]) | (1 << e)


@dataclass
class SearchGraph:
    """Explored part of the routing state space.

    States are ``(k, config, unblocked)`` with ``config`` a tuple of label indices
    per dot position and ``unblocked`` a bitmask over topology edges.
    """

    problem: _Problem
    weight: int
    moves: list
    explored: int
    layer_sizes: list

    def node_count(self) -> int:
        return self.explored


def build_search_graph(topology: DotTopology, ref: ReferenceSequence, spec: GateSpec) -> SearchGraph:
    """Explore states in 0-1 BFS order until the cheapest destination is settled."""
    pr = _Problem(topology, ref, spec)
    trans, eidx, mpay, mhas, masks = _search.tables(pr.edges)
    n = len(pr.ref_pairs)
    ref_pairs = np.array(pr.ref_pairs, dtype=np.int32).reshape(n, 2)
    dest = np.zeros(_search.N_CONF, dtype=np.bool_)
    for c in pr.dest:
        dest[_search.PERM_INDEX[c]] = True
    start = _search.PERM_INDEX[pr.start]
    goal, dist, par, pmove = _search.zero_one_bfs(trans, _search.POS, eidx, mpay, mhas, ref_pairs, start, dest)
    if goal < 0:
        raise RoutingError("no route to any destination")
    ne = len(pr.edges)
    moves = []
    s = goal
    while par[s] >= 0:
        mv = int(pmove[s])
        moves.append(("swap", mv) if mv < ne else ("ref", mv - ne))
        s = int(par[s])
    moves.reverse()
    settled = dist < (1 << 30)
    per_layer = settled.reshape(n + 1, -1).sum(axis=1)
    return SearchGraph(pr, int(dist[goal]), moves, int(settled.sum()), [int(v) for v in per_layer])


def _emit(pr: _Problem, moves: Sequence[tuple[str, int]], gate: str, source: str) -> PulseSequence:
    """Turn a move list into a fused pulse sequence with spin maps."""
    conf = list(pr.start)
    pulses: list[ExchangePulse] = []
    swaps = 0
    k = 0
    for kind, e in moves:
        i, j = pr.edges[e]
        pair = (pr.dots[i], pr.dots[j])
        if kind == "swap":
            pulses.append(ExchangePulse(pair, math.pi))
            conf[i], conf[j] = conf[j], conf[i]
            swaps += 1
        else:
            pulses.append(ExchangePulse(pair, pr.ref_angles[k]))
            k += 1
    fused, phase = fuse_pulses(pulses)
    final = {d: LABELS[conf[i]] for i, d in enumerate(pr.dots)}
    meta = {"source": source, "swaps": swaps}
    return PulseSequence(gate, pr.dots, tuple(fused), dict(pr.topology.initial_spin), final,
                         pr.topology.key, phase, meta)


def path_moves(graph: SearchGraph) -> list[tuple[str, int]]:
    return list(graph.moves)


def shortest_route(topology: DotTopology, ref: ReferenceSequence, spec: GateSpec) -> PulseSequence:
    graph = build_search_graph(topology, ref, spec)
    seq = _emit(graph.problem, path_moves(graph), spec.gate, "routed")
    meta = dict(seq.meta, weight=graph.weight, constraint=_constraint_name(spec.final_constraint))
    return PulseSequence(seq.gate, seq.dots, seq.pulses, seq.initial_map, seq.final_map, seq.topology,
                         seq.phase, meta)


def shallow_route(topology: DotTopology, ref: ReferenceSequence, spec: GateSpec) -> PulseSequence:
    """Shortest route whose fully parallel depth is minimal among all shortest routes to single destinations.

    Each admissible destination is routed on its own, so this costs one search per destination.
    """
    best = None
    for m in destination_maps(topology, spec.final_constraint):
        seq = shortest_route(topology, ref, GateSpec(spec.gate, spec.target, (m,)))
        score = (len(seq), seq.depth)
        if best is None or score < best[0]:
            best = score, seq
    seq = best[1]
    meta = dict(seq.meta, constraint=_constraint_name(spec.final_constraint))
    return PulseSequence(seq.gate, seq.dots, seq.pulses, seq.initial_map, seq.final_map, seq.topology,
                         seq.phase, meta)


def _constraint_name(c) -> str:
    return c if isinstance(c, str) else "explicit"


def route_weight(moves: Iterable[tuple[str, int]], pr: _Problem) -> int:
    """Pulse count charged by the unblocked-merge rule for a move list."""
    ub = 0
    w = 0
    for _, e in moves:
        if ub >> e & 1:
            continue
        ub = pr.pay(ub, e)
        w += 1
    return w


# ----------------------------------------------------------------- greedy


def _swap_network(pr: _Problem, conf: tuple, targets: Mapping[tuple, int]) -> list[int]:
    """Fewest swaps (BFS over configurations) from ``conf`` to any target; deterministic."""
    if conf in targets:
        return []
    prev = {conf: None}
    dq = deque([conf])
    while dq:
        c = dq.popleft()
        for e, (i, j) in enumerate(pr.edges):
            n = list(c)
            n[i], n[j] = n[j], n[i]
            n = tuple(n)
            if n in prev:
                continue
            prev[n] = (c, e)
            if n in targets:
                path = []
                while prev[n] is not None:
                    n, e2 = prev[n]
                    path.append(e2)
                return path[::-1]
            dq.append(n)
    raise RoutingError("destination unreachable")


def _shortest_path(adj: Mapping[int, list[int]], a: int, b: int) -> list[int]:
    prev = {a: None}
    dq = deque([a])
    while dq:
        u = dq.popleft()
        if u == b:
            break
        for v in adj[u]:
            if v not in prev:
                prev[v] = u
                dq.append(v)
    path = [b]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    return path[::-1]


def greedy_route(topology: DotTopology, ref: ReferenceSequence, spec: GateSpec) -> PulseSequence:
    """Walk the reference; when two spins are apart, move the first toward the second along a shortest path."""
    pr = _Problem(topology, ref, spec)
    adj = {i: [] for i in range(len(pr.dots))}
    for i, j in pr.edges:
        adj[i].append(j)
        adj[j].append(i)
    for v in adj.values():
        v.sort()
    conf = list(pr.start)
    moves: list[tuple[str, int]] = []
    for la, lb in pr.ref_pairs:
        i, j = conf.index(la), conf.index(lb)
        path = _shortest_path(adj, i, j)
        for a, b in zip(path[:-2], path[1:-1]):
            moves.append(("swap", pr.edge_index[(a, b)]))
            conf[a], conf[b] = conf[b], conf[a]
        moves.append(("ref", pr.edge_index[(conf.index(la), conf.index(lb))]))
    for e in _swap_network(pr, tuple(conf), pr.dest):
        moves.append(("swap", e))
    seq = _emit(pr, moves, spec.gate, "greedy")
    meta = dict(seq.meta, weight=route_weight(moves, pr), constraint=_constraint_name(spec.final_constraint))
    return PulseSequence(seq.gate, seq.dots, seq.pulses, seq.initial_map, seq.final_map, seq.topology,
                         seq.phase, meta)


# ----------------------------------------------------------------- oracle


def brute_force_weight(topology: DotTopology, ref: ReferenceSequence, spec: GateSpec) -> int:
    """Exhaustive minimum over swap insertions whose chains between reference pulses are minimal.

    Between consecutive reference pulses (and before the first / after the last)
    every configuration may be targeted, reached by every swap chain of minimal
    length. This is the layered-graph formulation taken literally, with no
    priority queue, so it serves as an independent check on the search.
    """
    pr = _Problem(topology, ref, spec)
    trans, eidx, mpay, mhas, _ = _search.tables(pr.edges)
    n = len(pr.ref_pairs)
    ref_pairs = np.array(pr.ref_pairs, dtype=np.int32).reshape(n, 2)
    dest = np.zeros(_search.N_CONF, dtype=np.bool_)
    for c in pr.dest:
        dest[_search.PERM_INDEX[c]] = True
    best = int(_search.layered_oracle(trans, _search.POS, eidx, mpay, mhas, ref_pairs,
                                      _search.PERM_INDEX[pr.start], dest))
    if best >= 1 << 30:
        raise RoutingError("no destination reachable")
    return best


# ------------------------------------------------------------- statistics


@dataclass
class ClassStats:
    class_key: str
    gate: str
    min: int
    mean: float
    max: int
    n_members: int


def class_statistics(classes: Sequence[TopologyClass], lengths: Mapping[str, int], gate: str) -> list[ClassStats]:
    """Per-class min/mean/max of sequence lengths keyed by topology key."""
    out = []
    for c in classes:
        vals = [lengths[t.key] for t in c.members]
        out.append(ClassStats(c.canonical_key, gate, min(vals), float(np.mean(vals)), max(vals), len(vals)))
    return out


def route_statistics(classes: Sequence[TopologyClass], ref: ReferenceSequence, spec: GateSpec,
                     greedy: bool = False) -> list[ClassStats]:
    router = greedy_route if greedy else shortest_route
    lengths = {t.key: len(router(t, ref, spec)) for c in classes for t in c.members}
    return class_statistics(classes, lengths, spec.gate)


def mean_percent_difference(a: Mapping[str, int], b: Mapping[str, int]) -> float:
    """Mean over shared keys of (b - a) / a in percent."""
    keys = sorted(set(a) & set(b))
    return float(np.mean([(b[k] - a[k]) / a[k] * 100.0 for k in keys]))


STATS_HEADER = ("class_key", "gate", "min", "mean", "max", "n_members")


def stats_rows(stats: Iterable[ClassStats]) -> list[tuple]:
    return [(s.class_key, s.gate, s.min, f"{s.mean:.4f}", s.max, s.n_members) for s in stats]


def normalize_reference(ref: ReferenceSequence) -> ReferenceSequence:
    """Fuse mergeable reference pulses so the search never double-counts them."""
    dot = {lab: i for i, lab in enumerate(LABELS)}
    pulses = [ExchangePulse((dot[a], dot[b]), t) for a, b, t in ref.pulses]
    fused, _ = fuse_pulses(pulses)
    return ReferenceSequence(ref.gate, tuple((LABELS[p.pair[0]], LABELS[p.pair[1]], normalize_angle(p.theta))
                                             for p in fused), dict(ref.meta))
