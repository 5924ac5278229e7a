"""Command-line driver: ``eo-pulsec <subcommand> [flags]``.

Exit codes: 0 success, 1 verification or validation failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import multiprocessing
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .noise import NOISE_HEADER, NoiseError, NoiseModel, TimedSchedule, gate_infidelity, noise_row
from .pulses import from_record, read_library, to_record
from .references import ReferenceError, load_references
from .router import (STATS_HEADER, GateSpec, RoutingError, class_statistics, greedy_route, shallow_route,
                     shortest_route, stats_rows)
from .scheduler import (LAYOUT_SPECS, RULES, ScheduleError, SequenceLibrary, asap_schedule, build_layout,
                        check_schedule, compile_qec_round, load_cycle, load_layout,
                        surface_code_cycle)
from .topology import (TopologyError, all_topologies, classify, enumerate_square_lattice_topologies,
                       load_topologies, save_topologies)
from . import topology as topo_mod
from .verifier import GATES, certify, ideal_truth_table, simulate_truth_table, truth_table_overlap

CONSTRAINT_FLAGS = {"identity": "identity", "qubit-swap": "qubit_swap", "intraqubit": "intraqubit_any"}
LAYOUT_FLAGS = {name.lower(): name for name in LAYOUT_SPECS}
RULE_FLAGS = {"full": "full", "n": "N", "nn": "NN"}


class UsageError(Exception):
    pass


class CheckFailed(Exception):
    pass


# ------------------------------------------------------------- plumbing


@dataclass
class RunManifest:
    command: str
    inputs: list[str]
    config_hash: str
    seed: int
    version: str = __version__
    outputs: list[str] = field(default_factory=list)

    def write(self, out_dir: Path) -> Path:
        path = out_dir / "manifest.json"
        path.write_text(json.dumps(asdict(self), indent=1, sort_keys=True) + "\n")
        return path


def _config_hash(args: argparse.Namespace) -> str:
    skip = {"func", "jobs", "config"}
    items = {k: str(v) for k, v in sorted(vars(args).items()) if k not in skip}
    return hashlib.sha256(json.dumps(items, sort_keys=True).encode()).hexdigest()[:16]


def _default_seed() -> int:
    raw = os.environ.get("EO_PULSEC_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"EO_PULSEC_SEED must be an integer, got {raw!r}") from None


def _load_toml(path: str) -> dict:
    if sys.version_info >= (3, 11):
        import tomllib
    else:
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _pmap(fn: Callable, items: Sequence, jobs: int) -> list:
    """Order-preserving map; results never depend on ``jobs``."""
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with multiprocessing.get_context("fork").Pool(min(jobs, len(items))) as pool:
        return pool.map(fn, items, chunksize=max(1, len(items) // (4 * jobs)))


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _references(args) -> dict:
    try:
        return load_references(args.reference)
    except ReferenceError as exc:
        msg = str(exc)
        if "not found" in msg or "malformed" in msg:
            raise UsageError(msg) from None
        raise CheckFailed(msg) from None


def _topologies(args) -> list:
    try:
        if getattr(args, "topologies", None):
            return load_topologies(args.topologies)
        if getattr(args, "square_only", False):
            return enumerate_square_lattice_topologies()
        return all_topologies(getattr(args, "triangular", None))
    except FileNotFoundError as exc:
        raise UsageError(f"file not found: {exc.filename}") from None
    except TopologyError as exc:
        raise UsageError(str(exc)) from None


# ------------------------------------------------------------ enumerate


def cmd_enumerate(args) -> int:
    topos = _topologies(args)
    classes = classify(topos)
    out = _out_dir(args)
    save_topologies(out / "topologies.json", topos)
    rows = []
    for c in classes:
        ex = c.members[0]
        coords = {ex.initial_spin[d]: list(ex.coords[d]) for d in ex.dots} if ex.coords else {}
        rows.append((c.canonical_key, c.size, ex.lattice or "", json.dumps(coords, sort_keys=True)))
    _write_csv(out / "classes.csv", ("class_key", "size", "lattice", "example_coords"), rows)
    man = RunManifest("enumerate", [str(args.triangular or "")], _config_hash(args), args.seed,
                      outputs=["topologies.json", "classes.csv"])
    man.write(out)
    print(f"{len(topos)} topologies in {len(classes)} classes")
    return 0


# ---------------------------------------------------------------- route


def _route_one(job):
    topo, ref, spec, mode = job
    router = {"optimal": shortest_route, "greedy": greedy_route, "shallow": shallow_route}[mode]
    seq = router(topo, ref, spec)
    cert = certify(seq, spec.routed_target())
    return to_record(seq), cert.status, cert.ok, len(seq), seq.depth


def route_all(topos, ref, spec, mode: str = "optimal", jobs: int = 1) -> list[tuple]:
    return _pmap(_route_one, [(t, ref, spec, mode) for t in topos], jobs)


def cmd_route(args) -> int:
    refs = _references(args)
    if args.gate not in refs:
        raise UsageError(f"no reference for gate {args.gate!r}; available: {sorted(refs)}")
    spec = GateSpec.named(args.gate, CONSTRAINT_FLAGS[args.constraint])
    topos = _topologies(args)
    results = route_all(topos, refs[args.gate], spec, "greedy" if args.greedy else "optimal", args.jobs)
    out = _out_dir(args)
    with open(out / "library.jsonl", "w") as fh:
        for rec, *_ in results:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    classes = classify(topos)
    cls_of = {t.key: c.canonical_key for c in classes for t in c.members}
    lengths = {t.key: r[3] for t, r in zip(topos, results)}
    _write_csv(out / "lengths.csv", ("topology", "class_key", "gate", "constraint", "router", "length", "depth",
                                     "certificate"),
               [(t.key, cls_of[t.key], args.gate, args.constraint, "greedy" if args.greedy else "optimal",
                 r[3], r[4], r[1]) for t, r in zip(topos, results)])
    _write_csv(out / "stats.csv", STATS_HEADER, stats_rows(class_statistics(classes, lengths, args.gate)))
    RunManifest("route", [str(args.reference or "bundled")], _config_hash(args), args.seed,
                outputs=["library.jsonl", "lengths.csv", "stats.csv"]).write(out)
    if args.figures:
        from .plotting import plot_class_lengths
        plot_class_lengths(out / "stats.csv", out / "stats.png")
    bad = [t.key for t, r in zip(topos, results) if not r[2]]
    print(f"routed {len(topos)} topologies; {len(bad)} failed certification")
    if bad:
        raise CheckFailed(f"uncertified routes: {bad[:5]}")
    return 0


# --------------------------------------------------------------- verify


def cmd_verify(args) -> int:
    try:
        seqs = read_library(args.library)
    except FileNotFoundError:
        raise UsageError(f"library not found: {args.library}") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    failures = []
    lines = []
    for k, seq in enumerate(seqs, 1):
        gate = args.gate or seq.gate
        if gate not in GATES:
            raise UsageError(f"{args.library}:{k}: unknown gate {gate!r}")
        target = GateSpec.named(gate, seq.meta.get("constraint", "identity")).routed_target()
        cert = certify(seq, target)
        lines.append(json.dumps({"record": k, "topology": seq.topology, **cert.to_json()}, sort_keys=True))
        if not cert.ok:
            failures.append(f"{args.library}:{k} ({seq.topology}): {cert.status}")
    if args.out:
        out = _out_dir(args)
        (out / "certificates.jsonl").write_text("".join(x + "\n" for x in lines))
    for f in failures:
        print(f"FAIL {f}", file=sys.stderr)
    print(f"{len(seqs) - len(failures)}/{len(seqs)} records certified")
    if failures:
        raise CheckFailed(f"{len(failures)} record(s) failed verification, first: {failures[0]}")
    return 0


# ------------------------------------------------------------- schedule


SUMMARY_HEADER = ("layout", "n_cx", "avg_pulses_per_cx", "rule", "duration_steps")


def run_layout(job) -> dict:
    """Compile and schedule one layout under every requested rule."""
    layout, cycle, ref, rules = job
    lib = SequenceLibrary(ref, router=shallow_route)
    comp = compile_qec_round(layout, cycle, lib)
    res = {"layout": layout, "compiled": comp, "schedules": {}}
    for rule in rules:
        sched = asap_schedule(comp.pulses, layout, rule)
        check_schedule(comp.pulses, sched, layout)
        res["schedules"][rule] = sched
    return res


def _schedule_rows(res) -> list[tuple]:
    comp = res["compiled"]
    rows = []
    for rule, sched in res["schedules"].items():
        dots = sorted(comp.layout.coords)
        for k, step in enumerate(sched.steps(comp.pulses)):
            busy = {d for i in step for d in comp.pulses[i].pair}
            pulses = ";".join(f"{comp.pulses[i].pair[0]}-{comp.pulses[i].pair[1]}:{comp.pulses[i].theta / math.pi:.6f}"
                              for i in step)
            rows.append((rule, k, pulses, " ".join(str(d) for d in dots if d not in busy)))
    return rows


def cmd_schedule(args) -> int:
    refs = _references(args)
    rules = list(RULES) if args.rule == "all" else [RULE_FLAGS[args.rule]]
    if args.layout_file:
        try:
            layouts = [load_layout(args.layout_file)]
            cycles = [load_cycle(args.cycle_file) if args.cycle_file else surface_code_cycle(layouts[0])]
        except FileNotFoundError as exc:
            raise UsageError(f"file not found: {exc.filename}") from None
    else:
        names = list(LAYOUT_SPECS) if args.layout == "all" else [LAYOUT_FLAGS[args.layout]]
        layouts = [build_layout(n, args.cols, args.rows) for n in names]
        cycles = [surface_code_cycle(lay) for lay in layouts]
    results = _pmap(run_layout, [(lay, cyc, refs["cx"], rules) for lay, cyc in zip(layouts, cycles)], args.jobs)
    out = _out_dir(args)
    summary = []
    outputs = ["summary.csv"]
    for res, cyc in zip(results, cycles):
        comp = res["compiled"]
        name = comp.layout.name
        for rule, sched in res["schedules"].items():
            summary.append((name, len(comp.gates), f"{comp.average_pulses_per_cx:.4f}", rule, sched.duration))
        _write_csv(out / f"schedule_{name}.csv", ("rule", "step", "pulses", "idle_dots"), _schedule_rows(res))
        (out / f"layout_{name}.json").write_text(json.dumps(comp.layout.to_json(), sort_keys=True) + "\n")
        (out / f"cycle_{name}.json").write_text(json.dumps(cyc.to_json(), sort_keys=True) + "\n")
        outputs += [f"schedule_{name}.csv", f"layout_{name}.json", f"cycle_{name}.json"]
    _write_csv(out / "summary.csv", SUMMARY_HEADER, summary)
    RunManifest("schedule", [str(args.layout_file or args.layout)], _config_hash(args), args.seed,
                outputs=outputs).write(out)
    if args.figures:
        from .plotting import plot_schedule_summary
        plot_schedule_summary(out / "summary.csv", out / "summary.png")
    for row in summary:
        print(",".join(map(str, row)))
    return 0


# ------------------------------------------------------------- noisesim


def _named_topology(name: str):
    fn = {"all-to-all": topo_mod.all_to_all, "linear": topo_mod.linear, "linear-parallel": topo_mod.linear_parallel,
          "ring": topo_mod.ring}.get(name)
    if fn is None:
        raise UsageError(f"unknown topology {name!r}")
    return fn()


def _noise_job(job):
    sched, model, target = job
    return gate_infidelity(sched, model, target)


def cmd_noisesim(args) -> int:
    refs = _references(args)
    if args.gate not in refs:
        raise UsageError(f"no reference for gate {args.gate!r}")
    ref = refs[args.gate]
    spec = GateSpec.named(args.gate)
    out = _out_dir(args)
    try:
        if args.sweep == "length":
            return _length_sweep(args, ref, spec, out)
        topo = _named_topology(args.topology)
        seq = shortest_route(topo, ref, spec)
        sched = TimedSchedule.from_sequence(seq)
        if args.sweep == "t2-ratio":
            models = [NoiseModel(T2_star=1.0 / r, delta_J=args.delta_j[0], shots=args.shots, seed=args.seed)
                      for r in args.ratios]
        else:
            models = [NoiseModel(T2_star=1.0 / args.ratios[0], delta_J=dj, shots=args.shots, seed=args.seed)
                      for dj in args.delta_j]
    except NoiseError as exc:
        raise UsageError(str(exc)) from None
    results = _pmap(_noise_job, [(sched, m, spec.target) for m in models], args.jobs)
    _write_csv(out / "noise.csv", NOISE_HEADER, [noise_row(sched, m, r) for m, r in zip(models, results)])
    RunManifest("noisesim", [args.topology], _config_hash(args), args.seed, outputs=["noise.csv"]).write(out)
    if args.figures:
        from .plotting import plot_noise_sweep
        plot_noise_sweep(out / "noise.csv", out / "noise.png", args.sweep)
    for m, r in zip(models, results):
        print(f"t/T2={1.0 / m.T2_star:.3g} dJ={m.delta_J:.3g} infidelity={r.infidelity:.3e} +- {r.stderr:.1e}")
    return 0


LENGTH_HEADER = ("topology", "router", "pulse_count", "schedule_duration_steps", "infidelity", "stderr")


def length_sweep(topos, ref, spec, model: NoiseModel, jobs: int = 1) -> list[tuple]:
    """Optimized and greedy routes on each topology, each simulated at full parallelism."""
    scheds = []
    for mode in ("optimal", "greedy"):
        for rec, *_ in route_all(topos, ref, spec, mode, jobs):
            scheds.append((mode, TimedSchedule.from_sequence(from_record(rec))))
    res = _pmap(_noise_job, [(s, model, spec.target) for _, s in scheds], jobs)
    return [(s.topology, mode, s.pulse_count, s.duration, r.infidelity, r.stderr) for (mode, s), r in zip(scheds, res)]


def geometric_mean_ratios(rows: Sequence[tuple]) -> tuple[float, float]:
    """(length ratio, error ratio) of greedy over optimal, geometric means across topologies."""
    opt = {r[0]: r for r in rows if r[1] == "optimal"}
    gr = {r[0]: r for r in rows if r[1] == "greedy"}
    keys = sorted(set(opt) & set(gr))
    lr = float(np.exp(np.mean([np.log(gr[k][2] / opt[k][2]) for k in keys])))
    er = float(np.exp(np.mean([np.log(gr[k][4] / opt[k][4]) for k in keys])))
    return lr, er


def sample_topologies(n: int, seed: int, triangular=None) -> list:
    topos = all_topologies(triangular)
    idx = np.random.default_rng(seed).choice(len(topos), size=min(n, len(topos)), replace=False)
    return [topos[i] for i in sorted(idx)]


def _length_sweep(args, ref, spec, out: Path) -> int:
    model = NoiseModel(T2_star=1.0 / args.ratios[0], delta_J=args.delta_j[0], shots=args.shots, seed=args.seed)
    rows = length_sweep(sample_topologies(args.samples, args.seed), ref, spec, model, args.jobs)
    _write_csv(out / "length_vs_infidelity.csv", LENGTH_HEADER,
               [(t, m, n, d, f"{e:.6e}", f"{s:.6e}") for t, m, n, d, e, s in rows])
    lr, er = geometric_mean_ratios(rows)
    RunManifest("noisesim", ["length"], _config_hash(args), args.seed,
                outputs=["length_vs_infidelity.csv"]).write(out)
    if args.figures:
        from .plotting import plot_length_vs_infidelity
        plot_length_vs_infidelity(out / "length_vs_infidelity.csv", out / "length_vs_infidelity.png")
    print(f"greedy/optimal length ratio {lr:.3f}, error ratio {er:.3f}")
    return 0


# ----------------------------------------------------------- truthtable


def cmd_truthtable(args) -> int:
    try:
        seqs = read_library(args.library)
    except FileNotFoundError:
        raise UsageError(f"library not found: {args.library}") from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not 1 <= args.record <= len(seqs):
        raise UsageError(f"record {args.record} out of range 1..{len(seqs)}")
    seq = seqs[args.record - 1]
    gauge = tuple(int(x) for x in args.gauge.split(","))
    p, leak = simulate_truth_table(seq, gauge)
    target = GateSpec.named(seq.gate, seq.meta.get("constraint", "identity")).routed_target()
    ideal = ideal_truth_table(target)
    if args.measured:
        try:
            meas = np.loadtxt(args.measured, delimiter=",")
        except OSError:
            raise UsageError(f"measured table not found: {args.measured}") from None
    else:
        meas = p
    try:
        ov = truth_table_overlap(meas, ideal)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = _out_dir(args)
    _write_csv(out / "truth_table.csv", ("input", "00", "01", "10", "11"),
               [(f"{k:02b}", *(f"{v:.6f}" for v in p[:, k])) for k in range(4)])
    RunManifest("truthtable", [str(args.library)], _config_hash(args), args.seed,
                outputs=["truth_table.csv"]).write(out)
    print(f"overlap {ov:.6f} max leakage {float(np.max(leak)):.3e}")
    return 0


# ---------------------------------------------------------------- stats


VARIANT_HEADER = ("topology", "class_key", "cx", "cx_permute", "cxswap", "swap", "permute_reduction_pct",
                  "cxswap_vs_cx_pct", "cxswap_vs_cx_plus_swap_pct")


def variant_lengths(topos, refs, gate: str = "cx", jobs: int = 1) -> dict[str, dict[str, int]]:
    specs = {"cx": GateSpec.named(gate), "cx_permute": GateSpec.named(gate, "intraqubit_any"),
             "cxswap": GateSpec.named(gate, "qubit_swap"), "swap": GateSpec.named("swap")}
    out = {}
    for name, spec in specs.items():
        ref = refs["swap" if name == "swap" else gate]
        out[name] = {t.key: r[3] for t, r in zip(topos, route_all(topos, ref, spec, "optimal", jobs))}
    return out


def variant_summary(v: dict[str, dict[str, int]]) -> dict[str, float]:
    keys = sorted(v["cx"])
    cx = np.array([v["cx"][k] for k in keys], float)
    perm = np.array([v["cx_permute"][k] for k in keys], float)
    cs = np.array([v["cxswap"][k] for k in keys], float)
    sw = np.array([v["swap"][k] for k in keys], float)
    red = (cx - perm) / cx * 100
    vs = (cs - cx) / cx * 100
    save = (cx + sw - cs) / (cx + sw) * 100
    return {"permute_reduction_mean": red.mean(), "permute_reduction_min": red.min(),
            "permute_reduction_max": red.max(), "cxswap_vs_cx_mean": vs.mean(), "cxswap_vs_cx_min": vs.min(),
            "cxswap_vs_cx_max": vs.max(), "cxswap_saving_mean": save.mean(), "cxswap_saving_min": save.min(),
            "cxswap_saving_max": save.max(), "cxswap_always_shorter": float(np.all(cs < cx + sw))}


def cmd_stats(args) -> int:
    refs = _references(args)
    topos = _topologies(args)
    classes = classify(topos)
    cls_of = {t.key: c.canonical_key for c in classes for t in c.members}
    v = variant_lengths(topos, refs, args.gate, args.jobs)
    out = _out_dir(args)
    rows = []
    for t in topos:
        k = t.key
        cx, pm, cs, sw = v["cx"][k], v["cx_permute"][k], v["cxswap"][k], v["swap"][k]
        rows.append((k, cls_of[k], cx, pm, cs, sw, f"{(cx - pm) / cx * 100:.4f}", f"{(cs - cx) / cx * 100:.4f}",
                     f"{(cx + sw - cs) / (cx + sw) * 100:.4f}"))
    _write_csv(out / "variants.csv", VARIANT_HEADER, rows)
    summ = variant_summary(v)
    _write_csv(out / "variant_summary.csv", ("metric", "value"), [(k, f"{x:.4f}") for k, x in summ.items()])
    stats = []
    for name, lengths in v.items():
        stats += stats_rows(class_statistics(classes, lengths, name))
    _write_csv(out / "class_stats.csv", STATS_HEADER, stats)
    RunManifest("stats", [str(args.reference or "bundled")], _config_hash(args), args.seed,
                outputs=["variants.csv", "variant_summary.csv", "class_stats.csv"]).write(out)
    if args.figures:
        from .plotting import plot_class_lengths
        plot_class_lengths(out / "class_stats.csv", out / "class_stats.png")
    for k, x in summ.items():
        print(f"{k}: {x:.3f}")
    return 0


# --------------------------------------------------------------- parser


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in str(text).split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file; top-level keys and [<subcommand>] tables set flag defaults")
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default: $EO_PULSEC_SEED or 0)")
    common.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    common.add_argument("--out", default="out")
    common.add_argument("--reference", default=None, help="reference JSONL (default: bundled)")
    common.add_argument("--figures", action="store_true", help="also render PNG figures (needs matplotlib)")

    p = argparse.ArgumentParser(prog="eo-pulsec", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("enumerate", parents=[common], help="enumerate six-dot topologies and classes")
    e.add_argument("--triangular", help="curated triangular-lattice topology JSON")
    e.add_argument("--square-only", action="store_true")
    e.set_defaults(func=cmd_enumerate)

    r = sub.add_parser("route", parents=[common], help="route a reference onto topologies")
    r.add_argument("--gate", default="cx", choices=sorted(GATES))
    r.add_argument("--constraint", default="identity", choices=sorted(CONSTRAINT_FLAGS))
    r.add_argument("--topologies", help="topology JSON (default: all enumerated)")
    r.add_argument("--triangular")
    r.add_argument("--square-only", action="store_true")
    r.add_argument("--greedy", action="store_true", help="use the greedy baseline router")
    r.set_defaults(func=cmd_route)

    v = sub.add_parser("verify", parents=[common], help="certify every record of a sequence library")
    v.add_argument("library")
    v.add_argument("--gate", default=None, choices=sorted(GATES))
    v.set_defaults(func=cmd_verify, out=None)

    s = sub.add_parser("schedule", parents=[common], help="compile and schedule a QEC round")
    s.add_argument("--layout", default="all", choices=sorted(LAYOUT_FLAGS) + ["all"])
    s.add_argument("--rule", default="all", choices=sorted(RULE_FLAGS) + ["all"])
    s.add_argument("--cols", type=int, default=5)
    s.add_argument("--rows", type=int, default=5)
    s.add_argument("--layout-file")
    s.add_argument("--cycle-file")
    s.set_defaults(func=cmd_schedule)

    n = sub.add_parser("noisesim", parents=[common], help="quasi-static noise simulation")
    n.add_argument("--sweep", default="t2-ratio", choices=["t2-ratio", "delta-j", "length"])
    n.add_argument("--gate", default="cx", choices=sorted(GATES))
    n.add_argument("--topology", default="all-to-all")
    n.add_argument("--ratios", type=_floats, default=[1e-3, 2e-3, 4e-3, 1e-2], help="t_pulse / T2* values")
    n.add_argument("--delta-j", type=_floats, default=[0.0])
    n.add_argument("--shots", type=int, default=20)
    n.add_argument("--samples", type=int, default=24, help="topologies in the length sweep")
    n.set_defaults(func=cmd_noisesim)

    t = sub.add_parser("truthtable", parents=[common], help="truth table of one library record")
    t.add_argument("library")
    t.add_argument("--record", type=int, default=1, help="1-based record number")
    t.add_argument("--gauge", default="0,0", help="gauge configuration of qubits A,B")
    t.add_argument("--measured", help="measured 4x4 CSV to compare against the ideal table")
    t.set_defaults(func=cmd_truthtable)

    st = sub.add_parser("stats", parents=[common], help="CX variant length statistics")
    st.add_argument("--gate", default="cx", choices=["cx", "cz"])
    st.add_argument("--topologies")
    st.add_argument("--triangular")
    st.add_argument("--square-only", action="store_true")
    st.set_defaults(func=cmd_stats)
    p.subparsers = sub.choices
    return p


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    """Parse ``argv``; config-file values become defaults so explicit flags still win."""
    args = parser.parse_args(argv)
    if args.config:
        cfg = _load_toml(args.config)
        values = {k: v for k, v in cfg.items() if not isinstance(v, dict)}
        values.update(cfg.get(args.command, {}))
        values = {k.replace("-", "_"): v for k, v in values.items()}
        unknown = sorted(set(values) - set(vars(args)))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        for k in ("ratios", "delta_j"):
            if k in values and not isinstance(values[k], list):
                values[k] = [float(values[k])]
        parser.subparsers[args.command].set_defaults(**values)
        args = parser.parse_args(argv)
    if args.seed is None:
        args.seed = _default_seed()
    return args


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return args.func(args)
    except SystemExit as exc:
        return int(exc.code or 0) if isinstance(exc.code, int) else 2
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CheckFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (RoutingError, ScheduleError, TopologyError, NoiseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
