"""Report assembly for each command, plus JSON, DOT and text rendering."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from . import __version__
from .analysis import equilibria, iso_classes, natural_subsystem, orbit_diagram
from .closure import DEFAULT_MAX_ELEMENTS, DEFAULT_TIMEOUT, ResourceError, closure
from .holonomy import decomposition, group_support, kr_upper_bound, refine_bound_by_inclusion
from .model import (LATTICE, critical_b_values, generator_set, parse_b,
                    regime_of, step_map)
from .skeleton import build_image_system, subduction_chain
from .transform import format_word, parse_word

SCHEMA_VERSION = 1

TABLE2_CONFIGS = ((1, 3), (1, 4), (1, 2), (1, 4, 5), (1, 3, 5), (1, 2, 3),
                  (1, 2, 3, 4), (1, 3, 4, 6), (1, 2, 3, 5))
TABLE2_B = Fraction(7, 2)


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    b: Fraction = TABLE2_B
    open_cells: tuple[int, ...] = ()
    exclude: tuple[int, ...] = ()
    seeds: tuple[int, ...] = ()
    word: tuple[str, ...] = ()
    max_elements: int = DEFAULT_MAX_ELEMENTS
    timeout: float = DEFAULT_TIMEOUT
    workers: int = 1
    timing: bool = False

    def __post_init__(self):
        self.b = parse_b(self.b)
        cells = tuple(self.open_cells)
        if len(set(cells)) != len(cells):
            raise UsageError("open cells must be distinct")
        for c in cells:
            LATTICE.check_cell(c)
        self.open_cells = tuple(sorted(cells))
        self.word = parse_word(self.word)

    def echo(self) -> dict:
        return {"b": str(self.b), "open_cells": list(self.open_cells)}


def _sorted_set(s: Iterable[int]) -> list[int]:
    return sorted(s)


def _header(command: str, cfg: Optional[RunConfig] = None) -> dict:
    out = {"schema_version": SCHEMA_VERSION, "tool_version": __version__, "command": command}
    if cfg is not None:
        out["config"] = cfg.echo()
        out["regime"] = regime_of(cfg.b)
    return out


# -- regimes -------------------------------------------------------------------

def _interval_samples(lo: Fraction, hi: Fraction, k: int = 7) -> list[Fraction]:
    return [lo + (hi - lo) * Fraction(i, k + 1) for i in range(1, k + 1)]


def cmd_regimes(lo, hi) -> dict:
    lo, hi = parse_b(lo), parse_b(hi)
    if hi < lo:
        raise UsageError(f"empty range [{lo}, {hi}]")
    breaks = [p for p in critical_b_values() if lo <= p <= hi]
    cuts = sorted(set([lo, hi] + breaks))
    pieces = []
    for p in breaks:
        pieces.append({"lo": p, "hi": p, "lo_closed": True, "hi_closed": True})
    for a, c in zip(cuts, cuts[1:]):
        pieces.append({"lo": a, "hi": c, "lo_closed": a not in breaks, "hi_closed": c not in breaks})
    if lo == hi and not breaks:
        pieces.append({"lo": lo, "hi": hi, "lo_closed": True, "hi_closed": True})
    pieces.sort(key=lambda p: (p["lo"], p["hi"]))

    regimes = []
    for p in pieces:
        if p["lo"] == p["hi"]:
            samples = [p["lo"]]
        else:
            samples = _interval_samples(p["lo"], p["hi"])
            if p["lo_closed"]:
                samples.insert(0, p["lo"])
            if p["hi_closed"]:
                samples.append(p["hi"])
        maps = {step_map(s) for s in samples}
        if len(maps) != 1:
            raise AssertionError(f"step map not constant on [{p['lo']}, {p['hi']}]")
        rep = samples[len(samples) // 2]
        regimes.append({
            "regime": regime_of(rep),
            "lo": str(p["lo"]), "hi": str(p["hi"]),
            "lo_closed": p["lo_closed"], "hi_closed": p["hi_closed"],
            "samples": [str(s) for s in samples],
            "representative": str(rep),
            "step_map": list(step_map(rep).images),
        })
    for r1, r2 in zip(regimes, regimes[1:]):
        if r1["step_map"] == r2["step_map"]:
            raise AssertionError("adjacent regimes share a step map")
    out = _header("regimes")
    out.update({"range": [str(lo), str(hi)], "breakpoints": [str(p) for p in breaks],
                "regimes": regimes})
    return out


# -- decomposition ---------------------------------------------------------------

def decompose(cfg: RunConfig) -> dict:
    """Run the whole pipeline; the result still holds live objects."""
    gens = generator_set(cfg.b, cfg.open_cells)
    timings = {}
    t0 = time.perf_counter()
    try:
        S = closure(gens, max_elements=cfg.max_elements, timeout=cfg.timeout,
                    workers=cfg.workers)
    except ResourceError as exc:
        exc.diagnostics.setdefault("phase", "closure")
        exc.diagnostics.setdefault("config", cfg.echo())
        raise
    timings["closure"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    system = build_image_system(S)
    classes = system.classes
    timings["skeleton"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    levels = decomposition(S, system)
    timings["holonomy"] = time.perf_counter() - t0
    return {"generators": gens, "semigroup": S, "system": system, "classes": classes,
            "levels": levels, "timings": timings}


def _level_json(levels) -> list[dict]:
    out = []
    for level in levels:
        entries = []
        for e in level.entries:
            entries.append({
                "degree": e.degree,
                "group": e.group_id.name,
                "order": e.group_id.order,
                "label": e.label,
                "representative": _sorted_set(e.cls.representative),
                "class_size": len(e.cls.members),
                "tiles": [_sorted_set(t) for t in e.group.tiles],
                "generator_witnesses": [format_word(w) for w in e.group.generator_witnesses],
            })
        out.append({"height": level.height, "nontrivial": bool(level.nontrivial),
                    "entries": entries})
    return out


def _support_labels(levels) -> list[str]:
    pairs = sorted(group_support(levels), key=lambda p: (-p[0], p[1]))
    return [f"({n},{g})" for n, g in pairs]


def cmd_decompose(cfg: RunConfig) -> dict:
    res = decompose(cfg)
    levels = res["levels"]
    bound = kr_upper_bound(levels)
    out = _header("decompose", cfg)
    out.update({
        "semigroup_order": res["semigroup"].order,
        "image_system_size": len(res["system"]),
        "class_count": len(res["classes"]),
        "max_height": res["system"].max_height,
        "groups": _support_labels(levels),
        "kr_bound": {"raw": bound, "refined": bound},
        "group_levels": [lv.height for lv in levels if lv.nontrivial],
        "levels": _level_json(levels),
    })
    if cfg.timing:
        out["timing"] = {k: round(v, 3) for k, v in res["timings"].items()}
    return out


def cmd_table2(refine: bool = True, max_elements: int = DEFAULT_MAX_ELEMENTS,
               timeout: float = DEFAULT_TIMEOUT, workers: int = 1,
               configs: Iterable[tuple[int, ...]] = TABLE2_CONFIGS, timing: bool = False) -> dict:
    columns = []
    raw = {}
    for cells in configs:
        cfg = RunConfig(b=TABLE2_B, open_cells=cells, max_elements=max_elements,
                        timeout=timeout, workers=workers, timing=timing)
        col = {"open_cells": list(cfg.open_cells)}
        try:
            rep = cmd_decompose(cfg)
        except ResourceError as exc:
            col.update({"status": "resource_error", "limit": exc.limit,
                        "diagnostics": {k: v for k, v in exc.diagnostics.items() if k != "config"}})
            columns.append(col)
            continue
        col.update({"status": "ok", "semigroup_order": rep["semigroup_order"],
                    "kr_bound_raw": rep["kr_bound"]["raw"], "groups": rep["groups"],
                    "group_levels": rep["group_levels"]})
        if timing:
            col["timing"] = rep["timing"]
        raw[(TABLE2_B, cfg.open_cells)] = rep["kr_bound"]["raw"]
        columns.append(col)
    refined = refine_bound_by_inclusion(raw) if refine else dict(raw)
    for col in columns:
        key = (TABLE2_B, tuple(col["open_cells"]))
        if key in refined:
            col["kr_bound"] = refined[key]
    out = _header("table2")
    out.update({"b": str(TABLE2_B), "refined": refine, "columns": columns,
                "bounds": [col.get("kr_bound") for col in columns]})
    return out


# -- chains, orbits, equilibria ----------------------------------------------------

def cmd_chain(cfg: RunConfig) -> dict:
    gens = generator_set(cfg.b)
    start = set(range(LATTICE.n_states)) - set(cfg.exclude)
    chain = subduction_chain(gens, start)
    out = _header("chain", cfg)
    out.update({"exclude": sorted(cfg.exclude),
                "chain": [{"size": len(s), "states": _sorted_set(s)} for s in chain]})
    return out


def cmd_orbits(cfg: RunConfig) -> dict:
    if not cfg.word:
        raise UsageError("orbits needs a non-empty --word")
    gens = generator_set(cfg.b, cfg.open_cells)
    ns = natural_subsystem(cfg.word, gens)
    seeds = cfg.seeds or tuple(sorted(ns.carrier))
    diagram = orbit_diagram(cfg.word, gens, seeds)
    out = _header("orbits", cfg)
    out.update({
        "word": format_word(cfg.word),
        "carrier": _sorted_set(ns.carrier),
        "carrier_binary": [LATTICE.to_binary(x) for x in sorted(ns.carrier)],
        "cycles": [list(c) for c in ns.cycles],
        "fixed_points": _sorted_set(ns.fixed_points),
        "nontrivial": ns.is_nontrivial,
        "seeds": list(seeds),
        "nodes": list(diagram.nodes),
        "edges": [list(e) for e in diagram.edges],
    })
    return out


def cmd_equilibria(cfg: RunConfig) -> dict:
    eq = equilibria(step_map(cfg.b))
    out = _header("equilibria", cfg)
    out.update({"equilibria": _sorted_set(eq),
                "classes": [{"representative": min(c), "states": _sorted_set(c),
                             "binary": LATTICE.to_binary(min(c))} for c in iso_classes(eq)]})
    return out


# -- rendering ---------------------------------------------------------------------

def to_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _q(s: str) -> str:
    # backslash escapes such as \n are kept for Graphviz to interpret
    return '"{}"'.format(s.replace('"', r'\"'))


def _set_label(states: list[int]) -> str:
    n = LATTICE.n_states
    if len(states) == n:
        return "X"
    missing = sorted(set(range(n)) - set(states))
    if len(missing) <= 4:
        return "X - {" + ",".join(map(str, missing)) + "}"
    return "{" + ",".join(map(str, states)) + "}"


def chain_dot(report: dict) -> str:
    lines = ["digraph chain {", "  rankdir=TB;", "  node [shape=box];"]
    names = []
    for i, node in enumerate(report["chain"]):
        name = f"n{i}"
        names.append(name)
        lines.append(f"  {name} [label={_q(_set_label(node['states']))}];")
    for a, c in zip(names, names[1:]):
        lines.append(f"  {a} -> {c} [label=\"t\"];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def orbits_dot(report: dict) -> str:
    lines = ["digraph orbits {", f"  label={_q(report['word'])};", "  node [shape=ellipse];"]
    for x in report["nodes"]:
        label = str(x) + "\\n" + LATTICE.to_binary(x)
        lines.append(f"  s{x} [label={_q(label)}];")
    for a, c in report["edges"]:
        lines.append(f"  s{a} -> s{c};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def to_dot(report: dict) -> str:
    if report["command"] == "chain":
        return chain_dot(report)
    if report["command"] == "orbits":
        return orbits_dot(report)
    raise UsageError(f"no DOT rendering for {report['command']}")


def to_text(report: dict) -> str:
    cmd = report["command"]
    lines = []
    if cmd == "regimes":
        for r in report["regimes"]:
            lb = "[" if r["lo_closed"] else "("
            rb = "]" if r["hi_closed"] else ")"
            span = r["lo"] if r["lo"] == r["hi"] else f"{lb}{r['lo']}, {r['hi']}{rb}"
            lines.append(f"{r['regime']}  b in {span}")
    elif cmd == "table2":
        head = ["O"] + ["".join(map(str, c["open_cells"])) for c in report["columns"]]
        bounds = ["KR"]
        for c in report["columns"]:
            if c.get("status") != "ok":
                bounds.append("ERR")
            elif c["kr_bound"] != c["kr_bound_raw"]:
                bounds.append(f"{c['kr_bound_raw']}->{c['kr_bound']}")
            else:
                bounds.append(str(c["kr_bound"]))
        width = max(len(x) for x in head + bounds) + 1
        lines.append("".join(x.ljust(width) for x in head))
        lines.append("".join(x.ljust(width) for x in bounds))
        for c in report["columns"]:
            groups = " ".join(c.get("groups", [])) or "-"
            lines.append(f"{''.join(map(str, c['open_cells']))}: {groups}")
    elif cmd == "decompose":
        cfg = report["config"]
        lines.append(f"b={cfg['b']} O={cfg['open_cells']} regime {report['regime']}")
        lines.append(f"|S| = {report['semigroup_order']}, image sets = {report['image_system_size']},"
                     f" classes = {report['class_count']}, max height = {report['max_height']}")
        for lv in report["levels"]:
            labels = [e["label"] for e in lv["entries"] if e["group"] != "trivial"]
            if labels:
                lines.append(f"height {lv['height']}: {' '.join(labels)}")
        lines.append(f"KR upper bound: {report['kr_bound']['raw']}")
    elif cmd == "chain":
        for node in report["chain"]:
            lines.append(_set_label(node["states"]))
    elif cmd == "orbits":
        lines.append(f"word {report['word']}: carrier {report['carrier']}")
        for c in report["cycles"]:
            lines.append("(" + " ".join(f"{x}:{LATTICE.to_binary(x)}" for x in c) + ")")
    elif cmd == "equilibria":
        for c in report["classes"]:
            lines.append(f"[{c['representative']}] = {c['states']}")
    else:
        lines.append(to_json(report).rstrip())
    return "\n".join(lines) + "\n"
