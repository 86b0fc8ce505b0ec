"""Satisfiability of navigational queries over a schema graph.

Two complete procedures, each polynomial on its fragment:

* `eval1` handles qualifier-free step sequences along child, parent and the
  two sibling axes.  It walks the schema graph keeping, per depth, the set of
  places the current node might occupy, plus a sibling-requirement map keyed
  by the absolute label path.

* `eval2` handles child and sibling steps with nested qualifiers (after
  conjunctions are split).  It computes, per subexpression, the set of
  (start place, end place) pairs annotated with requirement maps keyed
  relative to the start.

Both report UNSAT exactly when every candidate run dies, either by running
out of admissible places or by demanding children no single content-model
word provides."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .constraints import (
    DfsBits, Key, SibEntry, SibMap, consistent, coverable, psi,
    render_key, render_map,
)
from .dtd import Dtd, delta_dtd, validate_no_useless
from .errors import UnsupportedFragment
from .schema_graph import SchemaGraph, SgNode, build_schema_graph
from .xpath import (
    ARROW, Axis, Path, QPath, Qual, Seq, Step, Union,
    fragment_of, normalize, parse_xpath, render_xpath,
)


# --- eval1 -------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Level:
    label: str
    nodes: tuple[SgNode, ...]   # same label, same parent label, index order
    dfs: bool                   # True iff a single place that is dfs


@dataclass(frozen=True)
class Eval1Result:
    sat: bool
    levels: Optional[tuple[Level, ...]]
    beta: Optional[SibMap]
    reason: Optional[str]
    final_state: Optional[str]  # rendered only on traced runs
    trace: tuple[str, ...]


def render_levels(levels: tuple[Level, ...]) -> str:
    return "".join("{" + ",".join(u.name for u in lv.nodes) + "}" for lv in levels)


def render_state(levels: tuple[Level, ...], beta: SibMap) -> str:
    return f"({render_levels(levels)}, {render_map(beta)})"


def _step_str(step: Step) -> str:
    return f"{ARROW[step.axis]}::{step.label}"


def _flatten_steps(p: Path) -> list[Step]:
    match p:
        case Step(_, _):
            return [p]
        case Seq(left, right):
            return _flatten_steps(left) + _flatten_steps(right)
    raise UnsupportedFragment(f"not a plain step sequence: {render_xpath(p)}")


def _admissible(u: SgNode, v: SgNode, axis: Axis) -> bool:
    """Can v hold a sibling of a node at u, after (fsib) or before (psib) it?
    A starred place can recur, so its own position stays admissible."""
    if axis is Axis.FSIB:
        return u.pos < v.pos if u.omega == "-" else u.pos <= v.pos
    return v.pos < u.pos if u.omega == "-" else v.pos <= u.pos


def _as_map(bmap: dict[Key, tuple[frozenset[str], DfsBits]]) -> SibMap:
    return SibMap(tuple(
        SibEntry(key, vals, dbits) for key, (vals, dbits) in sorted(bmap.items())
    ))


def _restrict_inplace(bmap: dict[Key, tuple[frozenset[str], DfsBits]], current: Key) -> None:
    # same survival rule as SibMap.restrict, without rebuilding the map
    drop = []
    for key, (_, dbits) in bmap.items():
        lcp = 0
        while lcp < min(len(key), len(current)) and key[lcp] == current[lcp]:
            lcp += 1
        if not all(dbits[lcp:]):
            drop.append(key)
    for key in drop:
        del bmap[key]


def eval1(graph: SchemaGraph, p: Path, trace: bool = True) -> Eval1Result:
    """Walk the query over the schema graph, one step at a time.

    With trace=False no state strings are rendered at all (final_state comes
    back None and the trace is empty); the verdict, levels and map are the
    same either way.  The requirement map lives in a plain dict here: a step
    touches one entry, so only that entry needs a fresh coverability check,
    and a child step never unpins anything (the current path only extends),
    so the restriction pass runs only on upward and sideways moves."""
    d = graph.dtd
    steps = _flatten_steps(p)
    levels: tuple[Level, ...] = (Level(d.root, (graph.sentinel,), True),)
    path: Key = (d.root,)
    bits: DfsBits = (True,)
    bmap: dict[Key, tuple[frozenset[str], DfsBits]] = {}
    lines: list[str] = []
    if trace:
        lines.append(f"start: {render_state(levels, _as_map(bmap))}")

    def unsat(line: Optional[str], reason: str) -> Eval1Result:
        if trace:
            lines.append(line)
            lines.append("verdict: UNSAT")
        return Eval1Result(False, None, None, reason, line, tuple(lines))

    def record(key: Key, kbits: DfsBits, values: frozenset[str]) -> frozenset[str]:
        stored = bmap.get(key)
        if stored is None:
            merged = values
        else:
            old_vals, old_bits = stored
            assert old_bits == kbits, f"dfs mismatch on key {key}"
            merged = old_vals | values
        bmap[key] = (merged, kbits)
        return merged

    for step in steps:
        s = _step_str(step)
        if step.axis is Axis.CHILD:
            targets = graph.children_with_label(levels[-1].label, step.label)
            if not targets:
                return unsat(
                    f"{s} → ∅ (no admissible place)",
                    f"no place labeled {step.label!r} below {levels[-1].label!r}",
                )
            key, kbits = path, bits
            merged = record(key, kbits, psi(targets[0]))
            new_level = Level(
                step.label, targets, len(targets) == 1 and targets[0].is_dfs
            )
            if merged and not coverable(d.model(key[-1]), merged):
                if trace:
                    state = render_state(levels + (new_level,), _as_map(bmap))
                    return unsat(
                        f"{s} → {state} inconsistent",
                        f"requirements {render_map(_as_map(bmap))} are not coverable",
                    )
                return unsat(None, f"requirements at {render_key(key)} are not coverable")
            levels = levels + (new_level,)
            path = key + (step.label,)
            bits = kbits + (new_level.dfs,)
        elif step.axis in (Axis.FSIB, Axis.PSIB):
            if len(levels) == 1:
                return unsat(
                    f"{s} → ∅ (no admissible place)",
                    "the root has no siblings",
                )
            parent_label = levels[-2].label
            targets = tuple(
                v
                for v in graph.children_with_label(parent_label, step.label)
                if any(_admissible(u, v, step.axis) for u in levels[-1].nodes)
            )
            if not targets:
                return unsat(
                    f"{s} → ∅ (no admissible place)",
                    f"no admissible sibling labeled {step.label!r}",
                )
            key, kbits = path[:-1], bits[:-1]
            merged = record(key, kbits, psi(targets[0]))
            new_level = Level(
                step.label, targets, len(targets) == 1 and targets[0].is_dfs
            )
            if merged and not coverable(d.model(key[-1]), merged):
                if trace:
                    state = render_state(levels[:-1] + (new_level,), _as_map(bmap))
                    return unsat(
                        f"{s} → {state} inconsistent",
                        f"requirements {render_map(_as_map(bmap))} are not coverable",
                    )
                return unsat(None, f"requirements at {render_key(key)} are not coverable")
            levels = levels[:-1] + (new_level,)
            path = key + (step.label,)
            bits = kbits + (new_level.dfs,)
            _restrict_inplace(bmap, path)
        elif step.axis is Axis.PARENT:
            if len(levels) == 1:
                return unsat(
                    f"{s} → ∅ (no admissible place)",
                    "no parent above the root",
                )
            if levels[-2].label != step.label:
                return unsat(
                    f"{s} → ∅ (no admissible place)",
                    f"parent is labeled {levels[-2].label!r}, not {step.label!r}",
                )
            levels = levels[:-1]
            path = path[:-1]
            bits = bits[:-1]
            _restrict_inplace(bmap, path)
        else:
            raise UnsupportedFragment(f"axis {step.axis.value} is outside eval1")
        if trace:
            lines.append(f"{s} → {render_state(levels, _as_map(bmap))}")

    beta = _as_map(bmap)
    if trace:
        lines.append("verdict: SAT")
    return Eval1Result(
        True, levels, beta, None,
        render_state(levels, beta) if trace else None, tuple(lines),
    )


# --- eval2 -------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Eval2Tuple:
    """One realizable way a subexpression can run, for every context.

    rel spans the labels from start (inclusive) to end (exclusive); pre and
    post are keyed relative to the start's context."""

    start: SgNode
    pre: SibMap
    end: SgNode
    post: SibMap
    rel: tuple[str, ...]
    rel_dfs: tuple[bool, ...]

    def render(self) -> str:
        return (
            f"(({self.start.name},{render_map(self.pre)}),"
            f"({self.end.name},{render_map(self.post)}),{render_key(self.rel)})"
        )


def render_tuple_set(tuples: tuple[Eval2Tuple, ...]) -> str:
    if not tuples:
        return "∅"
    return "{" + ", ".join(t.render() for t in tuples) + "}"


def eval2(graph: SchemaGraph, p: Path, trace: Optional[list[str]] = None) -> tuple[Eval2Tuple, ...]:
    """Tuple set of a normalized query (child/sibling steps, stacked
    qualifiers).  Appends one line per subexpression to `trace`."""
    d = graph.dtd
    out: list[Eval2Tuple]
    match p:
        case Step(Axis.CHILD, label):
            out = [
                Eval2Tuple(
                    start=u,
                    pre=SibMap.empty(),
                    end=v,
                    post=SibMap.of([(((u.label,)), psi(v), (u.is_dfs,))]),
                    rel=(u.label,),
                    rel_dfs=(u.is_dfs,),
                )
                for u in graph.nodes
                for v in graph.children_with_label(u.label, label)
            ]
        case Step(Axis.FSIB | Axis.PSIB as axis, label):
            out = []
            for parent_label in d.labels:
                for u in graph.children(parent_label):
                    for v in graph.children_with_label(parent_label, label):
                        if _admissible(u, v, axis):
                            out.append(Eval2Tuple(
                                start=u,
                                pre=SibMap.of([((), psi(u), ())]),
                                end=v,
                                post=SibMap.of([((), psi(u) | psi(v), ())]),
                                rel=(),
                                rel_dfs=(),
                            ))
        case Step(axis, _):
            raise UnsupportedFragment(f"axis {axis.value} is outside eval2")
        case Seq(left, right):
            t1s = eval2(graph, left, trace)
            t2s = eval2(graph, right, trace)
            out = []
            for t1 in t1s:
                for t2 in t2s:
                    if t2.start != t1.end:
                        continue
                    post = t1.post.join(t2.post.shift(t1.rel, t1.rel_dfs))
                    if not consistent(post, d):
                        continue
                    out.append(Eval2Tuple(
                        start=t1.start,
                        pre=t1.pre,
                        end=t2.end,
                        post=post,
                        rel=t1.rel + t2.rel,
                        rel_dfs=t1.rel_dfs + t2.rel_dfs,
                    ))
        case Qual(base, QPath(qpath)):
            t1s = eval2(graph, base, trace)
            t2s = eval2(graph, qpath, trace)
            out = []
            for t1 in t1s:
                for t2 in t2s:
                    if t2.start != t1.end:
                        continue
                    raw = t1.post.join(t2.post.shift(t1.rel, t1.rel_dfs))
                    if not consistent(raw, d):
                        continue
                    # past the qualifier, only requirements pinned through
                    # the anchor path stay binding
                    filtered = raw.restrict(t1.rel + (t1.end.label,))
                    out.append(Eval2Tuple(
                        start=t1.start,
                        pre=t1.pre,
                        end=t1.end,
                        post=filtered,
                        rel=t1.rel,
                        rel_dfs=t1.rel_dfs,
                    ))
        case Qual(_, _):
            raise UnsupportedFragment("qualifier disjunction is outside eval2")
        case Union(_, _):
            raise UnsupportedFragment("union is outside eval2")
        case _:
            raise TypeError(f"not a path: {p!r}")

    result = tuple(sorted(
        set(out),
        key=lambda t: (t.start.index, t.end.index, t.rel, render_map(t.pre), render_map(t.post)),
    ))
    if trace is not None:
        trace.append(
            f"eval2({render_xpath(p, arrows=True)}) = {render_tuple_set(result)}"
        )
    return result


def _accepting(t: Eval2Tuple, graph: SchemaGraph) -> bool:
    return t.start == graph.sentinel and t.pre.all_values_empty()


# --- routing -----------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    sat: bool
    algorithm: str
    final_state: Optional[str]
    reason: Optional[str]
    trace: tuple[str, ...]


def satisfiable(d: Dtd, query: Path | str) -> Verdict:
    """Decide whether any document conforming to d matches the query from its
    root.  Raises NotMRW/DtdError for out-of-class DTDs and
    UnsupportedFragment for queries outside both procedures."""
    p = parse_xpath(query) if isinstance(query, str) else query
    validate_no_useless(d)
    dd = delta_dtd(d)
    graph = build_schema_graph(dd)
    p = normalize(p)
    frag = fragment_of(p)
    if frag == "eval1":
        r = eval1(graph, p)
        return Verdict(r.sat, "eval1", r.final_state, r.reason, r.trace)
    if frag == "eval2":
        trace: list[str] = []
        tuples = eval2(graph, p, trace)
        winners = [t for t in tuples if _accepting(t, graph)]
        if winners:
            trace.append("verdict: SAT")
            return Verdict(True, "eval2", winners[0].render(), None, tuple(trace))
        trace.append("verdict: UNSAT")
        reason = (
            "no realizable run"
            if not tuples
            else "no run starts at the virtual root place"
        )
        return Verdict(False, "eval2", None, reason, tuple(trace))
    raise UnsupportedFragment(
        "query needs recursive axes, union, or qualifier disjunction; "
        "only the bounded oracle covers those"
    )
