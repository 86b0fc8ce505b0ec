"""Sibling-requirement maps.

Evaluation over a schema graph cannot keep one document in mind; instead it
records, per label path, which child labels have been demanded below that
path's end node.  A map entry ``key -> values`` says: the node reached by
``key`` must carry children with every label in ``values``.  Values only ever
contain labels that occur exactly once in the end node's content model (df
labels), so each requirement pins a concrete child place.

Whether an entry stays binding after evaluation moves elsewhere depends on
duplicability: a node whose label occurs once in its parent's model *and*
outside every star (dfs) is the same node in every conforming placement, so
requirements below a chain of dfs nodes can never be escaped by picking a
different witness subtree.  Each entry therefore carries one dfs bit per key
node; `restrict` drops exactly the entries that a fresh witness could dodge.

Consistency reduces to coverability: all demanded child labels of one node
must be producible by a single word of its content model.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .content_model import Concat, Disj, Epsilon, Expr, Star, Symbol, symbol_counts, symbols
from .dtd import Dtd

Key = tuple[str, ...]
DfsBits = tuple[bool, ...]


@dataclass(frozen=True, slots=True)
class SibEntry:
    key: Key
    values: frozenset[str]
    dfs: DfsBits  # one bit per key node

    def __post_init__(self):
        assert len(self.key) == len(self.dfs)


@dataclass(frozen=True, slots=True)
class SibMap:
    entries: tuple[SibEntry, ...]  # sorted by key, keys unique

    @staticmethod
    def empty() -> "SibMap":
        return _EMPTY

    @staticmethod
    def of(items: Iterable[tuple[Key, Iterable[str], DfsBits]]) -> "SibMap":
        merged: dict[Key, tuple[set[str], DfsBits]] = {}
        for key, values, dfs in items:
            if key in merged:
                vals, bits = merged[key]
                assert bits == tuple(dfs), f"dfs mismatch on key {key}"
                vals.update(values)
            else:
                merged[key] = (set(values), tuple(dfs))
        return SibMap(tuple(
            SibEntry(k, frozenset(v), bits)
            for k, (v, bits) in sorted(merged.items())
        ))

    def get(self, key: Key) -> Optional[SibEntry]:
        for e in self.entries:
            if e.key == key:
                return e
        return None

    def join(self, other: "SibMap") -> "SibMap":
        return SibMap.of(
            [(e.key, e.values, e.dfs) for e in self.entries]
            + [(e.key, e.values, e.dfs) for e in other.entries]
        )

    def with_entry(self, key: Key, dfs: DfsBits, values: Iterable[str]) -> "SibMap":
        return self.join(SibMap((SibEntry(key, frozenset(values), dfs),)))

    def shift(self, prefix: Key, prefix_dfs: DfsBits) -> "SibMap":
        """Prepend a path: reinterpret relative keys one level further out."""
        return SibMap(tuple(
            SibEntry(prefix + e.key, e.values, prefix_dfs + e.dfs)
            for e in self.entries
        ))

    def restrict(self, current: Key) -> "SibMap":
        """Drop entries a fresh witness subtree could dodge.

        An entry survives iff every key node past the longest common prefix
        with the current path is dfs.  Prefixes of the current path (the
        current path itself included) always survive: those nodes are pinned
        by the evaluation position."""
        kept = []
        for e in self.entries:
            lcp = 0
            while lcp < min(len(e.key), len(current)) and e.key[lcp] == current[lcp]:
                lcp += 1
            if all(e.dfs[lcp:]):
                kept.append(e)
        return SibMap(tuple(kept))

    def all_values_empty(self) -> bool:
        return all(not e.values for e in self.entries)


_EMPTY = SibMap(())


# --- rendering ---------------------------------------------------------------

def render_label_set(s: frozenset[str]) -> str:
    if not s:
        return "∅"
    return "{" + ",".join(sorted(s)) + "}"


def render_key(key: Key) -> str:
    return "".join(key) if key else "ε"


def render_map(m: SibMap) -> str:
    if not m.entries:
        return "β⊥"
    parts = [f"{render_key(e.key)}↦{render_label_set(e.values)}" for e in m.entries]
    return "{" + ", ".join(parts) + "}"


# --- coverability and consistency --------------------------------------------

def coverable(e: Expr, s: Iterable[str]) -> bool:
    """Can one word of L(e) contain every label of s?

    Defined for MDF/DC models and label sets whose members occur exactly once
    in e; anything else is a caller bug and raises."""
    need = frozenset(s)
    counts = symbol_counts(e)
    for lbl in need:
        n = counts.get(lbl, 0)
        if n != 1:
            raise ValueError(
                f"label {lbl!r} occurs {n} times in the model; "
                "coverable needs exactly one occurrence"
            )
    return _cov(e, need)


def _cov(e: Expr, s: frozenset[str]) -> bool:
    if not s:
        return True
    match e:
        case Epsilon():
            return False
        case Symbol(name):
            return s == frozenset({name})
        case Star(item):
            return s <= symbols(item)
        case Concat(items):
            # occurrences are unique, so membership splits s between factors
            return all(_cov(it, s & symbols(it)) for it in items)
        case Disj(items):
            return any(s <= symbols(it) and _cov(it, s) for it in items)
    raise ValueError("coverable needs an MDF/DC model")


def first_violation(m: SibMap, d: Dtd) -> Optional[SibEntry]:
    """First entry whose demanded children no single word can provide.

    Entries with an empty key constrain an unknown context and are exempt."""
    for e in m.entries:
        if not e.key:
            continue
        label = e.key[-1]
        if label not in d.rules:
            raise ValueError(f"map key ends in undeclared label {label!r}")
        if not coverable(d.model(label), e.values):
            return e
    return None


def consistent(m: SibMap, d: Dtd) -> bool:
    return first_violation(m, d) is None


def psi(node) -> frozenset[str]:
    """Requirement contributed by stepping onto a node: df labels pin their
    single place, everything else demands nothing."""
    return frozenset({node.label}) if node.is_df else frozenset()
