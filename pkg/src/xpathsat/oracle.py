"""Ground-truth side: finite documents, full query semantics, enumeration.

Everything here is independent of the schema-graph machinery: documents are
actual trees, queries run by their textbook semantics (all six axes, union,
qualifiers with both connectives), and satisfiability is approximated by
enumerating every conforming tree within a depth bound and a per-star
repetition bound.  A found witness is definitive; exhaustion of the bound is
reported as unknown, never as unsatisfiable.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

from . import content_model as cm
from .content_model import (
    Concat, Disj, Epsilon, Expr, Hash, Opt, Plus, Star, Symbol, expand_hash,
)
from .dtd import Dtd
from .errors import ParseError
from .schema_graph import SchemaGraph, SgNode, build_schema_graph
from .xpath import Axis, Path, QAnd, QOr, QPath, Qexpr, Qual, Seq, Step, Union

Word = tuple[str, ...]
NodePath = tuple[int, ...]  # child indices from the root; () is the root


@dataclass(frozen=True, slots=True)
class DocTree:
    label: str
    children: tuple["DocTree", ...] = ()

    def node_count(self) -> int:
        return 1 + sum(c.node_count() for c in self.children)

    def preorder_labels(self) -> tuple[str, ...]:
        out = [self.label]
        for c in self.children:
            out.extend(c.preorder_labels())
        return tuple(out)


def render_tree(t: DocTree) -> str:
    if not t.children:
        return t.label
    return f"{t.label}({','.join(render_tree(c) for c in t.children)})"


def parse_tree(text: str) -> DocTree:
    # labels in tree terms are whole tokens: children are always
    # comma-separated, so juxtaposition never appears here
    toks = cm._tokenize_raw(text)
    pos = [0]

    def peek():
        return toks[pos[0]] if pos[0] < len(toks) else None

    def take():
        tok = peek()
        if tok is None:
            raise ParseError("unexpected end of tree term")
        pos[0] += 1
        return tok

    def term() -> DocTree:
        label = take()
        if not label or label[0] not in cm._SYMBOL_START:
            raise ParseError(f"bad node label {label!r}")
        children: list[DocTree] = []
        if peek() == "(":
            take()
            children.append(term())
            while peek() == ",":
                take()
                children.append(term())
            if take() != ")":
                raise ParseError("expected ')' in tree term")
        return DocTree(label, tuple(children))

    t = term()
    if peek() is not None:
        raise ParseError(f"trailing input in tree term: {peek()!r}")
    return t


def node_at(t: DocTree, path: NodePath) -> DocTree:
    for i in path:
        t = t.children[i]
    return t


# --- conformance ---------------------------------------------------------------

def conforms(t: DocTree, d: Dtd) -> bool:
    if t.label != d.root:
        return False
    nfas = {lbl: cm.Nfa(d.model(lbl)) for lbl in d.labels}

    def ok(v: DocTree) -> bool:
        if v.label not in nfas:
            return False
        word = tuple(c.label for c in v.children)
        return nfas[v.label].accepts(word) and all(ok(c) for c in v.children)

    return ok(t)


# --- full query semantics --------------------------------------------------------

def eval_xpath_full(t: DocTree, p: Path, start: NodePath = ()) -> set[NodePath]:
    """All nodes the query selects from `start`, by the standard semantics."""
    match p:
        case Step(axis, label):
            return _step(t, axis, label, start)
        case Seq(left, right):
            out: set[NodePath] = set()
            for mid in eval_xpath_full(t, left, start):
                out |= eval_xpath_full(t, right, mid)
            return out
        case Union(left, right):
            return eval_xpath_full(t, left, start) | eval_xpath_full(t, right, start)
        case Qual(base, qual):
            return {
                e for e in eval_xpath_full(t, base, start) if _holds(t, qual, e)
            }
    raise TypeError(f"not a path: {p!r}")


def _step(t: DocTree, axis: Axis, label: str, cur: NodePath) -> set[NodePath]:
    node = node_at(t, cur)
    match axis:
        case Axis.CHILD:
            return {
                cur + (i,)
                for i, c in enumerate(node.children)
                if c.label == label
            }
        case Axis.PARENT:
            if cur and node_at(t, cur[:-1]).label == label:
                return {cur[:-1]}
            return set()
        case Axis.DESC_OR_SELF:
            out: set[NodePath] = set()

            def walk(path: NodePath, v: DocTree) -> None:
                if v.label == label:
                    out.add(path)
                for i, c in enumerate(v.children):
                    walk(path + (i,), c)

            walk(cur, node)
            return out
        case Axis.ANC_OR_SELF:
            return {
                cur[:k]
                for k in range(len(cur) + 1)
                if node_at(t, cur[:k]).label == label
            }
        case Axis.FSIB:
            if not cur:
                return set()
            parent = node_at(t, cur[:-1])
            return {
                cur[:-1] + (j,)
                for j in range(cur[-1] + 1, len(parent.children))
                if parent.children[j].label == label
            }
        case Axis.PSIB:
            if not cur:
                return set()
            parent = node_at(t, cur[:-1])
            return {
                cur[:-1] + (j,)
                for j in range(cur[-1])
                if parent.children[j].label == label
            }
    raise TypeError(f"not an axis: {axis!r}")


def _holds(t: DocTree, q: Qexpr, at: NodePath) -> bool:
    match q:
        case QPath(path):
            return bool(eval_xpath_full(t, path, at))
        case QAnd(left, right):
            return _holds(t, left, at) and _holds(t, right, at)
        case QOr(left, right):
            return _holds(t, left, at) or _holds(t, right, at)
    raise TypeError(f"not a qualifier: {q!r}")


def satisfies(t: DocTree, p: Path) -> bool:
    """Match from the document root (the root is the initial context node)."""
    return bool(eval_xpath_full(t, p, ()))


# --- bounded enumeration ---------------------------------------------------------

def words_capped(e: Expr, rep: int) -> set[Word]:
    """Words of L(e) where every starred or plussed scope iterates at most
    `rep` times (each iteration chosen independently)."""
    return _words(expand_hash(e), rep)


def _words(e: Expr, rep: int) -> set[Word]:
    match e:
        case Epsilon():
            return {()}
        case Symbol(name):
            return {(name,)}
        case Concat(items):
            acc: set[Word] = {()}
            for it in items:
                ws = _words(it, rep)
                acc = {a + w for a in acc for w in ws}
            return acc
        case Disj(items):
            out: set[Word] = set()
            for it in items:
                out |= _words(it, rep)
            return out
        case Opt(item):
            return {()} | _words(item, rep)
        case Star(item) | Plus(item):
            ws = _words(item, rep)
            acc = {()}
            reached: set[Word] = {()} if isinstance(e, Star) else set()
            for _ in range(rep):
                acc = {a + w for a in acc for w in ws}
                reached |= acc
            return reached
    raise TypeError(f"not an expression: {e!r}")


def min_heights(d: Dtd) -> dict[str, int]:
    """Least height of a conforming tree per label (a lone leaf has height 1)."""
    INF = float("inf")
    h: dict[str, float] = {lbl: INF for lbl in d.labels}

    def needed(e: Expr) -> float:
        # least over words of the max height among the word's labels
        match e:
            case Epsilon():
                return 0
            case Symbol(name):
                return h[name] if name in h else INF
            case Concat(items):
                return max((needed(it) for it in items), default=0)
            case Disj(items):
                return min(needed(it) for it in items)
            case Star(_) | Opt(_):
                return 0
            case Plus(item):
                return needed(item)
            case Hash(left, right):
                return min(
                    max((needed(it) for it in left), default=0),
                    max((needed(it) for it in right), default=0),
                )
        raise TypeError(f"not an expression: {e!r}")

    changed = True
    while changed:
        changed = False
        for lbl in d.labels:
            v = 1 + needed(d.model(lbl))
            if v < h[lbl]:
                h[lbl] = v
                changed = True
    return {lbl: (int(v) if v != INF else -1) for lbl, v in h.items()}


def enumerate_trees(d: Dtd, depth: int, rep: int) -> list[DocTree]:
    """Every conforming tree of depth <= depth whose children words stay
    within the repetition bound, sorted by size then preorder labels."""
    heights = min_heights(d)

    @lru_cache(maxsize=None)
    def trees_for(label: str, budget: int) -> tuple[DocTree, ...]:
        if heights[label] < 0 or heights[label] > budget:
            return ()
        out: list[DocTree] = []
        for word in sorted(words_capped(d.model(label), rep)):
            if any(heights[lbl] < 0 or heights[lbl] > budget - 1 for lbl in word):
                continue
            child_choices = [trees_for(lbl, budget - 1) for lbl in word]
            for combo in product(*child_choices):
                out.append(DocTree(label, combo))
        return tuple(out)

    trees = list(trees_for(d.root, depth))
    trees.sort(key=lambda t: (t.node_count(), t.preorder_labels()))
    return trees


def oracle_satisfiable(d: Dtd, p: Path, depth: int, rep: int) -> DocTree | None:
    """First conforming tree (smallest-first) matching p, or None when the
    bounded search is exhausted.  None means unknown, not unsatisfiable."""
    for t in enumerate_trees(d, depth, rep):
        if satisfies(t, p):
            return t
    return None


# --- schema-graph mappings of concrete trees ---------------------------------------

def compute_sg_mappings(t: DocTree, d: Dtd) -> list[dict[NodePath, SgNode]]:
    """All ways to assign each tree node its schema-graph place.

    A children word splits between the parent's factor positions in order;
    a "-" factor takes zero or one child carrying its label, a "*" factor
    takes any run over its label set."""
    graph = build_schema_graph(d)
    by_place: dict[tuple[str, int, str], SgNode] = {
        (u.parent_label, u.pos, u.label): u
        for u in graph.nodes[1:]
    }

    def node_assignments(label: str, word: Word) -> list[tuple[int, ...]]:
        factors = graph.factors[label]
        out: list[tuple[int, ...]] = []

        def go(i: int, fi: int, acc: tuple[int, ...]) -> None:
            if i == len(word):
                out.append(acc)
                return
            if fi == len(factors):
                return
            go(i, fi + 1, acc)  # this factor contributes nothing
            f = factors[fi]
            if f.omega == "-":
                if word[i] == f.labels[0]:
                    go(i + 1, fi + 1, acc + (f.pos,))
            else:
                j = i
                labels = set(f.labels)
                while j < len(word) and word[j] in labels:
                    j += 1
                    go(j, fi + 1, acc + (f.pos,) * (j - i))

        go(0, 0, ())
        return out

    per_node: list[tuple[NodePath, list[dict[NodePath, SgNode]]]] = []

    def visit(path: NodePath, v: DocTree) -> None:
        word = tuple(c.label for c in v.children)
        choices = []
        for poss in node_assignments(v.label, word):
            choices.append({
                path + (i,): by_place[(v.label, pos, word[i])]
                for i, pos in enumerate(poss)
            })
        per_node.append((path, choices))
        for i, c in enumerate(v.children):
            visit(path + (i,), c)

    visit((), t)
    mappings: list[dict[NodePath, SgNode]] = []
    for combo in product(*[choices for _, choices in per_node]):
        theta: dict[NodePath, SgNode] = {(): graph.sentinel}
        for part in combo:
            theta.update(part)
        mappings.append(theta)
    return mappings


def beta_satisfied(t: DocTree, theta, b, d: Dtd) -> bool:
    """Does the document t witness every requirement of the map b?

    Each non-empty key must name some root-anchored label path whose end node
    carries children with all demanded labels.  Demanded labels occur exactly
    once in the end's content model, so which graph place theta picks never
    changes the check; theta is accepted for interface parity."""
    del theta

    def paths_with_labels(key: tuple[str, ...]) -> list[NodePath]:
        if not key or key[0] != t.label:
            return []
        cur = [()]
        for lbl in key[1:]:
            nxt: list[NodePath] = []
            for path in cur:
                node = node_at(t, path)
                nxt.extend(
                    path + (i,)
                    for i, c in enumerate(node.children)
                    if c.label == lbl
                )
            cur = nxt
        return cur

    for entry in b.entries:
        if not entry.key:
            continue
        found = False
        for path in paths_with_labels(entry.key):
            node = node_at(t, path)
            counts = cm.symbol_counts(d.model(node.label))
            present = {
                c.label for c in node.children if counts.get(c.label) == 1
            }
            if entry.values <= present:
                found = True
                break
        if not found:
            return False
    return True


def find_beta_witness(d: Dtd, b, depth: int, rep: int):
    """Bounded search for (tree, mapping) witnessing the map b; None if the
    bound is exhausted."""
    for t in enumerate_trees(d, depth, rep):
        if beta_satisfied(t, None, b, d):
            mappings = compute_sg_mappings(t, d)
            if mappings:
                return t, mappings[0]
    return None
