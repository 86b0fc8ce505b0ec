"""Satisfiability decision procedures over the schema graph."""

from __future__ import annotations

import random

import pytest

from xpathsat import (
    NotMRW,
    UnsupportedFragment,
    build_schema_graph,
    delta_dtd,
    fragment_of,
    parse_dtd,
    parse_xpath,
    satisfiable,
)
from xpathsat.constraints import SibMap, render_map
from xpathsat.oracle import oracle_satisfiable
from xpathsat.sat_checker import eval1, eval2, render_tuple_set

from gens import (
    random_eval1_query,
    random_eval2_query,
    random_mdf_dc_dtd,
    tree_count,
)

WORKED = "root r\nr := r*(a*b|c)r*\na := eps\nb := a\nc := eps\n"

SAT_QUERY = "(↓::r/→⁺::b)/(↓::a/↑::b)"
UNSAT_QUERY = "(↓::r/→⁺::b)/(↓::a/↑::b)/→⁺::c"

SAT_TRACE = (
    "start: ({u0}, β⊥)",
    "↓::r → ({u0}{u1,u5}, {r↦∅})",
    "→⁺::b → ({u0}{u3}, {r↦{b}})",
    "↓::a → ({u0}{u3}{u6}, {r↦{b}, rb↦{a}})",
    "↑::b → ({u0}{u3}, {r↦{b}, rb↦{a}})",
    "verdict: SAT",
)

UNSAT_TRACE = SAT_TRACE[:-1] + (
    "→⁺::c → ({u0}{u4}, {r↦{b,c}, rb↦{a}}) inconsistent",
    "verdict: UNSAT",
)


def worked_graph():
    return build_schema_graph(delta_dtd(parse_dtd(WORKED)))


# ------------------------------------------------------------------- eval1


def test_eval1_sat_trace():
    r = eval1(worked_graph(), parse_xpath(SAT_QUERY))
    assert r.sat
    assert r.trace == SAT_TRACE
    assert r.final_state == "({u0}{u3}, {r↦{b}, rb↦{a}})"
    assert r.reason is None


def test_eval1_sat_result_fields():
    r = eval1(worked_graph(), parse_xpath(SAT_QUERY))
    assert [lv.label for lv in r.levels] == ["r", "b"]
    assert [sorted(n.name for n in lv.nodes) for lv in r.levels] == [["u0"], ["u3"]]
    assert render_map(r.beta) == "{r↦{b}, rb↦{a}}"


def test_eval1_unsat_trace():
    r = eval1(worked_graph(), parse_xpath(UNSAT_QUERY))
    assert not r.sat
    assert r.trace == UNSAT_TRACE
    assert r.reason == "requirements {r↦{b,c}, rb↦{a}} are not coverable"


def test_eval1_untraced_matches_traced():
    g = worked_graph()
    a = eval1(g, parse_xpath(SAT_QUERY), trace=True)
    b = eval1(g, parse_xpath(SAT_QUERY), trace=False)
    assert (a.sat, a.levels, a.beta, a.reason) == (b.sat, b.levels, b.beta, b.reason)
    assert b.trace == ()
    assert b.final_state is None


def test_eval1_untraced_unsat_skips_rendering():
    # without tracing the reason names the key instead of the whole map
    r = eval1(worked_graph(), parse_xpath(UNSAT_QUERY), trace=False)
    assert not r.sat
    assert r.levels is None and r.beta is None
    assert r.reason == "requirements at r are not coverable"
    assert r.trace == ()


def test_eval1_deterministic():
    g = worked_graph()
    p = parse_xpath(SAT_QUERY)
    assert eval1(g, p) == eval1(g, p)


def test_eval1_no_parent_above_root():
    r = eval1(worked_graph(), parse_xpath("↑::r"))
    assert not r.sat
    assert r.reason == "no parent above the root"


def test_eval1_root_has_no_siblings():
    r = eval1(worked_graph(), parse_xpath("→⁺::r"))
    assert not r.sat
    assert r.reason == "the root has no siblings"
    assert r.trace[1] == "→⁺::r → ∅ (no admissible place)"


def test_eval1_child_label_missing():
    r = eval1(worked_graph(), parse_xpath("↓::q"))
    assert not r.sat


def test_eval1_wrong_parent_label():
    r = eval1(worked_graph(), parse_xpath("↓::r/↓::b/↑::c"))
    assert not r.sat


# sibling admissibility is position arithmetic over the factor list
def test_eval1_sibling_positions():
    d = parse_dtd("root r\nr := abc\na := eps\nb := eps\nc := eps\n")
    g = build_schema_graph(d)
    assert eval1(g, parse_xpath("↓::a/→⁺::c")).sat
    assert eval1(g, parse_xpath("↓::a/→⁺::b/→⁺::c")).sat
    assert not eval1(g, parse_xpath("↓::c/→⁺::a")).sat
    assert eval1(g, parse_xpath("↓::c/←⁺::a")).sat
    assert not eval1(g, parse_xpath("↓::a/←⁺::c")).sat


def test_eval1_star_place_allows_same_position_sibling():
    d = parse_dtd("root r\nr := a*\na := eps\n")
    g = build_schema_graph(d)
    assert eval1(g, parse_xpath("↓::a/→⁺::a")).sat
    d2 = parse_dtd("root r\nr := ab\na := eps\nb := eps\n")
    g2 = build_schema_graph(d2)
    assert not eval1(g2, parse_xpath("↓::a/→⁺::a")).sat


# the inclusive prefix rule: standing on a non-DFS node keeps its demands
def test_eval1_remembers_current_branch_demands():
    d = parse_dtd("root r\nr := a*\na := b|c\nb := eps\nc := eps\n")
    r = satisfiable(d, "↓::a/↓::b/↑::a/↓::c")
    assert not r.sat
    assert r.reason == "requirements {r↦{a}, ra↦{b,c}} are not coverable"
    assert satisfiable(d, "↓::a/↓::b/↑::a").sat
    assert satisfiable(d, "↓::a/↓::b/↑::a/↓::b").sat


# ------------------------------------------------------- eval1 invariants


def _prefixes(p):
    """Step sequences of every length, as paths."""
    from xpathsat.xpath import Seq

    steps = []

    def walk(node):
        if isinstance(node, Seq):
            walk(node.left)
            walk(node.right)
        else:
            steps.append(node)

    walk(p)
    out = []
    for i in range(1, len(steps) + 1):
        q = steps[0]
        for s in steps[1:i]:
            q = Seq(q, s)
        out.append(q)
    return out


def test_eval1_invariants_on_random_runs():
    rng = random.Random(777)
    runs = 0
    for _ in range(40):
        d = random_mdf_dc_dtd(rng)
        g = build_schema_graph(d)
        for _ in range(6):
            p = random_eval1_query(rng, d)
            results = []
            for pref in _prefixes(p):
                r = eval1(g, pref, trace=False)
                if not r.sat:
                    break
                results.append(r)
                # each level holds places of one label only
                for lv in r.levels:
                    assert {n.label for n in lv.nodes} == {lv.label}
                # recorded demands never mention abandoned non-DFS branches
                cur = tuple(lv.label for lv in r.levels)
                assert r.beta.restrict(cur) == r.beta
            # DFS-keyed demands only ever grow along the run
            for a, b in zip(results, results[1:]):
                for e in a.beta.entries:
                    if e.key and all(e.dfs):
                        after = b.beta.get(e.key)
                        assert after is not None and e.values <= after.values
            runs += 1
    assert runs == 240


# ------------------------------------------------------------------- eval2


EVAL2_RENDERS = {
    "↓::r": "{((u0,β⊥),(u1,{r↦∅}),r), ((u0,β⊥),(u5,{r↦∅}),r), "
    "((u1,β⊥),(u1,{r↦∅}),r), ((u1,β⊥),(u5,{r↦∅}),r), "
    "((u5,β⊥),(u1,{r↦∅}),r), ((u5,β⊥),(u5,{r↦∅}),r)}",
    "→⁺::b": "{((u1,{ε↦∅}),(u3,{ε↦{b}}),ε), ((u2,{ε↦{a}}),(u3,{ε↦{a,b}}),ε)}",
    "↓::a": "{((u0,β⊥),(u2,{r↦{a}}),r), ((u1,β⊥),(u2,{r↦{a}}),r), "
    "((u3,β⊥),(u6,{b↦{a}}),b), ((u5,β⊥),(u2,{r↦{a}}),r)}",
    "→⁺::b[↓::a]": "{((u1,{ε↦∅}),(u3,{ε↦{b}, b↦{a}}),ε), "
    "((u2,{ε↦{a}}),(u3,{ε↦{a,b}, b↦{a}}),ε)}",
    "↓::r/→⁺::b[↓::a]": "{((u0,β⊥),(u3,{r↦{b}, rb↦{a}}),r), "
    "((u1,β⊥),(u3,{r↦{b}, rb↦{a}}),r), ((u5,β⊥),(u3,{r↦{b}, rb↦{a}}),r)}",
    "→⁺::c": "{((u1,{ε↦∅}),(u4,{ε↦{c}}),ε), ((u2,{ε↦{a}}),(u4,{ε↦{a,c}}),ε), "
    "((u3,{ε↦{b}}),(u4,{ε↦{b,c}}),ε)}",
}


@pytest.mark.parametrize("q", sorted(EVAL2_RENDERS))
def test_eval2_tuple_sets(q):
    ts = eval2(worked_graph(), parse_xpath(q))
    assert render_tuple_set(ts) == EVAL2_RENDERS[q]


def test_eval2_cardinalities():
    g = worked_graph()
    sizes = [len(eval2(g, parse_xpath(q))) for q in
             ("↓::r", "→⁺::b", "↓::a", "→⁺::b[↓::a]", "↓::r/→⁺::b[↓::a]", "→⁺::c")]
    assert sizes == [6, 2, 4, 2, 3, 3]


def test_eval2_inconsistent_composition_is_empty():
    ts = eval2(worked_graph(), parse_xpath("↓::r/→⁺::b[↓::a]/→⁺::c"))
    assert ts == ()
    assert render_tuple_set(ts) == "∅"


def test_eval2_trace_lines():
    tr = []
    eval2(worked_graph(), parse_xpath("↓::r/→⁺::b[↓::a]"), trace=tr)
    assert tr == [
        f"eval2(↓::r) = {EVAL2_RENDERS['↓::r']}",
        f"eval2(→⁺::b) = {EVAL2_RENDERS['→⁺::b']}",
        f"eval2(↓::a) = {EVAL2_RENDERS['↓::a']}",
        f"eval2(→⁺::b[↓::a]) = {EVAL2_RENDERS['→⁺::b[↓::a]']}",
        f"eval2(↓::r/→⁺::b[↓::a]) = {EVAL2_RENDERS['↓::r/→⁺::b[↓::a]']}",
    ]


def _entailed_by(small: SibMap, big: SibMap) -> bool:
    return all(
        (found := big.get(e.key)) is not None and e.values <= found.values
        for e in small.entries
    )


@pytest.mark.parametrize("p1,p2", [("↓::r", "→⁺::b[↓::a]"), ("↓::a", "→⁺::b[↓::a]")])
def test_eval2_composition_structure(p1, p2):
    g = worked_graph()
    T1 = eval2(g, parse_xpath(p1))
    T2 = eval2(g, parse_xpath(p2))
    T = eval2(g, parse_xpath(f"{p1}/{p2}"))
    assert T
    for t in T:
        matched = False
        for t1 in T1:
            for t2 in T2:
                if t1.start != t.start or t2.start != t1.end or t2.end != t.end:
                    continue
                if t.rel != t1.rel + t2.rel:
                    continue
                want_post = t1.post.join(t2.post.shift(t1.rel, t1.rel_dfs))
                if t.post != want_post:
                    continue
                # the junction demands of the tail leg were already recorded
                assert _entailed_by(t2.pre.shift(t1.rel, t1.rel_dfs), t1.post)
                matched = True
        assert matched


def test_eval2_relative_results_are_start_dependent():
    # a run may demand labels at its unknown start context
    ts = eval2(worked_graph(), parse_xpath("→⁺::b/→⁺::c"))
    got = {(t.start.name, render_map(t.post)) for t in ts}
    assert got == {("u1", "{ε↦{b,c}}"), ("u2", "{ε↦{a,b,c}}")}


# ----------------------------------------------------------------- routing


def test_satisfiable_routes_eval1():
    d = parse_dtd(WORKED)
    v = satisfiable(d, SAT_QUERY)
    assert v.sat and v.algorithm == "eval1"
    assert v.final_state == "({u0}{u3}, {r↦{b}, rb↦{a}})"
    v2 = satisfiable(d, UNSAT_QUERY)
    assert not v2.sat and v2.algorithm == "eval1"
    assert v2.reason == "requirements {r↦{b,c}, rb↦{a}} are not coverable"


def test_satisfiable_routes_eval2():
    d = parse_dtd(WORKED)
    v = satisfiable(d, "↓::r/→⁺::b[↓::a]")
    assert v.sat and v.algorithm == "eval2"
    v2 = satisfiable(d, "→⁺::b[↓::a]")
    assert not v2.sat
    assert v2.reason == "no run starts at the virtual root place"
    v3 = satisfiable(d, "↓::q[↓::a]")
    assert not v3.sat
    assert v3.reason == "no realizable run"


def test_satisfiable_accepts_ast():
    d = parse_dtd(WORKED)
    assert satisfiable(d, parse_xpath(SAT_QUERY)).sat


def test_satisfiable_normalizes_conjunctions():
    d = parse_dtd(WORKED)
    v = satisfiable(d, "↓::r[↓::b and ↓::r]")
    assert v.algorithm == "eval2"
    assert v.sat


def test_satisfiable_rejects_non_mrw():
    d = parse_dtd("root r\nr := a|aa\na := eps\n")
    with pytest.raises(NotMRW, match="'r'"):
        satisfiable(d, "↓::a")


@pytest.mark.parametrize("q", ["↓*::a", "↑*::a", "↓::a ∪ ↓::b", "↓::a[↓::b or ↓::c]"])
def test_satisfiable_rejects_full_fragment(q):
    d = parse_dtd(WORKED)
    with pytest.raises(UnsupportedFragment, match="bounded oracle"):
        satisfiable(d, q)


def test_satisfiable_normalizes_mrw_dtd_first():
    # an MRW model that is not MDF/DC must still be decidable
    d = parse_dtd("root r\nr := (a|b)*ca+\na := eps\nb := eps\nc := eps\n")
    assert satisfiable(d, "↓::c/→⁺::a").sat
    assert not satisfiable(d, "↓::a/↓::q").sat


# -------------------------------------------------------------- differential


def test_small_differential_against_oracle():
    rng = random.Random(90210)
    checked = 0
    dtds = []
    while len(dtds) < 10:
        d = random_mdf_dc_dtd(rng)
        if tree_count(d, 4) <= 3000:
            dtds.append(d)
    for d in dtds:
        depth, rep = len(d.labels), 4
        for _ in range(4):
            for gen in (random_eval1_query, random_eval2_query):
                p = gen(rng, d)
                got = satisfiable(d, p).sat
                witness = oracle_satisfiable(d, p, depth=depth, rep=rep)
                assert got == (witness is not None), (d.rules, p)
                checked += 1
    assert checked >= 60
