"""Invariants every multiway graph must satisfy, shared by the property and acceptance suites."""

from __future__ import annotations

from typing import List

from hypothesis import strategies as st

from multiway import MatchSite, RuleSystem, apply_match, evolve, find_cycle, successors
from multiway.rewrite import Rule

from oracles import expand

LETTERS = "ABC"


@st.composite
def small_systems(draw):
    """Alphabet of at most 3 letters, at most 3 rules, at most 4 generations."""
    k = draw(st.integers(1, 3))
    alphabet = LETTERS[:k]
    word = lambda lo, hi: st.text(alphabet, min_size=lo, max_size=hi)  # noqa: E731
    n = draw(st.integers(1, 3))
    rules = tuple(Rule(f"r{i + 1}", draw(word(1, 2)), draw(word(0, 3))) for i in range(n))
    initial = draw(word(1, 4))
    generations = draw(st.integers(0, 4))
    return RuleSystem(rules), initial, generations


def violations(system: RuleSystem, initial: str, generations: int) -> List[str]:
    """Names of the violated invariants (empty when all hold)."""
    g = evolve([initial], system, generations)
    bad = []
    for n in g.nodes:
        if not g.expanded(n.id):
            continue
        labelled = {(w.rule, g.string(e.dst)) for e in g.out_edges(n.id) for w in e.witnesses}
        if labelled != successors(n.string, system):
            bad.append(f"coalgebra: {n.string}")
    for e in g.edges:
        src, dst = g.string(e.src), g.string(e.dst)
        for w in e.witnesses:
            rule = system[w.rule]
            if len(dst) != len(src) - len(rule.lhs) + len(rule.rhs):
                bad.append(f"length: {src}->{dst}")
            if apply_match(MatchSite(w.rule, w.pos, src), system) != dst:
                bad.append(f"replay: {src}->{dst}")
    if system.strictly_increasing() and find_cycle(g) is not None:
        bad.append("acyclicity")
    gen, edges, sizes = expand([initial], [(r.lhs, r.rhs, r.order) for r in system], generations)
    if g.layer_sizes() != sizes or {(g.string(e.src), g.string(e.dst)) for e in g.edges} != {
        (s, t) for s, t, _ in edges
    }:
        bad.append("census")
    return bad
