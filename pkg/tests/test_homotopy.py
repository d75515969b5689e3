from __future__ import annotations

import pytest

from multiway import (
    ExtendedSystem,
    HomotopyError,
    OrderGapError,
    RuleSyntaxError,
    auto_homotopy,
    enumerate_paths,
    evolve,
    extend_system,
    format_extended,
    iter_cells,
    iterate_homotopy,
    load_extended,
    realized_cells,
    successors,
    synthesize_rungs,
)
from multiway.homotopy import HomotopyLimits, cell_length, cell_order, corner_paths

from conftest import LIMITS, SOURCE, TARGET

FORWARD = {
    ("AAB", "ABA"),
    ("AABB", "ABBA"),
    ("AABBB", "ABBBA"),
    ("ABABBB", "ABBBAB"),
    ("ABBABBB", "ABBBABB"),
}


def _proofs(base):
    g = evolve([SOURCE], base, 6)
    return g, enumerate_paths(g, SOURCE, TARGET, 6)


def test_synthesize_outermost_pair(base):
    _, paths = _proofs(base)
    spec = synthesize_rungs(paths[0], paths[-1], 2)
    assert {(r.lhs, r.rhs) for r in spec.forward_rungs()} == FORWARD
    assert len(spec.rungs) == 10
    for r in spec.rungs:
        assert r.order == 2
        inv = next(x for x in spec.rungs if x.id == r.inverse_of)
        assert (inv.lhs, inv.rhs) == (r.rhs, r.lhs)
    assert [r.id for r in spec.forward_rungs()] == [f"h2_{i}" for i in range(1, 6)]


def test_synthesize_validation(base):
    g, paths = _proofs(base)
    with pytest.raises(HomotopyError):
        synthesize_rungs(paths[0], paths[-1], 1)
    short = enumerate_paths(g, SOURCE, "AAB", 1)[0]
    with pytest.raises(HomotopyError):
        synthesize_rungs(paths[0], short, 2)
    other = enumerate_paths(g, SOURCE, "AABBBBBB", 6)[0]
    with pytest.raises(HomotopyError):
        synthesize_rungs(paths[0], other, 2)


def test_auto_homotopy_contains_golden_rungs(base):
    g, _ = _proofs(base)
    specs = auto_homotopy(g, SOURCE, TARGET, 6, 2)
    pairs = {(r.lhs, r.rhs) for s in specs for r in s.rungs}
    assert FORWARD <= pairs
    assert {(b, a) for a, b in FORWARD} <= pairs
    assert len(auto_homotopy(g, SOURCE, TARGET, 6, 2, dedup=False)) == 190


def test_iterate_reproduces_eleven_rule_system(order2):
    assert len(order2.combined) == 11
    assert {(r.lhs, r.rhs) for r in order2.rungs(2)} == FORWARD | {(b, a) for a, b in FORWARD}
    assert order2.rung_counts == ((2, 10),)
    assert order2.inadmissible_at is None


def test_iterate_higher_orders(order3):
    assert order3.rung_counts == ((2, 10), (3, 10))
    (cell,) = iter_cells(order3, 3)
    assert cell_order(cell) == 3 and cell_length(cell) == 6
    assert len(corner_paths(cell)) == 4


def test_identical_and_swapped_pairs(base):
    _, paths = _proofs(base)
    assert synthesize_rungs(paths[0], paths[0], 2).rungs == ()
    fwd = synthesize_rungs(paths[0], paths[-1], 2)
    back = synthesize_rungs(paths[-1], paths[0], 2)
    assert {(r.lhs, r.rhs) for r in back.forward_rungs()} == {(r.rhs, r.lhs) for r in fwd.forward_rungs()}
    assert {(r.lhs, r.rhs) for r in back.rungs} == {(r.lhs, r.rhs) for r in fwd.rungs}


def test_extend_with_empty_spec_is_noop(base):
    _, paths = _proofs(base)
    es = ExtendedSystem.from_base(base)
    assert extend_system(es, synthesize_rungs(paths[0], paths[0], 2)) == es


def test_single_path_proposition(base):
    g = evolve([SOURCE], base, 1)
    assert auto_homotopy(g, SOURCE, "AAB", 1, 2) == []
    es = iterate_homotopy(ExtendedSystem.from_base(base), SOURCE, "AAB", 2, HomotopyLimits(max_len=1))
    assert es.inadmissible_at is None
    assert es.rung_counts == ((2, 0),)
    assert format_extended(es) == "r1: A -> AB\n@order 2\n"
    assert format_extended(load_extended(format_extended(es))) == format_extended(es)


def test_rungs_are_sound_and_stratified(base, order3):
    lower = {n.string for n in evolve([SOURCE], base, 6).nodes}
    for r in order3.rungs():
        assert successors(r.lhs, order3.combined) >= {(r.id, r.rhs)}
        partner = order3.combined[r.inverse_of]
        assert (partner.lhs, partner.rhs) == (r.rhs, r.lhs)
        assert r.lhs in lower and r.rhs in lower


def test_extension_adds_only_rung_edges(base, order2):
    before = evolve([SOURCE], base, 6)
    after = evolve([SOURCE], order2.combined, 6)
    old = {(before.string(e.src), before.string(e.dst)) for e in before.edges}
    new = {(after.string(e.src), after.string(e.dst)) for e in after.edges}
    assert {n.string for n in before.nodes} == {n.string for n in after.nodes}
    rungs = {(r.lhs, r.rhs) for r in order2.rungs()}
    assert new - old == rungs
    assert old <= new


def test_inadmissible_order_flagged(base):
    es = iterate_homotopy(ExtendedSystem.from_base(base), SOURCE, "AAB", 3, HomotopyLimits(max_len=1))
    assert es.inadmissible_at == 2
    assert es.max_order == 1


def test_extend_rejects_order_gap(base, order3):
    (cell,) = iter_cells(order3, 3)
    with pytest.raises(OrderGapError):
        extend_system(ExtendedSystem.from_base(base), cell)


def test_extend_is_idempotent(order2):
    (cell,) = iter_cells(order2, 2)
    assert extend_system(order2, cell) == order2


def test_all_pairs_policy_is_a_superset(base, order2):
    every = iterate_homotopy(ExtendedSystem.from_base(base), SOURCE, TARGET, 2, LIMITS, pairs="all")
    assert {(r.lhs, r.rhs) for r in order2.rungs()} <= {(r.lhs, r.rhs) for r in every.rungs()}
    assert len(every.rungs(2)) > 10


def test_realized_cells_need_rung_edges(order2, graph2):
    cells = realized_cells(graph2, SOURCE, TARGET, 6, 2)
    assert len(cells) >= 1
    assert all(cell_order(c) == 2 for c in cells)


@pytest.mark.parametrize("order", [2, 3, 4])
def test_format_load_round_trip(base, order):
    es = iterate_homotopy(ExtendedSystem.from_base(base), SOURCE, TARGET, order, LIMITS)
    text = format_extended(es)
    back = load_extended(text)
    assert format_extended(back) == text
    assert back.combined == es.combined
    assert [len(back.specs(k)) for k in range(2, order + 1)] == [1] * (order - 1)


def test_asymmetric_cell_round_trip(base):
    # A pair that is not mirror-symmetric exercises corner ordering.
    g, paths = _proofs(base)
    es = extend_system(ExtendedSystem.from_base(base), synthesize_rungs(paths[1], paths[7], 2))
    text = format_extended(es)
    assert format_extended(load_extended(text)) == text


def test_load_rejects_bad_cells():
    with pytest.raises(RuleSyntaxError):
        load_extended("r1: A -> AB\n@cell 2 AA AAB | AA ABA ABAB\n")
    with pytest.raises(RuleSyntaxError):
        load_extended("r1: A -> AB\n@cell 2 AA ABB | AA AAB\n")
