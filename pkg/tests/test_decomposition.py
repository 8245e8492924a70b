"""Cut enumeration, factor construction, and exact glue-back."""

from __future__ import annotations

import math

import pytest

from reebtrees import (
    GeneratorSpec,
    InvalidChoice,
    OrderConflict,
    apply_choice,
    betti_euler,
    build_dag_view,
    cut_options,
    decompose,
    enumerate_choices,
    factor_count,
    glue_back,
    make_choice,
    make_graph,
    random_graph,
    validate,
)
from conftest import SAFE_SHAPES, corpus


def test_cut_options_single_merge(cycle_graph):
    view = build_dag_view(cycle_graph)
    assert cut_options(view) == (("r", ("e5", "e6")),)
    assert factor_count(view) == 2


def test_choice_enumeration_order(triple_edge):
    view = build_dag_view(triple_edge)
    choices = list(enumerate_choices(view))
    assert [c.kept for c in choices] == [
        (("r", "e1"),),
        (("r", "e2"),),
        (("r", "e3"),),
    ]


def test_make_choice_rejections(cycle_graph):
    view = build_dag_view(cycle_graph)
    with pytest.raises(InvalidChoice, match="not merge vertices: w"):
        make_choice(view, {"r": "e5", "w": "e7"})
    with pytest.raises(InvalidChoice, match="no kept edge for: r"):
        make_choice(view, {})
    with pytest.raises(InvalidChoice, match="does not arrive"):
        make_choice(view, {"r": "e1"})
    choice = make_choice(view, {"r": "e6"})
    assert choice.kept == (("r", "e6"),)


def test_apply_choice_details(cycle_graph):
    view = build_dag_view(cycle_graph)
    factor = apply_choice(view, make_choice(view, {"r": "e5"}))
    assert factor.detached == frozenset({"e6"})
    assert factor.cut_vertices == ("cut:e6",)
    assert factor.reattach_map == {"e6": "r"}
    g = factor.graph
    assert "cut:e6" in g.vertex_sets[1]
    assert g.down_maps[1]["e6"] == "cut:e6"
    assert ("r", "cut:e6") in g.vertex_orders[1].covers
    # The factor is a valid tree once the reserved ids are allowed.
    assert validate(g, allow_cut_ids=True) == []
    assert validate(g) != []
    assert betti_euler(g) == 0


def test_decomposition_factors(cycle_graph):
    dec = decompose(cycle_graph)
    assert dec.factor_count == 2
    assert [f.detached for f in dec.factors] == [
        frozenset({"e6"}),
        frozenset({"e5"}),
    ]
    for f in dec.factors:
        assert glue_back(f) == cycle_graph


def test_decompose_accepts_view_or_graph(triple_edge):
    view = build_dag_view(triple_edge)
    assert decompose(view).factor_count == decompose(triple_edge).factor_count == 3


def test_triple_edge_factors(triple_edge):
    dec = decompose(triple_edge)
    assert [sorted(f.detached) for f in dec.factors] == [
        ["e2", "e3"],
        ["e1", "e3"],
        ["e1", "e2"],
    ]
    for f in dec.factors:
        assert betti_euler(f.graph) == 0
        assert glue_back(f) == triple_edge


def test_ordered_input_is_refused(cycle_graph):
    from dataclasses import replace

    from reebtrees import LevelPoset

    ordered = replace(
        cycle_graph,
        vertex_orders=(
            LevelPoset(cycle_graph.vertex_sets[0], frozenset({("l2", "l3")})),
        )
        + cycle_graph.vertex_orders[1:],
    )
    with pytest.raises(OrderConflict, match="vertex relations at level 0"):
        decompose(ordered)
    ordered_e = replace(
        cycle_graph,
        edge_orders=(
            LevelPoset(cycle_graph.edge_sets[0], frozenset({("e1", "e2")})),
        )
        + cycle_graph.edge_orders[1:],
    )
    with pytest.raises(OrderConflict, match="edge relations at gap 0"):
        decompose(ordered_e)


def test_factor_leaf_count_law():
    # Every factor of a graph with n original leaves and cycle rank s has
    # n + s leaves: the cut operation adds one leaf per removed unit of rank.
    for n, s, lv in SAFE_SHAPES:
        g = random_graph(GeneratorSpec(seed=11, n_leaves=n, betti=s, levels=lv))
        for f in decompose(g).factors:
            fview = build_dag_view(f.graph)
            assert len(fview.leaves) == n + s
            assert fview.betti == 0


def test_factor_count_product_with_wide_merges():
    for seed in range(6):
        g = random_graph(
            GeneratorSpec(seed=seed, n_leaves=4, betti=4, levels=5, max_indeg=3)
        )
        view = build_dag_view(g)
        expected = math.prod(len(edges) for _, edges in cut_options(view))
        assert decompose(view).factor_count == expected


def test_glue_back_on_corpus_sample():
    for g in corpus(SAFE_SHAPES, range(3)):
        for f in decompose(g).factors:
            assert glue_back(f) == g


def test_glue_back_rejects_foreign_edge(cycle_graph):
    from dataclasses import replace

    from reebtrees import Factor

    dec = decompose(cycle_graph)
    broken = replace(dec.factors[0], reattach=(("e7", "r"),))
    with pytest.raises(ValueError, match="not attached to a cut vertex"):
        glue_back(broken)


def test_choices_cover_option_product():
    g = make_graph(
        [0, 1, 2],
        [["s1", "s2"], ["m1", "m2"], ["t"]],
        [
            [("a1", "s1", "m1"), ("a2", "s1", "m1"), ("b1", "s2", "m2"), ("b2", "s2", "m2")],
            [("c1", "m1", "t"), ("c2", "m2", "t")],
        ],
    )
    view = build_dag_view(g)
    assert factor_count(view) == 4
    kept_sets = {c.kept for c in enumerate_choices(view)}
    assert len(kept_sets) == 4
