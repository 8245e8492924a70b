"""Shared fixtures: small handmade graphs plus corpus builders."""

from __future__ import annotations

import pytest

from reebtrees import GeneratorSpec, LevelPoset, ReebGraph, make_graph, random_graph


def rename_graph(graph: ReebGraph, tag: str = "z") -> ReebGraph:
    """Apply a trivial id bijection (prefix with the tag, reverse the rest) to
    every vertex and edge.  The result is isomorphic to the input by
    construction."""

    def m(x: str) -> str:
        return tag + x[::-1]

    def remap_poset(p: LevelPoset) -> LevelPoset:
        return LevelPoset(
            frozenset(m(x) for x in p.elements),
            frozenset((m(a), m(b)) for a, b in p.covers),
        )

    labels = None
    if graph.edge_labels is not None:
        labels = tuple(
            None if d is None else {m(e): lab for e, lab in d.items()}
            for d in graph.edge_labels
        )
    return ReebGraph(
        levels=graph.levels,
        vertex_sets=tuple(frozenset(m(v) for v in vs) for vs in graph.vertex_sets),
        edge_sets=tuple(frozenset(m(e) for e in es) for es in graph.edge_sets),
        down_maps=tuple({m(e): m(v) for e, v in d.items()} for d in graph.down_maps),
        up_maps=tuple({m(e): m(v) for e, v in d.items()} for d in graph.up_maps),
        vertex_orders=tuple(remap_poset(p) for p in graph.vertex_orders),
        edge_orders=tuple(remap_poset(p) for p in graph.edge_orders),
        edge_labels=labels,
    )


# Shapes (n_leaves, betti, levels) the seeded generator accepts for any seed:
# it can host at most (levels - 1) + (n_leaves - 1) merge vertices.
SAFE_SHAPES = [
    (1, 1, 2),
    (2, 0, 3),
    (2, 1, 3),
    (3, 2, 4),
    (4, 2, 2),
    (5, 3, 5),
    (8, 0, 6),
    (8, 4, 6),
]


def corpus(shapes, seeds, max_indeg: int = 2):
    for seed in seeds:
        for n, s, lv in shapes:
            yield random_graph(
                GeneratorSpec(
                    seed=seed, n_leaves=n, betti=s, levels=lv, max_indeg=max_indeg
                )
            )


@pytest.fixture
def cycle_graph() -> ReebGraph:
    """Four original leaves, eight edges, one merge vertex (r), one cycle."""
    return make_graph(
        [0, 1, 2, 3],
        [["l2", "l3", "l4"], ["r", "l1"], ["a", "b"], ["w"]],
        [
            [("e1", "l2", "r"), ("e2", "l3", "r"), ("e3", "l4", "r")],
            [("e5", "r", "a"), ("e6", "r", "b"), ("e4", "l1", "b")],
            [("e7", "a", "w"), ("e8", "b", "w")],
        ],
    )


@pytest.fixture
def triple_edge() -> ReebGraph:
    """Two vertices joined by three parallel edges; the bottom vertex is a
    merge vertex and a leaf at once, cycle rank two."""
    return make_graph(
        [0, 1],
        [["r"], ["u"]],
        [[("e1", "r", "u"), ("e2", "r", "u"), ("e3", "r", "u")]],
    )


@pytest.fixture
def twin_peaks() -> ReebGraph:
    """Two source vertices over one bottom vertex; the two cycle-rank
    computations disagree here."""
    return make_graph(
        [0, 1],
        [["bot"], ["s1", "s2"]],
        [[("a", "bot", "s1"), ("b", "bot", "s2")]],
    )


def _net_a() -> ReebGraph:
    return make_graph(
        [-7, -4, -3, -1],
        [["l1"], ["r", "l2"], ["beta", "m"], ["rho"]],
        [
            [("rl1", "l1", "r")],
            [("bl2", "l2", "beta"), ("br", "r", "beta"), ("mr", "r", "m")],
            [("rb", "beta", "rho"), ("rm", "m", "rho")],
        ],
    )


def _net_b() -> ReebGraph:
    return make_graph(
        [-7, -4, -3, -1],
        [["xl1"], ["xr", "xl2"], ["xbeta", "xm"], ["xrho"]],
        [
            [("xrl1", "xl1", "xr")],
            [("xbl2", "xl2", "xbeta"), ("xbr", "xr", "xbeta"), ("xmr", "xr", "xm")],
            [("xrb", "xbeta", "xrho"), ("xrm", "xm", "xrho")],
        ],
    )


@pytest.fixture
def net_a() -> ReebGraph:
    """One-cycle network over two dated taxa, ages 7 and 4."""
    return _net_a()


@pytest.fixture
def net_b() -> ReebGraph:
    """Same shape as net_a with the taxon ranks swapped."""
    return _net_b()


@pytest.fixture
def ranks_a():
    return {"l1": 1, "l2": 2}


@pytest.fixture
def ranks_b():
    return {"xl1": 2, "xl2": 1}
