"""Splitting a single-source leveled graph into trees by cutting merge points.

Every vertex where d >= 2 edges arrive from above contributes a factor of d to
the decomposition: each factor keeps exactly one arriving edge attached and
detaches the rest onto fresh leaf vertices at the same level.  Detached edges
remember their origin, so gluing is exact and id-for-id.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Mapping

from .core import RESERVED_VERTEX_PREFIX, LevelPoset, ReebGraph
from .dag import DagView, build_dag_view
from .errors import InvalidChoice, OrderConflict


@dataclass(frozen=True)
class CutChoice:
    """One kept arriving edge per merge vertex.

    ``kept`` pairs (merge_vertex, kept_edge), sorted by the merge vertex's
    (level index, id) so that choices compare deterministically.
    """

    kept: tuple[tuple[str, str], ...]

    @cached_property
    def kept_map(self) -> dict[str, str]:
        return dict(self.kept)


@dataclass(frozen=True)
class Factor:
    """One tree of the decomposition, plus the data needed to glue it back."""

    graph: ReebGraph
    choice: CutChoice
    detached: frozenset[str]
    reattach: tuple[tuple[str, str], ...]

    @cached_property
    def reattach_map(self) -> dict[str, str]:
        return dict(self.reattach)

    @cached_property
    def cut_vertices(self) -> tuple[str, ...]:
        return tuple(sorted(RESERVED_VERTEX_PREFIX + e for e in self.detached))


@dataclass(frozen=True)
class Decomposition:
    view: DagView
    factors: tuple[Factor, ...]

    @property
    def factor_count(self) -> int:
        return len(self.factors)


def cut_options(view: DagView) -> tuple[tuple[str, tuple[str, ...]], ...]:
    """Per merge vertex, the arriving edges one of which must be kept.

    Merge vertices are ordered by (level index, id); candidate edges by id.
    """
    retics = sorted(view.reticulations, key=lambda c: (c.level_index, c.vertex))
    return tuple(
        (c.vertex, tuple(sorted(view.graph.above_edges[c.vertex]))) for c in retics
    )


def factor_count(view: DagView) -> int:
    return math.prod(len(edges) for _, edges in cut_options(view))


def enumerate_choices(view: DagView) -> Iterator[CutChoice]:
    """All cut choices in lexicographic order over the option table."""
    options = cut_options(view)
    vertices = tuple(v for v, _ in options)
    for picked in itertools.product(*(edges for _, edges in options)):
        yield CutChoice(kept=tuple(zip(vertices, picked)))


def make_choice(view: DagView, kept: Mapping[str, str]) -> CutChoice:
    """Build a choice from a {merge_vertex: kept_edge} mapping, rejecting
    anything that does not match the graph."""
    options = dict(cut_options(view))
    extra = sorted(set(kept) - set(options))
    if extra:
        raise InvalidChoice(f"not merge vertices: {', '.join(extra)}")
    missing = sorted(set(options) - set(kept))
    if missing:
        raise InvalidChoice(f"no kept edge for: {', '.join(missing)}")
    for v, e in kept.items():
        if e not in options[v]:
            raise InvalidChoice(f"edge {e!r} does not arrive at {v!r}")
    order = {v: i for i, (v, _) in enumerate(cut_options(view))}
    pairs = tuple(sorted(kept.items(), key=lambda kv: order[kv[0]]))
    return CutChoice(kept=pairs)


def _require_trivial_orders(graph: ReebGraph) -> None:
    for i, poset in enumerate(graph.vertex_orders):
        if not poset.is_trivial:
            raise OrderConflict(
                f"decomposition needs trivial orders; vertex relations at level {i}"
            )
    for i, poset in enumerate(graph.edge_orders):
        if not poset.is_trivial:
            raise OrderConflict(
                f"decomposition needs trivial orders; edge relations at gap {i}"
            )


def apply_choice(view: DagView, choice: CutChoice) -> Factor:
    """Detach every non-kept arriving edge onto a fresh leaf at the merge
    vertex's level, recording (kept leaf below merge vertex) in that level's
    order."""
    graph = view.graph
    options = dict(cut_options(view))
    if set(choice.kept_map) != set(options):
        raise InvalidChoice("choice does not cover exactly the merge vertices")
    vsets = [set(vs) for vs in graph.vertex_sets]
    downs = [dict(m) for m in graph.down_maps]
    covers: list[set[tuple[str, str]]] = [set(p.covers) for p in graph.vertex_orders]
    reattach: list[tuple[str, str]] = []
    for retic, keep_edge in choice.kept:
        if keep_edge not in options[retic]:
            raise InvalidChoice(f"edge {keep_edge!r} does not arrive at {retic!r}")
        lvl = graph.vertex_level[retic]
        for e in options[retic]:
            if e == keep_edge:
                continue
            cut_v = RESERVED_VERTEX_PREFIX + e
            if cut_v in vsets[lvl]:
                raise ValueError(f"cut vertex id {cut_v!r} already present")
            vsets[lvl].add(cut_v)
            downs[lvl][e] = cut_v
            covers[lvl].add((retic, cut_v))
            reattach.append((e, retic))
    fgraph = ReebGraph(
        levels=graph.levels,
        vertex_sets=tuple(frozenset(s) for s in vsets),
        edge_sets=graph.edge_sets,
        down_maps=tuple(downs),
        up_maps=graph.up_maps,
        vertex_orders=tuple(
            LevelPoset(frozenset(vsets[i]), frozenset(covers[i]))
            for i in range(len(vsets))
        ),
        edge_orders=graph.edge_orders,
        edge_labels=graph.edge_labels,
    )
    return Factor(
        graph=fgraph,
        choice=choice,
        detached=frozenset(e for e, _ in reattach),
        reattach=tuple(sorted(reattach)),
    )


def decompose(source: ReebGraph | DagView) -> Decomposition:
    """Full decomposition: one factor per cut choice, in enumeration order.

    The input must classify cleanly (single source) and carry trivial level
    orders, since the factors populate the orders themselves.
    """
    view = source if isinstance(source, DagView) else build_dag_view(source)
    _require_trivial_orders(view.graph)
    return Decomposition(
        view=view, factors=tuple(apply_choice(view, c) for c in enumerate_choices(view))
    )


def glue_back(factor: Factor) -> ReebGraph:
    """Reverse the cuts: drop the cut leaves and point every detached edge at
    its recorded merge vertex again.  Output is exactly the graph the factor
    came from."""
    g = factor.graph
    vsets = [set(vs) for vs in g.vertex_sets]
    downs = [dict(m) for m in g.down_maps]
    for e, retic in factor.reattach:
        gap = g.edge_gap[e]
        cut_v = downs[gap][e]
        if not cut_v.startswith(RESERVED_VERTEX_PREFIX):
            raise ValueError(f"edge {e!r} is not attached to a cut vertex")
        downs[gap][e] = retic
        vsets[gap].discard(cut_v)
    vertex_orders = tuple(
        LevelPoset(
            frozenset(vsets[i]),
            frozenset(
                (a, b) for a, b in g.vertex_orders[i].covers
                if a in vsets[i] and b in vsets[i]
            ),
        )
        for i in range(len(vsets))
    )
    return ReebGraph(
        levels=g.levels,
        vertex_sets=tuple(frozenset(s) for s in vsets),
        edge_sets=g.edge_sets,
        down_maps=tuple(downs),
        up_maps=g.up_maps,
        vertex_orders=vertex_orders,
        edge_orders=g.edge_orders,
        edge_labels=g.edge_labels,
    )
