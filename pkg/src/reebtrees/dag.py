"""Directed view of a leveled graph and the vertex classification built on it.

Edges are oriented downward (top endpoint to bottom endpoint), so a vertex's
in-degree counts edges arriving from the gap above and its out-degree counts
edges leaving into the gap below.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property

from .core import ReebGraph
from .errors import ReticulationConflict


class VertexKind(Enum):
    TREE = "tree"
    RETICULATION = "reticulation"
    LEAF = "leaf"
    REGULAR = "regular"


@dataclass(frozen=True)
class VertexClass:
    vertex: str
    level_index: int
    indegree: int
    outdegree: int
    kind: VertexKind
    is_leaf: bool


def classify_vertex(graph: ReebGraph, v: str) -> VertexClass:
    ind = graph.indeg(v)
    out = graph.outdeg(v)
    leaf = out == 0 or (out == 1 and ind == 0)
    if ind >= 2:
        kind = VertexKind.RETICULATION
    elif leaf:
        kind = VertexKind.LEAF
    elif ind == 1 and out == 1:
        kind = VertexKind.REGULAR
    else:
        kind = VertexKind.TREE
    return VertexClass(
        vertex=v,
        level_index=graph.vertex_level[v],
        indegree=ind,
        outdegree=out,
        kind=kind,
        is_leaf=leaf,
    )


def betti_euler(graph: ReebGraph) -> int:
    """First Betti number by Euler count: edges - vertices + 1 for a
    connected graph."""
    n_e = sum(len(es) for es in graph.edge_sets)
    n_v = sum(len(vs) for vs in graph.vertex_sets)
    return n_e - n_v + 1


def betti_reticulation(graph: ReebGraph) -> int:
    """First Betti number by merge count: the sum of (indegree - 1) over all
    vertices with indegree at least 2."""
    total = 0
    for v in graph.vertex_level:
        d = graph.indeg(v)
        if d >= 2:
            total += d - 1
    return total


def source_vertices(graph: ReebGraph) -> tuple[str, ...]:
    """Vertices with no edge arriving from above, in deterministic order."""
    return tuple(v for v in graph.vertex_ids() if graph.indeg(v) == 0)


@dataclass(frozen=True)
class DagView:
    """Classification summary of a leveled graph.

    Only graphs whose two cycle-rank computations agree get a view; that
    condition is equivalent to having exactly one source vertex, and it is the
    precondition for the tree-decomposition machinery downstream.
    """

    graph: ReebGraph
    classes: tuple[VertexClass, ...]
    betti: int

    @cached_property
    def by_vertex(self) -> dict[str, VertexClass]:
        return {c.vertex: c for c in self.classes}

    @cached_property
    def reticulations(self) -> tuple[VertexClass, ...]:
        return tuple(c for c in self.classes if c.kind is VertexKind.RETICULATION)

    @cached_property
    def leaves(self) -> tuple[VertexClass, ...]:
        return tuple(c for c in self.classes if c.is_leaf)

    @cached_property
    def root(self) -> str:
        return next(v for v in self.graph.vertex_ids() if self.graph.indeg(v) == 0)


def classify_all(graph: ReebGraph) -> tuple[VertexClass, ...]:
    return tuple(classify_vertex(graph, v) for v in graph.vertex_ids())


def build_dag_view(graph: ReebGraph) -> DagView:
    """Classify every vertex and cross-check the two Betti computations.

    When the counts disagree the graph has multiple sources (several local
    maxima of the level function), the decomposition theory does not apply,
    and ReticulationConflict is raised carrying both values.
    """
    b_euler = betti_euler(graph)
    b_retic = betti_reticulation(graph)
    if b_euler != b_retic:
        sources = source_vertices(graph)
        raise ReticulationConflict(
            f"cycle-rank mismatch: euler count {b_euler} vs merge count {b_retic} "
            f"({len(sources)} source vertices: {', '.join(sources)})"
        )
    return DagView(graph=graph, classes=classify_all(graph), betti=b_euler)
