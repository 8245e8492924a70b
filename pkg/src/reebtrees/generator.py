"""Seeded random leveled graphs with exact leaf and cycle-rank targets.

Construction is tree-first: a trunk keeps every level and gap nonempty, leaf
chains hang off random anchors, and the requested cycle rank is then produced
by merging freshly grown partner sinks into chosen vertices, which turns them
into merge vertices of planned in-degree.  The same seed always yields the
same graph.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .core import ReebGraph, make_graph
from .errors import InfeasibleSpec


@dataclass(frozen=True)
class GeneratorSpec:
    """Requested shape: leaf count is the number of bottom-degree-zero
    vertices, betti the first Betti number, levels the critical level count.

    InfeasibleSpec marks both genuinely impossible shapes and dense packings
    this particular construction cannot realize, such as more merge vertices
    than levels and spare leaves can host.  Keeping betti below
    levels + n_leaves - 1 always fits."""

    seed: int
    n_leaves: int
    betti: int
    levels: int
    max_indeg: int = 2


def random_graph(spec: GeneratorSpec) -> ReebGraph:
    if spec.n_leaves < 1:
        raise InfeasibleSpec("need at least one leaf")
    if spec.betti < 0:
        raise InfeasibleSpec("cycle rank cannot be negative")
    if spec.levels < 2:
        raise InfeasibleSpec("need at least two levels")
    if spec.max_indeg < 2:
        raise InfeasibleSpec("max_indeg below 2 forbids every merge vertex")
    if spec.n_leaves == 1 and spec.betti == 0:
        raise InfeasibleSpec(
            "a single-leaf tree would leave the top vertex with only one branch"
        )
    rng = random.Random(spec.seed)
    L = spec.levels

    # Degree plan: in-degrees of the future merge vertices.
    remaining = spec.betti
    degrees: list[int] = []
    while remaining > 0:
        d = rng.randint(2, min(spec.max_indeg, remaining + 1))
        degrees.append(d)
        remaining -= d - 1

    # Levels for the merge vertices.  A level may host several of them only
    # if spare ordinary sinks can be pledged to it as extra merge targets.
    pledged: list[int] = []
    retic_levels: list[int] = []
    count_at: dict[int, int] = {}
    for _ in degrees:
        candidates = [
            j
            for j in range(L - 1)
            if count_at.get(j, 0) == 0 or len(pledged) < spec.n_leaves - 1
        ]
        if not candidates:
            raise InfeasibleSpec(
                "cannot place that many merge vertices with the given "
                "level and leaf budget"
            )
        j = rng.choice(candidates)
        if count_at.get(j, 0) > 0:
            pledged.append(j)
        count_at[j] = count_at.get(j, 0) + 1
        retic_levels.append(j)

    counter = [0]
    vertices: list[list[str]] = [[] for _ in range(L)]
    edges: list[list[tuple[str, str, str]]] = [[] for _ in range(L - 1)]
    level_of: dict[str, int] = {}
    arriving: dict[str, list[tuple[int, int]]] = {}

    def new_vertex(level: int) -> str:
        v = f"v{counter[0]}"
        counter[0] += 1
        vertices[level].append(v)
        level_of[v] = level
        arriving[v] = []
        return v

    ecounter = [0]

    def new_edge(gap: int, down: str, up: str) -> str:
        e = f"e{ecounter[0]}"
        ecounter[0] += 1
        edges[gap].append((e, down, up))
        arriving[down].append((gap, len(edges[gap]) - 1))
        return e

    trunk = [new_vertex(level) for level in range(L)]
    root = trunk[L - 1]
    for level in range(L - 1):
        new_edge(level, trunk[level], trunk[level + 1])

    sinks: set[str] = {trunk[0]}
    forced_root_anchor = [True]

    def attach_sink(level: int) -> str:
        """Grow a descending chain from an anchor above down to a new sink."""
        if forced_root_anchor[0]:
            anchor = root
            forced_root_anchor[0] = False
        else:
            pool = sorted(
                v
                for v, lv in level_of.items()
                if lv > level and v not in sinks
            )
            anchor = rng.choice(pool)
        top_level = level_of[anchor]
        prev = anchor
        for lv in range(top_level - 1, level, -1):
            mid = new_vertex(lv)
            new_edge(lv, mid, prev)
            prev = mid
        sink = new_vertex(level)
        new_edge(level, sink, prev)
        sinks.add(sink)
        return sink

    ordinary_levels = list(pledged)
    for _ in range(spec.n_leaves - 1 - len(pledged)):
        ordinary_levels.append(rng.randint(0, L - 2))
    rng.shuffle(ordinary_levels)
    # Pledged levels must actually receive their sinks; the shuffle only
    # varies creation order, not the multiset of levels.
    for level in ordinary_levels:
        attach_sink(level)

    consumed: set[str] = set()
    for j, d in zip(retic_levels, degrees):
        partners = [attach_sink(j) for _ in range(d - 1)]
        pool = sorted(
            v
            for v in vertices[j]
            if v not in consumed and v not in partners
        )
        primary = rng.choice(pool)
        consumed.add(primary)
        for p in partners:
            for gap, idx in arriving[p]:
                e, _down, up = edges[gap][idx]
                edges[gap][idx] = (e, primary, up)
                arriving[primary].append((gap, idx))
            vertices[j].remove(p)
            sinks.discard(p)
            del level_of[p]
            del arriving[p]

    return make_graph(list(range(L)), vertices, edges)
