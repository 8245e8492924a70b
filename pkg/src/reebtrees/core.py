"""Core leveled-graph model.

A graph here is a finite sequence of exact rational levels, a nonempty vertex
set on every level, a nonempty edge set over every gap between consecutive
levels, and total attachment maps sending each edge to its bottom (down) and
top (up) endpoint.  Vertex and edge sets each carry a partial order stored as
covering relations.  Everything is immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import BadLevelSet, OrderConflict

Level = Fraction

RESERVED_VERTEX_PREFIX = "cut:"


def as_level(value: Fraction | int | str) -> Fraction:
    """Coerce an exact value to a level.  Floats are refused on purpose."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_level(value)
    raise TypeError(f"level must be Fraction, int, or str, not {type(value).__name__}")


def parse_level(text: str) -> Fraction:
    """Parse "3", "-1.25", or "2/3" into an exact rational."""
    text = text.strip()
    if "/" in text:
        num, _, den = text.partition("/")
        return Fraction(int(num), int(den))
    return Fraction(text)


def format_level(value: Fraction) -> str:
    """Exact textual form: a decimal when the denominator is 2^a * 5^b,
    otherwise "p/q"."""
    den = value.denominator
    twos = fives = 0
    while den % 2 == 0:
        den //= 2
        twos += 1
    while den % 5 == 0:
        den //= 5
        fives += 1
    if den != 1:
        return f"{value.numerator}/{value.denominator}"
    shift = max(twos, fives)
    if shift == 0:
        return str(value.numerator)
    scaled = value.numerator * 10**shift // value.denominator
    sign = "-" if scaled < 0 else ""
    digits = str(abs(scaled)).rjust(shift + 1, "0")
    return f"{sign}{digits[:-shift]}.{digits[-shift:]}"


@dataclass(frozen=True)
class LevelPoset:
    """Partial order on one level's elements, stored as covering pairs."""

    elements: frozenset[str]
    covers: frozenset[tuple[str, str]]

    @staticmethod
    def trivial(elements: Iterable[str]) -> "LevelPoset":
        return LevelPoset(frozenset(elements), frozenset())

    @property
    def is_trivial(self) -> bool:
        return not self.covers

    @cached_property
    def _closure(self) -> tuple[dict[str, frozenset[str]], bool]:
        succ: dict[str, set[str]] = {}
        for lo, hi in self.covers:
            succ.setdefault(lo, set()).add(hi)
        reach: dict[str, frozenset[str]] = {}
        state: dict[str, int] = {}
        cyclic = False

        def visit(x: str) -> frozenset[str]:
            nonlocal cyclic
            if state.get(x) == 2:
                return reach[x]
            if state.get(x) == 1:
                cyclic = True
                return frozenset()
            state[x] = 1
            acc: set[str] = set()
            for y in succ.get(x, ()):
                acc.add(y)
                acc |= visit(y)
            state[x] = 2
            reach[x] = frozenset(acc)
            return reach[x]

        for x in list(succ):
            visit(x)
        if any(x in reach.get(x, frozenset()) for x in succ):
            cyclic = True
        return reach, cyclic

    @property
    def has_cycle(self) -> bool:
        return self._closure[1]

    def leq(self, a: str, b: str) -> bool:
        return a == b or b in self._closure[0].get(a, frozenset())

    def strictly_above(self, a: str) -> frozenset[str]:
        return self._closure[0].get(a, frozenset())


@dataclass(frozen=True)
class ReebGraph:
    """Immutable leveled graph.

    ``levels[i]`` is the i-th level value, ``vertex_sets[i]`` the ids living on
    it.  ``edge_sets[i]`` spans the gap between levels i and i+1;
    ``down_maps[i]`` sends each of those edges to a vertex at level i and
    ``up_maps[i]`` to one at level i+1.  ``edge_labels`` is either None (no
    labelling) or one dict per gap, where a gap's entry may be None after a
    splice dropped it.
    """

    levels: tuple[Fraction, ...]
    vertex_sets: tuple[frozenset[str], ...]
    edge_sets: tuple[frozenset[str], ...]
    down_maps: tuple[Mapping[str, str], ...]
    up_maps: tuple[Mapping[str, str], ...]
    vertex_orders: tuple[LevelPoset, ...]
    edge_orders: tuple[LevelPoset, ...]
    edge_labels: tuple[Mapping[str, str] | None, ...] | None = None

    @property
    def level_count(self) -> int:
        return len(self.levels)

    @property
    def gap_count(self) -> int:
        return len(self.edge_sets)

    @cached_property
    def vertex_level(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for i, vs in enumerate(self.vertex_sets):
            for v in vs:
                out.setdefault(v, i)
        return out

    @cached_property
    def edge_gap(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for i, es in enumerate(self.edge_sets):
            for e in es:
                out.setdefault(e, i)
        return out

    @cached_property
    def above_edges(self) -> dict[str, tuple[str, ...]]:
        """Vertex id -> edges attached to it from the gap above (down-map
        preimage), sorted for determinism."""
        acc: dict[str, list[str]] = {}
        for dn in self.down_maps:
            for e, v in dn.items():
                acc.setdefault(v, []).append(e)
        return {v: tuple(sorted(es)) for v, es in acc.items()}

    @cached_property
    def below_edges(self) -> dict[str, tuple[str, ...]]:
        """Vertex id -> edges attached from the gap below (up-map preimage)."""
        acc: dict[str, list[str]] = {}
        for up in self.up_maps:
            for e, v in up.items():
                acc.setdefault(v, []).append(e)
        return {v: tuple(sorted(es)) for v, es in acc.items()}

    def indeg(self, v: str) -> int:
        return len(self.above_edges.get(v, ()))

    def outdeg(self, v: str) -> int:
        return len(self.below_edges.get(v, ()))

    def vertex_ids(self) -> Iterator[str]:
        for vs in self.vertex_sets:
            yield from sorted(vs)

    def edge_ids(self) -> Iterator[str]:
        for es in self.edge_sets:
            yield from sorted(es)

    @property
    def has_full_labels(self) -> bool:
        return self.edge_labels is not None and all(
            m is not None for m in self.edge_labels
        )

    def gap_labels(self, i: int) -> Mapping[str, str] | None:
        if self.edge_labels is None:
            return None
        return self.edge_labels[i]


def make_graph(
    levels: Sequence[Fraction | int | str],
    vertices: Sequence[Iterable[str]],
    edges: Sequence[Iterable[tuple[str, str, str]]],
    *,
    vertex_covers: Sequence[Iterable[tuple[str, str]]] | None = None,
    edge_covers: Sequence[Iterable[tuple[str, str]]] | None = None,
    labels: Sequence[Mapping[str, str] | None] | None = None,
) -> ReebGraph:
    """Assemble a graph from plain data.

    ``edges[i]`` holds (edge_id, down_vertex, up_vertex) triples for gap i.
    Shape errors (wrong list lengths, repeated edge id within a gap) raise
    ValueError; content-level problems are left for validate().
    """
    lv = tuple(as_level(x) for x in levels)
    k = len(lv)
    if len(vertices) != k:
        raise ValueError(f"expected {k} vertex sets, got {len(vertices)}")
    if len(edges) != k - 1:
        raise ValueError(f"expected {k - 1} edge sets, got {len(edges)}")
    vsets = tuple(frozenset(str(v) for v in vs) for vs in vertices)
    esets: list[frozenset[str]] = []
    downs: list[dict[str, str]] = []
    ups: list[dict[str, str]] = []
    for i, gap in enumerate(edges):
        dn: dict[str, str] = {}
        up: dict[str, str] = {}
        count = 0
        for eid, lo, hi in gap:
            eid = str(eid)
            if eid in dn:
                raise ValueError(f"duplicate edge id {eid!r} in gap {i}")
            dn[eid] = str(lo)
            up[eid] = str(hi)
            count += 1
        esets.append(frozenset(dn))
        downs.append(dn)
        ups.append(up)

    def build_orders(covers, carriers, what):
        if covers is None:
            return tuple(LevelPoset.trivial(c) for c in carriers)
        if len(covers) != len(carriers):
            raise ValueError(f"expected {len(carriers)} {what} cover lists")
        return tuple(
            LevelPoset(carriers[i], frozenset((str(a), str(b)) for a, b in cov))
            for i, cov in enumerate(covers)
        )

    vorders = build_orders(vertex_covers, vsets, "vertex")
    eorders = build_orders(edge_covers, tuple(esets), "edge")
    lab: tuple[Mapping[str, str] | None, ...] | None = None
    if labels is not None:
        if len(labels) != k - 1:
            raise ValueError(f"expected {k - 1} label maps, got {len(labels)}")
        lab = tuple(dict(m) if m is not None else None for m in labels)
    return ReebGraph(
        levels=lv,
        vertex_sets=vsets,
        edge_sets=tuple(esets),
        down_maps=tuple(downs),
        up_maps=tuple(ups),
        vertex_orders=vorders,
        edge_orders=eorders,
        edge_labels=lab,
    )


def validate(graph: ReebGraph, *, allow_cut_ids: bool = False) -> list[str]:
    """Check every structural invariant; return a list of violations.

    An empty list means the graph is valid.  ``allow_cut_ids`` is used when
    re-checking decomposition output, which legitimately carries vertices with
    the reserved "cut:" prefix.
    """
    report: list[str] = []
    k = graph.level_count
    if k < 2:
        report.append(f"fewer than 2 levels ({k})")
    for i in range(k - 1):
        if graph.levels[i] >= graph.levels[i + 1]:
            report.append(
                f"levels not strictly increasing at index {i} "
                f"({format_level(graph.levels[i])} >= {format_level(graph.levels[i + 1])})"
            )
    for i, vs in enumerate(graph.vertex_sets):
        if not vs:
            report.append(f"empty vertex set at level {i}")
    for i, es in enumerate(graph.edge_sets):
        if not es:
            report.append(f"empty edge set at gap {i}")

    seen_v: dict[str, int] = {}
    for i, vs in enumerate(graph.vertex_sets):
        for v in vs:
            if v in seen_v:
                report.append(f"duplicate vertex id {v!r} at levels {seen_v[v]} and {i}")
            else:
                seen_v[v] = i
    seen_e: dict[str, int] = {}
    for i, es in enumerate(graph.edge_sets):
        for e in es:
            if e in seen_e:
                report.append(f"duplicate edge id {e!r} at gaps {seen_e[e]} and {i}")
            else:
                seen_e[e] = i
    for shared in sorted(set(seen_v) & set(seen_e)):
        report.append(f"id {shared!r} used as both vertex and edge")
    if not allow_cut_ids:
        for x in sorted(set(seen_v) | set(seen_e)):
            if x.startswith(RESERVED_VERTEX_PREFIX):
                report.append(f"reserved id prefix {RESERVED_VERTEX_PREFIX!r} on {x!r}")

    for i in range(graph.gap_count):
        es = graph.edge_sets[i]
        for name, mp, targets, lvl in (
            ("down_map", graph.down_maps[i], graph.vertex_sets[i], i),
            ("up_map", graph.up_maps[i], graph.vertex_sets[i + 1], i + 1),
        ):
            if set(mp) != es:
                report.append(f"{name} domain mismatch at gap {i}")
            for e in sorted(es):
                if e not in mp:
                    continue
                if mp[e] not in targets:
                    report.append(
                        f"dangling {name} target {mp[e]!r} for edge {e!r} "
                        f"(expected a vertex at level {lvl})"
                    )

    def check_order(poset: LevelPoset, carrier: frozenset[str], what: str, i: int):
        if poset.elements != carrier:
            report.append(f"{what} order elements mismatch at index {i}")
        for lo, hi in sorted(poset.covers):
            if lo not in carrier or hi not in carrier:
                report.append(
                    f"{what} order cover ({lo!r}, {hi!r}) references unknown id at index {i}"
                )
        if poset.has_cycle:
            report.append(f"non-poset {what} order at index {i} (cycle in covers)")

    for i, poset in enumerate(graph.vertex_orders):
        check_order(poset, graph.vertex_sets[i], "vertex", i)
    for i, poset in enumerate(graph.edge_orders):
        check_order(poset, graph.edge_sets[i], "edge", i)

    for i in range(graph.gap_count):
        eo = graph.edge_orders[i]
        if eo.has_cycle:
            continue
        for lo, hi in sorted(eo.covers):
            dn = graph.down_maps[i]
            up = graph.up_maps[i]
            if lo in dn and hi in dn and not graph.vertex_orders[i].leq(dn[lo], dn[hi]):
                report.append(f"non-monotone down_map at gap {i}: cover ({lo!r}, {hi!r})")
            if lo in up and hi in up and not graph.vertex_orders[i + 1].leq(up[lo], up[hi]):
                report.append(f"non-monotone up_map at gap {i}: cover ({lo!r}, {hi!r})")

    if graph.edge_labels is not None:
        if len(graph.edge_labels) != graph.gap_count:
            report.append("label list length mismatch")
        else:
            for i, m in enumerate(graph.edge_labels):
                if m is None:
                    continue
                if set(m) != graph.edge_sets[i]:
                    report.append(f"label domain mismatch at gap {i}")
                if len(set(m.values())) != len(m):
                    report.append(f"non-bijective labels at gap {i}")

    # Connectivity over the incidence structure, using only well-formed links.
    parent: dict[str, str] = {}

    def find(x: str) -> str:
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: str, b: str):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    ids = set(seen_v) | set(seen_e)
    for x in ids:
        find(x)
    for i in range(graph.gap_count):
        for e in graph.edge_sets[i]:
            d = graph.down_maps[i].get(e)
            u = graph.up_maps[i].get(e)
            if d in seen_v:
                union(e, d)
            if u in seen_v:
                union(e, u)
    components = {find(x) for x in ids}
    if len(components) > 1:
        report.append(f"disconnected graph ({len(components)} components)")
    return report


def is_valid(graph: ReebGraph, *, allow_cut_ids: bool = False) -> bool:
    return not validate(graph, allow_cut_ids=allow_cut_ids)


def _is_regular(graph: ReebGraph, v: str) -> bool:
    return graph.indeg(v) == 1 and graph.outdeg(v) == 1


def minimize_critical_set(graph: ReebGraph) -> ReebGraph:
    """Splice out interior levels on which every vertex is regular.

    The result has the same geometry with the smallest level set: every
    interior level keeps at least one non-regular vertex.  Raises
    OrderConflict when splicing would discard covers, since a merged chain
    cannot carry the per-gap order data.  Labels of merged gaps are dropped.
    """
    k = graph.level_count
    keep = [0]
    for i in range(1, k - 1):
        if any(not _is_regular(graph, v) for v in graph.vertex_sets[i]):
            keep.append(i)
    keep.append(k - 1)
    if len(keep) == k:
        return graph

    for a, b in zip(keep, keep[1:]):
        if b - a == 1:
            continue
        for lvl in range(a + 1, b):
            if not graph.vertex_orders[lvl].is_trivial:
                raise OrderConflict(
                    f"removable level {lvl} carries nontrivial order relations"
                )
        for gap in range(a, b):
            if not graph.edge_orders[gap].is_trivial:
                raise OrderConflict(
                    f"gap {gap} inside a spliced run carries nontrivial order relations"
                )

    new_levels = [graph.levels[i] for i in keep]
    new_vsets = [graph.vertex_sets[i] for i in keep]
    new_vorders = [graph.vertex_orders[i] for i in keep]
    new_edges: list[list[tuple[str, str, str]]] = []
    new_eorders: list[LevelPoset] = []
    had_labels = graph.edge_labels is not None
    new_labels: list[Mapping[str, str] | None] = []

    for a, b in zip(keep, keep[1:]):
        if b - a == 1:
            triples = [
                (e, graph.down_maps[a][e], graph.up_maps[a][e])
                for e in sorted(graph.edge_sets[a])
            ]
            new_edges.append(triples)
            new_eorders.append(graph.edge_orders[a])
            new_labels.append(graph.gap_labels(a))
            continue
        triples = []
        for e in sorted(graph.edge_sets[a]):
            cur = e
            gap = a
            while gap < b - 1:
                mid = graph.up_maps[gap][cur]
                nxt = graph.above_edges[mid]
                cur = nxt[0]
                gap += 1
            triples.append((e, graph.down_maps[a][e], graph.up_maps[b - 1][cur]))
        new_edges.append(triples)
        new_eorders.append(LevelPoset.trivial(t[0] for t in triples))
        new_labels.append(None)

    out = make_graph(
        new_levels,
        new_vsets,
        new_edges,
        labels=new_labels if had_labels else None,
    )
    return replace(
        out,
        vertex_orders=tuple(new_vorders),
        edge_orders=tuple(new_eorders),
    )


def _split_gap_id(edge: str, part: str) -> str:
    return f"{edge}.{part}"


def _insert_level(graph: ReebGraph, value: Fraction) -> ReebGraph:
    """Insert one level strictly inside an existing gap, splitting every
    crossing edge in two around a fresh regular vertex."""
    gap = None
    for i in range(graph.gap_count):
        if graph.levels[i] < value < graph.levels[i + 1]:
            gap = i
            break
    if gap is None:
        raise BadLevelSet(f"level {format_level(value)} does not fall inside a gap")

    crossing = sorted(graph.edge_sets[gap])
    mid_name = {e: f"{e}@{format_level(value)}" for e in crossing}
    lo_name = {e: _split_gap_id(e, "lo") for e in crossing}
    hi_name = {e: _split_gap_id(e, "hi") for e in crossing}

    existing = set(graph.vertex_level) | set(graph.edge_gap)
    for fresh in list(mid_name.values()) + list(lo_name.values()) + list(hi_name.values()):
        if fresh in existing:
            raise ValueError(f"refinement id collision on {fresh!r}")

    levels = list(graph.levels)
    levels.insert(gap + 1, value)
    vsets = list(graph.vertex_sets)
    vsets.insert(gap + 1, frozenset(mid_name.values()))
    vorders = list(graph.vertex_orders)
    mid_covers = frozenset(
        (mid_name[lo], mid_name[hi]) for lo, hi in graph.edge_orders[gap].covers
    )
    vorders.insert(gap + 1, LevelPoset(frozenset(mid_name.values()), mid_covers))

    lo_triples = [(lo_name[e], graph.down_maps[gap][e], mid_name[e]) for e in crossing]
    hi_triples = [(hi_name[e], mid_name[e], graph.up_maps[gap][e]) for e in crossing]

    def rebuild_gap(triples):
        dn = {ei: d for ei, d, _ in triples}
        up = {ei: u for ei, _, u in triples}
        return frozenset(dn), dn, up

    esets = list(graph.edge_sets)
    downs = list(graph.down_maps)
    ups = list(graph.up_maps)
    eorders = list(graph.edge_orders)
    labels = list(graph.edge_labels) if graph.edge_labels is not None else None

    lo_set, lo_dn, lo_up = rebuild_gap(lo_triples)
    hi_set, hi_dn, hi_up = rebuild_gap(hi_triples)
    esets[gap : gap + 1] = [lo_set, hi_set]
    downs[gap : gap + 1] = [lo_dn, hi_dn]
    ups[gap : gap + 1] = [lo_up, hi_up]
    old_covers = graph.edge_orders[gap].covers
    eorders[gap : gap + 1] = [
        LevelPoset(lo_set, frozenset((lo_name[a], lo_name[b]) for a, b in old_covers)),
        LevelPoset(hi_set, frozenset((hi_name[a], hi_name[b]) for a, b in old_covers)),
    ]
    if labels is not None:
        old = labels[gap]
        if old is None:
            labels[gap : gap + 1] = [None, None]
        else:
            labels[gap : gap + 1] = [
                {lo_name[e]: f"{old[e]}.lo" for e in crossing},
                {hi_name[e]: f"{old[e]}.hi" for e in crossing},
            ]

    return ReebGraph(
        levels=tuple(levels),
        vertex_sets=tuple(vsets),
        edge_sets=tuple(esets),
        down_maps=tuple(downs),
        up_maps=tuple(ups),
        vertex_orders=tuple(vorders),
        edge_orders=tuple(eorders),
        edge_labels=tuple(labels) if labels is not None else None,
    )


def refine_to_levels(
    graph: ReebGraph, new_levels: Sequence[Fraction | int | str]
) -> ReebGraph:
    """Return an equivalent graph over a finer level set.

    ``new_levels`` must contain every current level, and inserted values must
    fall strictly inside the current range; otherwise BadLevelSet is raised.
    Split edges take ".lo"/".hi" id and label suffixes, and orders are
    inherited segment-wise.
    """
    target = sorted({as_level(x) for x in new_levels})
    current = set(graph.levels)
    if not current <= set(target):
        missing = sorted(current - set(target))
        raise BadLevelSet(
            "new level set must contain the current one; missing "
            + ", ".join(format_level(x) for x in missing)
        )
    if target[0] != graph.levels[0] or target[-1] != graph.levels[-1]:
        raise BadLevelSet("inserted levels must fall strictly inside the level range")
    out = graph
    for value in target:
        if value not in current:
            out = _insert_level(out, value)
    return out


def common_refinement(a: ReebGraph, b: ReebGraph) -> tuple[ReebGraph, ReebGraph]:
    """Refine both graphs to the union of their level sets."""
    if (a.levels[0], a.levels[-1]) != (b.levels[0], b.levels[-1]):
        raise BadLevelSet("graphs span different level ranges")
    union = sorted(set(a.levels) | set(b.levels))
    return refine_to_levels(a, union), refine_to_levels(b, union)


@dataclass(frozen=True)
class EdgeSequence:
    """Per-gap edge cardinalities over a level set."""

    levels: tuple[Fraction, ...]
    cardinalities: tuple[int, ...]


def edge_sequence(graph: ReebGraph) -> EdgeSequence:
    return EdgeSequence(
        levels=graph.levels,
        cardinalities=tuple(len(es) for es in graph.edge_sets),
    )


def same_edge_structure(a: ReebGraph, b: ReebGraph) -> bool:
    """Decide whether the two graphs have equal per-gap edge counts after
    refinement to a common level set.  Graphs over disjoint or shifted ranges
    are simply structurally different (False, not an error)."""
    if (a.levels[0], a.levels[-1]) != (b.levels[0], b.levels[-1]):
        return False
    ra, rb = common_refinement(a, b)
    return edge_sequence(ra).cardinalities == edge_sequence(rb).cardinalities
