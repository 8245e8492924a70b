"""Cophenetic vectors of rooted trees and distances built on them.

A rooted tree here is a leveled graph in which every vertex has at most one
edge arriving from above; its taxa are the bottom vertices (out-degree zero).
The vector records, for every unordered pair of taxa, the level stamp of the
lowest common ancestor, with each taxon's own stamp on the diagonal.
Distances between vectors stay exact for the 1- and sup-norms; other p-norms
return a certified decimal approximation.  Whole networks are compared by the
Hausdorff distance between the vector sets of their tree factors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .core import RESERVED_VERTEX_PREFIX, ReebGraph
from .dag import build_dag_view
from .decomposition import Factor, decompose
from .errors import (
    DimensionMismatch,
    EmptySet,
    IncompatibleShape,
    NotATree,
    NotRooted,
)


@dataclass(frozen=True)
class LeafOrdering:
    """Taxa in comparison order: ranked originals first (by rank), then
    unranked originals, then cut leaves."""

    leaves: tuple[str, ...]

    def index(self, leaf: str) -> int:
        return self.leaves.index(leaf)


def _graph_of(source: ReebGraph | Factor) -> ReebGraph:
    return source.graph if isinstance(source, Factor) else source


def leaf_order(
    source: ReebGraph | Factor, *, ranks: Mapping[str, int] | None = None
) -> LeafOrdering:
    """Deterministic taxon order.

    Originals sort by caller-supplied rank when present, otherwise by (level,
    id).  Cut leaves introduced by decomposition sort by the merge vertex they
    came from, then by the detached edge, so factors of one decomposition
    agree on positions.
    """
    graph = _graph_of(source)
    ranks = dict(ranks or {})
    sinks = [v for v in graph.vertex_ids() if graph.outdeg(v) == 0]
    originals = [v for v in sinks if not v.startswith(RESERVED_VERTEX_PREFIX)]
    cuts = [v for v in sinks if v.startswith(RESERVED_VERTEX_PREFIX)]

    def original_key(v: str):
        if v in ranks:
            return (0, ranks[v], "")
        return (1, graph.vertex_level[v], v)

    reattach = source.reattach_map if isinstance(source, Factor) else {}

    def cut_key(v: str):
        edge = v[len(RESERVED_VERTEX_PREFIX):]
        retic = reattach.get(edge)
        if retic is None:
            for a, b in graph.vertex_orders[graph.vertex_level[v]].covers:
                if b == v:
                    retic = a
                    break
        if retic is None:
            return (graph.vertex_level[v], "", edge)
        return (graph.vertex_level[retic], retic, edge)

    ordered = sorted(originals, key=original_key) + sorted(cuts, key=cut_key)
    return LeafOrdering(leaves=tuple(ordered))


@dataclass(frozen=True)
class CopheneticVector:
    """Upper-triangle stamps, pairs (i, j) with i <= j in lexicographic
    order over the stored leaf order."""

    leaves: tuple[str, ...]
    entries: tuple[Fraction, ...]
    time_mode: str

    def entry(self, i: int, j: int) -> Fraction:
        if i > j:
            i, j = j, i
        m = len(self.leaves)
        offset = i * m - i * (i - 1) // 2 + (j - i)
        return self.entries[offset]


def cophenetic_vector(
    source: ReebGraph | Factor,
    *,
    ranks: Mapping[str, int] | None = None,
    time_mode: str = "f",
) -> CopheneticVector:
    """Stamps of pairwise lowest common ancestors.

    ``time_mode`` controls the reported numbers only: "f" stamps with the
    level value itself, "-f" with its negation (useful when levels encode a
    countdown to the present, so that stamps read as ages again).
    """
    if time_mode not in ("f", "-f"):
        raise ValueError(f"time_mode must be 'f' or '-f', not {time_mode!r}")
    graph = _graph_of(source)
    for v in graph.vertex_level:
        if graph.indeg(v) > 1:
            raise NotATree(f"vertex {v!r} has {graph.indeg(v)} edges arriving from above")
    sources = [v for v in graph.vertex_ids() if graph.indeg(v) == 0]
    if len(sources) != 1:
        raise NotRooted(f"{len(sources)} source vertices, expected exactly 1")

    def parent(v: str) -> str | None:
        es = graph.above_edges.get(v, ())
        if not es:
            return None
        e = es[0]
        return graph.up_maps[graph.edge_gap[e]][e]

    def chain(v: str) -> list[str]:
        out = [v]
        while (p := parent(out[-1])) is not None:
            out.append(p)
        return out

    def stamp(v: str) -> Fraction:
        value = graph.levels[graph.vertex_level[v]]
        return value if time_mode == "f" else -value

    ordering = leaf_order(source, ranks=ranks)
    leaves = ordering.leaves
    chains = {v: chain(v) for v in leaves}
    entries: list[Fraction] = []
    for i, li in enumerate(leaves):
        pos = {v: idx for idx, v in enumerate(chains[li])}
        for j in range(i, len(leaves)):
            if i == j:
                entries.append(stamp(li))
                continue
            lca = next(v for v in chains[leaves[j]] if v in pos)
            entries.append(stamp(lca))
    return CopheneticVector(leaves=leaves, entries=tuple(entries), time_mode=time_mode)


def _iroot(x: int, p: int) -> int:
    """Largest integer r with r**p <= x."""
    if x < 0:
        raise ValueError("negative radicand")
    if x == 0 or p == 1:
        return x
    if p == 2:
        return math.isqrt(x)
    r = 1 << ((x.bit_length() + p - 1) // p)
    while True:
        nr = ((p - 1) * r + x // r ** (p - 1)) // p
        if nr >= r:
            break
        r = nr
    while r**p > x:
        r -= 1
    while (r + 1) ** p <= x:
        r += 1
    return r


def nth_root_fraction(value: Fraction, p: int, digits: int) -> Fraction:
    """Approximation of value**(1/p) with absolute error below 10**-digits,
    as an exact fraction over a power of ten."""
    if value < 0:
        raise ValueError("negative radicand")
    guard = digits + 2
    scale = 10 ** (p * guard)
    base = (value.numerator * scale) // value.denominator
    return Fraction(_iroot(base, p), 10**guard)


Entries = Sequence[Fraction]


def _entries_of(u: "CopheneticVector | Entries") -> tuple[Fraction, ...]:
    if isinstance(u, CopheneticVector):
        return u.entries
    return tuple(Fraction(x) for x in u)


def _diffs(u, v) -> list[Fraction]:
    eu, ev = _entries_of(u), _entries_of(v)
    if len(eu) != len(ev):
        raise DimensionMismatch(f"vector lengths differ: {len(eu)} vs {len(ev)}")
    return [abs(x - y) for x, y in zip(eu, ev)]


def _is_inf(p) -> bool:
    return p == math.inf or (isinstance(p, str) and p.lower() in ("inf", "infinity"))


def lp_distance(u, v, p=1, *, digits: int = 12) -> Fraction:
    """Distance between two vectors.

    p=1 and p=inf are exact.  Integer p >= 2 goes through one certified root
    extraction, so the result is within 10**-digits of the true value.
    """
    diffs = _diffs(u, v)
    if _is_inf(p):
        return max(diffs, default=Fraction(0))
    p = int(p)
    if p < 1:
        raise ValueError("p must be at least 1")
    if p == 1:
        return sum(diffs, Fraction(0))
    return nth_root_fraction(sum(d**p for d in diffs), p, digits)


def hausdorff_distance(
    set_a: Sequence, set_b: Sequence, p=1, *, digits: int = 12
) -> Fraction:
    """Hausdorff distance between two finite vector sets.

    For integer p >= 2 the max/min structure runs on exact p-th power sums
    and the root is taken once at the very end, so the certified error bound
    applies to the final number, not to every pairwise term.
    """
    if not set_a or not set_b:
        raise EmptySet("hausdorff distance needs two nonempty collections")
    finite_root = not _is_inf(p) and int(p) >= 2

    def cost(u, v) -> Fraction:
        diffs = _diffs(u, v)
        if _is_inf(p):
            return max(diffs, default=Fraction(0))
        q = int(p)
        if q == 1:
            return sum(diffs, Fraction(0))
        return sum(d**q for d in diffs)

    table = [[cost(u, v) for v in set_b] for u in set_a]
    from_a = max(min(row) for row in table)
    from_b = max(min(table[i][j] for i in range(len(set_a))) for j in range(len(set_b)))
    raw = max(from_a, from_b)
    if finite_root:
        return nth_root_fraction(raw, int(p), digits)
    return raw


def network_distance(
    a: ReebGraph,
    b: ReebGraph,
    *,
    p=1,
    digits: int = 12,
    ranks_a: Mapping[str, int] | None = None,
    ranks_b: Mapping[str, int] | None = None,
    time_mode: str = "f",
) -> Fraction:
    """Hausdorff distance between the cophenetic vector sets of two networks'
    tree factors.

    Both networks must expose the same number of taxa and the same cycle
    rank; anything else raises IncompatibleShape, since their vectors would
    not even share a dimension.
    """
    va = build_dag_view(a)
    vb = build_dag_view(b)
    taxa_a = sum(1 for v in a.vertex_ids() if a.outdeg(v) == 0)
    taxa_b = sum(1 for v in b.vertex_ids() if b.outdeg(v) == 0)
    if taxa_a != taxa_b:
        raise IncompatibleShape(f"taxon counts differ: {taxa_a} vs {taxa_b}")
    if va.betti != vb.betti:
        raise IncompatibleShape(f"cycle ranks differ: {va.betti} vs {vb.betti}")
    dec_a = decompose(va)
    dec_b = decompose(vb)
    vecs_a = [
        cophenetic_vector(f, ranks=ranks_a, time_mode=time_mode) for f in dec_a.factors
    ]
    vecs_b = [
        cophenetic_vector(f, ranks=ranks_b, time_mode=time_mode) for f in dec_b.factors
    ]
    return hausdorff_distance(vecs_a, vecs_b, p, digits=digits)
