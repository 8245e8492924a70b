"""Command line front end.

Exit codes: 0 for success (or a positive decision), 1 for a negative decision
(invalid graph, not isomorphic, incomparable networks), 2 for errors in the
input or the requested operation, 64 for usage mistakes.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .core import format_level, minimize_critical_set, validate
from .dag import betti_euler, betti_reticulation, build_dag_view, classify_all
from .decomposition import apply_choice, decompose, enumerate_choices, factor_count
from .enewick import enewick_to_reeb, reeb_to_network, write_enewick
from .errors import IncompatibleShape, ReebError
from .generator import GeneratorSpec, random_graph
from .isomorphism import brute_force_iso, labelled_iso, reeb_iso
from .phylo import network_distance
from .serialize import dump_text, load_text, to_dot


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems get their own exit code
        self.print_usage(sys.stderr)
        self.exit(64, f"{self.prog}: error: {message}\n")


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _sniff(path: str) -> str:
    if path == "-":
        return "json"
    suffix = Path(path).suffix.lower()
    return "enwk" if suffix in (".enwk", ".nwk", ".newick") else "json"


def _load_graph(path: str, fmt: str | None):
    text = _read_text(path)
    if (fmt or _sniff(path)) == "enwk":
        return enewick_to_reeb(text), None
    return load_text(text)


def _load_ranks(path: str | None, embedded):
    if path is None:
        return embedded
    import json

    data = json.loads(_read_text(path))
    if not isinstance(data, dict):
        raise ValueError("rank file must hold a JSON object of id: integer")
    return {str(k): int(v) for k, v in data.items()}


def _write_out(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _parse_p(raw: str):
    if raw.lower() in ("inf", "infinity"):
        return "inf"
    value = int(raw)
    if value < 1:
        raise ValueError("p must be at least 1 or inf")
    return value


def cmd_validate(args) -> int:
    graph, _ = _load_graph(args.graph, args.format)
    problems = validate(graph, allow_cut_ids=args.allow_cut_ids)
    if not problems:
        print("ok")
        return 0
    for line in problems:
        print(line)
    return 1


def cmd_betti(args) -> int:
    graph, _ = _load_graph(args.graph, args.format)
    b1 = betti_euler(graph)
    b2 = betti_reticulation(graph)
    print(f"euler: {b1}")
    print(f"merges: {b2}")
    print(f"agree: {'yes' if b1 == b2 else 'no'}")
    return 0


def cmd_classify(args) -> int:
    graph, _ = _load_graph(args.graph, args.format)
    build_dag_view(graph)
    for c in classify_all(graph):
        level = format_level(graph.levels[c.level_index])
        tail = "\tleaf" if c.is_leaf else ""
        print(
            f"{c.vertex}\t{level}\t{c.kind.value}\tin={c.indegree}\tout={c.outdegree}{tail}"
        )
    return 0


def cmd_minimize(args) -> int:
    graph, ranks = _load_graph(args.graph, args.format)
    _write_out(dump_text(minimize_critical_set(graph), leaf_ranks=ranks), args.out)
    return 0


def cmd_decompose(args) -> int:
    graph, _ = _load_graph(args.graph, args.format)
    view = build_dag_view(graph)
    total = factor_count(view)
    if total > args.max_factors:
        print(
            f"error: {total} factors exceed the cap of {args.max_factors}",
            file=sys.stderr,
        )
        return 2
    out_dir = Path(args.out_dir) if args.out_dir else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    print(f"factors: {total}")
    for n, choice in enumerate(enumerate_choices(view)):
        factor = apply_choice(view, choice)
        kept = " ".join(f"{v}<-{e}" for v, e in choice.kept)
        cut = ",".join(sorted(factor.detached)) or "-"
        print(f"factor {n}: keep [{kept or '-'}] cut [{cut}]")
        if out_dir is not None:
            path = out_dir / f"factor_{n:04d}.json"
            path.write_text(dump_text(factor.graph), encoding="utf-8")
    return 0


def cmd_iso(args) -> int:
    graph_a, embedded_a = _load_graph(args.a, args.format)
    graph_b, embedded_b = _load_graph(args.b, args.format)
    if args.labelled:
        if args.oracle:
            same = brute_force_iso(graph_a, graph_b, use_labels=True)
        else:
            same = labelled_iso(graph_a, graph_b) is not None
        print("isomorphic" if same else "not isomorphic")
        return 0 if same else 1
    ranks_a = _load_ranks(args.ranks_a, embedded_a)
    ranks_b = _load_ranks(args.ranks_b, embedded_b)
    if args.oracle:
        same = brute_force_iso(
            graph_a, graph_b, vertex_tags_a=ranks_a, vertex_tags_b=ranks_b
        )
    else:
        same = reeb_iso(graph_a, graph_b, leaf_ranks_a=ranks_a, leaf_ranks_b=ranks_b)
    print("isomorphic" if same else "not isomorphic")
    return 0 if same else 1


def cmd_dist(args) -> int:
    p = _parse_p(args.p)
    if args.matrix:
        directory = Path(args.matrix)
        files = sorted(
            [*directory.glob("*.json"), *directory.glob("*.enwk")],
            key=lambda f: f.name,
        )
        if not files:
            print(f"error: no graph files in {directory}", file=sys.stderr)
            return 2
        loaded = []
        for f in files:
            graph, embedded = _load_graph(str(f), None)
            loaded.append((f.name, graph, embedded))
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow([""] + [name for name, _, _ in loaded])
        for name_a, ga, ra in loaded:
            row = [name_a]
            for name_b, gb, rb in loaded:
                try:
                    d = network_distance(
                        ga,
                        gb,
                        p=p,
                        digits=args.digits,
                        ranks_a=ra,
                        ranks_b=rb,
                        time_mode=args.time_mode,
                    )
                    row.append(format_level(d))
                except IncompatibleShape:
                    row.append("NA")
            writer.writerow(row)
        return 0
    graph_a, embedded_a = _load_graph(args.a, args.format)
    graph_b, embedded_b = _load_graph(args.b, args.format)
    ranks_a = _load_ranks(args.ranks_a, embedded_a)
    ranks_b = _load_ranks(args.ranks_b, embedded_b)
    try:
        d = network_distance(
            graph_a,
            graph_b,
            p=p,
            digits=args.digits,
            ranks_a=ranks_a,
            ranks_b=ranks_b,
            time_mode=args.time_mode,
        )
    except IncompatibleShape as exc:
        print(f"incomparable: {exc}")
        return 1
    print(format_level(d))
    return 0


def cmd_generate(args) -> int:
    spec = GeneratorSpec(
        seed=args.seed,
        n_leaves=args.leaves,
        betti=args.betti,
        levels=args.levels,
        max_indeg=args.max_indeg,
    )
    _write_out(dump_text(random_graph(spec)), args.out)
    return 0


def cmd_convert(args) -> int:
    graph, ranks = _load_graph(args.graph, args.format)
    if args.to == "json":
        _write_out(dump_text(graph, leaf_ranks=ranks), args.out)
    elif args.to == "dot":
        _write_out(to_dot(graph), args.out)
    else:
        _write_out(write_enewick(reeb_to_network(graph)) + "\n", args.out)
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="reebtrees",
        description="Leveled graphs, their tree decompositions, and distances.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def graph_arg(p, name="graph"):
        p.add_argument(name, help="input file (JSON, or eNewick by extension); '-' for stdin")
        p.add_argument(
            "--format",
            choices=["json", "enwk"],
            help="force the input format instead of sniffing the extension",
        )

    p = sub.add_parser("validate", help="check structural invariants")
    graph_arg(p)
    p.add_argument(
        "--allow-cut-ids",
        action="store_true",
        help="accept the reserved prefix used by decomposition output",
    )
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("betti", help="report both cycle-rank computations")
    graph_arg(p)
    p.set_defaults(func=cmd_betti)

    p = sub.add_parser("classify", help="classify every vertex")
    graph_arg(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("minimize", help="drop levels holding only pass-through vertices")
    graph_arg(p)
    p.add_argument("-o", "--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_minimize)

    p = sub.add_parser("decompose", help="enumerate the tree factors")
    graph_arg(p)
    p.add_argument("--out-dir", help="write each factor as JSON into this directory")
    p.add_argument(
        "--max-factors",
        type=int,
        default=10000,
        help="refuse to enumerate more factors than this (default 10000)",
    )
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("iso", help="decide isomorphism of two graphs")
    p.add_argument("a", help="first graph file")
    p.add_argument("b", help="second graph file")
    p.add_argument("--format", choices=["json", "enwk"], help="force input format")
    p.add_argument("--labelled", action="store_true", help="compare with edge labels")
    p.add_argument(
        "--oracle",
        action="store_true",
        help="use the backtracking search instead of the decomposition route",
    )
    p.add_argument("--ranks-a", help="JSON file of leaf ranks for the first graph")
    p.add_argument("--ranks-b", help="JSON file of leaf ranks for the second graph")
    p.set_defaults(func=cmd_iso)

    p = sub.add_parser("dist", help="distance between two networks")
    p.add_argument("a", nargs="?", help="first graph file")
    p.add_argument("b", nargs="?", help="second graph file")
    p.add_argument("--format", choices=["json", "enwk"], help="force input format")
    p.add_argument("--p", default="1", help="norm parameter: a positive integer or inf")
    p.add_argument("--digits", type=int, default=12, help="certified digits for p >= 2")
    p.add_argument(
        "--time-mode",
        choices=["f", "-f"],
        default="f",
        help="stamp entries with the level value (f) or its negation (use --time-mode=-f)",
    )
    p.add_argument("--ranks-a", help="JSON file of leaf ranks for the first graph")
    p.add_argument("--ranks-b", help="JSON file of leaf ranks for the second graph")
    p.add_argument(
        "--matrix",
        help="directory of graph files; print the full pairwise CSV instead",
    )
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("generate", help="seeded random graph with exact shape")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--leaves", type=int, required=True)
    p.add_argument("--betti", type=int, required=True)
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("--max-indeg", type=int, default=2)
    p.add_argument("-o", "--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("convert", help="rewrite between json, enwk, and dot")
    graph_arg(p)
    p.add_argument("--to", choices=["json", "enwk", "dot"], required=True)
    p.add_argument("-o", "--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_convert)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    if args.command == "dist" and not args.matrix and (args.a is None or args.b is None):
        parser.error("dist needs two graph files unless --matrix is given")
    try:
        return args.func(args)
    except (ReebError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(main())
