"""Command-line front end: ``multiway evolve|proofs|homotopy|verify|report``.

Exit codes: 0 ok, 2 parse error, 3 budget exceeded, 4 inadmissible order,
5 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, TextIO

from .graph import (
    DEFAULT_NODE_BUDGET,
    DEFAULT_PATH_BUDGET,
    BudgetExceeded,
    MultiwayGraph,
    NodeBudgetExceeded,
    enumerate_paths,
    evolve,
    format_path,
    graph_to_dot,
    graph_to_json,
)
from .homotopy import (
    ExtendedSystem,
    HomotopyLimits,
    cell_length,
    corner_paths,
    format_extended,
    iter_cells,
    iterate_homotopy,
    load_extended,
)
from .rewrite import RuleSyntaxError, invert_system
from .verify import StructureReport, verify_groupoid, verify_nfold

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_BUDGET = 3
EXIT_INADMISSIBLE = 4
EXIT_VERIFY = 5


class CliError(Exception):
    def __init__(self, message: str, code: int) -> None:
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    rules: str
    initial: List[str] = field(default_factory=list)
    generations: Optional[int] = None
    source: Optional[str] = None
    target: Optional[str] = None
    max_len: Optional[int] = None
    order: Optional[int] = None
    node_budget: int = DEFAULT_NODE_BUDGET
    path_budget: int = DEFAULT_PATH_BUDGET
    format: str = "text"
    out: Optional[str] = None
    pairs: str = "outermost"
    checks: List[str] = field(default_factory=list)
    invert: bool = False

    def __post_init__(self) -> None:
        if self.node_budget <= 0 or self.path_budget <= 0:
            raise CliError("budgets must be positive", EXIT_PARSE)
        if self.order is not None and self.order < 2:
            raise CliError("--order must be at least 2", EXIT_PARSE)
        for name in ("generations", "max_len"):
            value = getattr(self, name)
            if value is not None and value < 0:
                raise CliError(f"--{name.replace('_', '-')} must be non-negative", EXIT_PARSE)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        return cls(
            rules=args.rules,
            initial=list(args.initial or []),
            generations=args.generations,
            source=args.source,
            target=args.target,
            max_len=args.max_len,
            order=args.order,
            node_budget=args.node_budget,
            path_budget=args.path_budget,
            format=args.format,
            out=args.out,
            pairs=getattr(args, "pairs", "outermost"),
            checks=list(getattr(args, "check", None) or []),
            invert=getattr(args, "invert", False),
        )


def _load(cfg: RunConfig) -> ExtendedSystem:
    try:
        with open(cfg.rules, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read rules file: {exc}", EXIT_PARSE) from None
    try:
        es = load_extended(text, node_budget=cfg.node_budget)
    except RuleSyntaxError as exc:
        raise CliError(f"{cfg.rules}: {exc}", EXIT_PARSE) from None
    if cfg.invert:
        es = ExtendedSystem(
            base=invert_system(es.base),
            layers=es.layers,
            combined=invert_system(es.combined),
        )
    return es


def _emit(cfg: RunConfig, payload: str, stdout: TextIO) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    else:
        stdout.write(payload)


def _census(g: MultiwayGraph) -> str:
    lines = ["generation,nodes,edges"]
    for gen, (n, e) in enumerate(zip(g.layer_sizes(), g.layer_edge_counts())):
        lines.append(f"{gen},{n},{e}")
    lines.append(f"total,{len(g.nodes)},{len(g.edges)}")
    return "\n".join(lines) + "\n"


def _graph_text(g: MultiwayGraph) -> str:
    lines = [f"{len(g.nodes)} nodes, {len(g.edges)} edges, depth {g.depth}"]
    for n in g.nodes:
        outs = ", ".join(f"{g.string(e.dst)}[{','.join(e.rules())}]" for e in g.out_edges(n.id))
        lines.append(f"{n.id}\t{n.generation}\t{n.string}" + (f"\t-> {outs}" if outs else ""))
    return "\n".join(lines) + "\n"


def cmd_evolve(cfg: RunConfig, stdout: TextIO, stderr: TextIO) -> int:
    es = _load(cfg)
    if not cfg.initial:
        raise CliError("evolve needs at least one -i/--initial state", EXIT_PARSE)
    gens = 8 if cfg.generations is None else cfg.generations
    g = evolve(cfg.initial, es.combined, gens, node_budget=cfg.node_budget)
    render = {"json": graph_to_json, "dot": graph_to_dot, "text": _graph_text}[cfg.format]
    _emit(cfg, render(g), stdout)
    (stdout if cfg.out else stderr).write(_census(g))
    return EXIT_OK


def _proposition(cfg: RunConfig, command: str) -> tuple:
    if cfg.source is None or cfg.target is None:
        raise CliError(f"{command} needs --from and --to", EXIT_PARSE)
    max_len = cfg.max_len
    if max_len is None:
        max_len = cfg.generations if cfg.generations is not None else 8
    return cfg.source, cfg.target, max_len


def cmd_proofs(cfg: RunConfig, stdout: TextIO, stderr: TextIO) -> int:
    es = _load(cfg)
    a, b, max_len = _proposition(cfg, "proofs")
    depth = max_len if cfg.generations is None else cfg.generations
    g = evolve([a], es.combined, depth, node_budget=cfg.node_budget)
    paths = (
        enumerate_paths(g, a, b, max_len, path_budget=cfg.path_budget) if b in g else []
    )
    noun = "proof" if len(paths) == 1 else "proofs"
    if cfg.format == "json":
        doc = {
            "from": a,
            "to": b,
            "max_len": max_len,
            "count": len(paths),
            "proofs": [
                {
                    "states": list(p.strings),
                    "steps": [[{"rule": w.rule, "pos": w.pos} for w in e.witnesses] for e in p.edges],
                }
                for p in paths
            ],
        }
        payload = json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    else:
        lines = [f"{len(paths)} {noun} of {a} => {b} (max length {max_len})"]
        lines += [format_path(g, p) for p in paths]
        payload = "\n".join(lines) + "\n"
    _emit(cfg, payload, stdout)
    return EXIT_OK


def _rung_summary(es: ExtendedSystem) -> str:
    lines = ["order,rungs"]
    lines += [f"{k},{n}" for k, n in es.rung_counts]
    if es.inadmissible_at is not None:
        lines.append(f"# inadmissible at order {es.inadmissible_at}; reached order {es.max_order}")
    return "\n".join(lines) + "\n"


def cmd_homotopy(cfg: RunConfig, stdout: TextIO, stderr: TextIO) -> int:
    es = _load(cfg)
    a, b, max_len = _proposition(cfg, "homotopy")
    limits = HomotopyLimits(
        max_len=max_len,
        generations=cfg.generations,
        node_budget=cfg.node_budget,
        path_budget=cfg.path_budget,
    )
    es = iterate_homotopy(es, a, b, cfg.order or 2, limits, pairs=cfg.pairs)
    _emit(cfg, format_extended(es), stdout)
    (stdout if cfg.out else stderr).write(_rung_summary(es))
    if es.inadmissible_at is not None:
        stderr.write(
            f"order {es.inadmissible_at} is inadmissible: no parallel cells; "
            f"reached order {es.max_order}\n"
        )
        return EXIT_INADMISSIBLE
    return EXIT_OK


def _verify_graph(cfg: RunConfig, es: ExtendedSystem) -> MultiwayGraph:
    cells = list(iter_cells(es))
    initial = cfg.initial or ([cfg.source] if cfg.source else [])
    if not initial and cells:
        initial = [corner_paths(cells[0])[0].source]
    if not initial:
        raise CliError("verify needs -i/--initial or --from (or @cell annotations)", EXIT_PARSE)
    gens = cfg.generations
    if gens is None:
        gens = max((cell_length(c) for c in cells), default=8)
    return evolve(initial, es.combined, gens, node_budget=cfg.node_budget)


def cmd_verify(cfg: RunConfig, stdout: TextIO, stderr: TextIO) -> int:
    es = _load(cfg)
    g = _verify_graph(cfg, es)
    checks = cfg.checks or ["structure"]
    reports: List[StructureReport] = []
    for check in checks:
        if check == "structure":
            n = cfg.order or max(2, es.max_order)
            try:
                reports.append(verify_nfold(es, g, n))
            except ValueError as exc:
                raise CliError(str(exc), EXIT_PARSE) from None
        elif check == "groupoid":
            reports.append(verify_groupoid(es, g, cfg.order or es.max_order))
    if cfg.format == "json":
        docs = [r.to_dict() for r in reports]
        payload = json.dumps(docs[0] if len(docs) == 1 else docs, indent=2, ensure_ascii=False) + "\n"
    else:
        payload = "".join(r.to_text() for r in reports)
    _emit(cfg, payload, stdout)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY


def cmd_report(cfg: RunConfig, stdout: TextIO, stderr: TextIO) -> int:
    """Census CSV plus figures in the ``-o`` directory."""
    from .plotting import draw_census, draw_multiway

    es = _load(cfg)
    if not cfg.out:
        raise CliError("report needs -o/--out DIR", EXIT_PARSE)
    os.makedirs(cfg.out, exist_ok=True)
    highlight = []
    if cfg.source and cfg.target:
        a, b, max_len = _proposition(cfg, "report")
        if cfg.order:
            limits = HomotopyLimits(max_len=max_len, generations=cfg.generations,
                                    node_budget=cfg.node_budget, path_budget=cfg.path_budget)
            es = iterate_homotopy(es, a, b, cfg.order, limits, pairs=cfg.pairs)
            with open(os.path.join(cfg.out, "extended.rules"), "w", encoding="utf-8") as fh:
                fh.write(format_extended(es))
        cells = list(iter_cells(es, 2))
        if cells:
            highlight = [cells[0].source_path, cells[0].target_path]
    initial = cfg.initial or ([cfg.source] if cfg.source else [])
    if not initial:
        raise CliError("report needs -i/--initial or --from", EXIT_PARSE)
    gens = cfg.generations if cfg.generations is not None else (cfg.max_len or 8)
    g = evolve(initial, es.combined, gens, node_budget=cfg.node_budget)
    if highlight:
        # Paths were found in an earlier graph; re-resolve them by state.
        from .homotopy import _path_in

        highlight = [_path_in(g, p.strings, 0) for p in highlight]

    census_path = os.path.join(cfg.out, "census.csv")
    with open(census_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["generation", "nodes", "edges"])
        for gen, (n, e) in enumerate(zip(g.layer_sizes(), g.layer_edge_counts())):
            writer.writerow([gen, n, e])
    if es.rung_counts:
        with open(os.path.join(cfg.out, "rungs.csv"), "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["order", "rungs"])
            writer.writerows(es.rung_counts)
    with open(os.path.join(cfg.out, "graph.json"), "w", encoding="utf-8") as fh:
        fh.write(graph_to_json(g))
    draw_multiway(g, os.path.join(cfg.out, "multiway.png"), highlight=highlight,
                  title=f"{', '.join(initial)}: {gens} generations")
    draw_census(g.layer_sizes(), g.layer_edge_counts(), os.path.join(cfg.out, "census.png"),
                rung_counts=es.rung_counts)
    stdout.write(_census(g))
    return EXIT_OK


COMMANDS = {
    "evolve": cmd_evolve,
    "proofs": cmd_proofs,
    "homotopy": cmd_homotopy,
    "verify": cmd_verify,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file of option defaults (flags override it)")
    common.add_argument("-r", "--rules", required=True, help="rules file")
    common.add_argument("-i", "--initial", action="append", help="initial state (repeatable)")
    common.add_argument("-g", "--generations", type=int)
    common.add_argument("--from", dest="source", help="proposition source state")
    common.add_argument("--to", dest="target", help="proposition target state")
    common.add_argument("--max-len", type=int)
    common.add_argument("--order", type=int)
    common.add_argument("--node-budget", type=int, default=DEFAULT_NODE_BUDGET)
    common.add_argument("--path-budget", type=int, default=DEFAULT_PATH_BUDGET)
    common.add_argument("-o", "--out")

    parser = argparse.ArgumentParser(prog="multiway", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    formats = {
        "evolve": ["json", "dot", "text"],
        "proofs": ["text", "json"],
        "homotopy": ["text"],
        "verify": ["text", "json"],
        "report": ["text"],
    }
    for name, fmts in formats.items():
        p = sub.add_parser(name, parents=[common], help=COMMANDS[name].__doc__)
        p.add_argument("--format", choices=fmts, default=fmts[0])
        if name in ("homotopy", "report"):
            p.add_argument("--pairs", choices=["outermost", "all"], default="outermost")
        if name == "verify":
            p.add_argument("--check", action="append", choices=["structure", "groupoid"])
            p.add_argument("--invert", action="store_true",
                           help="add inverse rules before checking")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        with open(known.config, encoding="utf-8") as fh:
            defaults = json.load(fh)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read config {known.config}: {exc}", EXIT_PARSE) from None
    defaults = {k.replace("-", "_"): v for k, v in defaults.items()}
    if "from" in defaults:
        defaults["source"] = defaults.pop("from")
    if "to" in defaults:
        defaults["target"] = defaults.pop("to")
    for action in parser._subparsers._group_actions:  # type: ignore[union-attr]
        for sp in action.choices.values():
            sp.set_defaults(**defaults)
            for a in sp._actions:
                if a.dest in defaults:
                    a.required = False


def main(argv: Optional[Sequence[str]] = None, stdout: TextIO = None, stderr: TextIO = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return EXIT_PARSE if exc.code else EXIT_OK
        cfg = RunConfig.from_args(args)
        return COMMANDS[args.command](cfg, stdout, stderr)
    except CliError as exc:
        stderr.write(f"multiway: {exc}\n")
        return exc.code
    except NodeBudgetExceeded as exc:
        stderr.write(f"multiway: {exc}\n")
        stderr.write("generation,nodes\n" + "".join(f"{i},{n}\n" for i, n in enumerate(exc.layer_sizes)))
        return EXIT_BUDGET
    except BudgetExceeded as exc:
        stderr.write(f"multiway: {exc}\n")
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
