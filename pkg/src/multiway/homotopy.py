"""Homotopy rung synthesis between parallel proofs, and its iteration.

A proof path is an order-1 cell. An order-k cell (k >= 2) pairs two parallel
order-(k-1) cells, a source and a target, and carries the order-k rungs that
send every vertex of the source to the matching vertex of the target. The
vertices of an order-k cell are indexed by ``(i, bits)``: ``i`` is the step
along the underlying proofs and ``bits`` has one entry per homotopy order,
``bits[j] = 0/1`` choosing source/target of the order-(j+2) pairing.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Dict, Iterator, List, Optional, Sequence, Tuple, Union

from ._parallel import ordered_map
from .graph import (
    DEFAULT_NODE_BUDGET,
    DEFAULT_PATH_BUDGET,
    MultiwayGraph,
    PathBudgetExceeded,
    ProofPath,
    RewriteEdge,
    enumerate_paths,
    evolve,
)
from .rewrite import INVERSE_SUFFIX, Rule, RuleSyntaxError, RuleSystem, parse_rules

__all__ = [
    "HomotopyError",
    "OrderGapError",
    "HomotopySpec",
    "ExtendedSystem",
    "HomotopyLimits",
    "Cell",
    "synthesize_rungs",
    "extend_system",
    "auto_homotopy",
    "realized_cells",
    "iterate_homotopy",
    "corner_paths",
    "cell_vertices",
    "format_extended",
    "load_extended",
]


class HomotopyError(ValueError):
    pass


class OrderGapError(HomotopyError):
    pass


@dataclass(frozen=True)
class HomotopySpec:
    order: int
    source: "Cell"
    target: "Cell"
    rungs: Tuple[Rule, ...]

    @property
    def source_path(self) -> ProofPath:
        return corner_paths(self.source)[0]

    @property
    def target_path(self) -> ProofPath:
        return corner_paths(self.target)[0]

    def __len__(self) -> int:
        return cell_length(self)

    def rung_pairs(self) -> frozenset:
        return frozenset((r.lhs, r.rhs) for r in self.rungs)

    def forward_rungs(self) -> List[Rule]:
        return [r for r in self.rungs if not r.id.endswith(INVERSE_SUFFIX)]


Cell = Union[ProofPath, HomotopySpec]


def cell_order(cell: Cell) -> int:
    return 1 if isinstance(cell, ProofPath) else cell.order


def cell_length(cell: Cell) -> int:
    while isinstance(cell, HomotopySpec):
        cell = cell.source
    return len(cell)


def corner_paths(cell: Cell) -> List[ProofPath]:
    """The 2**(order-1) proof paths of a cell, in ``bits`` order."""
    if isinstance(cell, ProofPath):
        return [cell]
    return corner_paths(cell.source) + corner_paths(cell.target)


def _bits_for(order: int) -> List[Tuple[int, ...]]:
    # corner_paths concatenates source then target, so the newest axis is the
    # most significant bit; list bit tuples in that same order.
    return [tuple(reversed(b)) for b in itertools.product((0, 1), repeat=order - 1)]


def cell_vertices(cell: Cell) -> Dict[Tuple[int, Tuple[int, ...]], str]:
    out = {}
    for bits, path in zip(_bits_for(cell_order(cell)), corner_paths(cell)):
        for i, s in enumerate(path.strings):
            out[(i, bits)] = s
    return out


def cell_key(cell: Cell) -> Tuple[Tuple[int, ...], ...]:
    return tuple(p.nodes for p in corner_paths(cell))


def cell_strings(cell: Cell) -> Tuple[Tuple[str, ...], ...]:
    return tuple(p.strings for p in corner_paths(cell))


def _rung_id(order: int, i: int, bits: Tuple[int, ...]) -> str:
    # bits[:-1] are the lower axes; the order-2 case keeps the plain h2_i form.
    lower = bits[:-1]
    if not lower:
        return f"h{order}_{i}"
    return f"h{order}_{i}_" + "".join(map(str, lower))


def synthesize_rungs(p: Cell, q: Cell, order: int) -> HomotopySpec:
    """Rungs mapping each interior vertex of ``p`` to its counterpart in ``q``.

    Emits a whole-state rule for every vertex where the two cells differ,
    plus its inverse. Shared endpoints get no rungs.
    """
    if order < 2:
        raise HomotopyError("homotopy order must be at least 2")
    if cell_order(p) != cell_order(q):
        raise HomotopyError("cells of different orders cannot be paired")
    if not isinstance(p, ProofPath) and cell_order(p) != order - 1:
        raise HomotopyError(
            f"order-{order} rungs pair order-{order - 1} cells, got order {cell_order(p)}"
        )
    if cell_length(p) != cell_length(q):
        raise HomotopyError(
            f"paths of unequal length ({cell_length(p)} vs {cell_length(q)}) are not aligned"
        )
    vp, vq = cell_vertices(p), cell_vertices(q)
    length = cell_length(p)
    ends = [(c.source, c.target) for c in corner_paths(p) + corner_paths(q)]
    if len(set(ends)) != 1:
        raise HomotopyError("parallel cells must share both endpoints")

    forward: List[Rule] = []
    emitted = set()
    for i in range(1, length):
        for bits in _bits_for(cell_order(p)):
            src, dst = vp[(i, bits)], vq[(i, bits)]
            if src == dst or (src, dst) in emitted or (dst, src) in emitted:
                continue
            emitted.add((src, dst))
            forward.append(Rule(_rung_id(order, i, bits + (0,)), src, dst, order))
    rungs = [replace(r, inverse_of=r.id + INVERSE_SUFFIX) for r in forward]
    rungs += [Rule(r.id + INVERSE_SUFFIX, r.rhs, r.lhs, order, r.id) for r in forward]
    return HomotopySpec(order, p, q, tuple(rungs))


@dataclass(frozen=True)
class ExtendedSystem:
    base: RuleSystem
    layers: Tuple[Tuple[int, Tuple[HomotopySpec, ...]], ...] = ()
    combined: Optional[RuleSystem] = None
    inadmissible_at: Optional[int] = None
    rung_counts: Tuple[Tuple[int, int], ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if self.combined is None:
            object.__setattr__(self, "combined", self.base)

    @classmethod
    def from_base(cls, base: RuleSystem) -> "ExtendedSystem":
        return cls(base=base)

    @property
    def max_order(self) -> int:
        orders = [k for k, specs in self.layers if specs]
        return max(orders + [self.combined.max_order, 1])

    def specs(self, order: int) -> Tuple[HomotopySpec, ...]:
        for k, specs in self.layers:
            if k == order:
                return specs
        return ()

    def rungs(self, order: Optional[int] = None) -> List[Rule]:
        return [
            r for r in self.combined.rules
            if r.is_rung and (order is None or r.order == order)
        ]

    def counts(self) -> Dict[int, int]:
        out: Dict[int, int] = {}
        for r in self.rungs():
            out[r.order] = out.get(r.order, 0) + 1
        return out

    def without_rule(self, rule_id: str) -> "ExtendedSystem":
        """Drop one rule everywhere while keeping the declared cells."""
        combined = self.combined.without(rule_id)
        base = self.base.without(rule_id) if rule_id in self.base else self.base
        layers = tuple(
            (k, tuple(
                replace(s, rungs=tuple(
                    replace(r, inverse_of=None) if r.inverse_of == rule_id else r
                    for r in s.rungs if r.id != rule_id
                ))
                for s in specs
            ))
            for k, specs in self.layers
        )
        return replace(self, base=base, combined=combined, layers=layers)


def _same_cell(a: HomotopySpec, b: HomotopySpec) -> bool:
    return a.order == b.order and cell_strings(a) == cell_strings(b)


def extend_system(es: ExtendedSystem, spec: HomotopySpec) -> ExtendedSystem:
    """Append a cell's rungs to the combined system.

    Rungs already present with the same ``(lhs, rhs, order)`` are reused;
    id clashes with different rules get a ``.n`` tag.
    """
    if not spec.rungs:
        return es
    if spec.order > es.max_order + 1:
        raise OrderGapError(
            f"cannot add order-{spec.order} rungs before order {es.max_order + 1} exists"
        )
    if any(_same_cell(spec, s) for s in es.specs(spec.order)):
        return es

    existing = {(r.lhs, r.rhs, r.order): r for r in es.combined.rules}
    taken = set(es.combined.ids)
    fresh = [r for r in spec.rungs if (r.lhs, r.rhs, r.order) not in existing]

    def tagged(rule_id: str, tag: str) -> str:
        if not tag:
            return rule_id
        if rule_id.endswith(INVERSE_SUFFIX):
            return rule_id[: -len(INVERSE_SUFFIX)] + tag + INVERSE_SUFFIX
        return rule_id + tag

    tag, n = "", 1
    while any(tagged(r.id, tag) in taken for r in fresh):
        n += 1
        tag = f".{n}"

    rename: Dict[str, str] = {}
    for r in spec.rungs:
        old = existing.get((r.lhs, r.rhs, r.order))
        rename[r.id] = old.id if old is not None else tagged(r.id, tag)

    new_rules = [
        replace(r, id=rename[r.id], inverse_of=rename.get(r.inverse_of) if r.inverse_of else None)
        for r in fresh
    ]
    claimed = {r.inverse_of: r.id for r in new_rules if r.inverse_of is not None}
    relinked = [
        replace(r, inverse_of=claimed[r.id])
        if r.inverse_of is None and r.id in claimed
        else r
        for r in es.combined.rules
    ]

    combined = RuleSystem(
        tuple(sorted(relinked + new_rules, key=lambda r: r.order)),
        es.combined.extra_alphabet,
    )
    renamed = replace(
        spec, rungs=tuple(combined[rename[r.id]] for r in spec.rungs)
    )
    layers = dict(es.layers)
    layers[spec.order] = layers.get(spec.order, ()) + (renamed,)
    return replace(
        es,
        combined=combined,
        layers=tuple(sorted(layers.items())),
    )


def _base_edge(g: MultiwayGraph, e: RewriteEdge) -> bool:
    return 1 in g.directions(e)


def realized_cells(
    g: MultiwayGraph,
    a: str,
    b: str,
    max_len: int,
    order: int,
    *,
    path_budget: int = DEFAULT_PATH_BUDGET,
) -> List[Cell]:
    """Cells of ``order`` from ``a`` to ``b`` whose rungs are all edges of ``g``.

    Order 1 gives the proof paths built from base edges. Higher orders pair
    distinct, equal-length lower cells and keep the pairs whose every
    differing vertex is joined by an edge carrying an order-``order`` rung.
    Results are sorted by their corner node-id sequences.
    """
    if order == 1:
        return list(
            enumerate_paths(g, a, b, max_len, path_budget=path_budget, edge_filter=_base_edge)
        )
    lower = realized_cells(g, a, b, max_len, order - 1, path_budget=path_budget)
    verts = [cell_vertices(c) for c in lower]
    out: List[Cell] = []
    for i, p in enumerate(lower):
        for j, q in enumerate(lower):
            if i == j or cell_length(p) != cell_length(q):
                continue
            if all(
                s == verts[j][idx]
                or g.has_edge(g.id_of(s), g.id_of(verts[j][idx]), order)
                for idx, s in verts[i].items()
            ):
                out.append(synthesize_rungs(p, q, order))
                if len(out) > path_budget:
                    raise PathBudgetExceeded(path_budget)
    out.sort(key=cell_key)
    return out


def _candidate_pairs(cells: Sequence[Cell]) -> List[Tuple[Cell, Cell]]:
    keyed = sorted(cells, key=cell_key)
    return [
        (p, q)
        for i, p in enumerate(keyed)
        for q in keyed[i + 1:]
        if cell_length(p) == cell_length(q)
    ]


def auto_homotopy(
    g: MultiwayGraph,
    a: str,
    b: str,
    max_len: int,
    order: int,
    *,
    dedup: bool = True,
    path_budget: int = DEFAULT_PATH_BUDGET,
    threads: Optional[int] = None,
    shuffle_seed: Optional[int] = None,
) -> List[HomotopySpec]:
    """One order-``order`` cell per pair of parallel realized lower cells.

    With ``dedup`` (the default) later specs whose rung set repeats an
    earlier one are dropped.
    """
    if order < 2:
        raise HomotopyError("homotopy order must be at least 2")
    cells = realized_cells(g, a, b, max_len, order - 1, path_budget=path_budget)
    pairs = _candidate_pairs(cells)
    specs = ordered_map(
        lambda pq: synthesize_rungs(pq[0], pq[1], order),
        pairs,
        threads=threads,
        shuffle_seed=shuffle_seed,
    )
    if not dedup:
        return specs
    seen = set()
    out = []
    for s in specs:
        key = s.rung_pairs()
        if key in seen:
            continue
        seen.add(key)
        out.append(s)
    return out


@dataclass(frozen=True)
class HomotopyLimits:
    max_len: int
    generations: Optional[int] = None
    node_budget: int = DEFAULT_NODE_BUDGET
    path_budget: int = DEFAULT_PATH_BUDGET

    def __post_init__(self) -> None:
        if self.max_len < 0:
            raise ValueError("max_len must be non-negative")
        if self.node_budget <= 0 or self.path_budget <= 0:
            raise ValueError("budgets must be positive")

    @property
    def depth(self) -> int:
        return self.max_len if self.generations is None else self.generations


def outermost_pair(cells: Sequence[Cell]) -> Optional[Tuple[Cell, Cell]]:
    """First and last cell of the shortest length that has at least two cells."""
    by_len: Dict[int, List[Cell]] = {}
    for c in sorted(cells, key=cell_key):
        by_len.setdefault(cell_length(c), []).append(c)
    for length in sorted(by_len):
        group = by_len[length]
        if len(group) >= 2:
            return group[0], group[-1]
    return None


def iterate_homotopy(
    es: ExtendedSystem,
    a: str,
    b: str,
    target_order: int,
    limits: HomotopyLimits,
    *,
    pairs: str = "outermost",
    threads: Optional[int] = None,
) -> ExtendedSystem:
    """Extend ``es`` order by order up to ``target_order``.

    At each order k the graph from ``a`` is rebuilt under the current combined
    system, the realized order-(k-1) cells between ``a`` and ``b`` are
    collected, and order-k rungs are synthesized between them: only the
    outermost pair with ``pairs="outermost"``, every parallel pair with
    ``pairs="all"``. If an order k below ``target_order`` has no parallel
    pair, the order-(k-1) system reached so far is returned with
    ``inadmissible_at = k``; at ``target_order`` itself an empty layer is
    recorded instead.
    """
    if target_order < 2:
        raise HomotopyError("target order must be at least 2")
    if pairs not in ("outermost", "all"):
        raise ValueError(f"unknown pair policy {pairs!r}")
    counts = dict(es.rung_counts)
    for k in range(es.max_order + 1, target_order + 1):
        g = evolve([a], es.combined, limits.depth, node_budget=limits.node_budget, threads=threads)
        cells = (
            realized_cells(g, a, b, limits.max_len, k - 1, path_budget=limits.path_budget)
            if b in g
            else []
        )
        if pairs == "outermost":
            chosen = outermost_pair(cells)
            specs = [] if chosen is None else [synthesize_rungs(chosen[0], chosen[1], k)]
        else:
            specs = auto_homotopy(
                g, a, b, limits.max_len, k, path_budget=limits.path_budget, threads=threads
            )
        if not specs:
            if k < target_order:
                return replace(es, inadmissible_at=k, rung_counts=tuple(sorted(counts.items())))
            counts[k] = 0
            layers = dict(es.layers)
            layers.setdefault(k, ())
            return replace(
                es,
                layers=tuple(sorted(layers.items())),
                inadmissible_at=None,
                rung_counts=tuple(sorted(counts.items())),
            )
        for spec in specs:
            es = extend_system(es, spec)
        counts[k] = es.counts().get(k, 0)
    return replace(es, inadmissible_at=None, rung_counts=tuple(sorted(counts.items())))


def _format_cell(spec: HomotopySpec) -> str:
    corners = " | ".join(" ".join(p.strings) for p in corner_paths(spec))
    return f"@cell {spec.order} {corners}"


def format_extended(es: ExtendedSystem) -> str:
    """Rules file for an extended system: rules grouped by ``@order``, then cells."""
    rules = list(es.combined.rules)
    lines = [f"{r.id}: {r.lhs} -> {r.rhs}" for r in rules if r.order == 0]
    orders = sorted({r.order for r in rules if r.order} | {k for k, _ in es.layers})
    for k in orders:
        lines.append(f"@order {k}")
        lines += [f"{r.id}: {r.lhs} -> {r.rhs}" for r in rules if r.order == k]
    lines += [_format_cell(s) for _, specs in es.layers for s in specs]
    return "\n".join(lines) + ("\n" if lines else "")


def _parse_cells(text: str) -> List[Tuple[int, List[List[str]], int]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line.startswith("@cell"):
            continue
        parts = line.split(None, 2)
        if len(parts) < 3 or not parts[1].isdigit():
            raise RuleSyntaxError("expected '@cell <order> <path> | <path> ...'", lineno)
        order = int(parts[1])
        corners = [c.split() for c in parts[2].split("|")]
        if order < 2 or len(corners) != 2 ** (order - 1):
            raise RuleSyntaxError(
                f"an order-{order} cell needs {2 ** (order - 1)} corner paths", lineno
            )
        if len({len(c) for c in corners}) != 1 or not corners[0]:
            raise RuleSyntaxError("cell corner paths must have equal, nonzero length", lineno)
        out.append((order, corners, lineno))
    return out


def _path_in(g: MultiwayGraph, strings: Sequence[str], lineno: int) -> ProofPath:
    try:
        ids = [g.id_of(s) for s in strings]
    except KeyError as exc:
        raise RuleSyntaxError(f"cell state {exc.args[0]!r} is unreachable", lineno) from None
    edges = []
    for u, v in zip(ids, ids[1:]):
        e = g.edge(u, v)
        if e is None or 1 not in g.directions(e):
            raise RuleSyntaxError(
                f"cell path step {g.string(u)} -> {g.string(v)} is not a base rewrite", lineno
            )
        edges.append(e)
    return ProofPath(tuple(ids), tuple(edges), tuple(strings))


def load_extended(text: str, *, node_budget: int = DEFAULT_NODE_BUDGET) -> ExtendedSystem:
    """Inverse of :func:`format_extended`.

    Cell corner paths are re-resolved against a fresh evolution of the base
    rules; rungs absent from the file are simply missing from their cell.
    """
    combined = parse_rules(text)
    base = RuleSystem(tuple(r for r in combined.rules if not r.is_rung))
    es = ExtendedSystem(base=base, combined=combined)
    by_key = {(r.lhs, r.rhs, r.order): r for r in combined.rules}
    layers: Dict[int, List[HomotopySpec]] = {}
    for raw in text.splitlines():
        words = raw.split("#", 1)[0].split()
        if len(words) == 2 and words[0] == "@order" and int(words[1]) >= 2:
            layers.setdefault(int(words[1]), [])
    graphs: Dict[Tuple[str, int], MultiwayGraph] = {}
    for order, corners, lineno in _parse_cells(text):
        start, length = corners[0][0], len(corners[0]) - 1
        key = (start, length)
        if key not in graphs:
            graphs[key] = evolve([start], base, length, node_budget=node_budget)
        paths: List[Cell] = [_path_in(graphs[key], c, lineno) for c in corners]
        k = 2
        try:
            while len(paths) > 1:
                paths = [
                    synthesize_rungs(paths[i], paths[i + 1], k) for i in range(0, len(paths), 2)
                ]
                k += 1
        except HomotopyError as exc:
            raise RuleSyntaxError(str(exc), lineno) from None
        spec = paths[0]
        assert isinstance(spec, HomotopySpec)
        spec = _bind_rungs(spec, by_key)
        layers.setdefault(order, []).append(spec)
    return replace(es, layers=tuple((k, tuple(v)) for k, v in sorted(layers.items())))


def _bind_rungs(spec: HomotopySpec, by_key: Dict[Tuple[str, str, int], Rule]) -> HomotopySpec:
    src, tgt = spec.source, spec.target
    if isinstance(src, HomotopySpec):
        src, tgt = _bind_rungs(src, by_key), _bind_rungs(tgt, by_key)  # type: ignore[arg-type]
    rungs = tuple(
        by_key[(r.lhs, r.rhs, r.order)] for r in spec.rungs if (r.lhs, r.rhs, r.order) in by_key
    )
    return HomotopySpec(spec.order, src, tgt, rungs)


def iter_cells(es: ExtendedSystem, order: Optional[int] = None) -> Iterator[HomotopySpec]:
    for k, specs in es.layers:
        if order is None or k == order:
            yield from specs
