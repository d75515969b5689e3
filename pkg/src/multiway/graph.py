"""Multiway evolution graphs: construction, reachability, proof paths, export."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import (
    Callable,
    Dict,
    Iterable,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
)

from ._parallel import ordered_map
from .rewrite import MatchSite, Rule, RuleSystem, apply_match

__all__ = [
    "DEFAULT_NODE_BUDGET",
    "DEFAULT_PATH_BUDGET",
    "BudgetExceeded",
    "NodeBudgetExceeded",
    "PathBudgetExceeded",
    "UnknownStateError",
    "Witness",
    "StateNode",
    "RewriteEdge",
    "MultiwayGraph",
    "ProofPath",
    "evolve",
    "reachable",
    "enumerate_paths",
    "parallel_path_pairs",
    "find_cycle",
    "graph_to_json",
    "graph_from_json",
    "graph_to_dot",
    "format_path",
]

DEFAULT_NODE_BUDGET = 10**6
DEFAULT_PATH_BUDGET = 10**5


class BudgetExceeded(RuntimeError):
    pass


class NodeBudgetExceeded(BudgetExceeded):
    """Expansion produced more states than allowed.

    ``layer_sizes`` holds the per-generation state counts reached so far.
    """

    def __init__(self, budget: int, layer_sizes: Sequence[int], edge_count: int) -> None:
        self.budget = budget
        self.layer_sizes = list(layer_sizes)
        self.edge_count = edge_count
        super().__init__(
            f"node budget {budget} exceeded after {len(self.layer_sizes) - 1} generations "
            f"(layer sizes {self.layer_sizes}, {edge_count} edges)"
        )


class PathBudgetExceeded(BudgetExceeded):
    def __init__(self, budget: int) -> None:
        self.budget = budget
        super().__init__(f"more than {budget} paths")


class UnknownStateError(KeyError):
    def __str__(self) -> str:
        return f"state {self.args[0]!r} is not in the graph"


class Witness(NamedTuple):
    rule: str
    pos: int


@dataclass(frozen=True)
class StateNode:
    id: int
    string: str
    generation: int


@dataclass(frozen=True)
class RewriteEdge:
    src: int
    dst: int
    witnesses: Tuple[Witness, ...]

    def rules(self) -> List[str]:
        return [w.rule for w in self.witnesses]


class MultiwayGraph:
    """Deduplicated state graph produced by :func:`evolve`.

    Nodes are numbered by ``(generation, string)``; edges are kept sorted by
    ``(src, dst)`` with at most one edge per ordered pair.
    """

    def __init__(
        self,
        nodes: Sequence[StateNode],
        edges: Sequence[RewriteEdge],
        system: RuleSystem,
        depth: int,
    ) -> None:
        self.nodes: Tuple[StateNode, ...] = tuple(nodes)
        self.edges: Tuple[RewriteEdge, ...] = tuple(sorted(edges, key=lambda e: (e.src, e.dst)))
        self.system = system
        self.depth = depth
        self._ids = {n.string: n.id for n in self.nodes}
        self._out: Dict[int, List[RewriteEdge]] = {n.id: [] for n in self.nodes}
        self._in: Dict[int, List[RewriteEdge]] = {n.id: [] for n in self.nodes}
        self._pairs: Dict[Tuple[int, int], RewriteEdge] = {}
        for e in self.edges:
            if (e.src, e.dst) in self._pairs:
                raise ValueError(f"duplicate edge {e.src}->{e.dst}")
            self._pairs[(e.src, e.dst)] = e
            self._out[e.src].append(e)
            self._in[e.dst].append(e)
        self._directions: Dict[Tuple[int, int], frozenset] = {
            key: frozenset(system[w.rule].direction for w in e.witnesses)
            for key, e in self._pairs.items()
        }

    def __repr__(self) -> str:
        return f"<MultiwayGraph {len(self.nodes)} nodes, {len(self.edges)} edges, depth {self.depth}>"

    def __contains__(self, state: object) -> bool:
        return state in self._ids

    def id_of(self, state: str) -> int:
        try:
            return self._ids[state]
        except KeyError:
            raise UnknownStateError(state) from None

    def string(self, node_id: int) -> str:
        return self.nodes[node_id].string

    def out_edges(self, node_id: int) -> List[RewriteEdge]:
        return self._out[node_id]

    def in_edges(self, node_id: int) -> List[RewriteEdge]:
        return self._in[node_id]

    def edge(self, src: int, dst: int) -> Optional[RewriteEdge]:
        return self._pairs.get((src, dst))

    def directions(self, edge: RewriteEdge) -> frozenset:
        return self._directions[(edge.src, edge.dst)]

    def has_edge(self, src: int, dst: int, direction: Optional[int] = None) -> bool:
        dirs = self._directions.get((src, dst))
        if dirs is None:
            return False
        return direction is None or direction in dirs

    def successors_in(self, node_id: int, direction: int) -> List[int]:
        return [e.dst for e in self._out[node_id] if direction in self.directions(e)]

    def expanded(self, node_id: int) -> bool:
        """True if the node's out-edges were generated (it lies before the cutoff)."""
        return self.nodes[node_id].generation < self.depth

    def layer_sizes(self) -> List[int]:
        sizes = [0] * (self.depth + 1)
        for n in self.nodes:
            sizes[n.generation] += 1
        return sizes

    def layer_edge_counts(self) -> List[int]:
        """Edges leaving each generation (the last generation is never expanded)."""
        counts = [0] * (self.depth + 1)
        for e in self.edges:
            counts[self.nodes[e.src].generation] += 1
        return counts

    def initial(self) -> List[str]:
        return [n.string for n in self.nodes if n.generation == 0]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiwayGraph):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and self.edges == other.edges
            and self.system == other.system
            and self.depth == other.depth
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class ProofPath:
    """A simple directed path; ``len(path)`` is its number of edges."""

    nodes: Tuple[int, ...]
    edges: Tuple[RewriteEdge, ...]
    strings: Tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.nodes) != len(self.edges) + 1 or len(self.strings) != len(self.nodes):
            raise ValueError("path must have one more node than edges")
        for i, e in enumerate(self.edges):
            if (e.src, e.dst) != (self.nodes[i], self.nodes[i + 1]):
                raise ValueError(f"edge {i} does not join nodes {i} and {i + 1}")

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def source(self) -> str:
        return self.strings[0]

    @property
    def target(self) -> str:
        return self.strings[-1]


def _expand(system: RuleSystem, state: str) -> List[Tuple[str, int, str]]:
    out = []
    for rule in system.rules:
        n = len(rule.lhs)
        for pos in rule.positions(state):
            out.append((rule.id, pos, state[:pos] + rule.rhs + state[pos + n:]))
    return out


def evolve(
    initial: Iterable[str],
    system: RuleSystem,
    generations: int,
    *,
    node_budget: int = DEFAULT_NODE_BUDGET,
    threads: Optional[int] = None,
    shuffle_seed: Optional[int] = None,
) -> MultiwayGraph:
    """Breadth-first multiway evolution for ``generations`` steps.

    States are merged globally by string. Edges are recorded only out of
    states whose generation is below ``generations``; out-edges of the final
    layer are left off even when they land on known states.
    """
    initial = list(initial)
    if not initial:
        raise ValueError("at least one initial state is required")
    if generations < 0:
        raise ValueError("generations must be non-negative")
    if node_budget <= 0:
        raise ValueError("node budget must be positive")

    generation: Dict[str, int] = {}
    for s in initial:
        generation.setdefault(s, 0)
    frontier = sorted(generation)
    layer_sizes = [len(frontier)]
    raw_edges: Dict[Tuple[str, str], List[Witness]] = {}
    if len(generation) > node_budget:
        raise NodeBudgetExceeded(node_budget, layer_sizes, 0)

    for g in range(generations):
        expansions = ordered_map(
            lambda s: _expand(system, s),
            frontier,
            threads=threads,
            shuffle_seed=None if shuffle_seed is None else shuffle_seed + g,
        )
        fresh = set()
        for src, results in zip(frontier, expansions):
            for rule_id, pos, dst in results:
                raw_edges.setdefault((src, dst), []).append(Witness(rule_id, pos))
                if dst not in generation:
                    fresh.add(dst)
        for s in fresh:
            generation[s] = g + 1
        frontier = sorted(fresh)
        layer_sizes.append(len(frontier))
        if len(generation) > node_budget:
            raise NodeBudgetExceeded(node_budget, layer_sizes, len(raw_edges))

    order = sorted(generation, key=lambda s: (generation[s], s))
    ids = {s: i for i, s in enumerate(order)}
    nodes = [StateNode(i, s, generation[s]) for i, s in enumerate(order)]
    edges = [
        RewriteEdge(ids[src], ids[dst], tuple(sorted(ws, key=lambda w: (system.index(w.rule), w.pos))))
        for (src, dst), ws in raw_edges.items()
    ]
    return MultiwayGraph(nodes, edges, system.with_alphabet(initial), generations)


def reachable(g: MultiwayGraph, a: str, b: str) -> bool:
    start, goal = g.id_of(a), g.id_of(b)
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        if u == goal:
            return True
        for e in g.out_edges(u):
            if e.dst not in seen:
                seen.add(e.dst)
                queue.append(e.dst)
    return False


EdgeFilter = Callable[[MultiwayGraph, RewriteEdge], bool]


def _distances_to(g: MultiwayGraph, goal: int, keep: Optional[EdgeFilter]) -> Dict[int, int]:
    dist = {goal: 0}
    queue = deque([goal])
    while queue:
        v = queue.popleft()
        for e in g.in_edges(v):
            if keep is not None and not keep(g, e):
                continue
            if e.src not in dist:
                dist[e.src] = dist[v] + 1
                queue.append(e.src)
    return dist


def enumerate_paths(
    g: MultiwayGraph,
    a: str,
    b: str,
    max_len: int,
    *,
    path_budget: int = DEFAULT_PATH_BUDGET,
    edge_filter: Optional[EdgeFilter] = None,
) -> List[ProofPath]:
    """All simple paths ``a -> ... -> b`` with at most ``max_len`` edges.

    Results come out in lexicographic order of their node-id sequences.
    ``edge_filter`` restricts which edges a path may use.
    """
    if max_len < 0:
        raise ValueError("max_len must be non-negative")
    start, goal = g.id_of(a), g.id_of(b)
    dist = _distances_to(g, goal, edge_filter)
    out: List[ProofPath] = []
    if start not in dist or dist[start] > max_len:
        return out

    nodes = [start]
    edges: List[RewriteEdge] = []
    on_path = {start}

    def emit() -> None:
        if len(out) >= path_budget:
            raise PathBudgetExceeded(path_budget)
        out.append(
            ProofPath(tuple(nodes), tuple(edges), tuple(g.string(n) for n in nodes))
        )

    # Iterative DFS; each frame holds the sorted candidate edges of one node.
    def candidates(u: int) -> List[RewriteEdge]:
        remaining = max_len - len(edges) - 1
        return [
            e
            for e in g.out_edges(u)
            if e.dst not in on_path
            and dist.get(e.dst, max_len + 1) <= remaining
            and (edge_filter is None or edge_filter(g, e))
        ]

    if start == goal:
        emit()
        return out
    stack = [iter(candidates(start))]
    while stack:
        e = next(stack[-1], None)
        if e is None:
            stack.pop()
            if edges:
                on_path.discard(nodes.pop())
                edges.pop()
            continue
        nodes.append(e.dst)
        edges.append(e)
        on_path.add(e.dst)
        if e.dst == goal:
            emit()
            on_path.discard(nodes.pop())
            edges.pop()
        else:
            stack.append(iter(candidates(e.dst)))
    return out


def parallel_path_pairs(
    g: MultiwayGraph,
    a: str,
    b: str,
    max_len: int,
    *,
    path_budget: int = DEFAULT_PATH_BUDGET,
    edge_filter: Optional[EdgeFilter] = None,
) -> List[Tuple[ProofPath, ProofPath]]:
    """Unordered pairs of distinct, equal-length paths from ``a`` to ``b``."""
    paths = enumerate_paths(
        g, a, b, max_len, path_budget=path_budget, edge_filter=edge_filter
    )
    return [
        (p, q)
        for i, p in enumerate(paths)
        for q in paths[i + 1:]
        if len(p) == len(q)
    ]


def find_cycle(g: MultiwayGraph) -> Optional[List[int]]:
    """Return the node ids of some directed cycle, or None if the graph is acyclic."""
    WHITE, GREY, BLACK = 0, 1, 2
    colour = [WHITE] * len(g.nodes)
    for root in range(len(g.nodes)):
        if colour[root] != WHITE:
            continue
        colour[root] = GREY
        trail = [root]
        stack = [iter(g.out_edges(root))]
        while stack:
            e = next(stack[-1], None)
            if e is None:
                stack.pop()
                colour[trail.pop()] = BLACK
                continue
            if colour[e.dst] == GREY:
                return trail[trail.index(e.dst):]
            if colour[e.dst] == WHITE:
                colour[e.dst] = GREY
                trail.append(e.dst)
                stack.append(iter(g.out_edges(e.dst)))
    return None


def format_path(g: MultiwayGraph, path: ProofPath) -> str:
    parts = [path.strings[0]]
    for e, s in zip(path.edges, path.strings[1:]):
        label = "|".join(f"{w.rule}@{w.pos}" for w in e.witnesses)
        parts.append(f"-[{label}]-> {s}")
    return " ".join(parts)


def replay_edge(g: MultiwayGraph, edge: RewriteEdge) -> List[str]:
    src = g.string(edge.src)
    return [apply_match(MatchSite(w.rule, w.pos, src), g.system) for w in edge.witnesses]


def _rule_json(rule: Rule) -> dict:
    return {
        "id": rule.id,
        "lhs": rule.lhs,
        "rhs": rule.rhs,
        "order": rule.order,
        "inverse_of": rule.inverse_of,
    }


def graph_to_json(g: MultiwayGraph) -> str:
    doc = {
        "rules": [_rule_json(r) for r in g.system.rules],
        "depth": g.depth,
        "nodes": [{"id": n.id, "string": n.string, "generation": n.generation} for n in g.nodes],
        "edges": [
            {
                "src": e.src,
                "dst": e.dst,
                "witnesses": [{"rule": w.rule, "pos": w.pos} for w in e.witnesses],
            }
            for e in g.edges
        ],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def graph_from_json(text: str) -> MultiwayGraph:
    doc = json.loads(text)
    system = RuleSystem(
        tuple(
            Rule(r["id"], r["lhs"], r["rhs"], r.get("order", 0), r.get("inverse_of"))
            for r in doc["rules"]
        )
    )
    nodes = [StateNode(n["id"], n["string"], n["generation"]) for n in doc["nodes"]]
    if [n.id for n in nodes] != list(range(len(nodes))):
        raise ValueError("node ids must be 0..n-1 in order")
    edges = [
        RewriteEdge(
            e["src"],
            e["dst"],
            tuple(Witness(w["rule"], w["pos"]) for w in e["witnesses"]),
        )
        for e in doc["edges"]
    ]
    system = system.with_alphabet(n.string for n in nodes)
    return MultiwayGraph(nodes, edges, system, doc["depth"])


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def graph_to_dot(g: MultiwayGraph, name: str = "multiway") -> str:
    lines = [f"digraph {name} {{", "  rankdir=TB;", "  node [shape=box];"]
    for n in g.nodes:
        lines.append(f"  {n.id} [label={_dot_quote(n.string)}, generation={n.generation}];")
    for e in g.edges:
        label = ",".join(dict.fromkeys(e.rules()))
        order = max(g.system[r].order for r in e.rules())
        attrs = [f"label={_dot_quote(label)}"]
        if order >= 2:
            attrs += [f"order={order}", 'color="purple"', 'style="dashed"']
        lines.append(f"  {e.src} -> {e.dst} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
