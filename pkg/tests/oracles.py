"""Brute-force reference implementations used to cross-check the library.

Nothing here imports the package's graph, homotopy or verify modules; rules
are plain ``(lhs, rhs, order)`` triples.
"""

from __future__ import annotations

import itertools
from typing import Dict, List, Set, Tuple

Triple = Tuple[str, str, int]


def one_step(state: str, rules: List[Triple]) -> Set[Tuple[str, int]]:
    """(result, direction) for every single rewrite of ``state``."""
    out = set()
    for lhs, rhs, order in rules:
        if order >= 2:
            if state == lhs:
                out.add((rhs, order))
            continue
        for i in range(len(state) - len(lhs) + 1):
            if state[i:i + len(lhs)] == lhs:
                out.add((state[:i] + rhs + state[i + len(lhs):], 1))
    return out


def expand(initial: List[str], rules: List[Triple], depth: int):
    """Generation map, labelled edge set and per-layer sizes by plain BFS."""
    gen: Dict[str, int] = {s: 0 for s in initial}
    frontier = sorted(set(initial))
    edges: Set[Tuple[str, str, int]] = set()
    for d in range(depth):
        nxt = set()
        for s in frontier:
            for t, direction in one_step(s, rules):
                edges.add((s, t, direction))
                if t not in gen:
                    gen[t] = d + 1
                    nxt.add(t)
        frontier = sorted(nxt)
    sizes = [sum(1 for g in gen.values() if g == d) for d in range(depth + 1)]
    return gen, edges, sizes


def simple_paths(a: str, b: str, rules: List[Triple], depth: int, max_len: int) -> List[Tuple[str, ...]]:
    """Every simple base-rule path a -> b of at most ``max_len`` steps."""
    gen, edges, _ = expand([a], rules, depth)
    succ: Dict[str, Set[str]] = {}
    for s, t, direction in edges:
        if direction == 1:
            succ.setdefault(s, set()).add(t)
    out = []

    def walk(trail):
        if trail[-1] == b:
            out.append(tuple(trail))
            return
        if len(trail) - 1 == max_len:
            return
        for t in sorted(succ.get(trail[-1], ())):
            if t not in trail:
                walk(trail + [t])

    if b in gen:
        walk([a])
    return out


def cube_census(initial: List[str], rules: List[Triple], depth: int, dim: int) -> Dict[str, int]:
    """Count thin hypercubes of each dimension up to ``dim``.

    A k-cube is a 2^k tuple of states; axis 0 edges are base rewrites, axis j
    edges are direction-(j+1) rewrites or identities. Squares are found by
    scanning all 4-tuples; higher cubes by testing every ordered pair of
    lower cubes as front and back faces.
    """
    gen, edges, _ = expand(initial, rules, depth)
    rel = {(s, t, d) for s, t, d in edges}
    states = sorted(gen)

    def ok(u, v, direction):
        if direction == 1:
            return (u, v, 1) in rel
        return u == v or (u, v, direction) in rel

    counts: Dict[str, int] = {}
    squares = [
        (a, b, c, d)
        for a, b, c, d in itertools.product(states, repeat=4)
        if ok(a, b, 1) and ok(c, d, 1) and ok(a, c, 2) and ok(b, d, 2)
    ]
    level = squares
    counts["2-cells"] = len(squares)
    counts["proper_2-cells"] = sum(1 for q in squares if _proper(q))
    for k in range(3, dim + 1):
        level = [
            front + back
            for front, back in itertools.product(level, repeat=2)
            if all(ok(u, v, k) for u, v in zip(front, back))
        ]
        counts[f"{k}-cells"] = len(level)
        counts[f"proper_{k}-cells"] = sum(1 for q in level if _proper(q))
    return counts


def _proper(cube: Tuple[str, ...]) -> bool:
    n = len(cube)
    for axis in range(n.bit_length() - 1):
        bit = 1 << axis
        if any(cube[m] == cube[m | bit] for m in range(n) if not m & bit):
            return False
    return True


def square_kinds_along(column: List[Tuple[str, str, str, str]]) -> List[str]:
    """Kind of each square (a, b, c, d) with horizontals a->c and b->d."""
    out = []
    for a, b, c, d in column:
        n = (a == c) + (b == d)
        out.append(("full", "triangle", "identity")[n])
    return out
