"""Ground string rewriting: rules, matching and the one-step rewrite relation."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

__all__ = [
    "Rule",
    "RuleSystem",
    "MatchSite",
    "RuleSyntaxError",
    "InvalidMatchError",
    "parse_rules",
    "format_rules",
    "find_matches",
    "apply_match",
    "successors",
    "invert_system",
    "INVERSE_SUFFIX",
]

INVERSE_SUFFIX = "_inv"

# A rule line: optional "name:" prefix, then "lhs -> rhs".
_RULE_RE = re.compile(r"^(?:(?P<name>[^\s:#]+)\s*:\s*)?(?P<lhs>\S*)\s*->\s*(?P<rhs>\S*)$")
_ORDER_RE = re.compile(r"^@order\s+(?P<order>\d+)$")


class RuleSyntaxError(ValueError):
    """Raised for a malformed rules file; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidMatchError(ValueError):
    pass


@dataclass(frozen=True)
class Rule:
    """One labelled rewrite rule ``lhs -> rhs``.

    ``order`` 0 marks a base rule, which rewrites any occurrence of ``lhs``.
    Rules of order 2 and above are homotopy rungs: they only fire on a state
    equal to ``lhs`` as a whole.
    """

    id: str
    lhs: str
    rhs: str
    order: int = 0
    inverse_of: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.lhs:
            raise RuleSyntaxError(f"rule {self.id!r} has an empty left-hand side")
        if self.order < 0:
            raise ValueError(f"rule {self.id!r} has negative order {self.order}")

    @property
    def is_rung(self) -> bool:
        return self.order >= 2

    @property
    def direction(self) -> int:
        """Cube axis this rule's edges live on: 1 for base rules, k for order-k rungs."""
        return max(self.order, 1)

    def positions(self, state: str) -> List[int]:
        if self.is_rung:
            return [0] if state == self.lhs else []
        out = []
        start = state.find(self.lhs)
        while start != -1:
            out.append(start)
            start = state.find(self.lhs, start + 1)
        return out

    def __str__(self) -> str:
        return f"{self.id}: {self.lhs} -> {self.rhs}"


@dataclass(frozen=True)
class RuleSystem:
    rules: Tuple[Rule, ...] = ()
    extra_alphabet: frozenset = field(default=frozenset(), compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "rules", tuple(self.rules))
        seen: Set[str] = set()
        for rule in self.rules:
            if rule.id in seen:
                raise RuleSyntaxError(f"duplicate rule id {rule.id!r}")
            seen.add(rule.id)
        by_id = {r.id: r for r in self.rules}
        for rule in self.rules:
            if rule.inverse_of is None:
                continue
            other = by_id.get(rule.inverse_of)
            if other is None:
                raise RuleSyntaxError(
                    f"rule {rule.id!r} names missing inverse {rule.inverse_of!r}"
                )
            if (other.lhs, other.rhs) != (rule.rhs, rule.lhs):
                raise RuleSyntaxError(
                    f"rule {rule.id!r} and its inverse {other.id!r} are not swapped"
                )
        object.__setattr__(self, "_by_id", by_id)
        object.__setattr__(self, "_index", {r.id: i for i, r in enumerate(self.rules)})

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self):
        return iter(self.rules)

    def __contains__(self, rule_id: object) -> bool:
        return rule_id in self._by_id

    def __getitem__(self, rule_id: str) -> Rule:
        return self._by_id[rule_id]

    def index(self, rule_id: str) -> int:
        return self._index[rule_id]

    @property
    def ids(self) -> List[str]:
        return [r.id for r in self.rules]

    @property
    def labels(self) -> frozenset:
        return frozenset(self._by_id)

    @property
    def alphabet(self) -> frozenset:
        chars = set(self.extra_alphabet)
        for rule in self.rules:
            chars.update(rule.lhs)
            chars.update(rule.rhs)
        return frozenset(chars)

    @property
    def max_order(self) -> int:
        return max((r.direction for r in self.rules), default=1)

    def with_alphabet(self, states: Iterable[str]) -> "RuleSystem":
        chars = set(self.extra_alphabet)
        for s in states:
            chars.update(s)
        return replace(self, extra_alphabet=frozenset(chars))

    def without(self, rule_id: str) -> "RuleSystem":
        """Drop a rule, unlinking whatever named it as an inverse."""
        if rule_id not in self:
            raise KeyError(rule_id)
        kept = []
        for rule in self.rules:
            if rule.id == rule_id:
                continue
            if rule.inverse_of == rule_id:
                rule = replace(rule, inverse_of=None)
            kept.append(rule)
        return RuleSystem(tuple(kept), self.extra_alphabet)

    def strictly_increasing(self) -> bool:
        return all(len(r.rhs) > len(r.lhs) for r in self.rules)


@dataclass(frozen=True, order=True)
class MatchSite:
    rule_id: str
    position: int
    subject: str


def _check_token(token: str, what: str, line: int) -> None:
    if "#" in token or "->" in token:
        raise RuleSyntaxError(f"reserved token in {what} {token!r}", line)


def parse_rules(text: str) -> RuleSystem:
    """Parse a rules file.

    Grammar, one item per line::

        # comment
        [name:] lhs -> rhs
        @order k          (following rules are order-k rungs)
        @cell ...         (cell annotation, ignored here)

    Unnamed rules get ids ``r1, r2, ...`` by their position among rules.
    A rule named ``X_inv`` whose lhs/rhs swap those of rule ``X`` is linked
    to it as its inverse.
    """
    rules: List[Rule] = []
    explicit: Set[str] = set()
    order = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("@"):
            m = _ORDER_RE.match(line)
            if m:
                order = int(m.group("order"))
                if order == 1:
                    raise RuleSyntaxError("@order 1 is not a homotopy layer", lineno)
                continue
            if line.startswith("@cell"):
                continue
            raise RuleSyntaxError(f"unknown directive {line.split()[0]!r}", lineno)
        m = _RULE_RE.match(line)
        if m is None:
            raise RuleSyntaxError(f"expected 'lhs -> rhs', got {raw.strip()!r}", lineno)
        name, lhs, rhs = m.group("name"), m.group("lhs"), m.group("rhs")
        if not lhs:
            raise RuleSyntaxError("empty left-hand side", lineno)
        _check_token(lhs, "lhs", lineno)
        _check_token(rhs, "rhs", lineno)
        if name is not None:
            if name in explicit:
                raise RuleSyntaxError(f"duplicate rule id {name!r}", lineno)
            explicit.add(name)
        rules.append(Rule(id=name or "", lhs=lhs, rhs=rhs, order=order))

    # Auto-named rules take r<position>; skip names already claimed explicitly.
    taken = set(explicit)
    named: List[Rule] = []
    for pos, rule in enumerate(rules, start=1):
        if rule.id:
            named.append(rule)
            continue
        rid = f"r{pos}"
        while rid in taken:
            rid += "'"
        taken.add(rid)
        named.append(replace(rule, id=rid))

    by_id = {r.id: r for r in named}
    linked: Dict[str, str] = {}
    for rule in named:
        if rule.id.endswith(INVERSE_SUFFIX):
            base = by_id.get(rule.id[: -len(INVERSE_SUFFIX)])
            if base is not None and (base.lhs, base.rhs) == (rule.rhs, rule.lhs):
                linked[rule.id] = base.id
                linked[base.id] = rule.id
    named = [replace(r, inverse_of=linked.get(r.id)) for r in named]
    try:
        return RuleSystem(tuple(named))
    except RuleSyntaxError as exc:
        raise RuleSyntaxError(str(exc)) from None


def format_rules(system: RuleSystem | Sequence[Rule]) -> str:
    """Render rules in the file format, grouping rungs under ``@order`` lines."""
    lines: List[str] = []
    current = 0
    for rule in system:
        if rule.order != current:
            lines.append(f"@order {rule.order}")
            current = rule.order
        lines.append(f"{rule.id}: {rule.lhs} -> {rule.rhs}")
    return "\n".join(lines) + ("\n" if lines else "")


def find_matches(state: str, system: RuleSystem) -> List[MatchSite]:
    """Every (rule, offset) at which a rule's lhs occurs, overlaps included."""
    return [
        MatchSite(rule.id, pos, state)
        for rule in system.rules
        for pos in rule.positions(state)
    ]


def apply_match(site: MatchSite, system: RuleSystem) -> str:
    try:
        rule = system[site.rule_id]
    except KeyError:
        raise InvalidMatchError(f"unknown rule {site.rule_id!r}") from None
    if site.position not in rule.positions(site.subject):
        raise InvalidMatchError(
            f"{rule.id} does not match {site.subject!r} at {site.position}"
        )
    end = site.position + len(rule.lhs)
    return site.subject[: site.position] + rule.rhs + site.subject[end:]


def successors(state: str, system: RuleSystem) -> Set[Tuple[str, str]]:
    """The labelled successor set ``{(label, q) : state ->label q}``."""
    out = set()
    for rule in system.rules:
        n = len(rule.lhs)
        for pos in rule.positions(state):
            out.add((rule.id, state[:pos] + rule.rhs + state[pos + n:]))
    return out


def invert_system(system: RuleSystem) -> RuleSystem:
    """Append ``rhs -> lhs`` for every rule without a declared inverse."""
    for rule in system.rules:
        if rule.inverse_of is None and not rule.rhs:
            raise RuleSyntaxError(
                f"rule {rule.id!r} has an empty right-hand side and cannot be inverted"
            )
    taken = set(system.ids)
    rules = list(system.rules)
    added: List[Rule] = []
    for i, rule in enumerate(rules):
        if rule.inverse_of is not None:
            continue
        inv_id = rule.id + INVERSE_SUFFIX
        while inv_id in taken:
            inv_id += "'"
        taken.add(inv_id)
        rules[i] = replace(rule, inverse_of=inv_id)
        added.append(
            Rule(id=inv_id, lhs=rule.rhs, rhs=rule.lhs, order=rule.order, inverse_of=rule.id)
        )
    # Keep each order's rungs contiguous so serialization stays grouped.
    merged = sorted(rules + added, key=lambda r: r.order)
    return RuleSystem(tuple(merged), system.extra_alphabet)
