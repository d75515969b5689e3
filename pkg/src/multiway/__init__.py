"""Multiway string rewriting with higher homotopy synthesis and structure checks."""

from __future__ import annotations

from .graph import (
    BudgetExceeded,
    MultiwayGraph,
    NodeBudgetExceeded,
    PathBudgetExceeded,
    ProofPath,
    RewriteEdge,
    StateNode,
    UnknownStateError,
    Witness,
    enumerate_paths,
    evolve,
    find_cycle,
    format_path,
    graph_from_json,
    graph_to_dot,
    graph_to_json,
    parallel_path_pairs,
    reachable,
    replay_edge,
)
from .homotopy import (
    ExtendedSystem,
    HomotopyError,
    HomotopyLimits,
    HomotopySpec,
    OrderGapError,
    auto_homotopy,
    extend_system,
    format_extended,
    iter_cells,
    iterate_homotopy,
    load_extended,
    realized_cells,
    synthesize_rungs,
)
from .rewrite import (
    InvalidMatchError,
    MatchSite,
    Rule,
    RuleSyntaxError,
    RuleSystem,
    apply_match,
    find_matches,
    format_rules,
    invert_system,
    parse_rules,
    successors,
)
from .verify import (
    CheckResult,
    Hypercube,
    Square,
    StructureReport,
    find_cubes,
    find_squares,
    verify_double_category,
    verify_groupoid,
    verify_nfold,
)

__version__ = "0.1.0"
