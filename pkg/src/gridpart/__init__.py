"""Tree partitions, cells and outage distribution factors for DC power networks."""

from .balance import (
    BalanceRule,
    ParticipationReport,
    apply_rule,
    check_island_free,
    check_participating,
    load_weights,
    uniform_generator_rule,
)
from .estimators import DCFlowSolver, LodfAnalyzer, SwitchingEvaluator, TreePartitioner
from .exceptions import GridpartError, ValidationError, ValidationKind
from .flow import FlowSolution, solve_dc, solve_dc_component
from .forest_oracle import ForestOracle, lodf_forest, spanning_tree_weight, two_forest_weight
from .localize import (
    InfluenceGraph,
    PairClass,
    classify_pair,
    cross_region_edges,
    influence_graph,
    sparsity_report,
)
from .lodf import ColumnKind, LodfMatrix, extended_lodf, lodf_matrix, lodf_nonbridge
from .matpower import case118_path, load_matpower
from .network import (
    Bus,
    Line,
    Network,
    collapse_dangling_bridges,
    incidence,
    load_injections,
    load_native,
    load_network,
    save_native,
)
from .partition import (
    CellDecomposition,
    TreePartition,
    cell_decomposition,
    find_bridges,
    irreducible_tree_partition,
    is_finer,
    is_tree_partition,
)
from .perturb import PerturbationSpec, perturb
from .switching import BridgingCut, SwitchEvaluation, enumerate_bridging_cuts, evaluate_switch

__version__ = "0.1.0"

__all__ = [
    "BalanceRule", "BridgingCut", "Bus", "CellDecomposition", "ColumnKind", "DCFlowSolver",
    "FlowSolution", "ForestOracle", "GridpartError", "InfluenceGraph", "Line", "LodfAnalyzer",
    "LodfMatrix", "Network", "PairClass", "ParticipationReport", "PerturbationSpec",
    "SwitchEvaluation", "SwitchingEvaluator", "TreePartition", "TreePartitioner",
    "ValidationError", "ValidationKind", "apply_rule", "case118_path", "cell_decomposition",
    "check_island_free", "check_participating", "classify_pair", "collapse_dangling_bridges",
    "cross_region_edges", "enumerate_bridging_cuts", "evaluate_switch", "extended_lodf",
    "find_bridges", "incidence", "influence_graph", "irreducible_tree_partition", "is_finer",
    "is_tree_partition", "load_injections", "load_matpower", "load_native", "load_network",
    "load_weights", "lodf_forest", "lodf_matrix", "lodf_nonbridge", "perturb", "save_native",
    "solve_dc", "solve_dc_component", "spanning_tree_weight", "sparsity_report",
    "two_forest_weight", "uniform_generator_rule",
]
