"""winnow: review huge candidate tables with a handful of questions.

Recursive bi-clustering over decision columns, search under a hard
2*ceil(log2(N)) evaluation budget (automatic objectives or pairwise human
preferences), contrast rules that explain the gap between where you are
and where you want to be, and medoid prototypes for sample reduction.
"""

from .data import (
    Cell,
    ColumnSpec,
    ConfigError,
    Dataset,
    EvaluationError,
    Goal,
    IngestionError,
    Role,
    Row,
    d2h,
    dist,
    dist_to_many,
    norm,
    parse_csv,
    to_csv,
)
from .cluster import ClusterConfig, ClusterNode, Poles, cluster, pick_poles, project, split, tree_to_text
from .optimize import (
    BudgetExhausted,
    ObjectiveOracle,
    PreferenceOracle,
    SearchResult,
    compare,
    d2h_chooser,
    greedy_descend,
    non_greedy,
    prototypes,
    random_search,
    scripted_answers,
)
from .explain import (
    Range,
    Rule,
    build_rules,
    contrast_rules,
    contrast_score,
    discretize,
    parse_rule,
    pick_desired_current,
    rank_ranges,
)
from .synth import gen_synthetic

__version__ = "0.1.0"
