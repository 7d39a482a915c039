"""Solver suite for hierarchical directed capacitated arc routing."""

from .graph import (
    Arc,
    DeadheadMatrix,
    Instance,
    Node,
    compute_deadhead_matrix,
    deadhead_time,
    load_instance,
    save_instance,
    validate_instance,
)
from .solution import (
    HierarchicalObjective,
    Route,
    Solution,
    Variant,
    check_feasible,
    evaluate,
    lex_compare,
    load_solution,
    save_solution,
)
from .construct import construct, softmax_select
from .local_search import (
    SubTourView,
    SwapDelta,
    best_swap_inter,
    best_swap_intra,
    get_subtour_p,
    get_subtour_u,
    local_search,
)
from .metaheuristics import PheromoneMatrix, aco, crossover, ea, ils, perturb
from .exact import (
    MilpModel,
    TransformedGraph,
    brute_force_oracle,
    check_model,
    emit_milp_p,
    emit_milp_u,
    encode_solution,
    separate_connectivity,
    transform_graph,
    write_lp_files,
)
from .generator import GenSpec, generate_instance

__version__ = "0.1.0"
