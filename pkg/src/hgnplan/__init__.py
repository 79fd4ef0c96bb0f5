"""Planning heuristics learned over delete-relaxation hypergraphs.

The package parses a STRIPS subset of PDDL, grounds it, exposes the classic
delete-relaxation heuristics (blind, h_max, h_add, LM-cut) plus an A*
harness, and trains a from-scratch hypergraph message-passing network to
predict cost-to-go from (state, goal) features on the relaxation hypergraph.
"""

from .grounding import (
    GroundedAction,
    GroundedTask,
    apply_action,
    applicable,
    delete_relax,
    ground,
    ground_files,
    is_goal,
    make_state,
    make_task,
    prune_task,
    state_from_names,
    state_ids,
    state_names,
    task_to_json,
)
from .heuristics import (
    INFINITY,
    Blind,
    HAdd,
    HMax,
    LmCut,
    h_add,
    h_blind,
    h_lmcut,
    h_max,
    make_heuristic,
)
from .hgn import (
    ArityBounds,
    ArityOverflowError,
    HgnBlockConfig,
    HgnBlockParams,
    aggregate_sum,
    block_backward,
    block_forward,
    compute_arity_bounds,
    pad_and_stack,
    prepare_structure,
)
from .hypergraph import (
    Hypergraph,
    HypergraphStructure,
    StructureMismatchError,
    build_structure,
    concat_features,
    encode_features,
    hypergraph_from_json,
    hypergraph_to_json,
)
from .model import (
    HgnHeuristic,
    ModelHyperparams,
    StripsHgnModel,
    forward,
    heuristic_value,
    init_model,
    load_model,
    loss,
    loss_gradients,
    save_model,
    zero_model,
)
from .nn import AdamState, MlpParams, adam_step, init_params, leaky_relu, mlp_backward, mlp_forward, mse
from .pddl import DomainDef, PddlError, ProblemDef, parse_domain, parse_problem
from .search import SearchLimits, SearchResult, astar, validate_plan
from .training import (
    TaskSource,
    TrainConfig,
    TrainingSample,
    generate_training_data,
    merge_domain_folds,
    quantile_bins,
    resample_with_replacement,
    run_kfold_training,
    stratified_kfold,
    train_fold,
)

__version__ = "0.1.0"
