from .brute import brute_force_optimal
from .exact import solve_exact
from .greedy import assign_personal_maximal, greedy_min_dist, greedy_min_num
from .local_search import local_search_ls, singleton_matching
from .lp import export_lp
from .pipeline import PipelineResult, solve_hypergraph, solve_instance, solve_on_hypergraph
from .solution import AssignmentSolution, PartialAssignment, Status, validate_solution

__all__ = [
    "AssignmentSolution", "PartialAssignment", "PipelineResult", "Status",
    "assign_personal_maximal", "brute_force_optimal", "export_lp", "greedy_min_dist",
    "greedy_min_num", "local_search_ls", "singleton_matching", "solve_exact",
    "solve_hypergraph", "solve_instance", "solve_on_hypergraph", "validate_solution",
]
