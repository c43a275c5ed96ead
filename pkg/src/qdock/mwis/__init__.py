from .exact import brute_force_mwis, maximal_independent_sets, solve_exact, top_independent_sets
from .greedy import augment_to_maximal, solve_greedy
from .heuristic import (HeuristicConfig, RankedSet, solve_decomposition, solve_subgraph_exact,
                        solve_subgraph_quantum)
from .solution import IndependentSetSolution, Verification, verify_solution

__all__ = [
    "HeuristicConfig", "IndependentSetSolution", "RankedSet", "Verification",
    "augment_to_maximal", "brute_force_mwis", "maximal_independent_sets", "solve_decomposition",
    "solve_exact", "solve_greedy", "solve_subgraph_exact", "solve_subgraph_quantum",
    "top_independent_sets", "verify_solution",
]
