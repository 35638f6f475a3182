"""Hard-constraint spin systems as graph homomorphism spaces.

Classify constraint graphs (dismantlable / cop-win / fertile), enumerate and
measure finite homomorphism spaces exactly, solve for Gibbs measures on Cayley
trees via branching random walks and the fundamental equations, and sample
finite boards with single-site dynamics.
"""

from .classify import (ClassificationReport, FoldSequence, classify_graph,
                       cop_win, dismantle, find_fold, is_dismantlable,
                       is_fertile)
from .graphs import (ActivityVector, Board, ConstraintGraph, GraphFormatError,
                     WeightVector, bipartite_double, board_from_file,
                     complete_board, complete_graph, cycle_graph, export_dot,
                     grid_box, hard_core, hinge, is_bipartite, load_graph,
                     path_board, path_graph, proportional, save_graph,
                     single_looped_node, standard_board, standard_graph,
                     tree_board, weak_square, weak_square_projections)
from .homspace import (HomSpace, HomSpaceCapExceeded,
                       InconsistentBoundaryError, boundary_influence,
                       brute_force_homs, count_tree_extensions,
                       enumerate_homs, is_isolated_map, lambda_measure,
                       one_site_gibbs_report, tree_root_support,
                       tree_spin_distribution)
from .rng import spawn_generator
from .treegibbs import (BranchingWalk, GibbsSolution, LongRangeActionReport,
                        SolutionFamily, SolverBudgetError, TransitionReport,
                        TreeConfig, conditional_spin_distributions,
                        count_transition, frozen_coloring,
                        fundamental_residual, long_range_action_probe,
                        sample_walk_config, semi_invariant_from_double,
                        semi_invariant_measures, solve_fundamental,
                        solve_invariant_weights, weights_to_activities)

__version__ = "0.1.0"
