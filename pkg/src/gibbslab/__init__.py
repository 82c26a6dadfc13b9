"""Numerical laboratory for unique Gibbs measures on regular trees and random coverings.

Exact enumeration at desk scale, Monte Carlo beyond, and checks of the
edge-vertex entropy inequality, mutual-information decay and the
good-coloring counting rate.
"""
from .graph import (Graph, NFoldCovering, RootedBall, build_graph, niceness_audit,
                    random_covering, universal_cover_ball)
from .gibbs import (Potential, brute_force_gibbs, conditional_table, dlr_check, glauber_sample,
                    ising, potts, transfer_potential)
from .info import (Observable, covariance, entropy, mutual_information,
                   quadratic_info_bound_check, tv_distance)
from .kernels import BACKEND
from .tables import DistTable
from .tree import (BPResult, TreeChain, ball_measure, bp_solve, chain_from_bp, decay_table,
                   joint_at_distance)
from .factor import (BlockCode, EmpiricalPair, apply_block_code, edge_vertex_slack,
                     empirical_dists, factor_marginals_exact)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BPResult", "BlockCode", "DistTable", "EmpiricalPair", "Graph", "NFoldCovering",
    "Observable", "Potential", "RootedBall", "TreeChain", "apply_block_code", "ball_measure",
    "bp_solve", "brute_force_gibbs", "build_graph", "chain_from_bp", "conditional_table",
    "covariance", "decay_table", "dlr_check", "edge_vertex_slack", "empirical_dists", "entropy",
    "factor_marginals_exact", "glauber_sample", "ising", "joint_at_distance",
    "mutual_information", "niceness_audit", "potts", "quadratic_info_bound_check",
    "random_covering", "transfer_potential", "tv_distance", "universal_cover_ball",
]
