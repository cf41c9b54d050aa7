# lpsteiner/__init__.py
from .certificates import (
    UnitFamily,
    certify_steiner_point,
    certify_tree,
    certify_vertex,
    check_balancing,
    check_collapsing,
)
from .constructions import (
    Construction,
    collapsing_holds_simplex,
    four_point_config,
    make_star_instance,
    simplex_config,
    triangle_config,
)
from .degree_bounds import compute_q0, degree_bound, khinchin_constants, threshold_table
from .errors import SteinerError
from .lp_geometry import LpExponent, dual_norm, lp_norm, norming_functional
from .smt_solver import SolverOptions, fermat_point, optimize_topology, solve_smt
from .topologies import SteinerTree, Topology, enumerate_topologies

__version__ = "0.1.0"
