"""Discretizable molecular distance geometry: branch-and-prune and symmetry-based build-up solvers."""
from .bp import BPResult, BPStats, bp_solve, distance_value_set, enumerate_all_solutions
from .errors import (
    ArgumentError,
    DegeneracyError,
    DMDGPError,
    EmptyStructureError,
    GenerationError,
    InfeasibleError,
    InstanceError,
    ParseError,
    RefusalError,
    SolverFailure,
    SolverTimeout,
)
from .geometry import HyperplaneReflector, build_reflector, cayley_menger, k_laterate, reflect
from .genio import (
    build_instance,
    generate_synthetic,
    mde,
    parse_pdb,
    read_instance,
    read_realization,
    write_instance,
    write_realization,
)
from .instance import (
    DMDGPInstance,
    EdgePartition,
    classify_edges,
    local_symmetry_vertices,
    order_pruning_edges,
    preceding_edges,
    symmetry_vertices,
    validate_dmdgp,
)
from .partition import ComponentPartition
from .sbbu import SBBUResult, SBBUStats, initialize_positions, sbbu_conceptual_solve, sbbu_solve, solve_subproblem

__version__ = "0.1.0"
