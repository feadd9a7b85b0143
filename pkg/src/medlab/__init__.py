"""medlab: exact computation on finite median algebras.

Median-closed sets of bit-vectors, their walls and cubes, the self-median
operator on exact probability measures, the parity-class dynamics on cubes,
and invariant cubes under finite group actions.
"""

__version__ = "0.1.0"

from .algebra import (
    MedianAlgebra,
    Morphism,
    Violation,
    convex_hull,
    from_table,
    gate,
    interval,
    is_convex,
    is_morphism,
    median,
    product,
    subalgebra_closure,
    validate_axioms,
)
from .dynamics import (
    XiCounts,
    ai_closed_form,
    ai_recurrence,
    count_xi_bruteforce,
    mu3_mass_identity_check,
    mu_t,
    phi_conjugation_check,
    phi_fixed_points,
    phi_poly,
)
from .generators import (
    GeneratorSpec,
    grid,
    hypercube,
    path,
    random_subalgebra,
    star,
    tree,
)
from .groups import (
    Automorphism,
    FiniteGroup,
    average_measure,
    find_automorphisms,
    group_closure,
    invariant_balanced_search,
    invariant_cube,
    select_invariant_cube,
    validate_automorphism,
)
from .measures import (
    CubicalCertificate,
    FloatMeasure,
    IterationResult,
    Measure,
    NotCubical,
    classify_balanced,
    fixed_point_scan,
    halfspace_mass,
    is_balanced,
    iterate_phi,
    phi,
    pushforward,
    snap_and_verify,
    support,
    uniform_on_cube,
)
from .walls import (
    CubeCertificate,
    HalfSpace,
    NotCube,
    Wall,
    brute_force_halfspaces,
    delta,
    detect_cube,
    enumerate_walls,
    gate_representative,
    is_transverse,
    separate,
    wall_embedding,
    walls_of,
)

__all__ = [name for name in dir() if not name.startswith("_")]
