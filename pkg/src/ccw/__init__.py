"""Finite certified models for equivariant cover dimension bookkeeping.

Everything is computed at "desk scale": finite group windows, finite
discretized spaces, exact rational arithmetic, and checkers that return
certificates (pass / fail-with-witness / inconclusive) rather than bare
booleans.
"""

from .errors import CcwError, DomainError, PreconditionError, SchemaError, SizeCapError
from .groups import (
    PREDICATE_KINDS,
    FiniteGroupSpec,
    FreeAbelianSpec,
    FreeGroupSpec,
    GroupSpec,
    GroupWindow,
    ProductSpec,
    build_cayley_window,
    subgroup_in_family,
)
from .spaces import (
    CompactificationModel,
    FiniteMetricSpace,
    L1Point,
    PartialAction,
    SimplicialComplexModel,
    barycentric_subdivision,
    make_cycle_model,
    make_discrete_model,
    make_interval_compactification,
    make_tree_boundary_model,
)
from .covers import (
    CoverFamily,
    FamilyPredicate,
    GroundSet,
    Verdict,
    max_lebesgue,
    nerve,
    pad_cover,
    pad_member,
    shrink_cover,
    shrink_member,
    split_boundary_parts,
)
from .homotopy import (
    HomotopyActionModel,
    adb,
    adb_levels,
    adb_modulus_probe,
    genuine_to_homotopy,
    make_cycle_homotopy_action,
    make_interval_homotopy_action,
    n_long_check,
    straighten,
)
from .characterise import (
    EquivariantMap,
    abelian_obstruction_check,
    cover_to_map,
    cover_to_multiplicity_cover,
    map_to_disjoint_families,
    map_to_point_map,
    multiplicity_to_lebesgue_cover,
    partition_lU,
    point_map_to_map,
    zero_dim_structure_check,
)
from .boundary import (
    BoundaryCover,
    EpsilonAssignment,
    assemble_full_cover,
    boundary_epsilon,
    enlarge_boundary_set,
    extend_boundary_cover,
    proper_interior_cover,
)
from .refine import (
    FiniteGroupAction,
    QuotientSpace,
    equivariant_lift,
    f_subset_report,
    family_dimension,
    min_dim_refinement,
    quotient_space,
)
from . import docio

__version__ = "0.1.0"
