"""Exact Fujiki-Oka resolutions of abelian quotient singularities."""

from .abelian import (
    AbelianGroup,
    BasicGeneratingSystem,
    NoAgeOneSystem,
    SemiUnimodularityLost,
    StageTranscript,
    basic_generating_system,
    crepant_iterated,
    enumerate_group,
    iterated_fujiki_oka,
    phi_embed,
)
from .contfrac import (
    INFINITY,
    HJExpansion,
    NotGorenstein,
    NotSemiUnimodular,
    RemainderPolynomial,
    crepant_by_ages,
    hj_expand,
    hj_from_coeffs,
    hj_rays,
    minimal_points,
    normalize,
    obstruction_scan,
    remainder_map,
    remainder_polynomial,
    rounddown_map,
    rounddown_polynomial,
)
from .fan import (
    Cone,
    Fan,
    NotSmooth,
    ResolutionTranscript,
    ResourceLimitExceeded,
    fan_discrepancies,
    fujiki_oka_resolve,
    is_crepant,
    oka_center,
    orthant,
    singularity_type,
    verify_resolution,
)
from .lattice import (
    Overlattice,
    ProperFraction,
    age,
    cone_determinant,
    contains,
    height,
    make_proper_fraction,
    overlattice,
    point,
    primitive_representative,
    simplex_lattice_points,
)
from .oracle import cross_check_types, first_existence_check, hilbert_basis, junior_points

__all__ = [name for name in dir() if not name.startswith("_")]
