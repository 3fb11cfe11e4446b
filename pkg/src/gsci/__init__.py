"""Numerical verification of sphere covering inequalities for Liouville equations."""

from .errors import (
    BlowUpError,
    ContractError,
    DomainError,
    EmptyDomainError,
    GsciError,
    PreconditionError,
    UnsupportedDomainError,
)
from .fixtures import FixtureSpec, crossing_pair, shipped_fixtures, steepened_tail
from .inequalities import (
    bol_check,
    concentric_sweep,
    crossing_check,
    pipeline_endtoend,
    remark13_check,
    sci_check,
    sharpness_scan,
)
from .liouville import (
    EIGHT_PI,
    Bubble,
    GapParams,
    bubble_area,
    bubble_derivative,
    bubble_pde_residual,
    bubble_value,
    cap_sum,
    cap_sum_closed_form,
    gap_on_circle,
    lemma22_matching_x,
    lemma_f,
    theorem24_margin,
)
from .normalization import Normalization, convert_normalization
from .planar import (
    Disk,
    Grid2D,
    MobiusParams,
    PlanarField,
    area_integral,
    boundary_gap_check,
    boundary_weighted_length,
    max_difference,
    mobius_pullback_bubble,
    read_snapshot,
    restrict_mask,
    source_ordering_check,
    write_snapshot,
)
from .radial import (
    RadialProfile,
    SourceSpec,
    check_supersolution,
    comparison_check,
    enclosed_mass,
    radial_flux,
    solve_radial,
)
from .rearrangement import (
    choose_scale_a,
    distribution_beta,
    psi_compose,
    radius_for_mass,
    symmetrize,
)

__version__ = "0.1.0"
