"""Exact arithmetic of weighted projective stacks over Z: bounded-height
point enumeration, lopsided large-sieve bounds, root-cover thin sets,
odd-hyperelliptic moduli censuses, and real-quadratic unit reduction."""

__version__ = "0.1.0"

from .arith import INFINITE, factorize, is_prime, moebius, primes_up_to, valuation
from .covers import (
    Cover,
    WeightedForm,
    has_integer_root,
    image_density_mod_p,
    load_cover_file,
    named_cover,
    omega_from_cover,
    root_cover_member,
    typeI_member,
)
from .hyperelliptic import (
    CensusRow,
    CensusTable,
    HyperellipticPoint,
    census,
    curve_from_point,
    discriminant,
    fit_exponent,
    has_rational_two_torsion,
    is_smooth,
    moduli_weights,
    recommended_Q,
)
from .qf import (
    BoundaryAmbiguityError,
    DomainSpec,
    QuadField,
    QuadInt,
    compute_G_k,
    fundamental_unit,
    height_infty_k,
    in_domain,
    log_embed,
    prime_ideal_norms_up_to,
    reduce_to_domain,
)
from .sieve import (
    LsCheck,
    Omega,
    ResidueSystem,
    SieveParams,
    compute_G,
    load_residue_system,
    sieve_upper_bound,
    survivors,
    testable_ls_inequality,
)
from .wps import (
    DEFAULT_BUDGET,
    BudgetExceededError,
    IntegralPoint,
    WeightVector,
    WpsPoint,
    box_cutoffs,
    box_volume,
    count,
    count_integral,
    enumerate_integral,
    enumerate_points,
    height,
    height_leq,
    normalize,
    wgcd,
)
