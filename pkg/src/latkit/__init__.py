"""latkit: computation in finitely generated lattices.

Word problems for free and finitely presented lattices, the preimage
calculus for homomorphisms onto finite lattices, fiber products with their
finite generating sets, and decision procedures for lower and upper
boundedness.
"""

from . import errors
from .free import (
    FreeLattice,
    StageIndex,
    alternation_rank,
    canonical_form,
    eq_free,
    leq_free,
    stage_elements,
)
from .homs import (
    Hom,
    PairSet,
    alpha_k,
    alpha_stable,
    beta_k,
    beta_stable,
    check_order_fiber_generation,
    fiber_generating_set,
    fiber_product,
    is_lower_bounded_hom,
    kernel,
    non_generation_witness,
    order_fiber,
    sublattice_closure,
    uniform_beta_bound,
    verify_non_generation,
)
from .order import (
    FiniteLattice,
    FinitePoset,
    build_lattice,
    chain,
    check_dean,
    check_whitman,
    d_relation,
    evaluate_term,
    is_bounded_finite,
    is_join_prime,
    is_lower_bounded_finite,
    is_meet_prime,
    is_upper_bounded_finite,
    join_irreducibles,
    meet_irreducibles,
    minimal_join_covers,
)
from .partial_lattice import (
    PartialLattice,
    antichain,
    closure_stage,
    eq_fp,
    from_finite_lattice,
    is_bounded_fp,
    is_lower_bounded_fp,
    is_lower_bounded_sublattice,
    leq_fp,
    partial_whitman_check,
    semilattice_to_lattice,
    standard_hom_image,
)
from .terms import Term, depth, gen, join_of, meet_of, parse, subterms, term_to_text

__version__ = "0.1.0"
