"""Bracket polynomials over the integers: exact evaluation, normal forms,
derivatives along shifts, constraint sets and recurrence experiments."""

__version__ = "0.1.0"

from .calculus import (Derivative, ReductionResult, build_qij, derivative, goodness_set,
                       is_good, normalize_to_sgp, pet_reduce, pet_step, r_schedule,
                       select_shifts, shift_expand)
from .coeffs import Coefficient, named_constant
from .config import RunConfig, load_config
from .dynamics import (Arc, Cylinder, SymbolicSystem, chacon_block, density_coverage,
                       hitting_times, orbit_tuple, syndetic_check_NcapC)
from .errors import *  # noqa: F401,F403
from .evaluate import evaluate, frac, frac_within, nearest_of, value_exact
from .expr import Bracket, Monomial, Product, Scale, Sum, format_expr, substitute_scale
from .intervals import CertifiedReal, PrecisionPolicy, fractional_part, nearest_integer
from .intsets import ConstraintSet, WindowReport, classify, enumerate_members
from .parse import parse
from .sgp import Hat, SGPNormal, Term, as_sgp, make_hat, merge
from .structure import (WeightVector, approx, degree, equivalent, leading_sum, much_greater,
                        nondegenerate, pet_less, weight_vector)

eval = evaluate
