from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from genpoly import (Bracket, CertifiedReal, Coefficient, Monomial, Sum, evaluate, format_expr,
                     frac, fractional_part, nearest_integer, parse, substitute_scale)
from genpoly.coeffs import PI, named_constant
from genpoly.errors import ConstantTermError, ExprSyntaxError, SymbolicValueError, TieUndecidable
from genpoly.evaluate import int_evaluator, nearest_of
from genpoly.intervals import PrecisionPolicy

import oracles

SQRT2 = Coefficient.sqrt(2)


# --- parsing ----------------------------------------------------------------------

def test_parse_bracket_monomial():
    assert parse("[| sqrt2 * n |]") == Bracket(Monomial(SQRT2, 1))


def test_parse_sum():
    assert parse("n^2 + [| pi * n |]") == Sum((Monomial(Coefficient.rational(1), 2),
                                              Bracket(Monomial(PI, 1))))


@pytest.mark.parametrize("text", ["[| 3 |]", "n + 1", "5"])
def test_constant_terms_rejected(text):
    with pytest.raises(ConstantTermError):
        parse(text)


@pytest.mark.parametrize("text", ["[| n", "n +", "n ** 2", "foo*n", "n/(sqrt2*n)", ""])
def test_syntax_errors_carry_position(text):
    with pytest.raises(ExprSyntaxError) as info:
        parse(text)
    assert info.value.position is not None


def test_symbols_must_be_declared():
    with pytest.raises(ExprSyntaxError):
        parse("a*n")
    p = parse("a*n", symbols=("a",))
    with pytest.raises(SymbolicValueError):
        evaluate(p, 1)


# --- nearest integer and tie rule ---------------------------------------------------------

@pytest.mark.parametrize("x,k", [(Fraction(23, 10), 2), (Fraction(1, 2), 0), (Fraction(-1, 2), -1),
                                 (Fraction(3, 2), 1), (Fraction(-3, 2), -2), (7, 7)])
def test_nearest_integer_rationals(x, k):
    assert nearest_integer(x) == k


def test_half_fractions_are_plus_half():
    assert fractional_part(Fraction(1, 2)) == Fraction(1, 2)
    assert fractional_part(Fraction(-1, 2)) == Fraction(1, 2)


def test_nearest_five_sqrt2():
    assert nearest_of(parse("sqrt2*n"), 5) == 7


def test_straddling_enclosure_is_undecidable():
    with pytest.raises(TieUndecidable):
        nearest_integer(CertifiedReal(Fraction(49, 100), Fraction(51, 100)))


@given(st.integers(-10 ** 6, 10 ** 6), st.integers(1, 10 ** 6))
def test_nearest_integer_matches_ceil_rule(p, q):
    x = Fraction(p, q)
    k = nearest_integer(x)
    assert -Fraction(1, 2) < x - k <= Fraction(1, 2)


# --- evaluation ---------------------------------------------------------------------------

def test_eval_examples():
    assert evaluate(parse("[| sqrt2 * n |]"), 5) == CertifiedReal.exact(7, 128)
    assert evaluate(parse("n^2"), -3).lower == 9
    assert evaluate(parse("[| pi * n^2 |]"), 1).lower == 3


def test_eval_precision_is_reported():
    v = evaluate(parse("sqrt2*n"), 3)
    assert v.precision_bits >= 128
    assert v.width < Fraction(1, 2 ** 60)


def test_frac_examples():
    f1 = frac(parse("sqrt2 * n"), 1)
    assert f1.contains(Fraction(4142135623730950488, 10 ** 19)) or abs(float(f1) - 0.41421356) < 1e-8
    assert frac(parse("n^2"), 7) == CertifiedReal.exact(0, 128)
    assert abs(float(frac(parse("sqrt2 * n"), 5)) - 0.0710678) < 1e-7


def test_exact_half_tie_in_evaluation():
    p = parse("[| 1/2*n |]")
    assert [int(evaluate(p, n).lower) for n in (-3, -1, 1, 3)] == [-2, -1, 0, 1]


def test_precision_cap_is_honoured():
    # 1/2 + 10^-50 sqrt2 is a half-integer to within 2^-160
    p = parse("[| (1/2 + 1/1" + "0" * 50 + "*sqrt2)*n |]")
    with pytest.raises(TieUndecidable):
        evaluate(p, 1, PrecisionPolicy(start_bits=64, cap_bits=128))
    assert evaluate(p, 1, PrecisionPolicy(start_bits=64, cap_bits=4096)).lower == 1


@given(st.integers(-500, 500))
def test_eval_agrees_with_oracle_nested(n):
    p = parse("[| pi*n^2*[| sqrt3*n |] |] - 2*[| e*n |]*[| golden*n |]")
    assert int_evaluator(p)(n) == oracles.int_value(p, n)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(-300, 300))
def test_random_families_agree_with_oracle(seed, n):
    rng = oracles.rng_for(seed)
    p = parse(oracles.random_sgp_text(rng))
    assert int_evaluator(p)(n) == oracles.int_value(p, n)


# --- certified enclosures ----------------------------------------------------------------

@settings(max_examples=200)
@given(st.sampled_from(oracles.IRRATIONALS), st.integers(-10 ** 9, 10 ** 9))
def test_enclosure_contains_oracle_value(name, n):
    p = parse(f"{name}*n")
    v = evaluate(p, n)
    ref = oracles.to_fraction(oracles.value(p, n))
    assert v.lower <= ref <= v.upper


@settings(max_examples=100)
@given(st.sampled_from(["sqrt2", "pi", "e", "sqrt7"]), st.integers(1, 10 ** 6))
def test_refinement_is_monotone(name, n):
    c = named_constant(name) * n
    encs = [c.enclose(P=P) for P in (128, 256, 512, 1024)]
    for coarse, fine in zip(encs, encs[1:]):
        assert fine.subset_of(coarse)


# --- formatting and substitution -----------------------------------------------------------

@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_format_parse_round_trip(seed):
    p = parse(oracles.random_sgp_text(oracles.rng_for(seed)))
    assert parse(format_expr(p)) == p


@pytest.mark.parametrize("text", ["n^2 + [| pi * n |]", "-(2*[| sqrt2*n |])", "[|a*n|]*[|b*n|]",
                                  "n*[| 2*pi*n^2 |] - n*[| 2*pi*n^2 |]", "-n + 3*n^3"])
def test_round_trip_examples(text):
    p = parse(text, symbols=("a", "b"))
    assert parse(format_expr(p), symbols=("a", "b")) == p


def test_substitute_scale_examples():
    p = substitute_scale(parse("n^2"), 3)
    assert [int(evaluate(p, n).lower) for n in range(-3, 4)] == [9 * n * n for n in range(-3, 4)]
    assert substitute_scale(parse("[| sqrt2*n |]"), 2) == parse("[| 2*sqrt2*n |]")


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 9), st.integers(-50, 50))
def test_substitute_scale_matches_evaluation(seed, k, n):
    p = parse(oracles.random_sgp_text(oracles.rng_for(seed)))
    assert int_evaluator(substitute_scale(p, k))(n) == int_evaluator(p)(k * n)


def test_substitute_scale_rejects_nonpositive():
    with pytest.raises(ValueError):
        substitute_scale(parse("n"), 0)
