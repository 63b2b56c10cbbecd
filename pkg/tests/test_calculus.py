from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from genpoly import (Coefficient, as_sgp, build_qij, derivative, goodness_set, is_good,
                     normalize_to_sgp, parse, pet_reduce, pet_step, r_schedule, select_shifts,
                     shift_expand, weight_vector)
from genpoly.calculus import RSchedule, goodness_hats, prepare_system
from genpoly.errors import NotGoodShift, PreconditionError, SpacingViolation
from genpoly.evaluate import int_evaluator
from genpoly.sgp import merge
from genpoly.structure import leading_sum

import oracles

SYMS = ("a", "b", "c", "d")
M = Coefficient.symbol("m", integer=True)


def sgp(text):
    return as_sgp(parse(text, symbols=SYMS))


def term_bag(p):
    return Counter(t.text() for t in p.terms)


# --- normalization ------------------------------------------------------------------

def test_normalize_base_case_splits_the_bracket():
    res = normalize_to_sgp(parse("[|sqrt2*[|sqrt3*n|] + sqrt5*[|sqrt7*n|]|]"))
    assert term_bag(res.h) == term_bag(sgp("[|sqrt2*[|sqrt3*n|]|] + [|sqrt5*[|sqrt7*n|]|]"))
    assert res.delta < Fraction(1, 4)
    assert len(res.constraint) == 2
    assert res.check(-1000, 1000) == []


def test_normalize_is_identity_on_sgp_input():
    res = normalize_to_sgp(parse("[|sqrt2*n^2|] + n*[|pi*n|]"))
    assert len(res.constraint) == 0 and res.delta is None
    assert res.h == sgp("[|sqrt2*n^2|] + n*[|pi*n|]")


def test_normalize_worked_instance():
    p = parse("[|n*[|2*pi*n^2 - [|2*pi*n^2|] + sqrt2*n|]|]")
    res = normalize_to_sgp(p)
    want = sgp("n*[|2*pi*n^2|] - n*[|2*pi*n^2|] + n*[|sqrt2*n|]")
    assert term_bag(res.h) == term_bag(want)
    assert leading_sum(res.h) == Coefficient.rational(0)
    # dual route: the oracle evaluates p and h independently on C
    h = res.h.to_expr()
    members = res.constraint.enumerate(-1000, 1000)
    assert len(members) > 100
    for n in members:
        assert oracles.int_value(p, n) == oracles.int_value(h, n)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_normalize_correct_on_random_sums(seed):
    rng = oracles.rng_for(seed)
    inner = " + ".join(oracles.random_hat_text(rng, depth=2, max_power=1) for _ in range(2))
    p = parse(f"[| {inner} |]")
    res = normalize_to_sgp(p)
    assert res.check(-150, 150) == []


# --- goodness -----------------------------------------------------------------------

def test_goodness_hats_of_nested_bracket():
    hats = [h.text() for h in goodness_hats(sgp("[|b*n*[|c*n|]|]"))]
    assert hats == [sgp("b*n*[|c*n|]").text(), sgp("c*n").text()]


def test_goodness_hats_follow_the_nesting():
    hats = [h.text() for h in goodness_hats(sgp("[|sqrt2*n*[|sqrt3*n^2|]|]"))]
    assert hats == [sgp("sqrt2*n*[|sqrt3*n^2|]").text(), sgp("sqrt3*n^2").text()]
    assert [h.text() for h in goodness_hats(sgp("[|sqrt2*n|]"))] == [sgp("sqrt2*n").text()]


def test_is_good_examples():
    assert is_good(1, sgp("[|sqrt2*n|]"))
    assert not is_good(1, sgp("[|1/2*n|]"))
    assert is_good(2, sgp("[|1/2*n|]"))


def test_goodness_set_members_are_good():
    p = sgp("[|sqrt2*n*[|sqrt3*n|]|]")
    C = goodness_set(p, Fraction(1, 8))
    members = [n for n in C.enumerate(1, 10 ** 4)]
    assert members
    assert all(is_good(n, p) for n in members)


# --- shift expansion and derivatives -----------------------------------------------------

def test_shift_of_nested_bracket_symbolic():
    d = derivative(sgp("[|b*n*[|c*n|]|]"), M)
    want = as_sgp(parse("[|b*n*[|c*m|]|] + [|b*m*[|c*n|]|]", symbols=SYMS,
                        integer_symbols=("m",)))
    assert term_bag(d.D) == term_bag(want)
    assert d.law_symbolic


def test_shift_of_square():
    d = derivative(sgp("[|a*n^2|]"), M)
    assert d.D.text() == "[| (2*a*m*n) |]"


def test_square_identity_on_constraint_set():
    h = sgp("[|sqrt2*n^2|]")
    exp = shift_expand(h, [3])
    assert exp.delta is not None and len(exp.constraint) >= 1
    d = derivative(h, 3)
    assert d.D == sgp("[|6*sqrt2*n|]")
    assert d.check(-1000, 1000) == []
    # independent evaluation of both sides
    hx, Dx = h.to_expr(), d.D.to_expr()
    for n in d.certification.enumerate(-1000, 1000):
        lhs = oracles.int_value(hx, n + 3) - oracles.int_value(hx, n) - oracles.int_value(hx, 3)
        assert lhs == oracles.int_value(Dx, n)


def test_derivative_product_of_brackets():
    d = derivative(sgp("[|a*n|]*[|b*n|]"), M)
    a, b = Coefficient.symbol("a"), Coefficient.symbol("b")
    assert len(d.D.terms) == 2
    assert d.law_symbolic
    assert d.target == a * b * M * 2


def test_derivative_four_term_form():
    d = derivative(sgp("[|a*n*[|b*n^2|]|]"), M)
    a, b = Coefficient.symbol("a"), Coefficient.symbol("b")
    assert len(d.D.terms) == 4
    assert d.A_D == a * b * M * 3
    assert d.law_exact


def test_degree_one_derivative_is_zero():
    d = derivative(sgp("[|sqrt2*n|]"), 4)
    assert d.D.is_zero and d.degree_too_low
    f = int_evaluator(parse("[|sqrt2*n|]"))
    for n in d.certification.enumerate(-300, 300) if d.certification else []:
        assert f(n + 4) == f(n) + f(4)


def test_not_good_shift_is_rejected():
    with pytest.raises(NotGoodShift):
        shift_expand(sgp("[|1/2*n^2|]"), [1])


def test_derivative_linearity():
    h1 = sgp("[|sqrt2*n^3|] + [|sqrt3*n^2|]")
    h2 = sgp("[|sqrt2*n^3|] + [|sqrt5*n^2|]")
    lhs = merge(derivative(h1, M).D - derivative(h2, M).D)
    rhs = merge(derivative(merge(h1 - h2), M).D)
    assert term_bag(lhs) == term_bag(rhs)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from([2, 3]), st.integers(1, 12))
def test_degree_descends_and_leading_law(seed, deg, m):
    rng = oracles.rng_for(seed)
    h = as_sgp(parse(f"[| {oracles.random_coeff(rng)}*n^{deg} |] + "
                     f"[| {oracles.random_coeff(rng)}*n*[| {oracles.random_coeff(rng)}*n |] |]"))
    if not is_good(m, h):
        return
    d = derivative(h, m)
    assert d.D.degree < h.degree
    assert d.law_symbolic
    gap = (d.A_D - d.target).enclose(P=256)
    assert max(abs(gap.lower), abs(gap.upper)) <= d.bound


# --- r schedule, shifts and the descent step ------------------------------------------

def test_r_schedule_values():
    assert RSchedule(Fraction(1), Fraction(1))(0) == 10 ** 10
    assert RSchedule(Fraction(2), Fraction(1))(3) == 16 * 10 ** 10


def test_r_schedule_from_leading_sums():
    r = r_schedule([sgp("[|sqrt2*n^2|]"), sgp("[|sqrt3*n^2|]")])
    assert r.M == 2
    assert abs(float(r.L) - (3 ** 0.5 - 2 ** 0.5)) < 1e-12


def test_single_element_descends():
    P = [sgp("[|sqrt2*n^2|]")]
    r = r_schedule(P)
    K = select_shifts(P, 1, r)
    res = build_qij(P, K)
    assert res.q[(0, 0)].degree == 1
    assert res.phi_after.counts == (1,) and res.phi_before.counts == (0, 1)
    assert res.descended


def test_spacing_rule_enforced():
    with pytest.raises(SpacingViolation):
        build_qij([sgp("[|sqrt2*n^2|]")], [5])


def test_separation_after_scaling():
    P, s = prepare_system([sgp("n^2"), sgp("n^2 + n")])
    assert s > 1
    res = pet_step(P)
    assert res.separation_failures == []
    assert res.descended


def test_degenerate_system_rejected():
    with pytest.raises(PreconditionError):
        prepare_system([sgp("n*[|2*pi*n|] + n"), sgp("[|2*pi*n^2|] + 2*n")])


def test_reduction_reaches_degree_one():
    run = pet_reduce([sgp("[|sqrt2*n^2|]"), sgp("[|sqrt3*n^2|] + n"), sgp("n^3")])
    assert run.reached_degree_one
    phis = [s.phi_before for s in run.steps] + [run.steps[-1].phi_after]
    assert all(b < a for a, b in zip(phis, phis[1:]))
    assert weight_vector(run.final).counts[1:] == ()
