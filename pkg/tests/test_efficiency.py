from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from effico.distribution import DiscreteDistribution, in_permutation_hull
from effico.efficiency import (
    Problem,
    ThreeStateTarget,
    attainable_cost_efficient_payoffs,
    attainable_permutations,
    convexified_maximin_cost,
    convexified_minimax_cost,
    is_attainable_payoff,
    is_perfectly_cost_efficient,
    kkm_diagnostics,
    maximin_cost,
    minimax_cost,
    solve_problem,
    three_state_closed_form,
)
from effico.errors import DimensionMismatchError, TooManyStatesError
from effico.market import DiscreteMarket, kernel_family, price, superhedge_cost

F = Fraction

CANON = DiscreteMarket.canonical_three_state()
FAMILY = kernel_family(CANON)

ALL_PROBLEMS = list(Problem)


def closed_values(x, y, z):
    """Reference values restated independently of the implementation."""
    d1 = 2 * x - 3 * y + z
    if d1 > 0:
        shared = F(2 * x + y + z, 4)
        mm = F(2 * x + z, 3)
    elif d1 == 0:
        shared = F(y)
        mm = F(y)
    else:
        shared = F(2 * x + 2 * y + z, 5)
        mm = F(y)
    return shared, mm


def strict_triples():
    def build(vals):
        a, b, c = sorted(vals)
        return (a, b, c)

    return (
        st.sets(st.fractions(min_value=-10, max_value=10), min_size=3, max_size=3)
        .map(tuple)
        .map(build)
    )


def test_target_validation_and_deltas():
    t = ThreeStateTarget(F(1), F(2), F(4))
    assert t.delta1 == 0 and t.delta2 == 3
    assert t.is_exact and t.values() == (F(1), F(2), F(4))
    assert t.distribution() == DiscreteDistribution((1, 2, 4))
    with pytest.raises(ValueError):
        ThreeStateTarget(1, 2, 2)
    with pytest.raises(ValueError):
        ThreeStateTarget(3, 2, 1)


def test_closed_form_1_2_3():
    t = ThreeStateTarget(1, 2, 3)
    mx = three_state_closed_form(t, Problem.MAXIMIN)
    assert mx.value == F(9, 5)
    assert mx.contains((3, 1, 2), u=F(1, 5))
    assert mx.contains((3, 2, 1), u=F(1, 5))
    assert not mx.contains((3, 2, 1), u=F(1, 4))
    assert not mx.contains((1, 2, 3), u=F(1, 5))

    cmx = three_state_closed_form(t, Problem.CONVEXIFIED_MAXIMIN)
    assert cmx.value == F(9, 5)
    # the optimizer face joins (3,2,1) and (3,1,2) at xi(1/5)
    for payoff in ((3, 2, 1), (3, 1, 2), (3, F(3, 2), F(3, 2))):
        assert cmx.contains(payoff, u=F(1, 5))

    cmm = three_state_closed_form(t, Problem.CONVEXIFIED_MINIMAX)
    assert cmm.value == F(9, 5)
    assert len(cmm.optimizers) == 1
    assert cmm.optimizers[0].payoff.base == (F(3), F(9, 5), F(6, 5))
    assert cmm.optimizers[0].kernel.u_range == (F(0), F(1, 3))

    mm = three_state_closed_form(t, Problem.MINIMAX)
    assert mm.value == F(2)
    assert len(mm.optimizers) == 1
    assert mm.optimizers[0].payoff.base == (F(3), F(2), F(1))
    assert mm.optimizers[0].kernel.u == 0
    assert mm.optimizers[0].kernel.boundary


def test_closed_form_1_2_4_shared_family():
    t = ThreeStateTarget(1, 2, 4)
    for problem in ALL_PROBLEMS:
        sol = three_state_closed_form(t, problem)
        assert sol.value == F(2)
        for u in (F(1, 5), F(9, 40), F(1, 4)):
            assert sol.contains((4, 2, 1), u=u), problem
    assert is_perfectly_cost_efficient(t)
    assert attainable_cost_efficient_payoffs(t) == [((F(4), F(2), F(1)), (F(1, 5), F(1, 4)))]


def test_closed_form_1_2_4_extra_optimizers():
    t = ThreeStateTarget(1, 2, 4)
    mx = three_state_closed_form(t, Problem.MAXIMIN)
    assert mx.contains((4, 1, 2), u=F(1, 5))
    assert mx.contains((2, 4, 1), u=F(1, 4))
    assert not mx.contains((4, 1, 2), u=F(1, 4))

    cmx = three_state_closed_form(t, Problem.CONVEXIFIED_MAXIMIN)
    assert cmx.contains((3, 3, 1), u=F(1, 4))  # on the (4,2,1)+t(-1,1,0) face
    assert cmx.contains((4, F(3, 2), F(3, 2)), u=F(1, 5))
    assert not cmx.contains((3, 3, 1), u=F(1, 5))

    mm = three_state_closed_form(t, Problem.MINIMAX)
    assert mm.contains((4, 2, 1), u=0)
    assert mm.contains((4, 2, 1), u=F(1, 3))


def test_closed_form_1_2_5():
    t = ThreeStateTarget(1, 2, 5)
    assert t.delta1 == 1
    mx = three_state_closed_form(t, Problem.MAXIMIN)
    assert mx.value == F(9, 4)
    assert mx.contains((5, 2, 1), u=F(1, 4))
    assert mx.contains((2, 5, 1), u=F(1, 4))

    cmm = three_state_closed_form(t, Problem.CONVEXIFIED_MINIMAX)
    assert cmm.value == F(9, 4)
    assert cmm.optimizers[0].payoff.base == (F(19, 4), F(9, 4), F(1))
    assert cmm.optimizers[0].kernel.u_range == (F(0), F(1, 3))

    mm = three_state_closed_form(t, Problem.MINIMAX)
    assert mm.value == F(7, 3)
    assert mm.optimizers[0].payoff.base == (F(5), F(2), F(1))
    assert mm.optimizers[0].kernel.u == F(1, 3)
    assert mm.optimizers[0].kernel.boundary


def test_minimax_subcases_below_delta1():
    # delta1 < 0, delta2 = 0: the identity arrangement prices flat
    sol = three_state_closed_form(ThreeStateTarget(1, 2, F(5, 2)), Problem.MINIMAX)
    assert sol.value == F(2)
    assert sol.contains((1, 2, F(5, 2)), u=F(1, 7))
    assert sol.contains((1, 2, F(5, 2)), u=F(1, 3))
    assert sol.contains((F(5, 2), 2, 1), u=0)
    assert not sol.contains((F(5, 2), 2, 1), u=F(1, 5))

    # delta1 < 0, delta2 < 0: both extreme arrangements sit at xi(0)
    sol = three_state_closed_form(ThreeStateTarget(1, 2, F(9, 4)), Problem.MINIMAX)
    assert sol.value == F(2)
    assert sol.contains((1, 2, F(9, 4)), u=0)
    assert sol.contains((F(9, 4), 2, 1), u=0)
    assert not sol.contains((1, 2, F(9, 4)), u=F(1, 10))


def _assert_matching_solutions(a, b):
    assert a.value == b.value
    for src, dst in ((a, b), (b, a)):
        for opt in src.optimizers:
            u_samples = opt.kernel.sample_u(3)
            for payoff in opt.payoff.sample(4):
                if not u_samples:
                    assert dst.contains(payoff)
                for u in u_samples:
                    assert dst.contains(payoff, u=u)


GENERIC_TRIPLES = [
    (F(1), F(2), F(3)),
    (F(1), F(2), F(4)),
    (F(1), F(2), F(5)),
    (F(1), F(2), F(5, 2)),
    (F(1), F(2), F(9, 4)),
    (F(-2), F(1, 2), F(3)),
    (F(-5), F(-1), F(13)),  # delta1 = -4, delta2 = 24
    (F(0), F(1), F(3)),  # delta1 = 0
]


@pytest.mark.parametrize("triple", GENERIC_TRIPLES, ids=str)
@pytest.mark.parametrize("problem", ALL_PROBLEMS, ids=lambda p: p.value)
def test_generic_solvers_match_closed_forms(triple, problem):
    dist = DiscreteDistribution(triple)
    generic = solve_problem(CANON, dist, problem)
    closed = three_state_closed_form(ThreeStateTarget(*triple), problem)
    _assert_matching_solutions(generic, closed)


@given(triple=strict_triples())
@settings(max_examples=120, deadline=None)
def test_value_chain_between_problems(triple):
    x, y, z = triple
    t = ThreeStateTarget(x, y, z)
    shared, mm = closed_values(x, y, z)
    assert three_state_closed_form(t, Problem.MAXIMIN).value == shared
    assert three_state_closed_form(t, Problem.CONVEXIFIED_MAXIMIN).value == shared
    assert three_state_closed_form(t, Problem.CONVEXIFIED_MINIMAX).value == shared
    assert three_state_closed_form(t, Problem.MINIMAX).value == mm
    assert mm >= shared
    assert (mm == shared) == (t.delta1 == 0)
    assert is_perfectly_cost_efficient(t) == (z == 3 * y - 2 * x)


@given(triple=strict_triples())
@settings(max_examples=60, deadline=None)
def test_optimizers_reprice_to_the_stated_value(triple):
    t = ThreeStateTarget(*triple)
    mx = three_state_closed_form(t, Problem.MAXIMIN)
    for opt in mx.optimizers:
        for u in opt.kernel.sample_u(3):
            weights = FAMILY.kernel_at(u).weights
            for payoff in opt.payoff.sample(3):
                assert price(weights, payoff) == mx.value

    cmm = three_state_closed_form(t, Problem.CONVEXIFIED_MINIMAX)
    z_star = cmm.optimizers[0].payoff.base
    assert in_permutation_hull(z_star, t.distribution())
    res = superhedge_cost(FAMILY, z_star)
    assert res.value == cmm.value
    assert res.u_range == (F(0), F(1, 3))

    mm = three_state_closed_form(t, Problem.MINIMAX)
    for opt in mm.optimizers:
        assert superhedge_cost(FAMILY, opt.payoff.base).value == mm.value


def test_generic_four_state_vertex_market():
    market = DiscreteMarket(4, (F(2),), ((F(4), F(3), F(1), F(0)),))
    dist = DiscreteDistribution((1, 2, 3, 5))
    fam = kernel_family(market)

    mx = maximin_cost(market, dist)
    cmx = convexified_maximin_cost(market, dist)
    cmm = convexified_minimax_cost(market, dist)
    mm = minimax_cost(market, dist)
    assert mx.value == cmx.value
    assert mx.value <= cmm.value <= mm.value

    for opt in mx.optimizers:
        assert price(opt.kernel.weights, opt.payoff.base) == mx.value

    z_star = cmm.optimizers[0].payoff.base
    assert in_permutation_hull(z_star, dist)
    assert superhedge_cost(fam, z_star).value == cmm.value

    brute = min(
        superhedge_cost(fam, p).value for p in set(permutations(dist.values))
    )
    assert mm.value == brute


def test_state_count_caps():
    row = tuple(F(i + 1) for i in range(8))
    market = DiscreteMarket(8, (F(9, 2),), (row,))
    dist = DiscreteDistribution(tuple(range(1, 9)))
    for problem in ALL_PROBLEMS:
        with pytest.raises(TooManyStatesError):
            solve_problem(market, dist, problem)


def test_shape_mismatch_between_market_and_distribution():
    with pytest.raises(DimensionMismatchError):
        maximin_cost(CANON, DiscreteDistribution((1, 2)))


def test_perfect_efficiency_market_form():
    dist = DiscreteDistribution((1, 2, 4))
    assert is_perfectly_cost_efficient(CANON, dist)
    assert not is_perfectly_cost_efficient(CANON, DiscreteDistribution((1, 2, 3)))
    with pytest.raises(TypeError):
        is_perfectly_cost_efficient(CANON)


def test_perfect_efficiency_float_tolerance():
    assert is_perfectly_cost_efficient((1.0, 2.0, 4.0))
    assert not is_perfectly_cost_efficient((1.0, 2.0, 4.0 + 1e-6))


def test_attainable_payoffs():
    assert is_attainable_payoff((4, 2, 1))
    assert is_attainable_payoff((0, 0, 0))
    assert is_attainable_payoff((1, 2, F(5, 2)))
    assert not is_attainable_payoff((1, 2, 3))
    assert is_attainable_payoff((4.0, 2.0, 1.0 + 1e-15))
    with pytest.raises(DimensionMismatchError):
        is_attainable_payoff((1, 2))


def test_attainable_permutations_by_case():
    assert attainable_permutations((1, 2, 4)) == [(F(4), F(2), F(1))]
    assert attainable_permutations((1, 2, F(5, 2))) == [(F(1), F(2), F(5, 2))]
    assert attainable_permutations((1, 2, 3)) == []
    assert attainable_cost_efficient_payoffs((1, 2, 3)) == []
    assert attainable_cost_efficient_payoffs((1, 2, 5)) == []


@given(triple=strict_triples())
@settings(max_examples=80, deadline=None)
def test_attainability_iff_flat_pricing(triple):
    t = ThreeStateTarget(*triple)
    ce = attainable_cost_efficient_payoffs(t)
    if t.delta1 == 0:
        assert ce == [((t.z, t.y, t.x), (F(1, 5), F(1, 4)))]
    else:
        assert ce == []


# ------------------------------------------------------------------ KKM


def test_kkm_intersections():
    assert kkm_diagnostics((1, 2, 5)).intersection == (F(1, 4), F(1, 4))
    assert kkm_diagnostics((1, 2, 4)).intersection == (F(1, 5), F(1, 4))
    assert kkm_diagnostics((1, 2, 3)).intersection == (F(1, 5), F(1, 5))


def test_kkm_expected_cost_branches():
    diag = kkm_diagnostics((1, 2, 3))
    assert diag.expected_cost(F(1, 6), F(1, 10)) == F(5, 3)  # 1 + 4s
    assert diag.expected_cost(F(1, 6), F(1, 5)) == F(7, 4)  # 3/2 + 3s/2
    assert diag.expected_cost(F(1, 4), F(9, 40)) == F(7, 4)  # 2 - s
    assert diag.expected_cost(F(1, 6), F(1, 4)) == F(2)  # 5/2 - 3s
    assert diag.expected_cost(F(3, 10), F(3, 10)) == F(3, 2)  # 3 - 5s
    # float parameters snap onto the exact branch anchors
    assert diag.expected_cost(0.25, 0.2) == F(15, 8)
    assert diag.expected_cost(0.2, 0.2) == F(9, 5)


def test_kkm_expected_cost_validation():
    diag = kkm_diagnostics((1, 2, 3))
    for s, u in ((0, F(1, 5)), (F(1, 3), F(1, 5)), (F(1, 6), 0), (F(1, 6), F(2, 5))):
        with pytest.raises(ValueError):
            diag.expected_cost(s, u)


def test_kkm_response_intervals():
    neg = kkm_diagnostics((1, 2, 3))  # delta1 < 0, anchor 1/5
    assert neg.response_interval(F(1, 10)) == (F(1, 10), F(1, 5))
    assert neg.response_interval(F(3, 10)) == (F(1, 5), F(3, 10))

    pos = kkm_diagnostics((1, 2, 5))  # delta1 > 0, anchor 1/4
    assert pos.response_interval(F(1, 10)) == (F(1, 10), F(1, 4))
    assert pos.response_interval(F(3, 10)) == (F(1, 4), F(3, 10))

    flat = kkm_diagnostics((1, 2, 4))  # delta1 = 0
    assert flat.response_interval(F(1, 10)) == (F(1, 10), F(1, 4))
    assert flat.response_interval(F(9, 40)) == (F(1, 5), F(1, 4))
    assert flat.response_interval(F(3, 10)) == (F(1, 5), F(3, 10))


@given(
    triple=strict_triples(),
    s=st.fractions(min_value=F(1, 100), max_value=F(33, 100)),
)
@settings(max_examples=80, deadline=None)
def test_kkm_intersection_is_inside_every_response(triple, s):
    diag = kkm_diagnostics(triple)
    lo, hi = diag.response_interval(s)
    assert lo <= hi
    assert lo <= diag.intersection[0] and diag.intersection[1] <= hi
