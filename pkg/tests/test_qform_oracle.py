import math

import pytest
from hypothesis import given, settings, strategies as st

from twoterm.qform_oracle import (
    BudgetExceeded,
    CurveParams,
    NotApplicable,
    SignError,
    congruence_check,
    count_level_sets,
    count_zeros,
    curve_points,
    descent_check,
    extract_sign,
    make_instance,
    oracle,
    radical_dim_gram,
    radical_dim_kernel,
    radical_dim_linear,
    sign_discriminant,
    tally,
)

# (zeros, w, lambda) for n = 1, 2, ..., computed by enumeration
FROZEN = {
    (3, 1, 1, 0): [(3, 1, 1), (3, 1, 0), (9, 2, 0), (27, 1, 0), (63, 1, -1), (297, 2, 1),
                   (675, 1, -1), (2187, 1, 0), (6561, 2, 0), (19683, 1, 0), (59535, 1, 1),
                   (175689, 2, -1)],
    (5, 1, 1, 0): [(5, 1, 1), (5, 1, 0), (5, 1, -1), (125, 1, 0), (625, 2, 0), (3125, 1, 0),
                   (15125, 1, -1), (78125, 1, 0)],
    (3, 1, 2, 1): [(3, 1, 1), (3, 1, 0), (27, 3, 1), (27, 1, 0), (63, 1, -1), (243, 3, 0),
                   (675, 1, -1), (2187, 1, 0), (6561, 4, 0), (19683, 1, 0)],
    (3, 2, 1, 0): [(9, 1, 1), (9, 1, 0), (81, 2, 0), (729, 1, 0), (7209, 1, 1)],
    (7, 1, 1, 0): [(7, 1, 1), (7, 1, 0), (91, 1, 1), (343, 1, 0), (2107, 1, -1), (16807, 1, 0)],
}

SMALL = [(p, b, a, n) for p in (3, 5) for b, a in [(1, 0), (2, 0), (2, 1), (3, 1), (3, 2)]
         for n in range(1, 7) if p**n <= 5**5]


@pytest.mark.parametrize("key", sorted(FROZEN))
def test_frozen_oracle_values(key):
    params = CurveParams(*key)
    got = [oracle(params, n) for n in range(1, len(FROZEN[key]) + 1)]
    assert [(o.zeros, o.w, o.lam) for o in got] == FROZEN[key]
    for o in got:
        assert o.points == params.q * o.zeros + 1


def test_point_count_witnesses():
    params = CurveParams(3, 1, 1, 0)
    assert oracle(params, 1).points == 10
    assert oracle(params, 6).points == 892
    assert oracle(params, 12).points == 527068


def test_degenerate_and_swapped_params():
    with pytest.raises(ValueError):
        CurveParams(3, 1, 1, 1)
    with pytest.raises(ValueError):
        CurveParams(4, 1, 1, 0)
    sw = CurveParams(3, 1, 0, 1)
    assert sw.key == (3, 1, 1, 0) and sw.swapped
    assert sw == CurveParams(3, 1, 1, 0)


def test_identically_zero_form():
    assert count_zeros(make_instance(CurveParams(3, 1, 2, 0), 1)) == 3
    assert make_instance(CurveParams(3, 1, 7, 1), 3).terms == ()


def test_level_sets_examples():
    assert count_level_sets(make_instance(CurveParams(3, 1, 1, 0), 1)) == {0: 3, 1: 0, 2: 0}
    # lambda = 0 here, so the nonzero fibers need not be equal
    assert count_level_sets(make_instance(CurveParams(3, 1, 1, 0), 2)) == {0: 3, 1: 6, 2: 0}
    assert count_level_sets(make_instance(CurveParams(5, 1, 1, 0), 3)) == {
        0: 5, 1: 30, 2: 30, 3: 30, 4: 30}
    assert count_level_sets(make_instance(CurveParams(5, 1, 2, 1), 4)) == {
        0: 125, 1: 150, 2: 100, 3: 100, 4: 150}


def test_level_sets_relabelled_on_swap():
    direct = count_level_sets(make_instance(CurveParams(3, 1, 1, 0), 3))
    swapped = count_level_sets(make_instance(CurveParams(3, 1, 0, 1), 3))
    assert direct == {0: 9, 1: 0, 2: 18}
    assert swapped == {0: 9, 1: 18, 2: 0}


@pytest.mark.parametrize("n,w", [(1, 1), (2, 1), (3, 2), (6, 2)])
def test_radical_examples(n, w):
    params = CurveParams(3, 1, 1, 0)
    assert radical_dim_gram(make_instance(params, n)) == w
    assert radical_dim_kernel(params, n) == w


def test_radical_three_ways_2_1():
    params = CurveParams(3, 1, 2, 1)
    inst = make_instance(params, 5)
    assert radical_dim_gram(inst) == radical_dim_kernel(params, 5) == radical_dim_linear(inst) == 1


def test_extract_sign_cases():
    assert extract_sign(3, 3, 1, 1) == 1
    assert extract_sign(3**4, 3, 5, 2) == 0
    with pytest.raises(SignError):
        extract_sign(4, 3, 2, 2)
    assert curve_points(3, 3) == 10
    assert curve_points(0, 3) == 1


def test_budget_gate():
    with pytest.raises(BudgetExceeded):
        oracle(CurveParams(3, 1, 1, 0), 20, budget=10**6)


@pytest.mark.parametrize("p,b,a,n", SMALL)
def test_oracle_invariants(p, b, a, n):
    params = CurveParams(p, 1, b, a)
    inst = make_instance(params, n)
    o = oracle(params, n)
    assert o.w == radical_dim_kernel(params, n) == radical_dim_linear(inst)
    assert (o.lam == 0) == ((n + o.w) % 2 == 1)
    if o.lam:
        assert sign_discriminant(inst) == o.lam
    fibers = count_level_sets(inst)
    assert sum(fibers.values()) == p**n
    assert fibers[0] == o.zeros
    if o.lam:
        expect = p ** (n - 1) - o.lam * p ** ((n + o.w) // 2 - 1)
        assert all(fibers[c] == expect for c in range(1, p))


@pytest.mark.parametrize("p,b,a,n", [(3, 1, 0, 7), (5, 2, 1, 5), (3, 2, 1, 8)])
def test_tally_independent_of_workers(p, b, a, n):
    inst = make_instance(CurveParams(p, 1, b, a), n)
    assert tally(inst, workers=1).tolist() == tally(inst, workers=3).tolist()


def test_descent_examples():
    # L(x) = x^9 over F_9 and F_{3^6}: the big-base sign is 0, so nothing is forced
    assert descent_check(3, 1, ((1, 2),), 2, 1) == (0, 1)
    assert descent_check(3, 1, ((1, 2),), 2, 3) == (0, 1)
    assert descent_check(3, 1, ((1, 2), (-1, 0)), 2, 1) == (1, 1)
    assert descent_check(3, 1, ((1, 4), (-1, 2)), 2, 3) == (1, 1)
    with pytest.raises(NotApplicable):
        descent_check(3, 1, ((1, 1), (-1, 0)), 2, 1)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([((1, 0),), ((1, 1),), ((1, 1), (-1, 0)), ((1, 2), (-1, 1)), ((2, 1), (1, 0))]),
       st.integers(1, 3), st.integers(1, 2))
def test_descent_property(terms, n, d):
    scaled = tuple((c, e * d) for c, e in terms)
    if 3 ** (d * n) > 3**6:
        return
    big, small = descent_check(3, 1, scaled, d, n)
    if big:
        assert small == big


def test_congruence_examples():
    assert congruence_check(CurveParams(3, 1, 1, 0), 1, 7)
    assert congruence_check(CurveParams(3, 1, 2, 1), 1, 5)
    with pytest.raises(NotApplicable):
        congruence_check(CurveParams(3, 1, 1, 0), 2, 5)
    assert congruence_check(CurveParams(3, 1, 1, 0), 2, 5, require_nonzero=False)
    with pytest.raises(NotApplicable):
        congruence_check(CurveParams(3, 1, 1, 0), 1, 3)


def test_corollary_on_sweep_subset():
    """lambda_{nd} = lambda_n when n, w_n are even and w_{nd} = d w_n for d | t, (t, 2p) = 1."""
    checked = 0
    for p, b, a in [(3, 10, 0), (5, 6, 0), (5, 4, 2), (7, 6, 0), (3, 2, 1), (5, 2, 1)]:
        params = CurveParams(p, 1, b, a)
        for n in range(2, 9, 2):
            for t in (3, 5, 7):
                if math.gcd(t, 2 * p) != 1 or p ** (n * t) > 5 * 10**6:
                    continue
                base = oracle(params, n)
                if base.w % 2:
                    continue
                divisors = [d for d in range(1, t + 1) if t % d == 0]
                if any(radical_dim_kernel(params, n * d) != d * base.w for d in divisors):
                    continue
                for d in divisors:
                    assert oracle(params, n * d).lam == base.lam
                checked += 1
    assert checked >= 4
