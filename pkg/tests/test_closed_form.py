import math

import pytest
from hypothesis import assume, given, settings, strategies as st

from twoterm import closed_form as cf
from twoterm.qform_oracle import CurveParams, oracle, radical_dim_kernel

C = CurveParams


def test_integer_helpers():
    assert cf.val(3, 54) == 3 and cf.val(2, 54) == 1 and cf.val(5, 54) == 0
    with pytest.raises(ValueError):
        cf.val(3, 0)
    assert [cf.theta(1, 3), cf.theta(3, 5), cf.theta(5, 3), cf.theta(7, 5)] == [1, -1, -1, -1]
    assert cf.legendre(2, 7) == 1 and cf.legendre(3, 7) == -1 and cf.legendre(14, 7) == 0
    with pytest.raises(ValueError):
        cf.theta(4, 3)
    with pytest.raises(ValueError):
        cf.legendre(1, 9)


def test_radical_formula_examples():
    assert [cf.radical_dim_formula(C(3, 1, 2, 1), n) for n in range(1, 13)] == [
        1, 1, 3, 1, 1, 3, 1, 1, 4, 1, 1, 3]
    assert cf.radical_dim_formula(C(3, 1, 1, 0), 6) == 2
    assert cf.radical_dim_formula(C(3, 1, 2, 1), 5) == 1


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([3, 5, 7]), st.integers(1, 2), st.integers(1, 12),
       st.integers(0, 11), st.integers(1, 40))
def test_radical_formula_matches_kernel(p, r, b, a, n):
    assume(a != b)
    params = C(p, r, b, a)
    assert cf.radical_dim_formula(params, n) == radical_dim_kernel(params, n)


@pytest.mark.parametrize(
    "n,w,lam,points,branch",
    [
        (1, 1, 1, 10, "b0-0/ν2=0,νp≤ℓ"),
        (2, 1, 0, 10, "b0-0/ν2=1,νp≤ℓ"),
        (6, 2, 1, 892, "b0-0/ν2=1,νp=ℓ+1"),
        (12, 2, -1, 527068, "b0-0/ν2=2,νp=ℓ+1"),
        (24, 2, -1, 282426347836, "b0-0/ν2=2,νp=ℓ+1"),
    ],
)
def test_predictions_3_1_1_0(n, w, lam, points, branch):
    pred = cf.predict(C(3, 1, 1, 0), n)
    assert (pred.w, pred.lam, pred.points, pred.branch, pred.status) == (
        w, lam, points, branch, cf.COVERED)


def test_prediction_far_beyond_enumeration():
    pred = cf.predict(C(3, 1, 1, 0), 1000)
    assert pred.covered and pred.lam == 0 and pred.w == 1
    assert pred.points == 3 * 3**999 + 1
    big = cf.predict(C(3, 1, 1, 0), 1_000_000)
    assert big.covered and big.points == 3 * 3**999_999 + 1


def test_two_term_prediction_36():
    pred = cf.predict(C(3, 1, 2, 1), 36)
    assert pred.branch == "ba/κ=0,ν2=2,νp=ℓ+1"
    assert pred.points == 150094628323430320
    assert cf.classify(C(3, 1, 2, 1), 36) == cf.MINIMAL


def test_outside_hypothesis():
    pred = cf.predict(C(3, 1, 3, 1), 4)
    assert pred.status == cf.OUTSIDE and pred.branch == "ba/hypothesis"
    assert pred.lam is None and pred.points is None
    assert cf.difference(C(3, 1, 3, 1), 4) is None


@pytest.mark.parametrize(
    "key,s,maximal_half",
    [((3, 1, 1, 0), 12, True), ((5, 1, 1, 0), 10, False), ((3, 1, 2, 1), 36, True),
     ((5, 1, 2, 1), 30, False), ((7, 1, 1, 0), 28, True), ((3, 2, 1, 0), 6, False),
     ((3, 1, 4, 1), 180, True), ((5, 1, 3, 2), 50, False)],
)
def test_periods(key, s, maximal_half):
    info = cf.period(C(*key))
    assert (info.s, info.maximal_half) == (s, maximal_half)
    assert cf.period_modulus(C(*key)) % s == 0


def test_period_not_found_below_bound():
    with pytest.raises(cf.PeriodNotFound):
        cf.period(C(3, 1, 1, 0), bound=11)


def test_stated_period_too_small():
    params = C(3, 1, 2, 1)
    assert cf.period_modulus(params, cf.EMPTY_LEDGER) == 9
    assert cf.period_modulus(params) == 36


# --- ledger --------------------------------------------------------------

def test_ledger_rows_pin_stated_values():
    """Every correction names the row value it replaces, and that value is what v0 holds."""
    for branch, entry in cf.DEFAULT_LEDGER.entries.items():
        coarse = cf.STATED_ROWS.get(branch)
        if entry.original == "absent":
            assert coarse is None
            continue
        if coarse is None:
            # a fine id refining a coarse two-term row
            v2 = "=0" if ",ν2=0," in branch else "≥1"
            coarse = cf.STATED_ROWS[f"ba/ν2{v2},{branch.rsplit(',', 1)[1]}"]
        assert entry.original == coarse, branch
        assert entry.corrected != entry.original


def test_ledger_version_and_raw_mode():
    assert cf.DEFAULT_LEDGER.version == "1"
    assert not cf.EMPTY_LEDGER
    assert cf.EMPTY_LEDGER.lookup("b0-2/ν2=2,νp≤ℓ") == "(-1)^((q-1)/2)"
    assert cf.DEFAULT_LEDGER.lookup("b0-2/ν2=2,νp≤ℓ") == "+1"
    assert cf.DEFAULT_LEDGER.lookup("b0-0/ν2=0,νp≤ℓ") == "theta(t)"


def test_raw_tables_disagree_on_known_rows():
    # q = 3: the stated (-1)^((q-1)/2) gives -1 where the truth is +1
    params = C(3, 1, 4, 0)
    raw = cf.predict(params, 8, cf.EMPTY_LEDGER)
    fixed = cf.predict(params, 8)
    assert fixed.lam == oracle(params, 8).lam == 1
    assert raw.lam == -1 and raw.branch == "b0-2/ν2=2,νp≤ℓ"


def test_parse_ledger_errors():
    with pytest.raises(ValueError, match="x:2: expected 4 columns"):
        cf.parse_ledger("version: 9\nb0-0/ν2=0,νp≤ℓ | 0 | +1\n", "x")
    with pytest.raises(ValueError, match="unknown value"):
        cf.parse_ledger("b0-0/ν2=0,νp≤ℓ | 0 | +7 | e\n")
    with pytest.raises(ValueError, match="duplicate"):
        cf.parse_ledger("a | 0 | +1 | e\na | 0 | -1 | e\n")
    led = cf.parse_ledger("# comment\nversion: 7\nb0-0/ν2=0,νp≤ℓ | theta(t) | -1 | test\n")
    assert led.version == "7" and led.lookup("b0-0/ν2=0,νp≤ℓ") == "-1"


def test_load_ledger_from_file(tmp_path):
    path = tmp_path / "ledger.txt"
    path.write_text(cf.LEDGER_TEXT, encoding="utf-8")
    led = cf.load_ledger(path)
    assert led.entries == cf.DEFAULT_LEDGER.entries


def test_parity_conflict_reported_with_custom_ledger():
    led = cf.parse_ledger("b0-0/ν2=1,νp≤ℓ | 0 | +1 | forced conflict\n")
    pred = cf.predict(C(3, 1, 1, 0), 2, led)
    assert pred.status == cf.PARITY_CONFLICT and pred.points is None


# --- agreement with the oracle ---------------------------------------------

@settings(max_examples=150, deadline=None)
@given(st.sampled_from([3, 5, 7, 11]), st.integers(1, 8), st.integers(0, 7), st.integers(1, 16))
def test_prediction_matches_oracle(p, b, a, n):
    assume(a != b and p**n <= 2 * 10**5)
    params = C(p, 1, b, a)
    pred = cf.predict(params, n)
    if not pred.covered:
        assert not cf.hypothesis_ok(params)
        return
    o = oracle(params, n)
    assert (pred.w, pred.lam, pred.zeros, pred.points) == (o.w, o.lam, o.zeros, o.points)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([3, 5]), st.integers(1, 3), st.integers(0, 2), st.integers(1, 6))
def test_prediction_matches_oracle_r2(p, b, a, n):
    assume(a != b and p ** (2 * n) <= 2 * 10**5)
    params = C(p, 2, b, a)
    pred = cf.predict(params, n)
    if not pred.covered:
        return
    o = oracle(params, n)
    assert (pred.w, pred.lam, pred.points) == (o.w, o.lam, o.points)


def test_reduce_identity_3_1_1_0():
    params = C(3, 1, 1, 0)
    s = 12
    t = {n: oracle(params, n).points - (3**n + 1) for n in range(1, 13)}
    for n in range(1, 13):
        m = math.gcd(n, s)
        assert cf.reduce(t[m], m, n // m, params) == t[n]
    assert cf.reduce(t[12], 12, 2, params) == cf.difference(params, 24)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([(3, 1, 1, 0), (5, 1, 1, 0), (3, 1, 2, 1), (7, 1, 2, 0), (5, 1, 4, 1)]),
       st.integers(1, 400))
def test_reduce_agrees_with_prediction(key, n):
    params = C(*key)
    s = cf.period_modulus(params)
    m = math.gcd(n, s)
    t_m, t_n = cf.difference(params, m), cf.difference(params, n)
    assert cf.reduce(t_m, m, n // m, params) == t_n


def test_reduce_rejects_half_integral_power():
    with pytest.raises(cf.ParityError):
        cf.reduce(1, 1, 2, C(3, 1, 1, 0))
