"""Brute-force ground truth for Q(x) = Tr(x^(q^b+1) - x^(q^a+1)).

Everything here is computed from the field itself: zero counts and level
sets by visiting every element of F_{q^n}, the radical both from the Gram
matrix of the polar form and as the kernel of a linearized map.  Closed
forms live in :mod:`twoterm.closed_form` and are checked against this.

Enumeration has two evaluation routes.  ``values_direct`` applies Frobenius,
field multiplication and the trace to each element.  The blocked counter
expands Q in coordinates, Q(h + x) = Q(h) + B(h, x) + Q(x), with the
coefficients Q(e_j) and B(e_i, e_j) taken from ``values_direct``; it is
exact and much faster, and the two are cross-checked in the tests.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .finite_field import (
    FieldElement,
    FieldSpec,
    SubfieldView,
    build_field,
    is_prime,
    nullspace_mod_p,
    rank_mod_p,
)

DEFAULT_BUDGET = 5 * 10**7
_LOW_BLOCK = 2**21


class BudgetExceeded(RuntimeError):
    """The field is too large to enumerate under the configured budget."""


class NotApplicable(ValueError):
    """A theorem's hypotheses are not met, so there is nothing to check."""


class SignError(ArithmeticError):
    """No sign in {-1, 0, 1} explains a zero count."""


@dataclass(frozen=True)
class CurveParams:
    """The curve y^q - y = x^(q^b+1) - x^(q^a+1), q = p^r, stored with b > a.

    Swapping b and a negates Q; ``swapped`` records that it happened so
    level sets can be relabelled.
    """

    p: int
    r: int
    b: int
    a: int
    swapped: bool = field(default=False, compare=False)

    def __post_init__(self):
        if not is_prime(self.p) or self.p < 3:
            raise ValueError(f"p={self.p} is not an odd prime")
        if self.r < 1:
            raise ValueError("r must be positive")
        if self.a < 0 or self.b < 0:
            raise ValueError("exponents must be non-negative")
        if self.a == self.b:
            raise ValueError("b = a gives the zero form")
        if self.b < self.a:
            b, a = self.b, self.a
            object.__setattr__(self, "b", a)
            object.__setattr__(self, "a", b)
            object.__setattr__(self, "swapped", not self.swapped)

    @property
    def q(self) -> int:
        return self.p**self.r

    @property
    def key(self) -> tuple[int, int, int, int]:
        return (self.p, self.r, self.b, self.a)

    def terms(self) -> tuple[tuple[int, int], ...]:
        return ((1, self.b), (-1, self.a))

    def __str__(self):
        return f"C(q={self.q}, b={self.b}, a={self.a})"


@dataclass(frozen=True)
class OracleResult:
    n: int
    zeros: int
    w: int
    lam: int
    points: int


@dataclass(frozen=True, eq=False)
class QFormInstance:
    """Q(x) = Tr_{F_{q^n}/F_q}(x L(x)), L(x) = sum c x^(q^e) over ``terms``."""

    p: int
    r: int
    n: int
    terms: tuple[tuple[int, int], ...]
    spec: FieldSpec
    view: SubfieldView
    params: CurveParams | None = None

    @property
    def q(self) -> int:
        return self.p**self.r

    @property
    def d(self) -> int:
        return self.r * self.n

    @property
    def size(self) -> int:
        return self.spec.order

    @property
    def key(self) -> tuple:
        return (self.p, self.r, self.n, self.terms)

    def __getstate__(self):
        return (self.p, self.r, self.n, self.terms, self.params)

    def __setstate__(self, state):
        p, r, n, terms, params = state
        spec = build_field(p, r * n)
        for name, val in zip(
            ("p", "r", "n", "terms", "spec", "view", "params"),
            (p, r, n, terms, spec, spec.subfield(r), params),
        ):
            object.__setattr__(self, name, val)


def make_form(p: int, r: int, n: int, terms, params: CurveParams | None = None) -> QFormInstance:
    """Instance for an arbitrary linearized L given as (coefficient, q-exponent) pairs."""
    if n < 1:
        raise ValueError("n must be positive")
    merged: dict[int, int] = {}
    for c, e in terms:
        if e < 0:
            raise ValueError("q-exponents must be non-negative")
        merged[e % n] = (merged.get(e % n, 0) + c) % p
    reduced = tuple(sorted((c, e) for e, c in merged.items() if c))
    spec = build_field(p, r * n)
    return QFormInstance(p, r, n, reduced, spec, spec.subfield(r), params)


def make_instance(params: CurveParams, n: int) -> QFormInstance:
    """The two-term form of ``params`` over F_{q^n}; exponents reduced mod n."""
    return make_form(params.p, params.r, n, params.terms(), params)


# --- evaluation -------------------------------------------------------------

def values_direct(inst: QFormInstance, xs: np.ndarray) -> np.ndarray:
    """Q at each row of ``xs`` by field arithmetic; rows of the result lie in F_q."""
    s = inst.spec
    lx = np.zeros_like(xs)
    for c, e in inst.terms:
        lx = (lx + c * s.frob_arrays(xs, inst.r * e)) % s.p
    return s.trace_arrays(s.mul_arrays(xs, lx), inst.r)


def evaluate(inst: QFormInstance, x: FieldElement) -> FieldElement:
    """Q(x) for a single element, as an element of the big field."""
    v = values_direct(inst, np.array([x.coeffs], dtype=np.int64))[0]
    return inst.spec.element(v)


def _pivot_coords(inst: QFormInstance, rows: np.ndarray) -> np.ndarray:
    return rows[:, list(inst.view.pivots)]


@dataclass
class _Expansion:
    k_low: int
    diag: np.ndarray  # (d, r): Q(e_j)
    cross: np.ndarray  # (d, d, r): B(e_i, e_j)
    upper: np.ndarray  # cross restricted to i < j
    q_low: np.ndarray  # (r, p^K): Q on the low coordinates
    digits: np.ndarray  # (K, p^K) digit arrays of the low coordinates


_EXPANSIONS: dict[tuple, _Expansion] = {}


def _expansion(inst: QFormInstance) -> _Expansion:
    key = inst.key
    if key in _EXPANSIONS:
        return _EXPANSIONS[key]
    p, d, r = inst.p, inst.d, inst.r
    eye = np.eye(d, dtype=np.int64)
    diag = _pivot_coords(inst, values_direct(inst, eye))
    pairs = (eye[:, None, :] + eye[None, :, :]).reshape(d * d, d)
    both = _pivot_coords(inst, values_direct(inst, pairs)).reshape(d, d, r)
    cross = (both - diag[:, None, :] - diag[None, :, :]) % p

    k_low = 1
    while k_low < d and p ** (k_low + 1) <= _LOW_BLOCK:
        k_low += 1
    size = p**k_low
    idx = np.arange(size, dtype=np.int64)
    digits = np.empty((k_low, size), dtype=np.int32)
    for j in range(k_low):
        digits[j] = idx % p
        idx //= p
    q_low = np.zeros((r, size), dtype=np.int64)
    for j in range(k_low):
        dj = digits[j].astype(np.int64)
        for t in range(r):
            if diag[j, t]:
                q_low[t] += (dj * dj % p) * diag[j, t]
            for i in range(j):
                if cross[i, j, t]:
                    q_low[t] += (digits[i] * dj % p) * cross[i, j, t]
        q_low %= p
    upper = cross * np.triu(np.ones((d, d), dtype=np.int64), 1)[:, :, None]
    exp = _Expansion(k_low, diag, cross, upper, q_low.astype(np.int32), digits)
    if len(_EXPANSIONS) > 64:
        _EXPANSIONS.clear()
    _EXPANSIONS[key] = exp
    return exp


def _linear_values(coefs: np.ndarray, p: int) -> np.ndarray:
    """sum_j coefs[j] * digit_j(x) for every low index x, built digit by digit."""
    vals = np.zeros(1, dtype=np.int32)
    steps = np.arange(p, dtype=np.int32)
    for c in coefs:
        vals = np.add.outer((int(c) * steps) % p, vals).ravel()
    return vals


def _tally_high(inst: QFormInstance, hi_start: int, hi_stop: int) -> np.ndarray:
    """Level-set tally over elements whose high digits index lies in [hi_start, hi_stop)."""
    exp = _expansion(inst)
    p, d, r, k = inst.p, inst.d, inst.r, exp.k_low
    tally = np.zeros(inst.q, dtype=np.int64)
    for h in range(hi_start, hi_stop):
        hd = np.zeros(d, dtype=np.int64)
        rest = h
        for j in range(k, d):
            rest, hd[j] = divmod(rest, p)
        # Q(h) and the functional B(h, e_j) for low j, per pivot coordinate
        q_h = (hd * hd @ exp.diag + np.einsum("i,j,ijt->t", hd, hd, exp.upper)) % p
        lin = np.einsum("i,ijt->jt", hd, exp.cross[:, :k, :]) % p
        key = np.zeros(p**k, dtype=np.int64)
        for t in range(r):
            v = (exp.q_low[t] + _linear_values(lin[:, t], p) + int(q_h[t])) % p
            key += v.astype(np.int64) * p**t
        tally += np.bincount(inst.view.pivot_table[key], minlength=inst.q)
    return tally


def _tally_direct(inst: QFormInstance, start: int, stop: int) -> np.ndarray:
    tally = np.zeros(inst.q, dtype=np.int64)
    step = 1 << 16
    for lo in range(start, stop, step):
        xs = inst.spec.chunk_array(lo, min(stop, lo + step))
        labels = inst.view.labels_from_arrays(values_direct(inst, xs))
        tally += np.bincount(labels, minlength=inst.q)
    return tally


def tally_range(inst: QFormInstance, start: int, stop: int) -> np.ndarray:
    """Level-set tally (indexed by subfield label) over elements start..stop-1.

    Tallies of disjoint ranges add up to the tally of their union.
    """
    if not 0 <= start <= stop <= inst.size:
        raise ValueError(f"range [{start}, {stop}) exceeds field of size {inst.size}")
    block = inst.p ** _expansion(inst).k_low
    lo = -(-start // block) * block
    hi = stop // block * block
    if lo >= hi:
        return _tally_direct(inst, start, stop)
    tally = _tally_high(inst, lo // block, hi // block)
    if start < lo:
        tally += _tally_direct(inst, start, lo)
    if hi < stop:
        tally += _tally_direct(inst, hi, stop)
    return tally


def _tally_job(args):
    inst, start, stop = args
    return tally_range(inst, start, stop)


def _check_budget(inst: QFormInstance, budget: int | None) -> None:
    budget = DEFAULT_BUDGET if budget is None else budget
    if inst.size > budget:
        raise BudgetExceeded(
            f"F_{inst.p}^{inst.d} has {inst.size} elements, over the budget of {budget}; "
            "use the closed-form prediction instead"
        )


def tally(inst: QFormInstance, budget: int | None = None, workers: int = 1) -> np.ndarray:
    """Full level-set tally, optionally split across worker processes."""
    _check_budget(inst, budget)
    block = inst.p ** _expansion(inst).k_low
    n_blocks = inst.size // block
    if workers <= 1 or n_blocks < 2:
        return tally_range(inst, 0, inst.size)
    parts = min(n_blocks, 4 * workers)
    bounds = [block * (n_blocks * i // parts) for i in range(parts + 1)]
    jobs = [(inst, lo, hi) for lo, hi in zip(bounds, bounds[1:]) if hi > lo]
    total = np.zeros(inst.q, dtype=np.int64)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_tally_job, jobs):
            total += part
    return total


def count_zeros(inst: QFormInstance, budget: int | None = None, workers: int = 1) -> int:
    return int(tally(inst, budget, workers)[0])


def count_level_sets(inst: QFormInstance, budget: int | None = None, workers: int = 1) -> dict[int, int]:
    """Number of x with Q(x) = c for every c in F_q, keyed by subfield label.

    When the curve parameters were given with b < a the form was negated on
    construction, so labels are mapped back through c -> -c.
    """
    counts = tally(inst, budget, workers)
    out = {i: int(c) for i, c in enumerate(counts)}
    if inst.params is not None and inst.params.swapped:
        view = inst.view
        out = {i: out[view.index(-view.element(i))] for i in out}
    return out


# --- radical -----------------------------------------------------------------

def _subfield_basis(view: SubfieldView) -> list[FieldElement]:
    s = view.spec
    basis = []
    for e in view.elements[1:]:
        cand = basis + [FieldElement(e, s)]
        if rank_mod_p(np.array([b.coeffs for b in cand]), s.p) == len(cand):
            basis = cand
        if len(basis) == view.r:
            break
    return basis


def fq_basis(inst: QFormInstance) -> list[FieldElement]:
    """An F_q-basis of F_{q^n} chosen greedily among z^0, z^1, ..."""
    s = inst.spec
    gammas = _subfield_basis(inst.view)
    chosen: list[FieldElement] = []
    span: list[tuple[int, ...]] = []
    for beta in s.basis():
        rows = span + [(g * beta).coeffs for g in gammas]
        if rank_mod_p(np.array(rows), s.p) == len(rows):
            chosen.append(beta)
            span = rows
        if len(chosen) == inst.n:
            break
    return chosen


def gram_matrix(inst: QFormInstance) -> list[list[FieldElement]]:
    """B(beta_i, beta_j) = Q(beta_i + beta_j) - Q(beta_i) - Q(beta_j) over an F_q-basis."""
    basis = fq_basis(inst)
    s = inst.spec
    n = len(basis)
    xs = np.array([b.coeffs for b in basis], dtype=np.int64)
    qv = values_direct(inst, xs)
    sums = ((xs[:, None, :] + xs[None, :, :]) % s.p).reshape(n * n, -1)
    qs = values_direct(inst, sums).reshape(n, n, -1)
    g = (qs - qv[:, None, :] - qv[None, :, :]) % s.p
    return [[s.element(g[i, j]) for j in range(n)] for i in range(n)]


def _rank_over_subfield(m: list[list[FieldElement]]) -> int:
    m = [row[:] for row in m]
    rows = len(m)
    cols = len(m[0]) if m else 0
    rank = 0
    for c in range(cols):
        piv = next((i for i in range(rank, rows) if not m[i][c].is_zero()), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = m[rank][c].inverse()
        m[rank] = [x * inv for x in m[rank]]
        for i in range(rows):
            if i != rank and not m[i][c].is_zero():
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[rank])]
        rank += 1
    return rank


def radical_dim_gram(inst: QFormInstance) -> int:
    """n minus the F_q-rank of the Gram matrix of the polar form."""
    g = gram_matrix(inst)
    if inst.r == 1:
        rank = rank_mod_p(np.array([[e.coeffs[0] for e in row] for row in g]), inst.p)
    else:
        rank = _rank_over_subfield(g)
    return inst.n - rank


def _kernel_dim(spec: FieldSpec, mat: np.ndarray, r: int) -> int:
    dim_p = spec.d - rank_mod_p(mat % spec.p, spec.p)
    if dim_p % r:
        raise ArithmeticError("kernel of an F_q-linear map has F_p-dimension not divisible by r")
    return dim_p // r


def radical_dim_kernel(params: CurveParams, n: int) -> int:
    """dim over F_q of ker(x -> x^(q^2b) - x^(q^(a+b)) - x^(q^(b-a)) + x) on F_{q^n}."""
    b, a, r = params.b, params.a, params.r
    spec = build_field(params.p, r * n)
    fp = spec.frobenius_power
    mat = fp(r * 2 * b) - fp(r * (a + b)) - fp(r * (b - a)) + fp(0)
    return _kernel_dim(spec, mat, r)


def radical_dim_linear(inst: QFormInstance) -> int:
    """Radical as ker(L + L*) with L*(x) = sum c x^(q^-e); valid for any term list."""
    spec, r, n = inst.spec, inst.r, inst.n
    mat = np.zeros((spec.d, spec.d), dtype=np.int64)
    for c, e in inst.terms:
        mat += c * (spec.frobenius_power(r * e) + spec.frobenius_power(r * ((n - e) % n)))
    return _kernel_dim(spec, mat, r)


# --- signs --------------------------------------------------------------------

def extract_sign(zeros: int, q: int, n: int, w: int) -> int:
    """The lambda with zeros = q^(n-1) + lambda (q-1) q^((n+w)/2 - 1)."""
    base = q ** (n - 1)
    if (n + w) % 2:
        if zeros != base:
            raise SignError(f"n+w={n + w} is odd but {zeros} != q^(n-1) = {base}")
        return 0
    unit = (q - 1) * q ** ((n + w) // 2 - 1)
    diff = zeros - base
    if diff % unit or abs(diff // unit) > 1:
        raise SignError(f"{zeros} is not q^(n-1) + lambda*{unit} for any lambda in {{-1,0,1}}")
    return diff // unit


def curve_points(zeros: int, q: int) -> int:
    """Projective points of y^q - y = x L(x): q affine points above each zero, plus infinity."""
    return q * zeros + 1


class _PrimeOps:
    """Scalar arithmetic in F_p on plain ints (used when q = p)."""

    def __init__(self, p: int):
        self.p = p
        self.one = 1

    def is_zero(self, x):
        return x % self.p == 0

    def add(self, x, y):
        return (x + y) % self.p

    def sub(self, x, y):
        return (x - y) % self.p

    def mul(self, x, y):
        return x * y % self.p

    def inv(self, x):
        return pow(x, -1, self.p)

    def neg(self, x):
        return -x % self.p

    def power(self, x, e):
        return pow(x, e, self.p)


class _ElementOps:
    """The same interface on subfield members stored as big-field elements."""

    def __init__(self, spec: FieldSpec):
        self.one = spec.one

    def is_zero(self, x):
        return x.is_zero()

    def add(self, x, y):
        return x + y

    def sub(self, x, y):
        return x - y

    def mul(self, x, y):
        return x * y

    def inv(self, x):
        return x.inverse()

    def neg(self, x):
        return -x

    def power(self, x, e):
        return x**e


def sign_discriminant(inst: QFormInstance) -> int:
    """lambda from the discriminant of the nondegenerate part of Q, without enumeration.

    After congruence-diagonalising the Gram matrix G (so Q = sum g_i/2 x_i^2)
    the nonzero entries give rank R = n - w, and for even R = 2k the sign is
    eta((-1)^k prod(g_i / 2)), with eta the quadratic character of F_q.
    """
    g = gram_matrix(inst)
    if inst.r == 1:
        ops = _PrimeOps(inst.p)
        m = [[e.coeffs[0] for e in row] for row in g]
        two = 2
    else:
        ops = _ElementOps(inst.spec)
        m = [row[:] for row in g]
        two = inst.spec.scalar(2)
    n = len(m)
    diag = []
    active = list(range(n))
    while active:
        piv = next((i for i in active if not ops.is_zero(m[i][i])), None)
        if piv is None:
            pair = next(((i, j) for i in active for j in active
                         if i < j and not ops.is_zero(m[i][j])), None)
            if pair is None:
                break
            i, j = pair
            # e_i + e_j has polar value 2 B(e_i, e_j) != 0 on itself
            for k in range(n):
                m[i][k] = ops.add(m[i][k], m[j][k])
            for k in range(n):
                m[k][i] = ops.add(m[k][i], m[k][j])
            piv = i
        pv = m[piv][piv]
        inv = ops.inv(pv)
        active.remove(piv)
        for i in active:
            f = ops.mul(m[i][piv], inv)
            if ops.is_zero(f):
                continue
            for k in range(n):
                m[i][k] = ops.sub(m[i][k], ops.mul(f, m[piv][k]))
            for k in range(n):
                m[k][i] = ops.sub(m[k][i], ops.mul(f, m[k][piv]))
        diag.append(pv)
    rank = len(diag)
    if rank % 2:
        return 0
    half = ops.inv(two)
    disc = ops.one
    for g_i in diag:
        disc = ops.mul(disc, ops.mul(g_i, half))
    if (rank // 2) % 2:
        disc = ops.neg(disc)
    chi = ops.power(disc, (inst.q - 1) // 2)
    return 1 if chi == ops.one else -1


# --- packaged oracle ----------------------------------------------------------

_RESULTS: dict[tuple, OracleResult] = {}


def oracle(params: CurveParams, n: int, budget: int | None = None, workers: int = 1) -> OracleResult:
    """Zero count, radical dimension, sign and point count by enumeration (memoised)."""
    key = (params.key, n)
    if key in _RESULTS:
        return _RESULTS[key]
    inst = make_instance(params, n)
    zeros = count_zeros(inst, budget, workers)
    w = radical_dim_gram(inst)
    lam = extract_sign(zeros, params.q, n, w)
    res = OracleResult(n, zeros, w, lam, curve_points(zeros, params.q))
    _RESULTS[key] = res
    return res


def form_sign(inst: QFormInstance, budget: int | None = None, workers: int = 1) -> tuple[int, int]:
    """(lambda, w) for an arbitrary-term instance, by enumeration."""
    zeros = count_zeros(inst, budget, workers)
    w = radical_dim_gram(inst)
    return extract_sign(zeros, inst.q, inst.n, w), w


def descent_check(p: int, r: int, terms, d: int, n: int,
                  budget: int | None = None) -> tuple[int, int]:
    """Signs of y^Q - y = xL(x) over F_{Q^n} (Q = q^d) and of y^q - y = xL(x) over F_{q^dn}.

    ``terms`` are (coefficient, q-exponent) pairs; every exponent must be a
    multiple of d so that L is F_Q-linearized.
    """
    if d < 1 or n < 1:
        raise ValueError("d and n must be positive")
    if any(e % d for _, e in terms):
        raise NotApplicable("L is not linearized over F_{q^d}")
    big = make_form(p, r * d, n, [(c, e // d) for c, e in terms])
    small = make_form(p, r, d * n, terms)
    lam_big, _ = form_sign(big, budget)
    lam_small, _ = form_sign(small, budget)
    return lam_big, lam_small


def congruence_check(params: CurveParams, n: int, ell: int, budget: int | None = None,
                     require_nonzero: bool = True) -> bool:
    """lambda_n == lambda_{n ell} q^((n(ell-1) + w_{n ell} - w_n)/2) (mod ell).

    Raises :class:`NotApplicable` when gcd(ell, 2p) != 1, or when either sign
    is 0 and ``require_nonzero`` is set.  Without that flag a zero sign still
    gets the bare congruence evaluated, provided the exponent is integral.
    """
    if not is_prime(ell) or math.gcd(ell, 2 * params.p) != 1:
        raise NotApplicable(f"ell={ell} must be a prime coprime to 2p={2 * params.p}")
    small = oracle(params, n, budget)
    big = oracle(params, n * ell, budget)
    if require_nonzero and (small.lam == 0 or big.lam == 0):
        raise NotApplicable(f"sign is zero (lambda_{n}={small.lam}, lambda_{n * ell}={big.lam})")
    e2 = n * (ell - 1) + big.w - small.w
    if e2 % 2:
        raise NotApplicable(f"exponent {e2}/2 is not an integer")
    rhs = big.lam * pow(params.q, e2 // 2, ell)
    return (small.lam - rhs) % ell == 0


def clear_caches() -> None:
    """Forget memoised oracle results and coordinate expansions."""
    _RESULTS.clear()
    _EXPANSIONS.clear()


def env_budget() -> int:
    return int(os.environ.get("TWOTERM_BUDGET", DEFAULT_BUDGET))
