"""Exact arithmetic in F_{p^d} = F_p[z]/(f) with subfield structure.

Elements are stored as little-endian coefficient tuples in the power basis
of the root z of the modulus.  Element number ``i`` of the field is the one
whose coefficients are the base-p digits of ``i``; this fixes a canonical
enumeration order that can be split into independent chunks.

Besides scalar arithmetic on :class:`FieldElement`, :class:`FieldSpec`
exposes vectorised routines acting on ``(N, d)`` integer arrays, which is
what the brute-force counters use.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "FieldSpec",
    "FieldElement",
    "SubfieldView",
    "build_field",
    "is_prime",
    "is_irreducible",
    "digits_array",
]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    i = 3
    while i * i <= n:
        if n % i == 0:
            return False
        i += 2
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    k = 2
    while k * k <= n:
        if n % k == 0:
            out.append(k)
            while n % k == 0:
                n //= k
        k += 1
    if n > 1:
        out.append(n)
    return out


# --- polynomials over F_p as little-endian lists ------------------------------

def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmod(a: list[int], f: list[int], p: int) -> list[int]:
    a = [c % p for c in a]
    _trim(a)
    df = len(f) - 1
    inv = pow(f[-1], -1, p)
    while len(a) - 1 >= df:
        c = a[-1] * inv % p
        shift = len(a) - 1 - df
        for i, fc in enumerate(f):
            a[shift + i] = (a[shift + i] - c * fc) % p
        _trim(a)
    return a


def _pmulmod(a: list[int], b: list[int], f: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _pmod(out, f, p)


def _ppowmod(a: list[int], e: int, f: list[int], p: int) -> list[int]:
    result = [1]
    base = _pmod(a, f, p)
    while e:
        if e & 1:
            result = _pmulmod(result, base, f, p)
        base = _pmulmod(base, base, f, p)
        e >>= 1
    return result


def _pgcd(a: list[int], b: list[int], p: int) -> list[int]:
    a = _trim([c % p for c in a])
    b = _trim([c % p for c in b])
    while b:
        a, b = b, _pmod(a, b, p)
    return a


def _psub(a: list[int], b: list[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    a = a + [0] * (n - len(a))
    b = b + [0] * (n - len(b))
    return _trim([(x - y) % p for x, y in zip(a, b)])


def _has_root(f: list[int], p: int) -> bool:
    return any(sum(c * pow(x, k, p) for k, c in enumerate(f)) % p == 0 for x in range(p))


def is_irreducible(f: list[int], p: int) -> bool:
    """Ben-Or test: monic ``f`` of degree d (little-endian) is irreducible over F_p
    iff gcd(x^(p^i) - x, f) = 1 for every i <= d/2."""
    d = len(f) - 1
    if d < 1:
        return False
    if d == 1:
        return True
    x = [0, 1]
    g = x
    for _ in range(d // 2):
        g = _ppowmod(g, p, f, p)
        if len(_pgcd(f, _psub(g, x, p), p)) != 1:
            return False
    return True


def digits_array(indices: np.ndarray, p: int, d: int) -> np.ndarray:
    """Base-p digits (little-endian) of each index, as an ``(N, d)`` array."""
    idx = np.asarray(indices, dtype=np.int64)
    out = np.empty((idx.shape[0], d), dtype=np.int64)
    for k in range(d):
        out[:, k] = idx % p
        idx = idx // p
    return out


# --- field -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FieldSpec:
    """The field F_p[z]/(modulus); immutable and safe to share."""

    p: int
    d: int
    modulus: tuple[int, ...]
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if not is_prime(self.p) or self.p < 3:
            raise ValueError(f"p={self.p} is not an odd prime")
        if self.d < 1:
            raise ValueError("degree must be positive")
        if len(self.modulus) != self.d + 1 or self.modulus[-1] != 1:
            raise ValueError("modulus must be monic of degree d")
        if not is_irreducible(list(self.modulus), self.p):
            raise ValueError(f"modulus {self.modulus} is reducible over F_{self.p}")

    def __eq__(self, other):
        return (
            isinstance(other, FieldSpec)
            and (self.p, self.d, self.modulus) == (other.p, other.d, other.modulus)
        )

    def __hash__(self):
        return hash((self.p, self.d, self.modulus))

    def __getstate__(self):
        return (self.p, self.d, self.modulus)

    def __setstate__(self, state):
        object.__setattr__(self, "p", state[0])
        object.__setattr__(self, "d", state[1])
        object.__setattr__(self, "modulus", state[2])
        object.__setattr__(self, "_cache", {})

    @property
    def order(self) -> int:
        return self.p**self.d

    # -- scalar elements --

    def element(self, coeffs) -> FieldElement:
        coeffs = tuple(int(c) % self.p for c in coeffs)
        if len(coeffs) != self.d:
            raise ValueError(f"expected {self.d} coefficients, got {len(coeffs)}")
        return FieldElement(coeffs, self)

    def from_int(self, i: int) -> FieldElement:
        if not 0 <= i < self.order:
            raise ValueError("index out of range")
        coeffs = []
        for _ in range(self.d):
            i, c = divmod(i, self.p)
            coeffs.append(c)
        return FieldElement(tuple(coeffs), self)

    def scalar(self, c: int) -> FieldElement:
        return self.element([c] + [0] * (self.d - 1))

    @property
    def zero(self) -> FieldElement:
        return self.scalar(0)

    @property
    def one(self) -> FieldElement:
        return self.scalar(1)

    @property
    def gen(self) -> FieldElement:
        """The root z of the modulus (equals -modulus[0] when d = 1)."""
        if self.d == 1:
            return self.scalar(-self.modulus[0])
        return self.element([0, 1] + [0] * (self.d - 2))

    def basis(self) -> list[FieldElement]:
        return [self.element([int(i == k) for i in range(self.d)]) for k in range(self.d)]

    # -- precomputed linear maps --

    @cached_property
    def _reduction(self) -> np.ndarray:
        """Row k gives z^(d+k) reduced, for k = 0..d-2."""
        rows = np.zeros((max(self.d - 1, 1), self.d), dtype=np.int64)
        f = list(self.modulus)
        for k in range(self.d - 1):
            mono = [0] * (self.d + k) + [1]
            red = _pmod(mono, f, self.p)
            rows[k, : len(red)] = red
        return rows

    @cached_property
    def frobenius_matrix(self) -> np.ndarray:
        """Matrix of x -> x^p acting on row vectors of coefficients."""
        f = list(self.modulus)
        m = np.zeros((self.d, self.d), dtype=np.int64)
        for k in range(self.d):
            mono = [0] * k + [1]
            img = _ppowmod(mono, self.p, f, self.p)
            m[k, : len(img)] = img
        return m

    def frobenius_power(self, j: int) -> np.ndarray:
        """Matrix of x -> x^(p^j); j is reduced mod d."""
        j %= self.d
        key = ("frob", j)
        if key not in self._cache:
            if j == 0:
                mat = np.eye(self.d, dtype=np.int64)
            else:
                mat = self.frobenius_power(j - 1) @ self.frobenius_matrix % self.p
            self._cache[key] = mat
        return self._cache[key]

    def trace_matrix(self, r: int) -> np.ndarray:
        """Matrix of the relative trace to the subfield of degree r."""
        if r < 1 or self.d % r:
            raise ValueError(f"subfield degree {r} does not divide {self.d}")
        key = ("trace", r)
        if key not in self._cache:
            n = self.d // r
            mat = sum(self.frobenius_power(r * i) for i in range(n)) % self.p
            self._cache[key] = np.asarray(mat, dtype=np.int64)
        return self._cache[key]

    # -- vectorised arithmetic on (N, d) arrays --

    def mul_arrays(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        d, p = self.d, self.p
        prod = np.zeros((a.shape[0], 2 * d - 1), dtype=np.int64)
        for i in range(d):
            prod[:, i : i + d] += a[:, i : i + 1] * b
        prod %= p
        low = prod[:, :d]
        if d > 1:
            low = low + prod[:, d:] @ self._reduction
        return low % p

    def frob_arrays(self, a: np.ndarray, j: int) -> np.ndarray:
        return a @ self.frobenius_power(j) % self.p

    def trace_arrays(self, a: np.ndarray, r: int) -> np.ndarray:
        return a @ self.trace_matrix(r) % self.p

    def enumerate_chunk(self, start: int, length: int) -> list[FieldElement]:
        """Elements number start .. start+length-1 in the canonical order."""
        if start < 0 or length < 0 or start + length > self.order:
            raise ValueError(f"range [{start}, {start + length}) exceeds field of size {self.order}")
        rows = digits_array(np.arange(start, start + length, dtype=np.int64), self.p, self.d)
        return [FieldElement(tuple(int(c) for c in row), self) for row in rows]

    def chunk_array(self, start: int, stop: int) -> np.ndarray:
        if start < 0 or stop > self.order or start > stop:
            raise ValueError(f"range [{start}, {stop}) exceeds field of size {self.order}")
        return digits_array(np.arange(start, stop, dtype=np.int64), self.p, self.d)

    # -- scalar wrappers mirroring the element operators --

    def mul(self, a: FieldElement, b: FieldElement) -> FieldElement:
        return a * b

    def pow_q(self, x: FieldElement, i: int, r: int) -> FieldElement:
        """x^(q^i) for q = p^r."""
        self._check(x)
        if i < 0:
            raise ValueError("i must be non-negative")
        v = np.array(x.coeffs, dtype=np.int64) @ self.frobenius_power(r * i) % self.p
        return FieldElement(tuple(int(c) for c in v), self)

    def trace(self, x: FieldElement, r: int) -> FieldElement:
        """Relative trace Tr_{F_{p^d}/F_{p^r}}(x)."""
        self._check(x)
        v = np.array(x.coeffs, dtype=np.int64) @ self.trace_matrix(r) % self.p
        return FieldElement(tuple(int(c) for c in v), self)

    def subfield(self, r: int) -> SubfieldView:
        key = ("subfield", r)
        if key not in self._cache:
            self._cache[key] = SubfieldView(self, r)
        return self._cache[key]

    def _check(self, x: FieldElement) -> None:
        if x.spec != self:
            raise ValueError("element belongs to a different field")


@dataclass(frozen=True)
class FieldElement:
    coeffs: tuple[int, ...]
    spec: FieldSpec = field(repr=False)

    def _other(self, other) -> FieldElement:
        if isinstance(other, int):
            return self.spec.scalar(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        if other.spec != self.spec:
            raise ValueError("mismatched fields")
        return other

    def __add__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        p = self.spec.p
        return FieldElement(tuple((x + y) % p for x, y in zip(self.coeffs, other.coeffs)), self.spec)

    __radd__ = __add__

    def __neg__(self):
        p = self.spec.p
        return FieldElement(tuple(-x % p for x in self.coeffs), self.spec)

    def __sub__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._other(other)
        if other is NotImplemented:
            return other
        s = self.spec
        prod = [0] * (2 * s.d - 1)
        for i, x in enumerate(self.coeffs):
            if x:
                for j, y in enumerate(other.coeffs):
                    prod[i + j] += x * y
        red = _pmod(prod, list(s.modulus), s.p)
        return FieldElement(tuple(red + [0] * (s.d - len(red))), s)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = self.spec.one
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def inverse(self) -> FieldElement:
        if self.is_zero():
            raise ZeroDivisionError("zero has no inverse")
        return self ** (self.spec.order - 2)

    def __truediv__(self, other):
        other = self._other(other)
        return self * other.inverse()

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def to_int(self) -> int:
        return sum(c * self.spec.p**k for k, c in enumerate(self.coeffs))

    def __str__(self):
        terms = [f"{c}*z^{k}" if k else str(c) for k, c in enumerate(self.coeffs) if c]
        return " + ".join(terms) or "0"


class SubfieldView:
    """The subfield {x : x^(p^r) = x} with a canonical integer labelling.

    Labels follow lexicographic order of coefficient tuples, so 0 -> 0 and,
    for r = 1, the constant c gets label c.  Subfield elements are also
    identified by their coefficients at ``pivots``: positions where the
    subfield, as an F_p-subspace, projects bijectively.
    """

    def __init__(self, spec: FieldSpec, r: int):
        if r < 1 or spec.d % r:
            raise ValueError(f"subfield degree {r} does not divide {spec.d}")
        self.spec = spec
        self.r = r
        self.q = spec.p**r
        basis = self._fixed_space_basis()
        self.pivots = tuple(int(np.flatnonzero(row)[0]) for row in basis)
        elems = []
        for combo in itertools.product(range(spec.p), repeat=r):
            v = np.zeros(spec.d, dtype=np.int64)
            for c, row in zip(combo, basis):
                v = (v + c * row) % spec.p
            elems.append(tuple(int(c) for c in v))
        elems.sort()
        self.elements = elems
        self._index = {e: i for i, e in enumerate(elems)}
        # label lookup keyed by the pivot coordinates read as base-p digits
        self.pivot_table = np.empty(self.q, dtype=np.int64)
        for i, e in enumerate(elems):
            key = sum(e[c] * spec.p**k for k, c in enumerate(self.pivots))
            self.pivot_table[key] = i

    def _fixed_space_basis(self) -> np.ndarray:
        p, d = self.spec.p, self.spec.d
        m = (self.spec.frobenius_power(self.r) - np.eye(d, dtype=np.int64)) % p
        # left kernel of m: row vectors v with v m = 0; rows of the RREF basis
        basis = nullspace_mod_p(m.T, p)
        if len(basis) != self.r:
            raise ArithmeticError("fixed field has the wrong dimension")
        return rref_mod_p(np.array(basis, dtype=np.int64), p)

    def __len__(self):
        return self.q

    def index(self, x: FieldElement) -> int | None:
        """Label of ``x`` in [0, q), or None when ``x`` is outside the subfield."""
        return self._index.get(x.coeffs)

    def element(self, i: int) -> FieldElement:
        return FieldElement(self.elements[i], self.spec)

    def labels_from_arrays(self, a: np.ndarray) -> np.ndarray:
        """Labels for an ``(N, d)`` array whose rows are known subfield members."""
        p = self.spec.p
        key = np.zeros(a.shape[0], dtype=np.int64)
        for k, c in enumerate(self.pivots):
            key += a[:, c] * p**k
        return self.pivot_table[key]


# --- linear algebra over F_p -----------------------------------------------------

def rref_mod_p(m: np.ndarray, p: int) -> np.ndarray:
    """Reduced row echelon form over F_p, zero rows dropped."""
    m = np.array(m, dtype=np.int64) % p
    rows, cols = m.shape
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i, c]), None)
        if piv is None:
            continue
        m[[r, piv]] = m[[piv, r]]
        m[r] = m[r] * pow(int(m[r, c]), -1, p) % p
        for i in range(rows):
            if i != r and m[i, c]:
                m[i] = (m[i] - m[i, c] * m[r]) % p
        r += 1
        if r == rows:
            break
    return m[:r]


def rank_mod_p(m: np.ndarray, p: int) -> int:
    if m.size == 0:
        return 0
    return rref_mod_p(m, p).shape[0]


def nullspace_mod_p(m: np.ndarray, p: int) -> list[np.ndarray]:
    """Basis of {v : m v = 0} over F_p."""
    m = np.asarray(m, dtype=np.int64)
    cols = m.shape[1]
    red = rref_mod_p(m, p) if m.size else np.zeros((0, cols), dtype=np.int64)
    pivots = [int(np.flatnonzero(row)[0]) for row in red]
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = np.zeros(cols, dtype=np.int64)
        v[f] = 1
        for row, pc in zip(red, pivots):
            v[pc] = -row[f] % p
        basis.append(v)
    return basis


def build_field(p: int, d: int) -> FieldSpec:
    """F_{p^d} modulo the lexicographically smallest monic irreducible.

    Candidates are ordered by their low coefficients (c_0, ..., c_{d-1})
    compared from the constant term upwards.
    """
    key = (p, d)
    if key in _FIELDS:
        return _FIELDS[key]
    if not is_prime(p) or p < 3:
        raise ValueError(f"p={p} is not an odd prime")
    if d < 1:
        raise ValueError("degree must be positive")
    # for d > 1 a zero constant term means x divides f, so start at c_0 = 1
    first = range(p) if d == 1 else range(1, p)
    for c0 in first:
        for rest in itertools.product(range(p), repeat=d - 1):
            f = [c0, *rest, 1]
            if d > 1 and _has_root(f, p):
                continue
            if is_irreducible(f, p):
                spec = FieldSpec(p, d, tuple(f))
                _FIELDS[key] = spec
                return spec
    raise ArithmeticError(f"no irreducible polynomial of degree {d} over F_{p}")  # pragma: no cover


_FIELDS: dict[tuple[int, int], FieldSpec] = {}
