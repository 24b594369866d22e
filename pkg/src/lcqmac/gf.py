"""Arithmetic in GF(p^r).

Elements are plain integers in ``[0, p**r)`` whose base-``p`` digits are the
polynomial-basis coefficients, constant term least significant.  Every
operation on :class:`FieldSpec` accepts either Python ints or integer numpy
arrays and returns the same kind.
"""

from __future__ import annotations

import itertools
from typing import Sequence

import numpy as np

from .errors import FieldError

TABLE_LIMIT = 256

# Monic irreducible polynomials, constant term first.
IRREDUCIBLE_POLYS: dict[tuple[int, int], tuple[int, ...]] = {
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (2, 5): (1, 0, 1, 0, 0, 1),
    (2, 6): (1, 1, 0, 0, 0, 0, 1),
    (3, 2): (1, 0, 1),
    (3, 3): (1, 2, 0, 1),
    (5, 2): (2, 0, 1),
    (7, 2): (1, 0, 1),
}


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def _poly_rem(num: list[int], den: Sequence[int], p: int) -> list[int]:
    """Remainder of ``num`` modulo the monic polynomial ``den`` over GF(p)."""
    num = list(num)
    deg = len(den) - 1
    for i in range(len(num) - 1, deg - 1, -1):
        coef = num[i] % p
        if coef:
            for j in range(deg + 1):
                num[i - deg + j] = (num[i - deg + j] - coef * den[j]) % p
    return [c % p for c in num[:deg]]


def is_irreducible(poly: Sequence[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree <= deg/2."""
    deg = len(poly) - 1
    if deg < 1 or poly[-1] % p != 1:
        return False
    for k in range(1, deg // 2 + 1):
        for low in itertools.product(range(p), repeat=k):
            if not any(_poly_rem(list(poly), list(low) + [1], p)):
                return False
    return True


class FieldSpec:
    """The finite field GF(p^r) with a fixed polynomial basis.

    Immutable after construction.  For ``p**r <= 256`` the addition,
    multiplication, inverse and trace maps are tabulated so that array
    operations reduce to numpy fancy indexing.
    """

    __slots__ = ("p", "r", "poly", "d", "_add", "_mul", "_neg", "_inv", "_tr")

    def __init__(self, p: int, r: int = 1, poly: Sequence[int] | None = None):
        if not is_prime(p):
            raise FieldError(f"p={p} is not prime")
        if r < 1:
            raise FieldError(f"extension degree r={r} must be >= 1")
        if r == 1:
            poly_t: tuple[int, ...] = (0, 1)
        elif poly is None:
            if (p, r) not in IRREDUCIBLE_POLYS:
                raise FieldError(f"no built-in irreducible polynomial for GF({p}^{r})")
            poly_t = IRREDUCIBLE_POLYS[(p, r)]
        else:
            poly_t = tuple(int(c) % p for c in poly)
            if len(poly_t) != r + 1:
                raise FieldError(f"polynomial must have degree {r}")
            if not is_irreducible(poly_t, p):
                raise FieldError(f"polynomial {list(poly_t)} is reducible over GF({p})")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "poly", poly_t)
        object.__setattr__(self, "d", p**r)
        tables = (None,) * 5
        if r > 1 and self.d <= TABLE_LIMIT:
            tables = self._build_tables()
        for name, tab in zip(("_add", "_mul", "_neg", "_inv", "_tr"), tables):
            object.__setattr__(self, name, tab)

    def __setattr__(self, name, value):
        raise AttributeError("FieldSpec is immutable")

    def __eq__(self, other):
        return isinstance(other, FieldSpec) and (self.p, self.r, self.poly) == (
            other.p,
            other.r,
            other.poly,
        )

    def __hash__(self):
        return hash((self.p, self.r, self.poly))

    def __repr__(self):
        return f"GF({self.p})" if self.r == 1 else f"GF({self.p}^{self.r})"

    @property
    def is_prime_field(self) -> bool:
        return self.r == 1

    # -- scalar polynomial arithmetic ---------------------------------------

    def _digits(self, a: int) -> list[int]:
        out = []
        for _ in range(self.r):
            a, rem = divmod(a, self.p)
            out.append(rem)
        return out

    def _undigits(self, coeffs: Sequence[int]) -> int:
        v = 0
        for c in reversed(coeffs):
            v = v * self.p + c
        return v

    def _add_scalar(self, a: int, b: int) -> int:
        return self._undigits([(x + y) % self.p for x, y in zip(self._digits(a), self._digits(b))])

    def _neg_scalar(self, a: int) -> int:
        return self._undigits([(-x) % self.p for x in self._digits(a)])

    def _mul_scalar(self, a: int, b: int) -> int:
        da, db = self._digits(a), self._digits(b)
        prod = [0] * (2 * self.r - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] += x * y
        return self._undigits(_poly_rem(prod, self.poly, self.p))

    def _pow_scalar(self, a: int, n: int) -> int:
        result, base = 1, a
        while n:
            if n & 1:
                result = self._mul_scalar(result, base)
            base = self._mul_scalar(base, base)
            n >>= 1
        return result

    def _inv_scalar(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return self._pow_scalar(a, self.d - 2)

    def _trace_scalar(self, a: int) -> int:
        total, term = 0, a
        for _ in range(self.r):
            total = self._add_scalar(total, term)
            term = self._pow_scalar(term, self.p)
        return total

    def _build_tables(self):
        d = self.d
        add = np.empty((d, d), dtype=np.int64)
        mul = np.empty((d, d), dtype=np.int64)
        for a in range(d):
            for b in range(a, d):
                add[a, b] = add[b, a] = self._add_scalar(a, b)
                mul[a, b] = mul[b, a] = self._mul_scalar(a, b)
        neg = np.array([self._neg_scalar(a) for a in range(d)], dtype=np.int64)
        inv = np.zeros(d, dtype=np.int64)
        for a in range(1, d):
            inv[a] = int(np.flatnonzero(mul[a] == 1)[0])
        tr = np.array([self._trace_scalar(a) for a in range(d)], dtype=np.int64)
        return add, mul, neg, inv, tr

    # -- public arithmetic (ints or arrays) ---------------------------------

    def _lift(self, fn, tab, *args):
        if isinstance(args[0], np.ndarray) or (len(args) > 1 and isinstance(args[1], np.ndarray)):
            if tab is not None:
                return tab[args]
            return np.vectorize(fn, otypes=[np.int64])(*args)
        if tab is not None:
            return int(tab[args])
        return fn(*(int(a) for a in args))

    def add(self, a, b):
        if self.r == 1:
            return (a + b) % self.p
        return self._lift(self._add_scalar, self._add, a, b)

    def neg(self, a):
        if self.r == 1:
            return (-a) % self.p
        return self._lift(self._neg_scalar, self._neg, a)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        if self.r == 1:
            return (a * b) % self.p
        return self._lift(self._mul_scalar, self._mul, a, b)

    def inv(self, a):
        if isinstance(a, np.ndarray):
            if np.any(a == 0):
                raise ZeroDivisionError("0 has no inverse")
            if self.r == 1:
                return np.vectorize(lambda v: pow(int(v), -1, self.p), otypes=[np.int64])(a)
            return self._lift(self._inv_scalar, self._inv, a)
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        if self.r == 1:
            return pow(int(a), -1, self.p)
        return self._lift(self._inv_scalar, self._inv, a)

    def pow(self, a: int, n: int) -> int:
        if n < 0:
            a, n = self.inv(a), -n
        if self.r == 1:
            return pow(int(a), n, self.p)
        return self._pow_scalar(int(a), n)

    def trace(self, a):
        """Absolute trace ``sum_j a^(p^j)``; the result is an element of GF(p)."""
        if self.r == 1:
            return a % self.p if isinstance(a, np.ndarray) else int(a) % self.p
        return self._lift(self._trace_scalar, self._tr, a)

    def from_int(self, k: int) -> int:
        """Image of the integer ``k`` under the ring map Z -> GF(p) -> GF(p^r)."""
        return int(k) % self.p

    def elements(self) -> range:
        return range(self.d)

    def as_dict(self) -> dict:
        out = {"p": self.p, "r": self.r}
        if self.r > 1:
            out["poly"] = list(self.poly)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "FieldSpec":
        return cls(int(data["p"]), int(data.get("r", 1)), data.get("poly"))


def field_new(p: int, r: int = 1, poly: Sequence[int] | None = None) -> FieldSpec:
    return FieldSpec(p, r, poly)


def field_trace(spec: FieldSpec, x: int) -> int:
    return spec.trace(x)


def trace_dual_basis(spec: FieldSpec) -> list[int]:
    """Dual of the polynomial basis ``1, g, ..., g^(r-1)`` under ``tr(ab)``.

    ``y = sum_k tr(g^k * y) * dual[k]`` for every element ``y``.
    """
    r, p = spec.r, spec.p
    basis = [p**k for k in range(r)]
    # Gram matrix of the trace form is invertible over GF(p) for a separable extension.
    gram = [[spec.trace(spec.mul(a, b)) for b in basis] for a in basis]
    dual = []
    for k in range(r):
        # Solve gram @ c = e_k over GF(p) by Gauss-Jordan.
        aug = [row[:] + [1 if i == k else 0] for i, row in enumerate(gram)]
        for col in range(r):
            piv = next(i for i in range(col, r) if aug[i][col] % p)
            aug[col], aug[piv] = aug[piv], aug[col]
            s = pow(aug[col][col], -1, p)
            aug[col] = [(v * s) % p for v in aug[col]]
            for i in range(r):
                if i != col and aug[i][col]:
                    f = aug[i][col]
                    aug[i] = [(v - f * w) % p for v, w in zip(aug[i], aug[col])]
        coeffs = [aug[i][r] for i in range(r)]
        elem = 0
        for c, b in zip(coeffs, basis):
            elem = spec.add(elem, spec.mul(c, b))
        dual.append(elem)
    return dual


def field_of_order(q: int) -> FieldSpec:
    """GF(q) for a prime power ``q``, using the built-in polynomial table."""
    for p in range(2, q + 1):
        if q % p == 0:
            break
    r, rest = 0, q
    while rest % p == 0:
        rest //= p
        r += 1
    if rest != 1 or not is_prime(p):
        raise FieldError(f"{q} is not a prime power")
    return FieldSpec(p, r)
