"""Dense exact linear algebra over a :class:`~lcqmac.gf.FieldSpec`."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, FieldMismatch, SingularMatrix
from .gf import FieldSpec


class MatF:
    """An immutable ``rows x cols`` matrix with entries in a finite field.

    Entries are stored as an ``int64`` numpy array of canonical element
    encodings.  Shapes with zero rows or columns are legal and behave like
    their numpy counterparts.
    """

    __slots__ = ("field", "_a")

    def __init__(self, field: FieldSpec, data, shape: tuple[int, int] | None = None):
        a = np.array(data, dtype=np.int64)
        if shape is not None:
            a = a.reshape(shape)
        if a.ndim != 2:
            if a.size == 0 and shape is None:
                a = a.reshape(0, 0)
            else:
                raise DimensionMismatch(f"expected a 2-D array, got shape {a.shape}")
        if a.size and (a.min() < 0 or a.max() >= field.d):
            raise ValueError(f"entries out of range for {field}")
        a.setflags(write=False)
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "_a", a)

    def __setattr__(self, name, value):
        raise AttributeError("MatF is immutable")

    @classmethod
    def _wrap(cls, field: FieldSpec, a: np.ndarray) -> "MatF":
        m = object.__new__(cls)
        a = np.ascontiguousarray(a, dtype=np.int64)
        a.setflags(write=False)
        object.__setattr__(m, "field", field)
        object.__setattr__(m, "_a", a)
        return m

    @classmethod
    def from_ints(cls, field: FieldSpec, data, shape: tuple[int, int] | None = None) -> "MatF":
        """Build from arbitrary integers, reducing them into the prime subfield.

        Negative values are allowed (``-1`` becomes ``p - 1``).  Only valid for
        prime fields or when every value is already a canonical encoding.
        """
        a = np.array(data, dtype=np.int64)
        if shape is not None:
            a = a.reshape(shape)
        if field.is_prime_field:
            a = a % field.p
        return cls(field, a)

    @classmethod
    def zeros(cls, field: FieldSpec, rows: int, cols: int) -> "MatF":
        return cls._wrap(field, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, field: FieldSpec, n: int) -> "MatF":
        return cls._wrap(field, np.eye(n, dtype=np.int64))

    @classmethod
    def diag(cls, field: FieldSpec, values: Sequence[int]) -> "MatF":
        return cls._wrap(field, np.diag(np.array(values, dtype=np.int64)).reshape(len(values), len(values)))

    @property
    def array(self) -> np.ndarray:
        """Read-only view of the entries."""
        return self._a

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape  # type: ignore[return-value]

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def T(self) -> "MatF":
        return MatF._wrap(self.field, self._a.T)

    def tolist(self) -> list[list[int]]:
        return self._a.tolist()

    def __getitem__(self, key) -> "MatF | int":
        out = self._a[key]
        if isinstance(out, np.ndarray):
            if out.ndim == 2:
                return MatF._wrap(self.field, out)
            raise IndexError("use slices that keep both dimensions")
        return int(out)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MatF)
            and self.field == other.field
            and self.shape == other.shape
            and bool(np.array_equal(self._a, other._a))
        )

    def __hash__(self):
        return hash((self.field, self.shape, self._a.tobytes()))

    def __repr__(self) -> str:
        return f"MatF({self.field!r}, {self.tolist()})"

    def _check(self, other: "MatF") -> None:
        if not isinstance(other, MatF):
            raise TypeError(f"expected MatF, got {type(other).__name__}")
        if self.field != other.field:
            raise FieldMismatch(f"{self.field} vs {other.field}")

    def __add__(self, other: "MatF") -> "MatF":
        self._check(other)
        if self.shape != other.shape:
            raise DimensionMismatch(f"cannot add {self.shape} and {other.shape}")
        return MatF._wrap(self.field, self.field.add(self._a, other._a))

    def __neg__(self) -> "MatF":
        return MatF._wrap(self.field, self.field.neg(self._a))

    def __sub__(self, other: "MatF") -> "MatF":
        return self + (-other)

    def __matmul__(self, other: "MatF") -> "MatF":
        self._check(other)
        if self.cols != other.rows:
            raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
        return MatF._wrap(self.field, matmul_array(self.field, self._a, other._a))

    def scale(self, c: int) -> "MatF":
        return MatF._wrap(self.field, self.field.mul(self._a, np.int64(c)) if self._a.size else self._a)

    def is_zero(self) -> bool:
        return not self._a.any()

    def rank(self) -> int:
        return mat_rank(self)

    def inverse(self) -> "MatF":
        return mat_inverse(self)


def matmul_array(field: FieldSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Field matrix product on raw arrays; supports leading batch axes."""
    if field.is_prime_field:
        return (a @ b) % field.p
    out_shape = np.broadcast_shapes(a.shape[:-2], b.shape[:-2]) + (a.shape[-2], b.shape[-1])
    acc = np.zeros(out_shape, dtype=np.int64)
    for k in range(a.shape[-1]):
        acc = field.add(acc, field.mul(a[..., :, k, None], b[..., None, k, :]))
    return acc


def mat_mul(a: MatF, b: MatF) -> MatF:
    return a @ b


def mat_add(a: MatF, b: MatF) -> MatF:
    return a + b


def mat_transpose(a: MatF) -> MatF:
    return a.T


def hstack(blocks: Iterable[MatF]) -> MatF:
    blocks = list(blocks)
    field = blocks[0].field
    for b in blocks[1:]:
        blocks[0]._check(b)
    return MatF._wrap(field, np.hstack([b.array for b in blocks]))


def vstack(blocks: Iterable[MatF]) -> MatF:
    blocks = list(blocks)
    field = blocks[0].field
    for b in blocks[1:]:
        blocks[0]._check(b)
    return MatF._wrap(field, np.vstack([b.array for b in blocks]))


def blkdiag(blocks: Sequence[MatF]) -> MatF:
    field = blocks[0].field
    rows = sum(b.rows for b in blocks)
    cols = sum(b.cols for b in blocks)
    out = np.zeros((rows, cols), dtype=np.int64)
    i = j = 0
    for b in blocks:
        blocks[0]._check(b)
        out[i : i + b.rows, j : j + b.cols] = b.array
        i += b.rows
        j += b.cols
    return MatF._wrap(field, out)


def _rref(field: FieldSpec, a: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and pivot columns (Gauss-Jordan)."""
    a = a.copy()
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        a[r] = field.mul(a[r], np.int64(field.inv(int(a[r, c]))))
        for i in np.flatnonzero(a[:, c]):
            if i != r:
                a[i] = field.sub(a[i], field.mul(a[r], np.int64(a[i, c])))
        pivots.append(c)
        r += 1
    return a, pivots


def mat_rank(a: MatF) -> int:
    if a.rows == 0 or a.cols == 0:
        return 0
    return len(_rref(a.field, a.array)[1])


def mat_inverse(a: MatF) -> MatF:
    n, m = a.shape
    if n != m:
        raise DimensionMismatch(f"cannot invert non-square {a.shape} matrix")
    aug = np.hstack([a.array, np.eye(n, dtype=np.int64)])
    red, pivots = _rref(a.field, aug)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise SingularMatrix(f"matrix has rank {sum(p < n for p in pivots)} < {n}")
    return MatF._wrap(a.field, red[:, n:])


def nullspace(a: MatF) -> MatF:
    """Basis of ``{v : a @ v = 0}``, returned as the rows of a matrix."""
    field = a.field
    red, pivots = _rref(field, a.array)
    free = [c for c in range(a.cols) if c not in pivots]
    basis = np.zeros((len(free), a.cols), dtype=np.int64)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for row, pc in enumerate(pivots):
            basis[k, pc] = field.neg(int(red[row, f]))
    return MatF._wrap(field, basis)


def rank_normal_form(a: MatF) -> tuple[MatF, MatF, MatF]:
    """Return ``(U1, Lam, U2)`` with ``U1 @ a @ U2 == Lam``.

    ``U1`` and ``U2`` are invertible and ``Lam`` is diagonal with exactly
    ``rank(a)`` nonzero entries in its leading diagonal positions.  The pivot
    in each step is the first nonzero entry of the remaining submatrix in
    column-major order, so the recorded transforms are deterministic.
    """
    field = a.field
    rows, cols = a.shape
    b = a.array.copy()
    u1 = np.eye(rows, dtype=np.int64)
    u2 = np.eye(cols, dtype=np.int64)
    for k in range(min(rows, cols)):
        sub = b[k:, k:]
        nz = np.argwhere(sub.T != 0)
        if nz.size == 0:
            break
        j, i = int(nz[0, 0]) + k, int(nz[0, 1]) + k
        if i != k:
            b[[k, i]] = b[[i, k]]
            u1[[k, i]] = u1[[i, k]]
        if j != k:
            b[:, [k, j]] = b[:, [j, k]]
            u2[:, [k, j]] = u2[:, [j, k]]
        inv_piv = field.inv(int(b[k, k]))
        for i in range(k + 1, rows):
            if b[i, k]:
                f = np.int64(field.mul(int(b[i, k]), inv_piv))
                b[i] = field.sub(b[i], field.mul(b[k], f))
                u1[i] = field.sub(u1[i], field.mul(u1[k], f))
        for j in range(k + 1, cols):
            if b[k, j]:
                f = np.int64(field.mul(int(b[k, j]), inv_piv))
                b[:, j] = field.sub(b[:, j], field.mul(b[:, k], f))
                u2[:, j] = field.sub(u2[:, j], field.mul(u2[:, k], f))
    return MatF._wrap(field, u1), MatF._wrap(field, b), MatF._wrap(field, u2)


def batched_rank(field: FieldSpec, stack: np.ndarray) -> np.ndarray:
    """Ranks of a ``(B, n, m)`` stack of matrices, eliminated in lockstep."""
    a = np.array(stack, dtype=np.int64, copy=True)
    batch, rows, cols = a.shape
    rank = np.zeros(batch, dtype=np.int64)
    if batch == 0 or rows == 0 or cols == 0:
        return rank
    idx = np.arange(batch)
    row_ids = np.arange(rows)
    if field.is_prime_field:
        inv_tab = np.zeros(field.p, dtype=np.int64)
        inv_tab[1:] = [pow(v, -1, field.p) for v in range(1, field.p)]
    for c in range(cols):
        active = rank < rows
        cand = (a[:, :, c] != 0) & (row_ids[None, :] >= rank[:, None]) & active[:, None]
        has = cand.any(axis=1)
        if not has.any():
            continue
        sel = idx[has]
        piv = cand[sel].argmax(axis=1)
        tgt = rank[sel]
        top = a[sel, tgt].copy()
        a[sel, tgt] = a[sel, piv]
        a[sel, piv] = top
        prow = a[sel, tgt]
        pval = prow[:, c]
        pinv = inv_tab[pval] if field.is_prime_field else field.inv(pval)
        prow = field.mul(prow, pinv[:, None])
        a[sel, tgt] = prow
        sub = a[sel]
        factors = sub[:, :, c].copy()
        factors[np.arange(sel.size), tgt] = 0
        # Clearing rows above the pivot too is harmless and keeps the code branch-free.
        a[sel] = field.sub(sub, field.mul(factors[:, :, None], prow[:, None, :]))
        rank[sel] += 1
    return rank
