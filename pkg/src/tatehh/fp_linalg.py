"""Exact linear algebra over prime fields F_p.

Matrices are stored column-major sparse (``scipy.sparse.csc_array``) and
handed to a dense elimination kernel whenever they are dense enough or small
enough for that to be cheaper.  Over F_2 the dense kernel works on bit-packed
rows; for odd p it runs a compiled int64 row-reduction loop.  Large sparse
matrices go through a dict-of-rows eliminator.

Every routine returns residues in ``[0, p)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numba
import numpy as np
import scipy.sparse as sp

DENSITY_THRESHOLD = 0.25
DENSE_CELL_LIMIT = 4_000_000
MAX_MODULUS = 2**31 - 1


class DimensionMismatch(ValueError):
    """Raised when matrix and vector shapes are incompatible."""


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


@dataclass(frozen=True)
class PrimeField:
    p: int

    def __post_init__(self):
        if not isinstance(self.p, (int, np.integer)) or not is_prime(int(self.p)):
            raise ValueError(f"modulus not prime: {self.p}")
        if self.p > MAX_MODULUS:
            raise ValueError(f"modulus {self.p} exceeds {MAX_MODULUS}")

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return pow(int(a), self.p - 2, self.p)

    def reduce(self, x):
        return np.mod(x, self.p)


def _check_prime(p: int) -> int:
    PrimeField(int(p))
    return int(p)


def _matmul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    k = a.shape[1]
    if k == 0:
        return np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    if (p - 1) ** 2 * k < 2**62:
        return (a @ b) % p
    # split b into 16-bit halves so partial sums stay inside int64
    lo = b & 0xFFFF
    hi = b >> 16
    out = (a @ lo) % p
    out = (out + ((a @ hi) % p) * (65536 % p)) % p
    return out


class PrimeFieldMatrix:
    """Immutable matrix over F_p.

    Build with :meth:`from_dense`, :meth:`from_triplets`, :meth:`zeros` or
    :meth:`identity`.  The raw storage is a CSC array; ``to_dense`` gives an
    int64 copy.
    """

    __slots__ = ("p", "shape", "_csc", "_dense")

    def __init__(self, p: int, csc: sp.csc_array, _dense: np.ndarray | None = None):
        self.p = p
        self.shape = (int(csc.shape[0]), int(csc.shape[1]))
        self._csc = csc
        self._dense = _dense

    # construction -----------------------------------------------------

    @classmethod
    def from_dense(cls, p: int, entries) -> "PrimeFieldMatrix":
        p = _check_prime(p)
        arr = np.mod(np.asarray(entries, dtype=np.int64), p)
        if arr.ndim != 2:
            if arr.size == 0:
                arr = arr.reshape(0, 0)
            else:
                raise ValueError("matrix entries must be two-dimensional")
        csc = sp.csc_array(arr)
        csc.eliminate_zeros()
        arr.setflags(write=False)
        return cls(p, csc, arr)

    @classmethod
    def from_triplets(cls, p: int, rows: int, cols: int, r, c, v) -> "PrimeFieldMatrix":
        """Duplicate (r, c) positions are summed."""
        p = _check_prime(p)
        r = np.asarray(r, dtype=np.int64)
        c = np.asarray(c, dtype=np.int64)
        v = np.mod(np.asarray(v, dtype=np.int64), p)
        coo = sp.coo_array((v, (r, c)), shape=(rows, cols), dtype=np.int64)
        csc = sp.csc_array(coo)
        csc.sum_duplicates()
        csc.data %= p
        csc.eliminate_zeros()
        return cls(p, csc)

    @classmethod
    def from_columns(cls, p: int, rows: int, columns: Sequence[dict[int, int]]) -> "PrimeFieldMatrix":
        r, c, v = [], [], []
        for j, col in enumerate(columns):
            for i, x in col.items():
                r.append(i)
                c.append(j)
                v.append(x)
        return cls.from_triplets(p, rows, len(columns), r, c, v)

    @classmethod
    def zeros(cls, p: int, rows: int, cols: int) -> "PrimeFieldMatrix":
        p = _check_prime(p)
        return cls(p, sp.csc_array((rows, cols), dtype=np.int64))

    @classmethod
    def identity(cls, p: int, n: int) -> "PrimeFieldMatrix":
        p = _check_prime(p)
        return cls(p, sp.csc_array(sp.identity(n, dtype=np.int64, format="csc")))

    # access -----------------------------------------------------------

    @property
    def rows(self) -> int:
        return self.shape[0]

    @property
    def cols(self) -> int:
        return self.shape[1]

    @property
    def nnz(self) -> int:
        return int(self._csc.nnz)

    @property
    def density(self) -> float:
        cells = self.shape[0] * self.shape[1]
        return self.nnz / cells if cells else 0.0

    def to_dense(self) -> np.ndarray:
        if self._dense is None:
            arr = self._csc.toarray().astype(np.int64) if self.nnz else np.zeros(self.shape, dtype=np.int64)
            arr.setflags(write=False)
            self._dense = arr
        return self._dense.copy()

    def to_sparse(self) -> sp.csc_array:
        return self._csc.copy()

    def is_zero(self) -> bool:
        return self.nnz == 0

    def __repr__(self) -> str:
        return f"PrimeFieldMatrix(p={self.p}, shape={self.shape}, nnz={self.nnz})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, PrimeFieldMatrix):
            return NotImplemented
        if self.p != other.p or self.shape != other.shape:
            return False
        diff = (self._csc - other._csc)
        diff.data %= self.p
        diff.eliminate_zeros()
        return diff.nnz == 0

    __hash__ = None

    # arithmetic -------------------------------------------------------

    def _same_field(self, other: "PrimeFieldMatrix"):
        if self.p != other.p:
            raise ValueError(f"modulus mismatch: {self.p} vs {other.p}")

    def __matmul__(self, other):
        if isinstance(other, PrimeFieldMatrix):
            self._same_field(other)
            if self.cols != other.rows:
                raise DimensionMismatch(f"cannot multiply {self.shape} by {other.shape}")
            if (self.p - 1) ** 2 * max(self.cols, 1) < 2**62:
                prod = sp.csc_array(self._csc @ other._csc)
                prod.data %= self.p
                prod.eliminate_zeros()
                return PrimeFieldMatrix(self.p, prod)
            return PrimeFieldMatrix.from_dense(
                self.p, _matmul_mod(self.to_dense(), other.to_dense(), self.p))
        vec = np.asarray(other, dtype=np.int64)
        if vec.ndim != 1 or vec.shape[0] != self.cols:
            raise DimensionMismatch(f"cannot apply {self.shape} matrix to vector of shape {vec.shape}")
        return _matmul_mod(self.to_dense(), vec.reshape(-1, 1) % self.p, self.p).ravel()

    def __add__(self, other: "PrimeFieldMatrix") -> "PrimeFieldMatrix":
        self._same_field(other)
        if self.shape != other.shape:
            raise DimensionMismatch(f"shape mismatch {self.shape} vs {other.shape}")
        s = sp.csc_array(self._csc + other._csc)
        s.data %= self.p
        s.eliminate_zeros()
        return PrimeFieldMatrix(self.p, s)

    def __neg__(self) -> "PrimeFieldMatrix":
        s = self._csc.copy()
        s.data = (-s.data) % self.p
        s.eliminate_zeros()
        return PrimeFieldMatrix(self.p, s)

    def __sub__(self, other: "PrimeFieldMatrix") -> "PrimeFieldMatrix":
        return self + (-other)

    def scale(self, c: int) -> "PrimeFieldMatrix":
        s = self._csc.copy()
        s.data = (s.data * (c % self.p)) % self.p
        s.eliminate_zeros()
        return PrimeFieldMatrix(self.p, s)

    @property
    def T(self) -> "PrimeFieldMatrix":
        return PrimeFieldMatrix(self.p, sp.csc_array(self._csc.T))

    def submatrix(self, rows=None, cols=None) -> "PrimeFieldMatrix":
        m = self._csc
        if cols is not None:
            m = m[:, np.asarray(cols, dtype=np.int64)]
        if rows is not None:
            m = m[np.asarray(rows, dtype=np.int64), :]
        return PrimeFieldMatrix(self.p, sp.csc_array(m))

    def column(self, j: int) -> np.ndarray:
        return self._csc[:, [j]].toarray().ravel().astype(np.int64)

    def power(self, k: int) -> "PrimeFieldMatrix":
        if self.rows != self.cols:
            raise DimensionMismatch("power of a non-square matrix")
        out = PrimeFieldMatrix.identity(self.p, self.rows)
        base = self
        while k:
            if k & 1:
                out = out @ base
            base = base @ base
            k >>= 1
        return out


def hstack(p: int, mats: Sequence[PrimeFieldMatrix], rows: int | None = None) -> PrimeFieldMatrix:
    mats = [m for m in mats if m.cols]
    if not mats:
        return PrimeFieldMatrix.zeros(p, rows or 0, 0)
    return PrimeFieldMatrix(p, sp.csc_array(sp.hstack([m._csc for m in mats], format="csc")))


def vstack(p: int, mats: Sequence[PrimeFieldMatrix], cols: int | None = None) -> PrimeFieldMatrix:
    mats = [m for m in mats if m.rows]
    if not mats:
        return PrimeFieldMatrix.zeros(p, 0, cols or 0)
    return PrimeFieldMatrix(p, sp.csc_array(sp.vstack([m._csc for m in mats], format="csc")))


def block(p: int, blocks: Sequence[Sequence[PrimeFieldMatrix | None]], row_dims, col_dims) -> PrimeFieldMatrix:
    """Assemble a block matrix; ``None`` entries are zero blocks."""
    row_off = np.concatenate([[0], np.cumsum(row_dims)]).astype(np.int64)
    col_off = np.concatenate([[0], np.cumsum(col_dims)]).astype(np.int64)
    rr, cc, vv = [], [], []
    for i, brow in enumerate(blocks):
        for j, b in enumerate(brow):
            if b is None or b.nnz == 0:
                continue
            coo = b._csc.tocoo()
            rr.append(coo.row.astype(np.int64) + row_off[i])
            cc.append(coo.col.astype(np.int64) + col_off[j])
            vv.append(coo.data)
    if not rr:
        return PrimeFieldMatrix.zeros(p, int(row_off[-1]), int(col_off[-1]))
    return PrimeFieldMatrix.from_triplets(p, int(row_off[-1]), int(col_off[-1]),
                                          np.concatenate(rr), np.concatenate(cc), np.concatenate(vv))


# ---------------------------------------------------------------------------
# elimination kernels


def _use_dense(m: PrimeFieldMatrix) -> bool:
    cells = m.rows * m.cols
    return cells <= DENSE_CELL_LIMIT or m.density >= DENSITY_THRESHOLD


def _pack_rows(arr: np.ndarray) -> np.ndarray:
    rows, cols = arr.shape
    words = max(1, (cols + 63) // 64)
    padded = np.zeros((rows, words * 64), dtype=np.uint8)
    padded[:, :cols] = arr & 1
    packed = np.packbits(padded, axis=1, bitorder="little")
    return packed.view(np.uint64).reshape(rows, words).copy()


def _unpack_rows(packed: np.ndarray, cols: int) -> np.ndarray:
    rows = packed.shape[0]
    bits = np.unpackbits(packed.view(np.uint8).reshape(rows, -1), axis=1, bitorder="little")
    return bits[:, :cols].astype(np.int64)


def _echelon_mod2(arr: np.ndarray, reduced: bool) -> tuple[np.ndarray, list[int]]:
    rows, cols = arr.shape
    if rows == 0 or cols == 0:
        return np.zeros((rows, cols), dtype=np.int64), []
    w = _pack_rows(arr)
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        word, bit = divmod(c, 64)
        colbits = (w[r:, word] >> np.uint64(bit)) & np.uint64(1)
        nz = np.flatnonzero(colbits)
        if nz.size == 0:
            continue
        piv = r + int(nz[0])
        if piv != r:
            w[[r, piv]] = w[[piv, r]]
        if reduced:
            hit = np.flatnonzero((w[:, word] >> np.uint64(bit)) & np.uint64(1))
            hit = hit[hit != r]
        else:
            hit = r + 1 + np.flatnonzero((w[r + 1:, word] >> np.uint64(bit)) & np.uint64(1))
        if hit.size:
            w[hit] ^= w[r]
        pivots.append(c)
        r += 1
    return _unpack_rows(w, cols), pivots


@numba.njit(cache=True)
def _echelon_modp_kernel(a, p, reduced):
    rows, cols = a.shape
    pivots = np.empty(min(rows, cols), dtype=np.int64)
    r = 0
    for c in range(cols):
        if r == rows:
            break
        piv = -1
        for i in range(r, rows):
            if a[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(cols):
                tmp = a[r, j]
                a[r, j] = a[piv, j]
                a[piv, j] = tmp
        # Fermat inverse
        inv = 1
        base = a[r, c] % p
        e = p - 2
        while e > 0:
            if e & 1:
                inv = (inv * base) % p
            base = (base * base) % p
            e >>= 1
        if inv != 1:
            for j in range(c, cols):
                a[r, j] = (a[r, j] * inv) % p
        start = 0 if reduced else r + 1
        for i in range(start, rows):
            if i == r:
                continue
            f = a[i, c]
            if f != 0:
                for j in range(c, cols):
                    if a[r, j] != 0:
                        a[i, j] = (a[i, j] - f * a[r, j]) % p
        pivots[r] = c
        r += 1
    return pivots[:r]


def _echelon_modp(arr: np.ndarray, p: int, reduced: bool) -> tuple[np.ndarray, list[int]]:
    a = np.ascontiguousarray(np.mod(arr.astype(np.int64), p))
    if a.size == 0:
        return a, []
    piv = _echelon_modp_kernel(a, np.int64(p), reduced)
    return a, [int(c) for c in piv]


def _dense_echelon(arr: np.ndarray, p: int, reduced: bool):
    if p == 2:
        return _echelon_mod2(arr, reduced)
    return _echelon_modp(arr, p, reduced)


class SparseEchelon:
    """Incremental row echelon basis over F_p with dict rows.

    Rows are stored normalised with leading coefficient 1, keyed by their
    leading column.  ``reduce`` returns the remainder of a vector modulo the
    span; after :meth:`make_reduced` remainders are canonical.
    """

    def __init__(self, p: int):
        self.p = p
        self.pivots: dict[int, dict[int, int]] = {}

    def __len__(self) -> int:
        return len(self.pivots)

    def reduce(self, vec: dict[int, int]) -> dict[int, int]:
        p = self.p
        v = {k: x % p for k, x in vec.items() if x % p}
        piv = self.pivots
        if not v:
            return v
        done: dict[int, int] = {}
        while v:
            c = min(v)
            x = v.pop(c)
            row = piv.get(c)
            if row is None:
                done[c] = x
                continue
            for k, y in row.items():
                if k == c:
                    continue
                z = (v.get(k, 0) - x * y) % p
                if z:
                    v[k] = z
                else:
                    v.pop(k, None)
        return done

    def add(self, vec: dict[int, int]) -> bool:
        """Insert ``vec``; returns False if it was already in the span."""
        v = self.reduce(vec)
        if not v:
            return False
        c = min(v)
        inv = pow(v[c], self.p - 2, self.p)
        self.pivots[c] = {k: (x * inv) % self.p for k, x in v.items()}
        return True

    def make_reduced(self):
        p = self.p
        for c in sorted(self.pivots, reverse=True):
            row = self.pivots[c]
            changed = True
            while changed:
                changed = False
                for k in sorted(row):
                    if k != c and k in self.pivots and row.get(k):
                        x = row[k]
                        for kk, y in self.pivots[k].items():
                            z = (row.get(kk, 0) - x * y) % p
                            if z:
                                row[kk] = z
                            else:
                                row.pop(kk, None)
                        changed = True
                        break


def _sparse_rows(m: PrimeFieldMatrix) -> list[dict[int, int]]:
    csr = sp.csr_array(m._csc)
    out = []
    for i in range(m.rows):
        lo, hi = csr.indptr[i], csr.indptr[i + 1]
        out.append(dict(zip(csr.indices[lo:hi].tolist(), csr.data[lo:hi].tolist())))
    return out


def _sparse_echelon(m: PrimeFieldMatrix) -> SparseEchelon:
    ech = SparseEchelon(m.p)
    for row in sorted(_sparse_rows(m), key=len):
        if row:
            ech.add(row)
    return ech


# ---------------------------------------------------------------------------
# public operations


def rref(m: PrimeFieldMatrix) -> tuple[PrimeFieldMatrix, list[int]]:
    """Reduced row echelon form and its pivot columns."""
    if _use_dense(m):
        red, piv = _dense_echelon(m.to_dense(), m.p, reduced=True)
        return PrimeFieldMatrix.from_dense(m.p, red), piv
    ech = _sparse_echelon(m)
    ech.make_reduced()
    piv = sorted(ech.pivots)
    rows = [ech.pivots[c] for c in piv]
    r, c, v = [], [], []
    for i, row in enumerate(rows):
        for k, x in row.items():
            r.append(i)
            c.append(k)
            v.append(x)
    return PrimeFieldMatrix.from_triplets(m.p, m.rows, m.cols, r, c, v), piv


def rank(m: PrimeFieldMatrix) -> int:
    if m.nnz == 0:
        return 0
    if _use_dense(m):
        arr = m.to_dense()
        if arr.shape[0] > arr.shape[1]:
            arr = arr.T
        return len(_dense_echelon(arr, m.p, reduced=False)[1])
    # fewer rows to store when eliminating the transpose of a tall matrix
    src = m if m.rows <= m.cols else m.T
    return len(_sparse_echelon(src))


def kernel_basis(m: PrimeFieldMatrix) -> list[np.ndarray]:
    """Basis of the null space, one vector per free column."""
    red, piv = rref(m)
    n = m.cols
    pivset = set(piv)
    free = [j for j in range(n) if j not in pivset]
    if not free:
        return []
    dense = red.to_dense()[: len(piv)] if red.rows else np.zeros((0, n), dtype=np.int64)
    out = []
    for f in free:
        v = np.zeros(n, dtype=np.int64)
        v[f] = 1
        for i, c in enumerate(piv):
            v[c] = (-dense[i, f]) % m.p
        out.append(v)
    return out


def kernel_matrix(m: PrimeFieldMatrix) -> PrimeFieldMatrix:
    """Kernel basis as the columns of a matrix."""
    basis = kernel_basis(m)
    if not basis:
        return PrimeFieldMatrix.zeros(m.p, m.cols, 0)
    return PrimeFieldMatrix.from_dense(m.p, np.stack(basis, axis=1))


def image_basis(m: PrimeFieldMatrix) -> PrimeFieldMatrix:
    """Columns of ``m`` that form a basis of its column space."""
    _, pivc = rref(m)
    return m.submatrix(cols=pivc)


def solve(m: PrimeFieldMatrix, b) -> np.ndarray | None:
    """Some x with m @ x == b, or None if b is not in the image.

    Raises DimensionMismatch when ``len(b) != m.rows``.
    """
    b = np.mod(np.asarray(b, dtype=np.int64).ravel(), m.p)
    if b.shape[0] != m.rows:
        raise DimensionMismatch(f"right-hand side has length {b.shape[0]}, matrix has {m.rows} rows")
    aug = hstack(m.p, [m, PrimeFieldMatrix.from_dense(m.p, b.reshape(-1, 1))], rows=m.rows)
    if m.cols == 0:
        return np.zeros(0, dtype=np.int64) if not b.any() else None
    red, piv = rref(aug)
    if piv and piv[-1] == m.cols:
        return None
    dense = red.to_dense()
    x = np.zeros(m.cols, dtype=np.int64)
    for i, c in enumerate(piv):
        x[c] = dense[i, m.cols]
    return x


def stack_columns(p: int, rows: int, vectors: Iterable[np.ndarray]) -> PrimeFieldMatrix:
    vecs = list(vectors)
    if not vecs:
        return PrimeFieldMatrix.zeros(p, rows, 0)
    return PrimeFieldMatrix.from_dense(p, np.stack(vecs, axis=1))


def span_dim(p: int, *mats: PrimeFieldMatrix) -> int:
    """Dimension of the sum of the column spaces."""
    mats = [m for m in mats if m.cols]
    if not mats:
        return 0
    return rank(hstack(p, mats))


def complement_basis(sub: PrimeFieldMatrix) -> tuple[list[int], PrimeFieldMatrix]:
    """Standard basis vectors completing the columns of ``sub`` to a basis.

    Returns the chosen coordinate indices together with the projection
    matrix onto those coordinates along span(sub): a matrix Q of shape
    (len(indices), n) with Q @ sub == 0 and Q restricted to the chosen
    coordinates equal to the identity.
    """
    p = sub.p
    n = sub.rows
    if sub.cols == 0:
        return list(range(n)), PrimeFieldMatrix.identity(p, n)
    # rref of sub^T: rows span the subspace, pivots name the coordinates it covers
    red, piv = rref(sub.T)
    r = len(piv)
    pivset = set(piv)
    free = [j for j in range(n) if j not in pivset]
    dense = red.submatrix(rows=list(range(r))).to_dense()
    # x = sum_i x[piv_i] * row_i + (free part); projection kills row_i components
    q = np.zeros((len(free), n), dtype=np.int64)
    for k, f in enumerate(free):
        q[k, f] = 1
    for i, c in enumerate(piv):
        # coordinate c of x determines the multiple of row i to subtract
        q[:, c] = (-dense[i, free]) % p
    return free, PrimeFieldMatrix.from_dense(p, q)
