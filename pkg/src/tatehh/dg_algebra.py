"""Finite-dimensional DG algebras and bimodules over F_p.

Algebras and bimodules are given by structure constants on a basis whose
elements carry an internal degree.  The unit of an algebra must be one of
the basis vectors: bar constructions then have degenerate subspaces spanned
by basis words, so normalization is a matter of dropping words.

Sign conventions follow the Koszul rule: moving x past y costs
(-1)^{|x||y|}, and d(xy) = d(x)y + (-1)^{|x|} x d(y).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .complexes import (
    Bicomplex,
    ChainComplex,
    ChainMap,
    ComplexError,
    SimplicialObject,
    realize,
)
from .fp_linalg import PrimeFieldMatrix, SparseEchelon, is_prime

Terms = list[tuple[int, int]]


class AlgebraError(ValueError):
    """Invalid algebra, bimodule or incompatible inputs."""


def _terms(vec: np.ndarray) -> Terms:
    nz = np.flatnonzero(vec)
    return [(int(k), int(vec[k])) for k in nz]


def koszul_sign(degrees: Sequence[int], order: Sequence[int]) -> int:
    """Sign of listing graded items in ``order`` (a permutation of positions)."""
    odd = [degrees[i] % 2 for i in order]
    sign = 1
    for a in range(len(order)):
        if not odd[a]:
            continue
        for b in range(a + 1, len(order)):
            if odd[b] and order[a] > order[b]:
                sign = -sign
    return sign


# ---------------------------------------------------------------------------
# algebras and bimodules


class DgAlgebra:
    """DG algebra with basis e_0..e_{n-1}.

    ``mult[i, j]`` is the coordinate vector of e_i e_j and ``diff[:, j]`` the
    coordinate vector of d(e_j).  ``unit`` is the index of the unit element.
    """

    def __init__(self, p: int, labels: Sequence[str], degrees: Sequence[int], unit: int,
                 mult: np.ndarray, diff: np.ndarray | None = None, name: str = "",
                 expected_smooth: bool | None = None):
        if not is_prime(int(p)):
            raise AlgebraError(f"modulus not prime: {p}")
        n = len(labels)
        self.p = int(p)
        self.labels = tuple(str(x) for x in labels)
        self.degrees = tuple(int(x) for x in degrees)
        if len(self.degrees) != n:
            raise AlgebraError("one degree per basis element required")
        if not 0 <= unit < n:
            raise AlgebraError(f"unit index {unit} out of range")
        self.unit = int(unit)
        self.mult = np.mod(np.asarray(mult, dtype=np.int64), p)
        if self.mult.shape != (n, n, n):
            raise AlgebraError(f"multiplication table must have shape {(n, n, n)}")
        self.diff = np.zeros((n, n), dtype=np.int64) if diff is None else np.mod(np.asarray(diff, dtype=np.int64), p)
        if self.diff.shape != (n, n):
            raise AlgebraError(f"differential must have shape {(n, n)}")
        self.name = name
        self.expected_smooth = expected_smooth
        self.mult_terms: list[list[Terms]] = [[_terms(self.mult[i, j]) for j in range(n)] for i in range(n)]
        self.d_terms: list[Terms] = [_terms(self.diff[:, j]) for j in range(n)]

    @property
    def dim(self) -> int:
        return len(self.labels)

    def __repr__(self):
        return f"DgAlgebra({self.name or '?'}, p={self.p}, dim={self.dim})"

    def unit_vector(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=np.int64)
        v[self.unit] = 1
        return v

    def multiply(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.einsum("i,j,ijk->k", x, y, self.mult) % self.p

    def as_complex(self) -> ChainComplex:
        return _graded_complex(self.p, self.degrees, self.diff)

    def is_ground_field(self) -> bool:
        return self.dim == 1

    def opposite(self) -> "DgAlgebra":
        """A^op with x *op y = (-1)^{|x||y|} y x."""
        n = self.dim
        mult = np.zeros_like(self.mult)
        for i in range(n):
            for j in range(n):
                s = -1 if (self.degrees[i] * self.degrees[j]) % 2 else 1
                mult[i, j] = s * self.mult[j, i]
        return DgAlgebra(self.p, self.labels, self.degrees, self.unit, mult, self.diff, name=f"{self.name}^op")


class DgBimodule:
    """DG bimodule over ``algebra``.

    ``left[i, j]`` is e_i . m_j and ``right[j, i]`` is m_j . e_i as coordinate
    vectors in M.  Either action may be None for a one-sided module.
    """

    def __init__(self, algebra: DgAlgebra, labels: Sequence[str], degrees: Sequence[int],
                 left: np.ndarray | None, right: np.ndarray | None, diff: np.ndarray | None = None,
                 name: str = ""):
        p = algebra.p
        self.algebra = algebra
        self.p = p
        self.labels = tuple(str(x) for x in labels)
        self.degrees = tuple(int(x) for x in degrees)
        n, a = len(self.labels), algebra.dim
        if len(self.degrees) != n:
            raise AlgebraError("one degree per basis element required")
        self.left = None if left is None else np.mod(np.asarray(left, dtype=np.int64), p)
        self.right = None if right is None else np.mod(np.asarray(right, dtype=np.int64), p)
        if self.left is not None and self.left.shape != (a, n, n):
            raise AlgebraError(f"left action must have shape {(a, n, n)}")
        if self.right is not None and self.right.shape != (n, a, n):
            raise AlgebraError(f"right action must have shape {(n, a, n)}")
        self.diff = np.zeros((n, n), dtype=np.int64) if diff is None else np.mod(np.asarray(diff, dtype=np.int64), p)
        self.name = name
        self.left_terms = None if self.left is None else [[_terms(self.left[i, j]) for j in range(n)] for i in range(a)]
        self.right_terms = None if self.right is None else [[_terms(self.right[j, i]) for i in range(a)] for j in range(n)]
        self.d_terms: list[Terms] = [_terms(self.diff[:, j]) for j in range(n)]

    @property
    def dim(self) -> int:
        return len(self.labels)

    def __repr__(self):
        return f"DgBimodule({self.name or '?'}, dim={self.dim})"

    @classmethod
    def regular(cls, a: DgAlgebra) -> "DgBimodule":
        """A as a bimodule over itself."""
        right = np.transpose(a.mult, (0, 1, 2))  # m_j . e_i = e_j e_i -> right[j, i]
        return cls(a, a.labels, a.degrees, a.mult.copy(), right.copy(), a.diff.copy(), name=a.name or "A")

    @classmethod
    def from_character(cls, a: DgAlgebra, values: Sequence[int], name: str = "") -> "DgBimodule":
        """One-dimensional module F_p in degree 0 on which e_i acts by values[i] on both sides."""
        n = a.dim
        vals = np.mod(np.asarray(values, dtype=np.int64), a.p)
        left = vals.reshape(n, 1, 1).copy()
        right = vals.reshape(1, n, 1).copy()
        return cls(a, ["1"], [0], left, right, None, name=name)

    def min_degree(self) -> int:
        return min(self.degrees) if self.degrees else 0

    def as_complex(self) -> ChainComplex:
        return _graded_complex(self.p, self.degrees, self.diff)

    def opposite(self, op_algebra: DgAlgebra | None = None) -> "DgBimodule":
        """M over A^op: a .op m = (-1)^{|a||m|} m a and m .op a = (-1)^{|a||m|} a m."""
        a = self.algebra
        aop = op_algebra or a.opposite()
        na, n = a.dim, self.dim
        sign = np.array([[(-1) ** ((a.degrees[i] * self.degrees[j]) % 2) for j in range(n)] for i in range(na)],
                        dtype=np.int64)
        left = None if self.right is None else np.transpose(self.right, (1, 0, 2)) * sign[:, :, None]
        right = None if self.left is None else np.transpose(self.left, (1, 0, 2)) * sign.T[:, :, None]
        return DgBimodule(aop, self.labels, self.degrees, left, right, self.diff, name=f"{self.name}^op")

    def is_regular_of(self, a: DgAlgebra) -> bool:
        return (self.algebra is a and self.dim == a.dim and self.degrees == a.degrees
                and self.left is not None and self.right is not None
                and np.array_equal(self.left, a.mult) and np.array_equal(self.right, a.mult)
                and np.array_equal(self.diff, a.diff))


def _graded_complex(p: int, degrees: Sequence[int], diff: np.ndarray) -> ChainComplex:
    """The underlying complex, basis ordered by index within each degree."""
    by_deg: dict[int, list[int]] = {}
    for i, d in enumerate(degrees):
        by_deg.setdefault(d, []).append(i)
    mats = {}
    for q, cols in by_deg.items():
        rows = by_deg.get(q - 1)
        if rows:
            mats[q] = PrimeFieldMatrix.from_dense(p, diff[np.ix_(rows, cols)])
    return ChainComplex(p, {q: len(v) for q, v in by_deg.items()}, mats)


def _degree_position(degrees: Sequence[int]) -> list[tuple[int, int]]:
    pos, seen = [], {}
    for d in degrees:
        pos.append((d, seen.get(d, 0)))
        seen[d] = seen.get(d, 0) + 1
    return pos


# ---------------------------------------------------------------------------
# validation


def _algebra_violations(a: DgAlgebra) -> list[str]:
    out: list[str] = []
    n, p = a.dim, a.p
    deg = a.degrees
    L = a.labels
    for i in range(n):
        if deg[i] < 0:
            out.append(f"basis element {L[i]} has negative degree {deg[i]}")
    if deg[a.unit] != 0:
        out.append(f"unit {L[a.unit]} is not in degree 0")
    for i, j in itertools.product(range(n), repeat=2):
        for k, _ in a.mult_terms[i][j]:
            if deg[k] != deg[i] + deg[j]:
                out.append(f"product {L[i]}*{L[j]} has a component {L[k]} of the wrong degree")
                break
    for j in range(n):
        for k, _ in a.d_terms[j]:
            if deg[k] != deg[j] - 1:
                out.append(f"d({L[j]}) has a component {L[k]} of the wrong degree")
                break
    u = a.unit
    for i in range(n):
        e = np.zeros(n, dtype=np.int64)
        e[i] = 1
        if not np.array_equal(a.mult[u, i], e) or not np.array_equal(a.mult[i, u], e):
            out.append(f"unit {L[u]} is not two-sided on {L[i]}")
    # (ab)c = a(bc)
    ab = a.mult  # (i, j, k)
    lhs = np.einsum("ijk,klm->ijlm", ab, a.mult) % p
    rhs = np.einsum("jlk,ikm->ijlm", a.mult, a.mult) % p
    bad = np.argwhere((lhs != rhs).any(axis=3))
    for i, j, l in bad[:20]:
        out.append(f"associativity fails on ({L[i]}, {L[j]}, {L[l]})")
    # d^2 = 0
    dd = (a.diff @ a.diff) % p
    for j in np.flatnonzero(dd.any(axis=0))[:20]:
        out.append(f"d^2 != 0 on {L[j]}")
    # d(xy) = d(x)y + (-1)^|x| x d(y)
    dxy = np.einsum("ijk,lk->ijl", a.mult, a.diff) % p
    dx_y = np.einsum("ki,kjl->ijl", a.diff, a.mult) % p
    x_dy = np.einsum("kj,ikl->ijl", a.diff, a.mult) % p
    sign = np.array([(-1) ** (d % 2) for d in deg], dtype=np.int64).reshape(n, 1, 1)
    rhs = (dx_y + sign * x_dy) % p
    bad = np.argwhere((dxy != rhs).any(axis=2))
    for i, j in bad[:20]:
        out.append(f"Leibniz rule fails on ({L[i]}, {L[j]})")
    return out


def _bimodule_violations(m: DgBimodule) -> list[str]:
    out: list[str] = []
    a = m.algebra
    p, n, na = m.p, m.dim, a.dim
    L, AL = m.labels, a.labels
    deg, adeg = m.degrees, a.degrees
    sa = np.array([(-1) ** (d % 2) for d in adeg], dtype=np.int64)
    sm = np.array([(-1) ** (d % 2) for d in deg], dtype=np.int64)
    dd = (m.diff @ m.diff) % p
    for j in np.flatnonzero(dd.any(axis=0))[:20]:
        out.append(f"d^2 != 0 on module element {L[j]}")
    for j in range(n):
        for k, _ in m.d_terms[j]:
            if deg[k] != deg[j] - 1:
                out.append(f"d({L[j]}) has a component {L[k]} of the wrong degree")
                break
    eye = np.eye(n, dtype=np.int64)
    if m.left is not None:
        lam = m.left  # (i, j, k): e_i m_j
        for i, j in itertools.product(range(na), range(n)):
            for k, _ in m.left_terms[i][j]:
                if deg[k] != adeg[i] + deg[j]:
                    out.append(f"{AL[i]}.{L[j]} has a component of the wrong degree")
                    break
        if not np.array_equal(lam[a.unit], eye):
            out.append("unit does not act as the identity on the left")
        lhs = np.einsum("abk,kjm->abjm", a.mult, lam) % p          # (ab)m
        rhs = np.einsum("bjk,akm->abjm", lam, lam) % p             # a(bm)
        for i, j, l in np.argwhere((lhs != rhs).any(axis=3))[:20]:
            out.append(f"left associativity fails on ({AL[i]}, {AL[j]}, {L[l]})")
        d_am = np.einsum("ijk,lk->ijl", lam, m.diff) % p
        da_m = np.einsum("ki,kjl->ijl", a.diff, lam) % p
        a_dm = np.einsum("kj,ikl->ijl", m.diff, lam) % p
        rhs = (da_m + sa.reshape(na, 1, 1) * a_dm) % p
        for i, j in np.argwhere((d_am != rhs).any(axis=2))[:20]:
            out.append(f"left Leibniz rule fails on ({AL[i]}, {L[j]})")
    if m.right is not None:
        rho = m.right  # (j, i, k): m_j e_i
        for j, i in itertools.product(range(n), range(na)):
            for k, _ in m.right_terms[j][i]:
                if deg[k] != adeg[i] + deg[j]:
                    out.append(f"{L[j]}.{AL[i]} has a component of the wrong degree")
                    break
        if not np.array_equal(rho[:, a.unit, :], eye):
            out.append("unit does not act as the identity on the right")
        lhs = np.einsum("jak,kbm->jabm", rho, rho) % p            # (m a) b
        rhs = np.einsum("abk,jkm->jabm", a.mult, rho) % p          # m (ab)
        for j, i, l in np.argwhere((lhs != rhs).any(axis=3))[:20]:
            out.append(f"right associativity fails on ({L[j]}, {AL[i]}, {AL[l]})")
        d_ma = np.einsum("jik,lk->jil", rho, m.diff) % p
        dm_a = np.einsum("kj,kil->jil", m.diff, rho) % p
        m_da = np.einsum("ki,jkl->jil", a.diff, rho) % p
        rhs = (dm_a + sm.reshape(n, 1, 1) * m_da) % p
        for j, i in np.argwhere((d_ma != rhs).any(axis=2))[:20]:
            out.append(f"right Leibniz rule fails on ({L[j]}, {AL[i]})")
    if m.left is not None and m.right is not None:
        lhs = np.einsum("ajk,kbm->ajbm", m.left, m.right) % p      # (a m) b
        rhs = np.einsum("jbk,akm->ajbm", m.right, m.left) % p      # a (m b)
        for i, j, l in np.argwhere((lhs != rhs).any(axis=3))[:20]:
            out.append(f"left and right actions do not commute on ({AL[i]}, {L[j]}, {AL[l]})")
    return out


def validate(obj: DgAlgebra | DgBimodule) -> list[str]:
    """Every violated axiom, naming the offending basis tuple; empty iff valid."""
    if isinstance(obj, DgAlgebra):
        return _algebra_violations(obj)
    if isinstance(obj, DgBimodule):
        return _bimodule_violations(obj)
    raise TypeError(f"cannot validate {type(obj).__name__}")


# ---------------------------------------------------------------------------
# tensor powers and twisted bimodules


def _radix_digits(index: int, base: int, n: int) -> tuple[int, ...]:
    out = []
    for _ in range(n):
        index, r = divmod(index, base)
        out.append(r)
    return tuple(reversed(out))


def _radix_index(digits: Sequence[int], base: int) -> int:
    idx = 0
    for d in digits:
        idx = idx * base + d
    return idx


class CyclicPowerAlgebra(DgAlgebra):
    """A^{(x)n} with its basis of n-tuples and the cyclic rotation.

    The rotation sends x_0 (x) ... (x) x_{n-1} to
    (+/-) x_{n-1} (x) x_0 (x) ... (x) x_{n-2}, so component j of the image
    is component j-1 of the source.
    """

    def __init__(self, base: DgAlgebra, n: int):
        if n < 1:
            raise AlgebraError("tensor power needs n >= 1")
        a = base.dim
        p = base.p
        N = a ** n
        words = [_radix_digits(i, a, n) for i in range(N)]
        degrees = [sum(base.degrees[x] for x in w) for w in words]
        labels = ["(x)".join(base.labels[x] for x in w) for w in words]
        unit = _radix_index([base.unit] * n, a)
        mult = np.zeros((N, N, N), dtype=np.int64)
        for i, wx in enumerate(words):
            for j, wy in enumerate(words):
                # (x_0..x_{n-1})(y_0..y_{n-1}) = sign * prod_k x_k y_k
                sign = 1
                for k in range(n):
                    if base.degrees[wy[k]] % 2:
                        if sum(base.degrees[wx[l]] for l in range(k + 1, n)) % 2:
                            sign = -sign
                partial = [((), sign)]
                for k in range(n):
                    terms = base.mult_terms[wx[k]][wy[k]]
                    partial = [(pre + (c,), s * v) for pre, s in partial for c, v in terms]
                    if not partial:
                        break
                for digits, v in partial:
                    mult[i, j, _radix_index(digits, a)] += v
        diff = np.zeros((N, N), dtype=np.int64)
        for j, w in enumerate(words):
            run = 0
            for k in range(n):
                sign = -1 if run % 2 else 1
                for c, v in base.d_terms[w[k]]:
                    t = list(w)
                    t[k] = c
                    diff[_radix_index(t, a), j] += sign * v
                run += base.degrees[w[k]]
        super().__init__(p, labels, degrees, unit, mult, diff,
                         name=f"{base.name}^(x){n}", expected_smooth=base.expected_smooth)
        self.base = base
        self.power = n
        self.words = words

    def rotation_of(self, i: int) -> tuple[int, int]:
        """(index, sign) of the rotated basis word."""
        w = self.words[i]
        n = self.power
        order = [n - 1] + list(range(n - 1))
        degs = [self.base.degrees[x] for x in w]
        return _radix_index([w[k] for k in order], self.base.dim), koszul_sign(degs, order)

    def rotation(self) -> PrimeFieldMatrix:
        N = self.dim
        r, c, v = [], [], []
        for i in range(N):
            j, s = self.rotation_of(i)
            r.append(j)
            c.append(i)
            v.append(s)
        return PrimeFieldMatrix.from_triplets(self.p, N, N, r, c, v)

    def rotation_violations(self) -> list[str]:
        """tau^n = id and tau(xy) = tau(x) tau(y) on basis pairs."""
        out = []
        tau = self.rotation()
        if not (tau.power(self.power) == PrimeFieldMatrix.identity(self.p, self.dim)):
            out.append("rotation does not have order dividing n")
        T = tau.to_dense()
        lhs = np.einsum("ijk,lk->ijl", self.mult, T) % self.p
        rhs = np.einsum("ai,bj,abl->ijl", T, T, self.mult) % self.p
        for i, j in np.argwhere((lhs != rhs).any(axis=2))[:10]:
            out.append(f"rotation is not multiplicative on ({self.labels[i]}, {self.labels[j]})")
        return out


class TwistedPower(DgBimodule):
    """M^{(x)n} as a bimodule over A^{(x)n}; right action pulled back along rotation.

    Left action is factorwise.  On the right, m . (b_0 .. b_{n-1}) places
    b_{j+1} against m_j (indices mod n).  ``twist`` rotates M-words the same
    way :meth:`CyclicPowerAlgebra.rotation` rotates algebra words.
    """

    def __init__(self, m: DgBimodule, power_algebra: CyclicPowerAlgebra):
        a = power_algebra.base
        if m.algebra is not a:
            raise AlgebraError("bimodule is over a different algebra")
        if m.left is None or m.right is None:
            raise AlgebraError("twisted power needs a two-sided bimodule")
        n = power_algebra.power
        dm, da = m.dim, a.dim
        NM, NA = dm ** n, da ** n
        p = m.p
        words = [_radix_digits(i, dm, n) for i in range(NM)]
        degrees = [sum(m.degrees[x] for x in w) for w in words]
        labels = ["(x)".join(m.labels[x] for x in w) for w in words]

        def factorwise(xw, yw, xdeg, ydeg, table):
            # sign of interleaving (x_0..)(y_0..) into x_0 y_0 x_1 y_1 ..
            sign = 1
            for k in range(n):
                if ydeg[yw[k]] % 2 and sum(xdeg[xw[l]] for l in range(k + 1, n)) % 2:
                    sign = -sign
            partial = [((), sign)]
            for k in range(n):
                partial = [(pre + (c,), s * v) for pre, s in partial for c, v in table(xw[k], yw[k])]
                if not partial:
                    break
            return partial

        left = np.zeros((NA, NM, NM), dtype=np.int64)
        right = np.zeros((NM, NA, NM), dtype=np.int64)
        for i, aw in enumerate(power_algebra.words):
            for j, mw in enumerate(words):
                for digits, v in factorwise(aw, mw, a.degrees, m.degrees, lambda x, y: m.left_terms[x][y]):
                    left[i, j, _radix_index(digits, dm)] += v
        for i, aw in enumerate(power_algebra.words):
            ri, rs = self._unrotate(power_algebra, i)
            bw = power_algebra.words[ri]
            for j, mw in enumerate(words):
                for digits, v in factorwise(mw, bw, m.degrees, a.degrees, lambda x, y: m.right_terms[x][y]):
                    right[j, i, _radix_index(digits, dm)] += rs * v
        diff = np.zeros((NM, NM), dtype=np.int64)
        for j, w in enumerate(words):
            run = 0
            for k in range(n):
                sign = -1 if run % 2 else 1
                for c, v in m.d_terms[w[k]]:
                    t = list(w)
                    t[k] = c
                    diff[_radix_index(t, dm), j] += sign * v
                run += m.degrees[w[k]]
        super().__init__(power_algebra, labels, degrees, left, right, diff, name=f"{m.name}^tw{n}")
        self.base = m
        self.power = n
        self.words = words

    @staticmethod
    def _unrotate(power_algebra: CyclicPowerAlgebra, i: int) -> tuple[int, int]:
        # b -> (b_1, ..., b_{n-1}, b_0): component j receives b_{j+1}
        w = power_algebra.words[i]
        n = power_algebra.power
        order = list(range(1, n)) + [0]
        degs = [power_algebra.base.degrees[x] for x in w]
        return _radix_index([w[k] for k in order], power_algebra.base.dim), koszul_sign(degs, order)

    def twist_of(self, j: int) -> tuple[int, int]:
        w = self.words[j]
        n = self.power
        order = [n - 1] + list(range(n - 1))
        degs = [self.base.degrees[x] for x in w]
        return _radix_index([w[k] for k in order], self.base.dim), koszul_sign(degs, order)

    def twist(self) -> PrimeFieldMatrix:
        N = self.dim
        r, c, v = [], [], []
        for j in range(N):
            k, s = self.twist_of(j)
            r.append(k)
            c.append(j)
            v.append(s)
        return PrimeFieldMatrix.from_triplets(self.p, N, N, r, c, v)

    def equivariance_violations(self) -> list[str]:
        """twist(x.m.y) = rot(x).twist(m).rot(y), twist commutes with d, twist^n = id."""
        out = []
        p = self.p
        alg = self.algebra
        sig = self.twist().to_dense()
        rot = alg.rotation().to_dense()
        lhs = np.einsum("ijk,lk->ijl", self.left, sig) % p
        rhs = np.einsum("ai,bj,abl->ijl", rot, sig, self.left) % p
        for i, j in np.argwhere((lhs != rhs).any(axis=2))[:10]:
            out.append(f"left action not equivariant on ({alg.labels[i]}, {self.labels[j]})")
        lhs = np.einsum("jik,lk->jil", self.right, sig) % p
        rhs = np.einsum("bj,ai,bal->jil", sig, rot, self.right) % p
        for j, i in np.argwhere((lhs != rhs).any(axis=2))[:10]:
            out.append(f"right action not equivariant on ({self.labels[j]}, {alg.labels[i]})")
        if not np.array_equal((sig @ self.diff) % p, (self.diff @ sig) % p):
            out.append("twist does not commute with the differential")
        tw = self.twist()
        if not (tw.power(self.power) == PrimeFieldMatrix.identity(p, self.dim)):
            out.append("twist does not have order dividing n")
        return out


def tensor_power(a: DgAlgebra, n: int) -> CyclicPowerAlgebra:
    return CyclicPowerAlgebra(a, n)


def twisted_power(m: DgBimodule, a: DgAlgebra, n: int,
                  power_algebra: CyclicPowerAlgebra | None = None) -> TwistedPower:
    """M^{(x)n} over A^{(x)n}, right action precomposed with the cyclic rotation."""
    if n < 1:
        raise AlgebraError("twisted power needs n >= 1")
    if m.algebra is not a:
        raise AlgebraError("bimodule is over a different algebra")
    pa = power_algebra or CyclicPowerAlgebra(a, n)
    return TwistedPower(m, pa)


# ---------------------------------------------------------------------------
# bar-type simplicial objects


@dataclass(frozen=True)
class Factor:
    """One tensor slot: dimension, degrees, differential terms, unit (if any)."""

    dim: int
    degrees: tuple[int, ...]
    d_terms: tuple
    unit: int | None = None

    @classmethod
    def of_algebra(cls, a: DgAlgebra) -> "Factor":
        return cls(a.dim, a.degrees, tuple(tuple(t) for t in a.d_terms), a.unit)

    @classmethod
    def of_module(cls, m: DgBimodule) -> "Factor":
        return cls(m.dim, m.degrees, tuple(tuple(t) for t in m.d_terms), None)


@dataclass(frozen=True)
class FaceSpec:
    """Optional rotation of the last slot to the front, then adjacent contractions.

    ``contractions`` maps a slot u (after rotation) to a table with
    ``table[x][y]`` the terms of the product of slots u and u+1.
    """

    rotate: bool
    contractions: tuple[tuple[int, object], ...]


class BarTypeObject:
    """Simplicial object whose level k is a tensor word of factors.

    Subclasses describe ``factors(k)``, ``face_spec(k, i)`` and
    ``degeneracy_positions(k, j)`` (slots of level k+1 holding the inserted
    unit).  Degenerate subspaces are spanned by basis words, so the
    normalized complex keeps exactly the non-degenerate words.
    """

    p: int
    max_level: int
    provenance: tuple[str, ...] = ()

    def factors(self, k: int) -> list[Factor]:
        raise NotImplementedError

    def face_spec(self, k: int, i: int) -> FaceSpec:
        raise NotImplementedError

    def degeneracy_positions(self, k: int, j: int) -> tuple[int, ...]:
        raise NotImplementedError

    def _factors(self, k: int) -> list[Factor]:
        cache = self.__dict__.setdefault("_factor_cache", {})
        if k not in cache:
            cache[k] = self.factors(k)
        return cache[k]

    # basis words -----------------------------------------------------

    def words(self, k: int) -> Iterator[tuple[int, ...]]:
        return itertools.product(*[range(f.dim) for f in self._factors(k)])

    def level_dim(self, k: int) -> int:
        out = 1
        for f in self._factors(k):
            out *= f.dim
        return out

    def degree(self, k: int, x: tuple[int, ...]) -> int:
        fs = self._factors(k)
        return sum(fs[i].degrees[v] for i, v in enumerate(x))

    def is_degenerate(self, k: int, x: tuple[int, ...]) -> bool:
        if k == 0:
            return False
        fs = self._factors(k)
        for j in range(k):
            pos = self.degeneracy_positions(k - 1, j)
            if all(x[u] == fs[u].unit for u in pos):
                return True
        return False

    def normalized_words(self, k: int, max_degree: int | None = None) -> list[tuple[int, ...]]:
        out = []
        fs = self._factors(k)
        for x in self.words(k):
            if max_degree is not None and k + sum(fs[i].degrees[v] for i, v in enumerate(x)) > max_degree:
                continue
            if not self.is_degenerate(k, x):
                out.append(x)
        return out

    # structure maps on words ------------------------------------------

    def _face(self, k: int, i: int):
        cache = self.__dict__.setdefault("_face_cache", {})
        hit = cache.get((k, i))
        if hit is None:
            spec = self.face_spec(k, i)
            hit = cache[(k, i)] = (spec.rotate, dict(spec.contractions), self._factors(k))
        return hit

    def apply_face(self, k: int, i: int, x: tuple[int, ...]) -> list[tuple[tuple[int, ...], int]]:
        rotate, contr, fs = self._face(k, i)
        sign = 1
        if rotate:
            last = fs[-1].degrees[x[-1]]
            rest = sum(fs[u].degrees[x[u]] for u in range(len(x) - 1))
            if last % 2 and rest % 2:
                sign = -1
            x = (x[-1],) + x[:-1]
        slots: list[Terms] = []
        u = 0
        while u < len(x):
            table = contr.get(u)
            if table is not None:
                terms = table[x[u]][x[u + 1]]
                if not terms:
                    return []
                slots.append(terms)
                u += 2
            else:
                slots.append([(x[u], 1)])
                u += 1
        out = [((), sign)]
        for terms in slots:
            if len(terms) == 1:
                c, v = terms[0]
                out = [(w + (c,), s * v) for w, s in out]
            else:
                out = [(w + (c,), s * v) for w, s in out for c, v in terms]
        return out

    def apply_degeneracy(self, k: int, j: int, x: tuple[int, ...]) -> tuple[int, ...]:
        pos = self.degeneracy_positions(k, j)
        tgt = self._factors(k + 1)
        out = []
        src = iter(x)
        pset = set(pos)
        for u in range(len(tgt)):
            out.append(tgt[u].unit if u in pset else next(src))
        return tuple(out)

    def apply_internal_d(self, k: int, x: tuple[int, ...]) -> list[tuple[tuple[int, ...], int]]:
        fs = self._factors(k)
        out = []
        run = 0
        for u, f in enumerate(fs):
            terms = f.d_terms[x[u]]
            if terms:
                sign = -1 if run % 2 else 1
                for c, v in terms:
                    out.append((x[:u] + (c,) + x[u + 1:], sign * v))
            run += f.degrees[x[u]]
        return out

    def apply_permutation(self, k: int, order: Sequence[int], x: tuple[int, ...]) -> tuple[tuple[int, ...], int]:
        fs = self._factors(k)
        degs = [fs[u].degrees[x[u]] for u in range(len(x))]
        return tuple(x[u] for u in order), koszul_sign(degs, order)

    # assembled objects -------------------------------------------------

    def normalized_bicomplex(self, max_total: int | None = None) -> Bicomplex:
        """Cells (k, q) of non-degenerate words; optionally only total degree <= max_total."""
        p = self.p
        index: list[dict[tuple[int, ...], tuple[int, int]]] = []
        cells: dict[tuple[int, int], int] = {}
        per_cell: dict[tuple[int, int], list[tuple[int, ...]]] = {}
        for k in range(self.max_level + 1):
            idx: dict[tuple[int, ...], tuple[int, int]] = {}
            for x in self.normalized_words(k, max_total):
                q = self.degree(k, x)
                lst = per_cell.setdefault((k, q), [])
                idx[x] = (q, len(lst))
                lst.append(x)
            index.append(idx)
        for key, lst in per_cell.items():
            cells[key] = len(lst)
        dh: dict[tuple[int, int], PrimeFieldMatrix] = {}
        dv: dict[tuple[int, int], PrimeFieldMatrix] = {}
        for (k, q), lst in per_cell.items():
            if k >= 1 and (k - 1, q) in cells:
                tgt = index[k - 1]
                r, c, v = [], [], []
                for col, x in enumerate(lst):
                    for i in range(k + 1):
                        s = -1 if i % 2 else 1
                        for y, coef in self.apply_face(k, i, x):
                            hit = tgt.get(y)
                            if hit is not None:
                                r.append(hit[1]); c.append(col); v.append(s * coef)
                if r:
                    dh[(k, q)] = PrimeFieldMatrix.from_triplets(p, cells[(k - 1, q)], len(lst), r, c, v)
            if (k, q - 1) in cells:
                tgt = index[k]
                r, c, v = [], [], []
                for col, x in enumerate(lst):
                    for y, coef in self.apply_internal_d(k, x):
                        hit = tgt.get(y)
                        if hit is not None:
                            r.append(hit[1]); c.append(col); v.append(coef)
                if r:
                    dv[(k, q)] = PrimeFieldMatrix.from_triplets(p, cells[(k, q - 1)], len(lst), r, c, v)
        self._last_index = index
        self._last_cells = per_cell
        qs = [q for (_, q) in cells] or [0]
        return Bicomplex(p, cells, dh, dv, s_bounds=(0, self.max_level), t_bounds=(min(qs), max(qs)))

    def realize(self, max_total: int | None = None) -> ChainComplex:
        b = self.normalized_bicomplex(max_total)
        slo, shi = b.s_bounds
        tlo, thi = b.t_bounds
        hi = shi + thi if max_total is None else max_total
        from .complexes import Convention, totalize

        c = totalize(b, Convention.SUM, (slo + tlo, max(hi, slo + tlo)))
        prov = c.provenance + tuple(self.provenance) + (f"simplicial levels truncated at L={self.max_level}",)
        return ChainComplex(c.p, c.space.dims, {n: c.diff(n) for n in c.degrees},
                            cells=c.cells, provenance=prov, check=True)

    def level_complex(self, k: int) -> tuple[ChainComplex, dict[tuple[int, ...], tuple[int, int]]]:
        """Unnormalized level k as a complex in internal degree, with its word index."""
        p = self.p
        by_q: dict[int, list[tuple[int, ...]]] = {}
        idx: dict[tuple[int, ...], tuple[int, int]] = {}
        for x in self.words(k):
            q = self.degree(k, x)
            lst = by_q.setdefault(q, [])
            idx[x] = (q, len(lst))
            lst.append(x)
        d = {}
        for q, lst in by_q.items():
            if q - 1 not in by_q:
                continue
            r, c, v = [], [], []
            for col, x in enumerate(lst):
                for y, coef in self.apply_internal_d(k, x):
                    r.append(idx[y][1]); c.append(col); v.append(coef)
            if r:
                d[q] = PrimeFieldMatrix.from_triplets(p, len(by_q[q - 1]), len(lst), r, c, v)
        return ChainComplex(p, {q: len(v) for q, v in by_q.items()}, d), idx

    def _word_map(self, src, src_idx, tgt, tgt_idx, fn) -> ChainMap:
        p = self.p
        mats = {}
        trip: dict[int, tuple[list, list, list]] = {}
        for x, (q, col) in src_idx.items():
            for y, coef in fn(x):
                qq, row = tgt_idx[y]
                if qq != q:
                    raise ComplexError("structure map does not preserve internal degree")
                t = trip.setdefault(q, ([], [], []))
                t[0].append(row); t[1].append(col); t[2].append(coef)
        for q, (r, c, v) in trip.items():
            mats[q] = PrimeFieldMatrix.from_triplets(p, tgt.dim(q), src.dim(q), r, c, v)
        return ChainMap(src, tgt, mats)

    def to_simplicial_object(self, L: int | None = None, check: bool = True) -> SimplicialObject:
        """Explicit unnormalized levels 0..L with face and degeneracy matrices."""
        L = self.max_level if L is None else L
        levels = []
        idxs = []
        for k in range(L + 1):
            c, idx = self.level_complex(k)
            levels.append(c)
            idxs.append(idx)
        faces = [[]]
        for k in range(1, L + 1):
            faces.append([self._word_map(levels[k], idxs[k], levels[k - 1], idxs[k - 1],
                                         lambda x, k=k, i=i: self.apply_face(k, i, x))
                          for i in range(k + 1)])
        degens = []
        for k in range(L):
            degens.append([self._word_map(levels[k], idxs[k], levels[k + 1], idxs[k + 1],
                                          lambda x, k=k, j=j: [(self.apply_degeneracy(k, j, x), 1)])
                           for j in range(k + 1)])
        return SimplicialObject(levels, faces, degens, provenance=self.provenance, check=check)


class TwoSidedBar(BarTypeObject):
    """B(M, A, N): level k is M (x) A^{(x)k} (x) N."""

    def __init__(self, m: DgBimodule, a: DgAlgebra, n: DgBimodule, L: int):
        if m.p != a.p or n.p != a.p:
            raise AlgebraError("incompatible moduli")
        if m.right_terms is None:
            raise AlgebraError("left argument needs a right action")
        if n.left_terms is None:
            raise AlgebraError("right argument needs a left action")
        if L < 0:
            raise AlgebraError("truncation level must be >= 0")
        self.p = a.p
        self.m, self.a, self.n = m, a, n
        self.max_level = L
        self.provenance = (f"two-sided bar truncated at L={L}",)
        self._fm = Factor.of_module(m)
        self._fa = Factor.of_algebra(a)
        self._fn = Factor.of_module(n)

    def factors(self, k):
        return [self._fm] + [self._fa] * k + [self._fn]

    def face_spec(self, k, i):
        if i == 0:
            table = self.m.right_terms
        elif i == k:
            table = self.n.left_terms
        else:
            table = self.a.mult_terms
        return FaceSpec(False, ((i, table),))

    def degeneracy_positions(self, k, j):
        return (j + 1,)


def bar_augmentation(bar: TwoSidedBar, c: ChainComplex | None = None) -> ChainMap:
    """Level-0 multiplication M (x) N -> A realized as a chain map, for M = N = A.

    ``c`` is the realized bar complex (computed if omitted).
    """
    a = bar.a
    if not (bar.m.is_regular_of(a) and bar.n.is_regular_of(a)):
        raise AlgebraError("augmentation needs B(A, A, A)")
    if c is None:
        c = bar.realize()
    target = a.as_complex()
    pos = _degree_position(a.degrees)
    cells = bar._last_cells
    trips: dict[int, tuple[list, list, list]] = {}
    for n, blocks in c.cells.items():
        for s, t, off, k in blocks:
            if s != 0:
                continue
            for j, (x0, x1) in enumerate(cells[(s, t)]):
                for z, v in a.mult_terms[x0][x1]:
                    q, row = pos[z]
                    r, cc, vv = trips.setdefault(n, ([], [], []))
                    r.append(row); cc.append(off + j); vv.append(v)
    maps = {n: PrimeFieldMatrix.from_triplets(a.p, target.dim(n), c.dim(n), *trips[n]) for n in trips}
    return ChainMap(c, target, maps)


def two_sided_bar(m: DgBimodule, a: DgAlgebra, n: DgBimodule, L: int) -> TwoSidedBar:
    """Normalized two-sided bar construction truncated at level L."""
    return TwoSidedBar(m, a, n, L)


def _check_connective(a: DgAlgebra):
    bad = [a.labels[i] for i in range(a.dim) if i != a.unit and a.degrees[i] < 0]
    if bad:
        raise AlgebraError(f"augmentation ideal has negative-degree elements {bad}")


def derived_tensor(m: DgBimodule, a: DgAlgebra, n: DgBimodule, D: int) -> ChainComplex:
    """Complex computing M (x)^L_A N exactly through degree D.

    Level k of the bar construction only reaches total degrees
    >= k + min|M| + min|N|, so truncating at L = D + 1 - min|M| - min|N|
    leaves degrees <= D exact.
    """
    _check_connective(a)
    L = max(0, D + 1 - m.min_degree() - n.min_degree())
    bar = two_sided_bar(m, a, n, L)
    c = bar.realize(max_total=D + 1)
    return ChainComplex(c.p, c.space.dims, {k: c.diff(k) for k in c.degrees}, cells=c.cells,
                        provenance=c.provenance + (f"exact through degree {D}",), check=False)


def tor_dims(m: DgBimodule, a: DgAlgebra, n: DgBimodule, D: int) -> dict[int, int]:
    c = derived_tensor(m, a, n, D)
    lo = min(0, m.min_degree() + n.min_degree())
    return {k: c.homology(k).dim for k in range(lo, D + 1)}


# ---------------------------------------------------------------------------
# bimodule complexes and tensoring over A^e


class BimoduleComplex:
    """Complex of DG A-bimodules given by per-degree action matrices.

    ``left[n][i]`` and ``right[n][i]`` are the matrices of acting with e_i on
    degree n (from the left, resp. right); differentials as in ChainComplex.
    """

    def __init__(self, algebra: DgAlgebra, complex: ChainComplex,
                 left: dict[int, list[PrimeFieldMatrix]], right: dict[int, list[PrimeFieldMatrix]]):
        self.algebra = algebra
        self.complex = complex
        self.left = left
        self.right = right
        self.p = algebra.p

    def violations(self) -> list[str]:
        """Module axioms and Leibniz compatibility of the action matrices."""
        out = []
        a = self.algebra
        c = self.complex
        p = self.p
        for n in c.degrees:
            for i in range(a.dim):
                # d(x.w) = dx.w + (-1)^|x| x.dw, and degree shifts by |x|
                dl = c.diff(n + a.degrees[i]) @ self.left[n][i]
                rhs = self.left[n - 1][i] @ c.diff(n) if (n - 1) in self.left else None
                term = rhs.scale(-1 if a.degrees[i] % 2 else 1) if rhs is not None else None
                for k, v in a.d_terms[i]:
                    extra = self.left[n][k].scale(v)
                    term = extra if term is None else term + extra
                if term is not None and not (dl == term):
                    out.append(f"left action of {a.labels[i]} not compatible with d in degree {n}")
        return out


def bar_resolution(a: DgAlgebra, L: int) -> tuple[BimoduleComplex, TwoSidedBar]:
    """realize B(A, A, A) as a complex of A-bimodules, truncated at level L."""
    A = DgBimodule.regular(a)
    bar = TwoSidedBar(A, a, A, L)
    c = bar.realize()
    index = bar._last_index
    cells = bar._last_cells
    p = a.p
    # locate every word in the total complex
    where: dict[tuple[int, tuple[int, ...]], tuple[int, int]] = {}
    for n, blocks in c.cells.items():
        for s, t, off, k in blocks:
            for pos, x in enumerate(cells[(s, t)]):
                where[(s, x)] = (n, off + pos)
    left: dict[int, list[PrimeFieldMatrix]] = {}
    right: dict[int, list[PrimeFieldMatrix]] = {}
    degs = c.degrees
    for n in degs:
        left[n] = []
        right[n] = []
    for i in range(a.dim):
        di = a.degrees[i]
        trip_l: dict[int, tuple[list, list, list]] = {}
        trip_r: dict[int, tuple[list, list, list]] = {}
        for (k, x), (n, col) in where.items():
            # left: (-1)^{|a| k} (a x_0) (x) ...
            sgn = -1 if (di * k) % 2 else 1
            for cidx, v in a.mult_terms[i][x[0]]:
                y = (cidx,) + x[1:]
                hit = where.get((k, y))
                if hit is not None:
                    t = trip_l.setdefault(n, ([], [], []))
                    t[0].append(hit[1]); t[1].append(col); t[2].append(sgn * v)
            for cidx, v in a.mult_terms[x[-1]][i]:
                y = x[:-1] + (cidx,)
                hit = where.get((k, y))
                if hit is not None:
                    t = trip_r.setdefault(n, ([], [], []))
                    t[0].append(hit[1]); t[1].append(col); t[2].append(v)
        for n in degs:
            tgt = n + di
            for trip, store in ((trip_l, left), (trip_r, right)):
                r, cc, v = trip.get(n, ([], [], []))
                store[n].append(PrimeFieldMatrix.from_triplets(p, c.dim(tgt), c.dim(n), r, cc, v))
    return BimoduleComplex(a, c, left, right), bar


def tensor_over_enveloping(m: DgBimodule, w: BimoduleComplex, degrees: Sequence[int]) -> ChainComplex:
    """M (x)_{A^e} W as an explicit quotient of M (x) W, in the given total degrees.

    Relations: (m a) (x) w = m (x) (a w) and
    (a m) (x) w = (-1)^{|a|(|m|+|w|)} m (x) (w a).
    The differential d(m (x) w) = dm (x) w + (-1)^{|m|} m (x) dw descends.
    """
    a = w.algebra
    p = m.p
    c = w.complex
    degrees = sorted(set(degrees))
    need = sorted(set(degrees) | {n - 1 for n in degrees})
    # coordinates of M (x) W in total degree n: pairs (mi, wn, wpos)
    coords: dict[int, dict[tuple[int, int, int], int]] = {}
    for n in need:
        idx = {}
        for mi, md in enumerate(m.degrees):
            wn = n - md
            for pos in range(c.dim(wn)):
                idx[(mi, wn, pos)] = len(idx)
        coords[n] = idx
    # dense-ish action lookups for W: column -> terms
    def _cols(mat: PrimeFieldMatrix) -> list[Terms]:
        csc = mat.to_sparse()
        return [list(zip(csc.indices[csc.indptr[j]:csc.indptr[j + 1]].tolist(),
                         csc.data[csc.indptr[j]:csc.indptr[j + 1]].tolist())) for j in range(mat.cols)]

    lcache: dict[tuple[int, int], list[Terms]] = {}
    rcache: dict[tuple[int, int], list[Terms]] = {}

    def lcol(n, i):
        key = (n, i)
        if key not in lcache:
            lcache[key] = _cols(w.left[n][i]) if n in w.left else []
        return lcache[key]

    def rcol(n, i):
        key = (n, i)
        if key not in rcache:
            rcache[key] = _cols(w.right[n][i]) if n in w.right else []
        return rcache[key]

    quotients: dict[int, tuple[SparseEchelon, list[int], dict[int, int]]] = {}
    for n in need:
        ech = SparseEchelon(p)
        idx = coords[n]
        for i in range(a.dim):
            ai = a.degrees[i]
            for mi, md in enumerate(m.degrees):
                # relations live on m (x) w with |m|+|a|+|w| = n for the first kind
                for wn_src in {n - md - ai}:
                    for pos in range(c.dim(wn_src)):
                        vec: dict[int, int] = {}
                        for mk, v in m.right_terms[mi][i]:
                            key = idx.get((mk, wn_src, pos))
                            if key is not None:
                                vec[key] = (vec.get(key, 0) + v) % p
                        cols = lcol(wn_src, i)
                        if cols:
                            for wr, v in cols[pos]:
                                key = idx.get((mi, wn_src + ai, wr))
                                if key is not None:
                                    vec[key] = (vec.get(key, 0) - v) % p
                        if any(vec.values()):
                            ech.add(vec)
                        vec = {}
                        for mk, v in m.left_terms[i][mi]:
                            key = idx.get((mk, wn_src, pos))
                            if key is not None:
                                vec[key] = (vec.get(key, 0) + v) % p
                        sign = -1 if (ai * (md + wn_src)) % 2 else 1
                        cols = rcol(wn_src, i)
                        if cols:
                            for wr, v in cols[pos]:
                                key = idx.get((mi, wn_src + ai, wr))
                                if key is not None:
                                    vec[key] = (vec.get(key, 0) - sign * v) % p
                        if any(vec.values()):
                            ech.add(vec)
        ech.make_reduced()
        free = [j for j in range(len(idx)) if j not in ech.pivots]
        quotients[n] = (ech, free, {j: t for t, j in enumerate(free)})
    dims = {n: len(quotients[n][1]) for n in degrees}
    d = {}
    for n in degrees:
        if n - 1 not in quotients or n - 1 not in dims:
            continue
        src_idx = coords[n]
        inv = {v: k for k, v in src_idx.items()}
        tgt_idx = coords[n - 1]
        ech_t, _, pos_t = quotients[n - 1]
        r, cc, vv = [], [], []
        for col, j in enumerate(quotients[n][1]):
            mi, wn, pos = inv[j]
            vec: dict[int, int] = {}
            for mk, v in m.d_terms[mi]:
                key = tgt_idx.get((mk, wn, pos))
                if key is not None:
                    vec[key] = (vec.get(key, 0) + v) % p
            sign = -1 if m.degrees[mi] % 2 else 1
            dw = c.diff(wn)
            if dw.nnz:
                colv = dw.to_sparse()
                lo, hi = colv.indptr[pos], colv.indptr[pos + 1]
                for wr, v in zip(colv.indices[lo:hi].tolist(), colv.data[lo:hi].tolist()):
                    key = tgt_idx[(mi, wn - 1, wr)]
                    vec[key] = (vec.get(key, 0) + sign * v) % p
            red = ech_t.reduce(vec)
            for key, v in red.items():
                r.append(pos_t[key]); cc.append(col); vv.append(v)
        if r:
            d[n] = PrimeFieldMatrix.from_triplets(p, dims[n - 1], dims[n], r, cc, vv)
    return ChainComplex(p, dims, d, provenance=("tensor over the enveloping algebra",))
