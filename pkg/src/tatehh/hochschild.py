"""Cyclic bar constructions, Hochschild homology and p-fold subdivision.

The subdivision is built directly in its unwound form: level n is
(M (x) A^{(x)n})^{(x)p}, arranged in p blocks (m_j, a_{j,1}, ..., a_{j,n}).
For M = A this is the edgewise subdivision of the cyclic bar object
(level n sits over level p(n+1) - 1); for general M it is the version
with p copies of M, whose reshuffle is Z(A^{(x)p}; M twisted).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .complexes import ChainComplex, ChainMap, ComplexError
from .dg_algebra import (
    AlgebraError,
    BarTypeObject,
    BimoduleComplex,
    CyclicPowerAlgebra,
    DgAlgebra,
    DgBimodule,
    Factor,
    FaceSpec,
    _check_connective,
    _radix_index,
    bar_resolution,
    koszul_sign,
    tensor_over_enveloping,
    twisted_power,
)
from .fp_linalg import PrimeFieldMatrix, complement_basis


class StabilizationError(RuntimeError):
    """Homology changed when the truncation level was raised."""


# ---------------------------------------------------------------------------
# equivariant complexes


class EquivariantComplex:
    """Chain complex with an automorphism t of order dividing ``order``."""

    def __init__(self, complex: ChainComplex, action: ChainMap, order: int, check: bool = True):
        if action.source is not complex or action.target is not complex:
            raise ComplexError("action must be an endomorphism of the complex")
        self.complex = complex
        self.action = action
        self.order = int(order)
        self.p = complex.p
        if check:
            self.check()

    def __repr__(self):
        return f"EquivariantComplex(order={self.order}, dims={dict(sorted(self.complex.dims.items()))})"

    def violations(self) -> list[str]:
        out = []
        c = self.complex
        for n in c.degrees:
            t = self.action[n]
            if not (t.power(self.order) == PrimeFieldMatrix.identity(self.p, c.dim(n))):
                out.append(f"t^{self.order} != id in degree {n}")
            if not (c.diff(n) @ t == self.action[n - 1] @ c.diff(n)):
                out.append(f"t does not commute with d in degree {n}")
        return out

    def check(self):
        bad = self.violations()
        if bad:
            raise ComplexError("; ".join(bad))

    def matrix(self, n: int) -> PrimeFieldMatrix:
        return self.action[n]

    @classmethod
    def from_matrices(cls, complex: ChainComplex, t: dict[int, PrimeFieldMatrix], order: int,
                      check: bool = True) -> "EquivariantComplex":
        return cls(complex, ChainMap(complex, complex, t, check=False), order, check=check)

    @classmethod
    def trivial(cls, p: int, dims: dict[int, int], order: int | None = None) -> "EquivariantComplex":
        """Zero differential, trivial action."""
        c = ChainComplex(p, dims)
        return cls.from_matrices(c, {n: PrimeFieldMatrix.identity(p, k) for n, k in dims.items()}, order or p)

    @classmethod
    def regular(cls, p: int, degree: int = 0, order: int | None = None) -> "EquivariantComplex":
        """F_p[C_n] in one degree with the regular (cyclic shift) action."""
        n = order or p
        c = ChainComplex(p, {degree: n})
        shift = PrimeFieldMatrix.from_triplets(p, n, n, [(i + 1) % n for i in range(n)], range(n), [1] * n)
        return cls.from_matrices(c, {degree: shift}, n)

    def direct_sum(self, other: "EquivariantComplex") -> "EquivariantComplex":
        if self.order != other.order:
            raise ValueError("group orders differ")
        c = self.complex.direct_sum(other.complex)
        from .fp_linalg import block

        t = {}
        for n in c.degrees:
            t[n] = block(self.p, [[self.action[n], None], [None, other.action[n]]],
                         [self.complex.dim(n), other.complex.dim(n)], [self.complex.dim(n), other.complex.dim(n)])
        return EquivariantComplex.from_matrices(c, t, self.order)

    def shift(self, k: int) -> "EquivariantComplex":
        c = self.complex.shift(k)
        return EquivariantComplex.from_matrices(c, {n + k: self.action[n] for n in self.complex.degrees}, self.order)

    def homology_action(self, n: int) -> PrimeFieldMatrix:
        """Matrix of t on H_n in a basis of cycle representatives."""
        return _induced_on_homology(self.complex, self.action[n], n)


def _induced_on_homology(c: ChainComplex, t: PrimeFieldMatrix, n: int) -> PrimeFieldMatrix:
    from .fp_linalg import hstack, solve

    p = c.p
    h = c.homology(n, representatives=True)
    if h.dim == 0:
        return PrimeFieldMatrix.zeros(p, 0, 0)
    reps = PrimeFieldMatrix.from_dense(p, np.stack(h.representatives, axis=1))
    bnd = c.diff(n + 1)
    basis = hstack(p, [reps, bnd], rows=c.dim(n))
    img = t @ reps
    cols = []
    for j in range(h.dim):
        x = solve(basis, img.column(j))
        if x is None:
            raise ComplexError("action does not preserve cycles")
        cols.append(x[: h.dim])
    return PrimeFieldMatrix.from_dense(p, np.stack(cols, axis=1))


def good_truncation(ec: EquivariantComplex, top: int) -> EquivariantComplex:
    """tau_{<= top}: degrees below ``top`` kept, degree ``top`` replaced by C_top / B_top.

    The inclusion of the truncation induces isomorphisms on H_n for n <= top and
    H_n = 0 above, so it is the right object when only degrees <= top are exact.
    """
    c = ec.complex
    p = ec.p
    free, Q = complement_basis(c.diff(top + 1))
    S = PrimeFieldMatrix.from_triplets(p, c.dim(top), len(free), free, range(len(free)), [1] * len(free))
    dims = {n: k for n, k in c.dims.items() if n < top}
    dims[top] = len(free)
    d = {n: c.diff(n) for n in c.degrees if n < top}
    d[top] = c.diff(top) @ S
    t = {n: ec.action[n] for n in c.degrees if n < top}
    t[top] = Q @ ec.action[top] @ S
    cells = {n: v for n, v in c.cells.items() if n < top}
    prov = c.provenance + (f"good truncation at degree {top}",)
    out = ChainComplex(p, dims, d, cells=cells, provenance=prov)
    return EquivariantComplex.from_matrices(out, t, ec.order)


# ---------------------------------------------------------------------------
# cyclic bar


class CyclicBarObject(BarTypeObject):
    """Z(A; M): level k is M (x) A^{(x)k}, normalized to M (x) Abar^{(x)k}.

    Faces: d_0 acts by the first algebra factor on M from the right, inner
    faces multiply neighbours, and d_k moves the last factor round to act on
    M from the left (with the Koszul sign of the rotation).
    """

    shape = "S^1"

    def __init__(self, a: DgAlgebra, m: DgBimodule, L: int):
        if a.p != m.p:
            raise AlgebraError(f"modulus mismatch: {a.p} vs {m.p}")
        if m.algebra is not a:
            raise AlgebraError("bimodule is over a different algebra")
        if m.left is None or m.right is None:
            raise AlgebraError("coefficients must be a bimodule")
        _check_connective(a)
        if L < 0:
            raise AlgebraError("truncation level must be >= 0")
        self.p = a.p
        self.a, self.m = a, m
        self.max_level = L
        self.provenance = (f"cyclic bar Z({a.name or 'A'}; {m.name or 'M'}) truncated at L={L}",)
        self._fm = Factor.of_module(m)
        self._fa = Factor.of_algebra(a)

    def factors(self, k):
        return [self._fm] + [self._fa] * k

    def face_spec(self, k, i):
        if i == k:
            return FaceSpec(True, ((0, self.m.left_terms),))
        if i == 0:
            return FaceSpec(False, ((0, self.m.right_terms),))
        return FaceSpec(False, ((i, self.a.mult_terms),))

    def degeneracy_positions(self, k, j):
        return (j + 1,)

    def level_dims(self) -> list[int]:
        abar = self.a.dim - 1
        return [self.m.dim * abar ** k for k in range(self.max_level + 1)]


def cyclic_bar(a: DgAlgebra, m: DgBimodule, L: int) -> CyclicBarObject:
    return CyclicBarObject(a, m, L)


@dataclass
class HHResult:
    dims: dict[int, int]
    stable: bool
    truncation: int
    provenance: tuple[str, ...] = ()

    def total(self) -> int:
        return sum(self.dims.values())


def _hh_dims(a: DgAlgebra, m: DgBimodule, D: int, L: int) -> dict[int, int]:
    z = CyclicBarObject(a, m, L)
    c = z.realize(max_total=D + 1)
    lo = min(0, m.min_degree())
    return {n: c.homology(n).dim for n in range(lo, D + 1)}


def hh(a: DgAlgebra, m: DgBimodule | None = None, D: int = 6, check_stable: bool = True) -> HHResult:
    """dim HH_n(A; M) for n <= D from the normalized cyclic bar.

    Level k contributes only to total degrees >= k + min|M|, so truncating at
    L = D + 1 - min|M| is exact through D; the result is recomputed one level
    higher and compared.
    """
    m = DgBimodule.regular(a) if m is None else m
    L = max(0, D + 1 - min(0, m.min_degree()))
    dims = _hh_dims(a, m, D, L)
    stable = True
    if check_stable:
        again = _hh_dims(a, m, D, L + 1)
        if again != dims:
            raise StabilizationError(f"HH dims changed between L={L} and L={L + 1}: {dims} vs {again}")
    return HHResult(dims, stable, L, (f"cyclic bar truncated at L={L}", f"rechecked at L={L + 1}" if check_stable else ""))


def hh_via_resolution(a: DgAlgebra, m: DgBimodule | None = None, D: int = 6,
                      resolution: BimoduleComplex | None = None) -> dict[int, int]:
    """dim HH_n(A; M) as homology of M (x)_{A^e} W for a bimodule resolution W of A.

    W defaults to the two-sided bar construction truncated at D + 2.
    """
    m = DgBimodule.regular(a) if m is None else m
    if resolution is None:
        resolution, _ = bar_resolution(a, D + 2)
    lo = min(0, m.min_degree())
    c = tensor_over_enveloping(m, resolution, range(lo, D + 2))
    return {n: c.homology(n).dim for n in range(lo, D + 1)}


# ---------------------------------------------------------------------------
# subdivision


class UnwoundCyclicBar(BarTypeObject):
    """p-fold subdivision of Z(A; M) with p copies of M and its C_p action."""

    def __init__(self, a: DgAlgebra, m: DgBimodule, p: int, L: int):
        if p < 1:
            raise AlgebraError("subdivision order must be >= 1")
        if m.algebra is not a or a.p != m.p:
            raise AlgebraError("bimodule is over a different algebra")
        self.p = a.p
        self.order = p
        self.a, self.m = a, m
        self.max_level = L
        self.provenance = (f"{p}-fold subdivision of Z({a.name or 'A'}; {m.name or 'M'}), levels <= {L}",)
        self._fm = Factor.of_module(m)
        self._fa = Factor.of_algebra(a)

    def factors(self, n):
        return ([self._fm] + [self._fa] * n) * self.order

    def face_spec(self, n, i):
        w = n + 1
        if i < n:
            table = self.m.right_terms if i == 0 else self.a.mult_terms
            return FaceSpec(False, tuple((j * w + i, table) for j in range(self.order)))
        contr = [(0, self.m.left_terms)] + [(1 + j * w + n, self.m.left_terms) for j in range(self.order - 1)]
        return FaceSpec(True, tuple(contr))

    def degeneracy_positions(self, n, i):
        w = n + 2
        return tuple(j * w + i + 1 for j in range(self.order))

    def rotation_order(self, n: int) -> list[int]:
        w = n + 1
        q = self.order
        return list(range((q - 1) * w, q * w)) + list(range(0, (q - 1) * w))

    def rotate(self, n: int, x: tuple[int, ...]) -> tuple[tuple[int, ...], int]:
        return self.apply_permutation(n, self.rotation_order(n), x)

    def realize_equivariant(self, max_total: int | None = None) -> EquivariantComplex:
        c = self.realize(max_total)
        index = self._last_index
        cells = self._last_cells
        p = self.p
        where: dict[tuple[int, tuple[int, ...]], int] = {}
        for n, blocks in c.cells.items():
            for s, t, off, _ in blocks:
                for pos, x in enumerate(cells[(s, t)]):
                    where[(s, x)] = off + pos
        trips: dict[int, tuple[list, list, list]] = {}
        for n, blocks in c.cells.items():
            r, cc, v = trips.setdefault(n, ([], [], []))
            for s, t, off, _ in blocks:
                for pos, x in enumerate(cells[(s, t)]):
                    y, sign = self.rotate(s, x)
                    r.append(where[(s, y)]); cc.append(off + pos); v.append(sign)
        mats = {n: PrimeFieldMatrix.from_triplets(p, c.dim(n), c.dim(n), *trips[n]) for n in c.degrees}
        return EquivariantComplex.from_matrices(c, mats, self.order)

    def normalized_level_dim(self, n: int) -> int:
        return self.m.dim ** self.order * (self.a.dim ** self.order - 1) ** n


def subdivide(z: CyclicBarObject, p: int, max_total: int | None = None,
              check: bool = True) -> tuple[UnwoundCyclicBar, EquivariantComplex]:
    """p-fold subdivision of a truncated cyclic bar object and its realized C_p complex.

    Output level n lies over input level p(n+1) - 1, so the output keeps
    levels n with p(n+1) - 1 <= L.
    """
    if p < 1:
        raise AlgebraError("subdivision order must be >= 1")
    Lp = (z.max_level + 1) // p - 1
    if Lp < 0:
        raise AlgebraError(f"input truncated at L={z.max_level} is too short for a {p}-fold subdivision")
    u = UnwoundCyclicBar(z.a, z.m, p, Lp)
    ec = u.realize_equivariant(max_total)
    if check:
        ec.check()
    return u, ec


def subdivision_model(a: DgAlgebra, m: DgBimodule, p: int, top: int) -> EquivariantComplex:
    """Equivariant complex exact through degree ``top``, cut off by good truncation.

    Levels <= top + 1 - min|M^p| suffice; the good truncation at ``top``
    removes the spurious homology the level cut leaves above it.
    """
    mdeg = p * min(0, m.min_degree())
    L = max(0, top + 1 - mdeg)
    u = UnwoundCyclicBar(a, m, p, L)
    ec = u.realize_equivariant(max_total=top + 1)
    return good_truncation(ec, top)


# ---------------------------------------------------------------------------
# comparison with the cyclic bar of the tensor power


@dataclass
class LevelReport:
    level: int
    words: int
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


@dataclass
class SubdivisionReport:
    order: int
    truncation: int
    levels: list[LevelReport]
    note: str = ""

    @property
    def ok(self) -> bool:
        return all(lv.ok for lv in self.levels)

    def failures(self) -> list[str]:
        return [f for lv in self.levels for f in lv.failures]


def _as_dict(terms) -> dict:
    out: dict = {}
    for w, c in terms:
        out[w] = out.get(w, 0) + c
    return out


def compare_subdivision(a: DgAlgebra, m: DgBimodule, p: int, L: int = 3,
                        max_words: int = 70000) -> SubdivisionReport:
    """Check the reshuffle from the subdivision of Z(A; M) to Z(A^{(x)p}; M^tw).

    Level n word (m_0, a_{0,1..n}, ..., m_{p-1}, a_{p-1,1..n}) goes to
    (m_0..m_{p-1}) (x) B_1 (x) ... (x) B_n with B_k = (a_{p-1,k}, a_{0,k}, ...,
    a_{p-2,k}), signed by the Koszul rule.  Faces, degeneracies, internal
    differentials and both C_p actions are compared on every unnormalized basis
    word.  Levels above the word budget are skipped and the report says so.
    """
    u = UnwoundCyclicBar(a, m, p, L)
    pa = CyclicPowerAlgebra(a, p)
    tw = twisted_power(m, a, p, pa)
    z = CyclicBarObject(pa, tw, L)
    da, dm = a.dim, m.dim
    mod = a.p
    used = L
    for n in range(L + 1):
        if u.level_dim(n) > max_words:
            used = n - 1
            break
    note = "" if used == L else f"levels above {used} exceed {max_words} words and were not compared"

    def phi(n: int, x: tuple[int, ...]) -> tuple[tuple[int, ...], int]:
        w = n + 1
        mpos = [j * w for j in range(p)]
        order = list(mpos)
        for k in range(1, n + 1):
            for j in range(p):
                order.append(((j - 1) % p) * w + k)
        fs = u.factors(n)
        degs = [fs[i].degrees[x[i]] for i in range(len(x))]
        sign = koszul_sign(degs, order)
        nidx = _radix_index([x[i] for i in mpos], dm)
        out = [nidx]
        for k in range(n):
            out.append(_radix_index([x[i] for i in order[p + k * p: p + (k + 1) * p]], da))
        return tuple(out), sign

    def push(n: int, terms) -> dict:
        acc: dict = {}
        for w, c in terms:
            y, s = phi(n, w)
            acc[y] = (acc.get(y, 0) + s * c) % mod
        return {k: v for k, v in acc.items() if v}

    def norm(terms) -> dict:
        acc: dict = {}
        for w, c in terms:
            acc[w] = (acc.get(w, 0) + c) % mod
        return {k: v for k, v in acc.items() if v}

    def z_rotate(n: int, y: tuple[int, ...]) -> tuple[tuple[int, ...], int]:
        j, s = tw.twist_of(y[0])
        out = [j]
        for b in y[1:]:
            bb, sb = pa.rotation_of(b)
            out.append(bb)
            s *= sb
        return tuple(out), s

    levels = []
    for n in range(used + 1):
        rep = LevelReport(n, u.level_dim(n))
        seen = set()
        for x in u.words(n):
            y, s = phi(n, x)
            if y in seen:
                rep.failures.append(f"level {n}: reshuffle is not injective")
                break
            seen.add(y)
            for i in range(n + 1) if n else []:
                lhs = push(n - 1, u.apply_face(n, i, x))
                rhs = norm((w, s * c) for w, c in z.apply_face(n, i, y))
                if lhs != rhs:
                    rep.failures.append(f"level {n}: face d_{i} differs on {x}")
            if n < used:
                for j in range(n + 1):
                    lhs = push(n + 1, [(u.apply_degeneracy(n, j, x), 1)])
                    rhs = norm([(z.apply_degeneracy(n, j, y), s)])
                    if lhs != rhs:
                        rep.failures.append(f"level {n}: degeneracy s_{j} differs on {x}")
            lhs = push(n, u.apply_internal_d(n, x))
            rhs = norm((w, s * c) for w, c in z.apply_internal_d(n, y))
            if lhs != rhs:
                rep.failures.append(f"level {n}: internal differential differs on {x}")
            xr, sr = u.rotate(n, x)
            lhs = push(n, [(xr, sr)])
            yr, sz = z_rotate(n, y)
            rhs = norm([(yr, s * sz)])
            if lhs != rhs:
                rep.failures.append(f"level {n}: C_{p} actions differ on {x}")
            if len(rep.failures) > 20:
                break
        if len(seen) != z.level_dim(n) and not rep.failures:
            rep.failures.append(f"level {n}: {len(seen)} words hit out of {z.level_dim(n)}")
        levels.append(rep)
    return SubdivisionReport(p, used, levels, note)
