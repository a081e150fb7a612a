"""Chain complexes of finite-dimensional F_p vector spaces.

Indexing is homological throughout: the differential of degree n maps
degree n to degree n - 1.  A cohomological degree s corresponds to
homological degree -s.

Bicomplexes store *commuting* horizontal and vertical differentials; the
sign (-1)^s is applied to the vertical part when totalizing, so the total
differential is ``d_h + (-1)^s d_v`` on the (s, t) cell.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .fp_linalg import (
    PrimeFieldMatrix,
    block,
    complement_basis,
    hstack,
    kernel_basis,
    kernel_matrix,
    rank,
)


class ComplexError(ValueError):
    """A differential, chain map or simplicial identity fails to hold."""


class UnboundedAntidiagonal(ComplexError):
    """A requested total degree would need infinitely many cells."""


def _zero(p, r, c):
    return PrimeFieldMatrix.zeros(p, r, c)


@dataclass(frozen=True)
class GradedSpace:
    p: int
    dims: Mapping[int, int]
    labels: Mapping[int, tuple[str, ...]] | None = None

    def __post_init__(self):
        for n, k in self.dims.items():
            if k < 0:
                raise ValueError(f"negative dimension {k} in degree {n}")
        if self.labels is not None:
            for n, labs in self.labels.items():
                if len(labs) != self.dims.get(n, 0):
                    raise ValueError(f"degree {n}: {len(labs)} labels for dimension {self.dims.get(n, 0)}")

    def dim(self, n: int) -> int:
        return self.dims.get(n, 0)

    @property
    def degrees(self) -> list[int]:
        return sorted(n for n, k in self.dims.items() if k)

    @property
    def total_dim(self) -> int:
        return sum(self.dims.values())


class Homology(NamedTuple):
    dim: int
    representatives: list[np.ndarray]


class ChainComplex:
    """Z-graded complex with d_n : C_n -> C_{n-1}.

    ``d`` maps a degree n to a matrix of shape (dim C_{n-1}, dim C_n);
    missing degrees mean the zero map.  ``cells`` optionally records, per
    degree, how the basis splits into named blocks (used for filtrations);
    ``provenance`` is a tuple of free-form notes such as truncation levels.
    """

    def __init__(
        self,
        p: int,
        dims: Mapping[int, int],
        d: Mapping[int, PrimeFieldMatrix] | None = None,
        labels: Mapping[int, Sequence[str]] | None = None,
        cells: Mapping[int, Sequence[tuple]] | None = None,
        provenance: Iterable[str] = (),
        check: bool = True,
    ):
        self.p = p
        dims = {int(n): int(k) for n, k in dims.items() if k}
        self.space = GradedSpace(
            p, dims, None if labels is None else {n: tuple(labels[n]) for n in dims if n in labels} or None)
        self._d: dict[int, PrimeFieldMatrix] = {}
        for n, m in (d or {}).items():
            if m.p != p:
                raise ValueError(f"modulus mismatch in differential of degree {n}")
            want = (dims.get(n - 1, 0), dims.get(n, 0))
            if m.shape != want:
                raise ComplexError(f"d_{n} has shape {m.shape}, expected {want}")
            if m.nnz:
                self._d[int(n)] = m
        self.cells = {int(n): tuple(v) for n, v in (cells or {}).items()}
        self.provenance = tuple(provenance)
        if check:
            self.check()

    # structure -------------------------------------------------------

    @property
    def dims(self) -> dict[int, int]:
        return dict(self.space.dims)

    @property
    def degrees(self) -> list[int]:
        return self.space.degrees

    def dim(self, n: int) -> int:
        return self.space.dim(n)

    def diff(self, n: int) -> PrimeFieldMatrix:
        m = self._d.get(n)
        if m is None:
            return _zero(self.p, self.dim(n - 1), self.dim(n))
        return m

    def check(self):
        for n, m in self._d.items():
            nxt = self._d.get(n - 1)
            if nxt is not None and not (nxt @ m).is_zero():
                raise ComplexError(f"d_{n - 1} o d_{n} != 0")

    def __repr__(self):
        return f"ChainComplex(p={self.p}, dims={dict(sorted(self.space.dims.items()))})"

    def same_as(self, other: "ChainComplex") -> bool:
        """Identical dims and differentials (bases taken literally)."""
        if self.p != other.p or self.space.dims != other.space.dims:
            return False
        degs = set(self._d) | set(other._d)
        return all(self.diff(n) == other.diff(n) for n in degs)

    # homology --------------------------------------------------------

    def homology(self, n: int, representatives: bool = False) -> Homology:
        return homology(self, n, representatives)

    def homology_dims(self, lo: int | None = None, hi: int | None = None) -> dict[int, int]:
        degs = self.degrees
        if not degs and (lo is None or hi is None):
            return {}
        lo = degs[0] if lo is None else lo
        hi = degs[-1] if hi is None else hi
        return {n: homology(self, n).dim for n in range(lo, hi + 1)}

    def euler_characteristic(self) -> int:
        return sum((-1) ** (n % 2) * k for n, k in self.space.dims.items())

    # constructions ---------------------------------------------------

    def shift(self, k: int) -> "ChainComplex":
        """C[k]_n = C_{n-k} with differential (-1)^k d."""
        sign = -1 if k % 2 else 1
        return ChainComplex(
            self.p,
            {n + k: v for n, v in self.space.dims.items()},
            {n + k: m.scale(sign) for n, m in self._d.items()},
            labels=None if self.space.labels is None else {n + k: v for n, v in self.space.labels.items()},
            provenance=self.provenance,
            check=False,
        )

    def truncate(self, lo: int, hi: int) -> "ChainComplex":
        """Brutal truncation to degrees [lo, hi]."""
        dims = {n: k for n, k in self.space.dims.items() if lo <= n <= hi}
        d = {n: m for n, m in self._d.items() if lo < n <= hi}
        return ChainComplex(self.p, dims, d, cells={n: c for n, c in self.cells.items() if lo <= n <= hi},
                            provenance=self.provenance + (f"brutal truncation to [{lo}, {hi}]",), check=False)

    def direct_sum(self, other: "ChainComplex") -> "ChainComplex":
        if self.p != other.p:
            raise ValueError("modulus mismatch")
        p = self.p
        degs = set(self.space.dims) | set(other.space.dims)
        dims = {n: self.dim(n) + other.dim(n) for n in degs}
        d = {}
        for n in degs:
            d[n] = block(p, [[self.diff(n), None], [None, other.diff(n)]],
                         [self.dim(n - 1), other.dim(n - 1)], [self.dim(n), other.dim(n)])
        return ChainComplex(p, dims, d, check=False)


def homology(c: ChainComplex, n: int, representatives: bool = False) -> Homology:
    """dim H_n(c) = dim ker d_n - rank d_{n+1}; optionally cycle representatives."""
    dn = c.diff(n)
    dn1 = c.diff(n + 1)
    k = c.dim(n)
    if k == 0:
        return Homology(0, [])
    r_out = rank(dn)
    r_in = rank(dn1)
    dim = k - r_out - r_in
    if not representatives or dim == 0:
        return Homology(dim, [])
    z = kernel_matrix(dn)
    b = dn1
    # greedily extend a basis of the boundaries by kernel vectors
    reps = []
    cur = b
    base = rank(cur) if cur.cols else 0
    for j in range(z.cols):
        cand = hstack(c.p, [cur, z.submatrix(cols=[j])], rows=k)
        r = rank(cand)
        if r > base:
            reps.append(z.column(j))
            cur, base = cand, r
        if len(reps) == dim:
            break
    return Homology(dim, reps)


# ---------------------------------------------------------------------------
# chain maps


class ChainMap:
    """Degree-0 chain map; ``maps[n]`` has shape (dim target_n, dim source_n)."""

    def __init__(self, source: ChainComplex, target: ChainComplex,
                 maps: Mapping[int, PrimeFieldMatrix], check: bool = True):
        if source.p != target.p:
            raise ValueError("modulus mismatch")
        self.source = source
        self.target = target
        self.p = source.p
        self._maps: dict[int, PrimeFieldMatrix] = {}
        for n, m in maps.items():
            want = (target.dim(n), source.dim(n))
            if m.shape != want:
                raise ComplexError(f"chain map in degree {n} has shape {m.shape}, expected {want}")
            if m.nnz:
                self._maps[int(n)] = m
        if check:
            self.check()

    def __getitem__(self, n: int) -> PrimeFieldMatrix:
        m = self._maps.get(n)
        if m is None:
            return _zero(self.p, self.target.dim(n), self.source.dim(n))
        return m

    def degrees(self) -> list[int]:
        return sorted(set(self.source.space.dims) | set(self.target.space.dims))

    def check(self):
        for n in self.degrees():
            lhs = self.target.diff(n) @ self[n]
            rhs = self[n - 1] @ self.source.diff(n)
            if not (lhs == rhs):
                raise ComplexError(f"chain map does not commute with d in degree {n}")

    def compose(self, first: "ChainMap") -> "ChainMap":
        """self o first."""
        return ChainMap(first.source, self.target,
                        {n: self[n] @ first[n] for n in first.degrees()}, check=False)

    def homology_rank(self, n: int) -> int:
        """Rank of the induced map H_n(source) -> H_n(target)."""
        z = kernel_matrix(self.source.diff(n))
        if z.cols == 0:
            return 0
        img = self[n] @ z
        bnd = self.target.diff(n + 1)
        return rank(hstack(self.p, [img, bnd], rows=self.target.dim(n))) - rank(bnd)

    @classmethod
    def identity(cls, c: ChainComplex) -> "ChainMap":
        return cls(c, c, {n: PrimeFieldMatrix.identity(c.p, k) for n, k in c.space.dims.items()}, check=False)

    @classmethod
    def zero(cls, source: ChainComplex, target: ChainComplex) -> "ChainMap":
        return cls(source, target, {}, check=False)


class Cone(NamedTuple):
    complex: ChainComplex
    inclusion: ChainMap   # target -> cone
    projection: ChainMap  # cone -> source[1]


def cone(f: ChainMap) -> Cone:
    """cone(f)_n = target_n + source_{n-1}, d(y, x) = (dy + f x, -dx)."""
    p = f.p
    s, t = f.source, f.target
    degs = set(t.space.dims) | {n + 1 for n in s.space.dims}
    dims = {n: t.dim(n) + s.dim(n - 1) for n in degs}
    d = {}
    for n in degs:
        d[n] = block(p, [[t.diff(n), f[n - 1]], [None, -s.diff(n - 1)]],
                     [t.dim(n - 1), s.dim(n - 2)], [t.dim(n), s.dim(n - 1)])
    c = ChainComplex(p, dims, d)
    incl = {}
    proj = {}
    for n in degs:
        incl[n] = block(p, [[PrimeFieldMatrix.identity(p, t.dim(n))], [None]],
                        [t.dim(n), s.dim(n - 1)], [t.dim(n)])
        proj[n] = block(p, [[None, PrimeFieldMatrix.identity(p, s.dim(n - 1))]],
                        [s.dim(n - 1)], [t.dim(n), s.dim(n - 1)])
    inc = ChainMap(t, c, incl)
    prj = ChainMap(c, s.shift(1), proj)
    return Cone(c, inc, prj)


def tensor(a: ChainComplex, b: ChainComplex) -> ChainComplex:
    """(a (x) b)_n = sum_i a_i (x) b_{n-i}, d(x (x) y) = dx (x) y + (-1)^|x| x (x) dy.

    Within each degree the blocks are ordered by increasing i and each block
    uses the Kronecker ordering (index of x major).
    """
    if a.p != b.p:
        raise ValueError(f"modulus mismatch: {a.p} vs {b.p}")
    p = a.p
    import scipy.sparse as sp

    da, db = a.space.dims, b.space.dims
    degs = sorted({i + j for i in da for j in db})
    layout: dict[int, list[tuple[int, int, int]]] = {}
    dims: dict[int, int] = {}
    for n in degs:
        off = 0
        blocks = []
        for i in sorted(da):
            j = n - i
            if j in db:
                blocks.append((i, off, da[i] * db[j]))
                off += da[i] * db[j]
        layout[n] = blocks
        dims[n] = off
    offsets = {n: {i: o for i, o, _ in layout[n]} for n in degs}

    def _kron(x: PrimeFieldMatrix, y: PrimeFieldMatrix) -> PrimeFieldMatrix:
        m = sp.csc_array(sp.kron(x.to_sparse(), y.to_sparse(), format="csc"))
        m.data %= p
        return PrimeFieldMatrix(p, m)

    d = {}
    for n in degs:
        rr, cc, vv = [], [], []
        for i, off, size in layout[n]:
            j = n - i
            # dx (x) y lands in block i-1
            if i - 1 in da and (i - 1) in offsets.get(n - 1, {}):
                m = _kron(a.diff(i), PrimeFieldMatrix.identity(p, db[j]))
                coo = m.to_sparse().tocoo()
                rr.append(coo.row + offsets[n - 1][i - 1]); cc.append(coo.col + off); vv.append(coo.data)
            # (-1)^i x (x) dy lands in block i
            if j - 1 in db and i in offsets.get(n - 1, {}):
                m = _kron(PrimeFieldMatrix.identity(p, da[i]), b.diff(j))
                if i % 2:
                    m = -m
                coo = m.to_sparse().tocoo()
                rr.append(coo.row + offsets[n - 1][i]); cc.append(coo.col + off); vv.append(coo.data)
        if rr:
            d[n] = PrimeFieldMatrix.from_triplets(p, dims.get(n - 1, 0), dims[n],
                                                  np.concatenate(rr), np.concatenate(cc), np.concatenate(vv))
    return ChainComplex(p, dims, d, cells={n: tuple(layout[n]) for n in degs})


def dual(c: ChainComplex) -> ChainComplex:
    """Hom(c, F_p): degree n is the dual of c_{-n}, d_n = (-1)^n (d_{1-n})^T."""
    dims = {-n: k for n, k in c.space.dims.items()}
    d = {}
    for n in dims:
        m = c.diff(1 - n).T
        d[n] = m.scale(-1) if n % 2 else m
    return ChainComplex(c.p, dims, d)


# ---------------------------------------------------------------------------
# bicomplexes


class Convention(enum.Enum):
    SUM = "sum"
    PROD = "prod"
    MIXED = "mixed"


class Bicomplex:
    """Doubly graded (s, t) with d_h: (s,t)->(s-1,t), d_v: (s,t)->(s,t-1).

    Cells may be given lazily through ``cell``/``dh``/``dv`` callables, which
    is how periodic objects with unbounded s-support are described.  The
    declared bounds ``s_bounds``/``t_bounds`` use None for "unbounded".
    """

    def __init__(
        self,
        p: int,
        cell: Callable[[int, int], int] | Mapping[tuple[int, int], int],
        dh: Callable[[int, int], PrimeFieldMatrix | None] | Mapping | None = None,
        dv: Callable[[int, int], PrimeFieldMatrix | None] | Mapping | None = None,
        s_bounds: tuple[int | None, int | None] | None = None,
        t_bounds: tuple[int | None, int | None] | None = None,
        labels: Callable[[int, int], Sequence[str]] | None = None,
    ):
        self.p = p
        if isinstance(cell, Mapping):
            cells = {k: v for k, v in cell.items() if v}
            self._cell = lambda s, t: cells.get((s, t), 0)
            if cells:
                ss = [k[0] for k in cells]
                ts = [k[1] for k in cells]
                s_bounds = s_bounds or (min(ss), max(ss))
                t_bounds = t_bounds or (min(ts), max(ts))
            else:
                s_bounds = s_bounds or (0, -1)
                t_bounds = t_bounds or (0, -1)
        else:
            self._cell = cell
        if s_bounds is None or t_bounds is None:
            raise ValueError("lazy bicomplexes must declare s_bounds and t_bounds")
        self.s_bounds = s_bounds
        self.t_bounds = t_bounds
        self._dh = dh if callable(dh) else (lambda s, t, _m=dict(dh or {}): _m.get((s, t)))
        self._dv = dv if callable(dv) else (lambda s, t, _m=dict(dv or {}): _m.get((s, t)))
        self._labels = labels

    def dim(self, s: int, t: int) -> int:
        lo, hi = self.s_bounds
        if (lo is not None and s < lo) or (hi is not None and s > hi):
            return 0
        lo, hi = self.t_bounds
        if (lo is not None and t < lo) or (hi is not None and t > hi):
            return 0
        return self._cell(s, t)

    def dh(self, s: int, t: int) -> PrimeFieldMatrix:
        m = self._dh(s, t) if self.dim(s, t) and self.dim(s - 1, t) else None
        return m if m is not None else _zero(self.p, self.dim(s - 1, t), self.dim(s, t))

    def dv(self, s: int, t: int) -> PrimeFieldMatrix:
        m = self._dv(s, t) if self.dim(s, t) and self.dim(s, t - 1) else None
        return m if m is not None else _zero(self.p, self.dim(s, t - 1), self.dim(s, t))

    def antidiagonal_finite(self) -> bool:
        slo, shi = self.s_bounds
        tlo, thi = self.t_bounds
        return ((slo is not None and shi is not None) or (tlo is not None and thi is not None)
                or (slo is not None and tlo is not None) or (shi is not None and thi is not None))

    def antidiagonal(self, n: int) -> list[int]:
        """The s values of nonzero cells with s + t = n, ascending."""
        if not self.antidiagonal_finite():
            raise UnboundedAntidiagonal(f"total degree {n} meets infinitely many cells")
        slo, shi = self.s_bounds
        tlo, thi = self.t_bounds
        lo = slo if slo is not None else n - thi
        hi = shi if shi is not None else n - tlo
        if slo is not None and thi is not None:
            lo = max(slo, n - thi)
        if shi is not None and tlo is not None:
            hi = min(shi, n - tlo)
        return [s for s in range(lo, hi + 1) if self.dim(s, n - s)]

    def check(self, window: tuple[int, int]):
        """d_h^2 = 0, d_v^2 = 0 and d_h d_v = d_v d_h on cells of total degree in window."""
        for n in range(window[0], window[1] + 1):
            for s in self.antidiagonal(n):
                t = n - s
                if not (self.dh(s - 1, t) @ self.dh(s, t)).is_zero():
                    raise ComplexError(f"d_h^2 != 0 at ({s}, {t})")
                if not (self.dv(s, t - 1) @ self.dv(s, t)).is_zero():
                    raise ComplexError(f"d_v^2 != 0 at ({s}, {t})")
                if not (self.dh(s, t - 1) @ self.dv(s, t) == self.dv(s - 1, t) @ self.dh(s, t)):
                    raise ComplexError(f"d_h and d_v do not commute at ({s}, {t})")


def _cells_sum(b: Bicomplex, n: int) -> list[int]:
    return b.antidiagonal(n)


def _cells_prod(b: Bicomplex, n: int) -> list[int]:
    # a product over a finite index set: enumerate t instead of s
    cols = b.antidiagonal(n)
    return sorted(cols, key=lambda s: -(n - s))


def _cells_mixed(b: Bicomplex, n: int) -> list[int]:
    # union over N of the products over s <= N; stabilises once N passes the top cell
    cols = b.antidiagonal(n)
    seen: list[int] = []
    if not cols:
        return seen
    for cap in range(cols[0], cols[-1] + 1):
        for s in cols:
            if s <= cap and s not in seen:
                seen.append(s)
    return seen


_CELL_RULES = {Convention.SUM: _cells_sum, Convention.PROD: _cells_prod, Convention.MIXED: _cells_mixed}


def totalize(b: Bicomplex, convention: Convention | str = Convention.SUM,
             window: tuple[int, int] = (0, 0)) -> ChainComplex:
    """Total complex on the closed window [lo, hi] of total degrees.

    All three conventions list cells in ascending s, so on bicomplexes whose
    antidiagonals are finite they produce literally identical complexes.
    ``cells[n]`` records ``(s, t, offset, dim)`` for every block.
    """
    convention = Convention(convention)
    lo, hi = window
    if lo > hi:
        raise ValueError(f"empty window {window}")
    rule = _CELL_RULES[convention]
    layout: dict[int, list[tuple[int, int, int, int]]] = {}
    dims: dict[int, int] = {}
    for n in range(lo, hi + 1):
        ss = sorted(rule(b, n))
        off = 0
        blocks = []
        for s in ss:
            k = b.dim(s, n - s)
            blocks.append((s, n - s, off, k))
            off += k
        layout[n] = blocks
        dims[n] = off
    p = b.p
    d = {}
    for n in range(lo + 1, hi + 1):
        tgt = {(s, t): o for s, t, o, _ in layout[n - 1]}
        rr, cc, vv = [], [], []
        for s, t, off, k in layout[n]:
            if (s - 1, t) in tgt:
                coo = b.dh(s, t).to_sparse().tocoo()
                rr.append(coo.row + tgt[(s - 1, t)]); cc.append(coo.col + off); vv.append(coo.data)
            if (s, t - 1) in tgt:
                coo = b.dv(s, t).to_sparse().tocoo()
                data = coo.data if s % 2 == 0 else (-coo.data) % p
                rr.append(coo.row + tgt[(s, t - 1)]); cc.append(coo.col + off); vv.append(data)
        if rr:
            d[n] = PrimeFieldMatrix.from_triplets(p, dims[n - 1], dims[n], np.concatenate(rr),
                                                  np.concatenate(cc), np.concatenate(vv))
    labels = None
    if b._labels is not None:
        labels = {}
        for n, blocks in layout.items():
            labs: list[str] = []
            for s, t, _, k in blocks:
                labs.extend(b._labels(s, t))
            labels[n] = labs
    prov = [f"totalized ({convention.value}) on window [{lo}, {hi}]"]
    return ChainComplex(p, dims, d, labels=labels, cells=layout, provenance=prov)


# ---------------------------------------------------------------------------
# simplicial objects


class SimplicialObject:
    """Simplicial object in chain complexes, truncated at level L.

    ``levels[k]`` is a ChainComplex (internal grading); ``faces[k][i]`` is a
    ChainMap levels[k] -> levels[k-1] for 0 <= i <= k; ``degeneracies[k][j]``
    is a ChainMap levels[k] -> levels[k+1] for 0 <= j <= k (k < L).
    """

    def __init__(self, levels: Sequence[ChainComplex], faces: Sequence[Sequence[ChainMap]],
                 degeneracies: Sequence[Sequence[ChainMap]], provenance: Iterable[str] = (),
                 check: bool = True):
        self.levels = list(levels)
        self.faces = [list(f) for f in faces]
        self.degeneracies = [list(s) for s in degeneracies]
        self.p = self.levels[0].p
        self.max_level = len(self.levels) - 1
        self.provenance = tuple(provenance)
        if check:
            self.check()

    def face(self, k: int, i: int) -> ChainMap:
        return self.faces[k][i]

    def degeneracy(self, k: int, j: int) -> ChainMap:
        return self.degeneracies[k][j]

    def check(self):
        violations = simplicial_violations(self)
        if violations:
            raise ComplexError("; ".join(violations[:5]))

    def normalized_bicomplex(self) -> Bicomplex:
        """Cells (k, q): the quotient of level k by degenerate images, internal degree q."""
        p = self.p
        L = self.max_level
        proj: dict[tuple[int, int], PrimeFieldMatrix] = {}
        sect: dict[tuple[int, int], PrimeFieldMatrix] = {}
        cells: dict[tuple[int, int], int] = {}
        for k, lev in enumerate(self.levels):
            for q, n in lev.space.dims.items():
                if k == 0:
                    degen = _zero(p, n, 0)
                else:
                    degen = hstack(p, [self.degeneracies[k - 1][j][q] for j in range(k)], rows=n)
                free, Q = complement_basis(degen)
                proj[(k, q)] = Q
                S = PrimeFieldMatrix.from_triplets(p, n, len(free), free, range(len(free)), [1] * len(free))
                sect[(k, q)] = S
                if free:
                    cells[(k, q)] = len(free)
        dh = {}
        dv = {}
        for (k, q), n in cells.items():
            lev = self.levels[k]
            if k >= 1 and (k - 1, q) in cells:
                tot = None
                for i in range(k + 1):
                    m = self.faces[k][i][q]
                    if i % 2:
                        m = -m
                    tot = m if tot is None else tot + m
                dh[(k, q)] = proj[(k - 1, q)] @ tot @ sect[(k, q)]
            if (k, q - 1) in cells:
                dv[(k, q)] = proj[(k, q - 1)] @ lev.diff(q) @ sect[(k, q)]
        return Bicomplex(p, cells, dh, dv, s_bounds=(0, L))


def simplicial_violations(s: SimplicialObject) -> list[str]:
    """Every failed simplicial identity among the recorded maps, by level."""
    out: list[str] = []
    L = s.max_level

    def eq(a: ChainMap, b: ChainMap, what: str):
        for n in set(a.degrees()) | set(b.degrees()):
            if not (a[n] == b[n]):
                out.append(what)
                return

    for k in range(2, L + 1):
        for j in range(k + 1):
            for i in range(j):
                eq(s.faces[k - 1][i].compose(s.faces[k][j]), s.faces[k - 1][j - 1].compose(s.faces[k][i]),
                   f"d_{i} d_{j} != d_{j - 1} d_{i} at level {k}")
    for k in range(0, L - 1):
        for j in range(k + 1):
            for i in range(j + 1):
                eq(s.degeneracies[k + 1][i].compose(s.degeneracies[k][j]),
                   s.degeneracies[k + 1][j + 1].compose(s.degeneracies[k][i]),
                   f"s_{i} s_{j} != s_{j + 1} s_{i} at level {k}")
    for k in range(0, L):
        for j in range(k + 1):
            sj = s.degeneracies[k][j]
            for i in range(k + 2):
                lhs = s.faces[k + 1][i].compose(sj)
                if i < j:
                    rhs = s.degeneracies[k - 1][j - 1].compose(s.faces[k][i])
                elif i in (j, j + 1):
                    rhs = ChainMap.identity(s.levels[k])
                else:
                    rhs = s.degeneracies[k - 1][j].compose(s.faces[k][i - 1])
                eq(lhs, rhs, f"d_{i} s_{j} identity fails at level {k}")
    return out


def realize(s, window: tuple[int, int] | None = None) -> ChainComplex:
    """Normalized total complex of a truncated simplicial object.

    ``s`` must provide ``normalized_bicomplex()`` and ``max_level``.  The
    default window covers every cell; the provenance records the truncation.
    """
    b = s.normalized_bicomplex()
    slo, shi = b.s_bounds
    tlo, thi = b.t_bounds
    if window is None:
        if tlo is None or thi is None:
            raise UnboundedAntidiagonal("internal grading unbounded; give a window")
        window = (slo + tlo, shi + thi) if shi >= slo and thi >= tlo else (0, 0)
    c = totalize(b, Convention.SUM, window)
    prov = c.provenance + tuple(s.provenance) + (f"simplicial levels truncated at L={s.max_level}",)
    return ChainComplex(c.p, c.space.dims, {n: c.diff(n) for n in c.degrees},
                        labels=c.space.labels, cells=c.cells, provenance=prov, check=False)
