"""Tate constructions for C_p acting on bounded complexes over F_p.

The complete resolution is the 2-periodic complex W with W_s = F_p[C_p] and
d_s = N for odd s, d_s = t - 1 for even s.  Since W_s (x)_G M = M, every
construction here is a bicomplex with columns indexed by the W-degree s,
rows by the degree t of M, and horizontal maps N_T or T - 1 where T is the
action of the generator on M.

Each total degree of these bicomplexes has finitely many cells, so a
window [lo, hi] of total degrees is a brutal truncation: homology is exact
in the open window (lo, hi).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .complexes import (
    Bicomplex,
    ChainComplex,
    ChainMap,
    ComplexError,
    Convention,
    cone,
    dual,
    tensor,
    totalize,
)
from .fp_linalg import PrimeFieldMatrix, block, complement_basis, kernel_matrix, rank
from .hochschild import EquivariantComplex

DEFAULT_MARGIN = 2


class MarginError(ValueError):
    """Requested degrees are too close to the edge of the computed window."""


def _cyclic_shift(p: int, n: int) -> PrimeFieldMatrix:
    return PrimeFieldMatrix.from_triplets(p, n, n, [(i + 1) % n for i in range(n)], range(n), [1] * n)


def norm_of(t: PrimeFieldMatrix, order: int) -> PrimeFieldMatrix:
    """1 + t + ... + t^{order-1}."""
    acc = PrimeFieldMatrix.identity(t.p, t.rows)
    cur = acc
    for _ in range(order - 1):
        cur = cur @ t
        acc = acc + cur
    return acc


def period_of(p: int) -> int:
    # N = t + 1 = t - 1 over F_2
    return 1 if p == 2 else 2


# ---------------------------------------------------------------------------
# complete resolution


@dataclass
class CompleteResolution:
    p: int
    window: tuple[int, int]
    complex: ChainComplex
    generator: PrimeFieldMatrix
    norm: PrimeFieldMatrix

    @property
    def period(self) -> int:
        return period_of(self.p)

    def differential_kind(self, s: int) -> str:
        return "norm" if s % 2 else "t-1"

    def coinvariant_dims(self) -> dict[int, int]:
        """dim H_s(W (x)_G F_p): all differentials become 0 or p = 0."""
        c = _with_action(EquivariantComplex.trivial(self.p, {0: 1}), self.window, Convention.SUM)
        return {n: c.homology(n).dim for n in range(self.window[0] + 1, self.window[1])}


def complete_resolution(p: int, window: tuple[int, int] = (-6, 6)) -> CompleteResolution:
    """W on the given degree window; acyclicity is checked in the interior."""
    lo, hi = window
    if lo > hi:
        raise ValueError(f"empty window {window}")
    T = _cyclic_shift(p, p)
    N = norm_of(T, p)
    tm1 = T - PrimeFieldMatrix.identity(p, p)
    dims = {s: p for s in range(lo, hi + 1)}
    d = {s: (N if s % 2 else tm1) for s in range(lo + 1, hi + 1)}
    c = ChainComplex(p, dims, d, provenance=(f"complete resolution on [{lo}, {hi}]",))
    for s in range(lo + 1, hi):
        if c.homology(s).dim:
            raise ComplexError(f"complete resolution not exact in degree {s}")
    return CompleteResolution(p, window, c, T, N)


# ---------------------------------------------------------------------------
# Tate complex


def _with_action(m: EquivariantComplex, window: tuple[int, int], convention: Convention,
                 s_bounds: tuple[int | None, int | None] = (None, None),
                 dh_rule=None) -> ChainComplex:
    c = m.complex
    p = m.p
    degs = c.degrees
    if not degs:
        return ChainComplex(p, {})
    tlo, thi = degs[0], degs[-1]
    order = m.order
    cache: dict[tuple[int, int], PrimeFieldMatrix] = {}

    def horizontal(s: int, t: int):
        kind = dh_rule(s) if dh_rule else ("norm" if s % 2 else "t-1")
        key = (kind == "norm", t)
        if key not in cache:
            T = m.action[t]
            cache[key] = norm_of(T, order) if kind == "norm" else T - PrimeFieldMatrix.identity(p, c.dim(t))
        return cache[key]

    b = Bicomplex(p, lambda s, t: c.dim(t), horizontal, lambda s, t: c.diff(t),
                  s_bounds=s_bounds, t_bounds=(tlo, thi))
    return totalize(b, convention, window)


class PeriodicityCertificate(NamedTuple):
    period: int
    degrees: tuple[int, ...]
    ok: bool
    failures: tuple[str, ...]


@dataclass
class TateComplex:
    """W (x)_G M on a window, with the s-filtration and the periodicity certificate."""

    complex: ChainComplex
    source: EquivariantComplex
    window: tuple[int, int]
    variant: Convention
    period: int
    variants_agree: bool | None = None
    certificate: PeriodicityCertificate | None = None
    notes: tuple[str, ...] = ()

    @property
    def p(self) -> int:
        return self.complex.p

    @property
    def safe(self) -> tuple[int, int]:
        """Degrees whose homology is exact: the open window."""
        return self.window[0] + 1, self.window[1] - 1

    def cells(self, n: int) -> tuple:
        return self.complex.cells.get(n, ())

    @property
    def t_range(self) -> tuple[int, int]:
        degs = self.source.complex.degrees
        return (degs[0], degs[-1]) if degs else (0, 0)

    def homology_dims(self, lo: int | None = None, hi: int | None = None) -> dict[int, int]:
        slo, shi = self.safe
        lo = slo if lo is None else lo
        hi = shi if hi is None else hi
        if lo < slo or hi > shi:
            raise MarginError(f"degrees [{lo}, {hi}] not inside the exact range [{slo}, {shi}]")
        return {n: self.complex.homology(n).dim for n in range(lo, hi + 1)}

    def periodicity_map(self, n: int) -> PrimeFieldMatrix:
        """The block identity C_n -> C_{n+period} sending cell (s, t) to (s + period, t)."""
        p = self.p
        src = self.cells(n)
        tgt = {(s, t): off for s, t, off, _ in self.cells(n + self.period)}
        r, c, v = [], [], []
        for s, t, off, k in src:
            o2 = tgt[(s + self.period, t)]
            r.extend(range(o2, o2 + k)); c.extend(range(off, off + k)); v.extend([1] * k)
        return PrimeFieldMatrix.from_triplets(p, self.complex.dim(n + self.period), self.complex.dim(n), r, c, v)

    def check_periodicity(self) -> PeriodicityCertificate:
        """P d = d P between degrees n and n + period, and P is a bijection on cells."""
        lo, hi = self.window
        per = self.period
        fails = []
        degs = []
        for n in range(lo, hi - per + 1):
            try:
                P = self.periodicity_map(n)
            except KeyError:
                fails.append(f"degree {n}: cells do not shift")
                continue
            if P.rows != P.cols or rank(P) != P.rows:
                fails.append(f"degree {n}: periodicity map is not invertible")
            if n - 1 >= lo:
                P1 = self.periodicity_map(n - 1)
                if not (self.complex.diff(n + per) @ P == P1 @ self.complex.diff(n)):
                    fails.append(f"degree {n}: periodicity map does not commute with d")
            degs.append(n)
        return PeriodicityCertificate(per, tuple(degs), not fails, tuple(fails))


def tate_complex(m: EquivariantComplex, variant: Convention | str = Convention.MIXED,
                 window: tuple[int, int] = (-6, 6), compare_variants: bool = True) -> TateComplex:
    """Totalized W (x)_G M on the window, listing cells by ascending s.

    ``m`` is bounded, so every antidiagonal is finite and the sum, product and
    mixed totalizations coincide; with ``compare_variants`` this is checked.
    """
    if m.order != m.p:
        raise ValueError(f"group order {m.order} differs from the characteristic {m.p}")
    variant = Convention(variant)
    c = _with_action(m, window, variant)
    agree = None
    if compare_variants:
        agree = all(_with_action(m, window, v).same_as(c) for v in Convention)
    tc = TateComplex(c, m, window, variant, period_of(m.p), agree,
                     notes=("bounded input: sum, product and mixed totalizations agree",) if agree else ())
    tc.certificate = tc.check_periodicity()
    return tc


def tate_homology(m: EquivariantComplex, degrees: tuple[int, int] = (-4, 4),
                  window: tuple[int, int] | None = None, margin: int = DEFAULT_MARGIN) -> dict[int, int]:
    """dim H_n of the Tate complex for n in ``degrees``, computed with a margin."""
    lo, hi = degrees
    if window is None:
        window = (lo - margin, hi + margin)
    if window[0] > lo - margin or window[1] < hi + margin:
        raise MarginError(f"window {window} leaves less than {margin} degrees around {degrees}")
    tc = tate_complex(m, Convention.MIXED, window, compare_variants=False)
    return tc.homology_dims(lo, hi)


# ---------------------------------------------------------------------------
# orbits, fixed points, transfer


class OrbitsFixed(NamedTuple):
    orbits: ChainComplex
    fixed: ChainComplex
    transfer: ChainMap


def orbits_fixed_transfer(m: EquivariantComplex, window: tuple[int, int] = (-6, 6)) -> OrbitsFixed:
    """E (x)_G M, Hom_G(E, M) = E^dual (x)_G M and the transfer induced by N in degree 0.

    E is the free resolution (the part of W in degrees >= 1, shifted down by
    one); the fixed side is the part of W in degrees <= 0.
    """
    p = m.p
    orbits = _with_action(m, window, Convention.SUM, s_bounds=(0, None),
                          dh_rule=lambda k: "t-1" if k % 2 else "norm")
    fixed = _with_action(m, window, Convention.SUM, s_bounds=(None, 0))
    c = m.complex
    N = {t: norm_of(m.action[t], m.order) for t in c.degrees}
    maps = {}
    for n in range(window[0], window[1] + 1):
        src = {s: (off, k) for s, t, off, k in orbits.cells.get(n, ())}
        tgt = {s: (off, k) for s, t, off, k in fixed.cells.get(n, ())}
        if 0 in src and 0 in tgt:
            so, k = src[0]
            to, _ = tgt[0]
            coo = N[n].to_sparse().tocoo()
            maps[n] = PrimeFieldMatrix.from_triplets(p, fixed.dim(n), orbits.dim(n),
                                                     coo.row + to, coo.col + so, coo.data)
    return OrbitsFixed(orbits, fixed, ChainMap(orbits, fixed, maps))


def transfer_cone(m: EquivariantComplex, window: tuple[int, int] = (-6, 6)) -> ChainComplex:
    """cone(transfer): degreewise fixed_n + orbits_{n-1}, the sequence fixed -> Tate -> orbits[1]."""
    of = orbits_fixed_transfer(m, window)
    return cone(of.transfer).complex


# ---------------------------------------------------------------------------
# cone model of W


def _standard_resolution(p: int, top: int) -> tuple[ChainComplex, dict[int, PrimeFieldMatrix]]:
    T = _cyclic_shift(p, p)
    N = norm_of(T, p)
    tm1 = T - PrimeFieldMatrix.identity(p, p)
    dims = {k: p for k in range(0, top + 1)}
    d = {k: (tm1 if k % 2 else N) for k in range(1, top + 1)}
    return ChainComplex(p, dims, d), {k: T for k in dims}


def cone_resolution(p: int, top: int) -> tuple[ChainComplex, dict[int, PrimeFieldMatrix]]:
    """W as cone(E -> E^dual) with E the standard free resolution truncated at ``top``.

    The map is N in degree 0 (E_0 -> F_p -> E_0^dual).  Degree n of the cone
    is E^dual_n + E_{n-1}.  On E^dual, g acts by the transpose of g^{-1},
    which for the permutation matrix of the generator is the same matrix.
    """
    E, tE = _standard_resolution(p, top)
    Ed = dual(E)
    T = _cyclic_shift(p, p)
    N = norm_of(T, p)
    f = ChainMap(E, Ed, {0: N})
    cn = cone(f)
    action = {}
    for n in cn.complex.degrees:
        action[n] = block(p, [[T if Ed.dim(n) else None, None], [None, T if E.dim(n - 1) else None]],
                          [Ed.dim(n), E.dim(n - 1)], [Ed.dim(n), E.dim(n - 1)])
    return cn.complex, action


def tensor_coinvariants(w: ChainComplex, w_action: dict[int, PrimeFieldMatrix],
                        m: EquivariantComplex) -> ChainComplex:
    """(W (x) M)_G for the diagonal action, as the cokernel of (g - 1) degreewise."""
    import scipy.sparse as sp

    p = m.p
    tw = tensor(w, m.complex)
    acts = {}
    for n in tw.degrees:
        blocks = tw.cells[n]
        mats = []
        for i, off, size in blocks:
            k = sp.kron(w_action[i].to_sparse(), m.action[n - i].to_sparse(), format="csc")
            mats.append(k)
        g = sp.block_diag(mats, format="csc") if mats else sp.csc_array((0, 0))
        acts[n] = PrimeFieldMatrix(p, sp.csc_array(g.astype(np.int64)))
    proj, sect = {}, {}
    for n in tw.degrees:
        rel = acts[n] - PrimeFieldMatrix.identity(p, tw.dim(n))
        free, Q = complement_basis(rel)
        proj[n] = Q
        sect[n] = PrimeFieldMatrix.from_triplets(p, tw.dim(n), len(free), free, range(len(free)), [1] * len(free))
    dims = {n: proj[n].rows for n in tw.degrees}
    d = {}
    for n in tw.degrees:
        if n - 1 in proj:
            d[n] = proj[n - 1] @ tw.diff(n) @ sect[n]
    return ChainComplex(p, dims, d, provenance=("coinvariants of the diagonal action",))


def tate_via_cone(m: EquivariantComplex, top: int = 8) -> ChainComplex:
    w, act = cone_resolution(m.p, top)
    return tensor_coinvariants(w, act, m)


# ---------------------------------------------------------------------------
# Tate cohomology of a single module


def hat_h_dims(t: PrimeFieldMatrix, order: int) -> tuple[int, int]:
    """(dim ker(t-1)/im N, dim ker N/im(t-1)) for a representation t of C_order.

    In the Tate complex these are the homology at even and at odd W-degree.
    """
    n = t.rows
    if n == 0:
        return 0, 0
    N = norm_of(t, order)
    tm1 = t - PrimeFieldMatrix.identity(t.p, n)
    r_n, r_t = rank(N), rank(tm1)
    return (n - r_t) - r_n, (n - r_n) - r_t


def coinvariants(t: PrimeFieldMatrix) -> int:
    """dim of M_G = coker(t - 1)."""
    return t.rows - rank(t - PrimeFieldMatrix.identity(t.p, t.rows))


def invariants(t: PrimeFieldMatrix) -> int:
    return t.rows - rank(t - PrimeFieldMatrix.identity(t.p, t.rows))
