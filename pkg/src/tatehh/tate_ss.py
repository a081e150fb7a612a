"""Spectral sequence of the W-degree filtration on a Tate complex.

The filtration F_s is spanned by the cells with W-degree <= s; it is
preserved by d, so d_r has bidegree (-r, r-1).  Pages are computed by exact
rank computations in each total degree n.  With G_s = F_s / F_{s-1}, the
image of the r-cycles in G_s has dimension

    dim G_s - rank D[(s-r, s] x F_s] + rank D[(s-r, s] x F_{s-1}]

where D[rows x cols] is the block submatrix of d_n, and the image of the
(r-1)-boundaries is

    rank D[(s, s+r-1] + {s} x [s, s+r-1]] - rank D[(s, s+r-1] x [s, s+r-1]]

taken from d_{n+1}.  E_r is the quotient of the two.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .complexes import Convention
from .dg_algebra import DgAlgebra, DgBimodule
from .fp_linalg import PrimeFieldMatrix, rank
from .hochschild import (
    EquivariantComplex,
    HHResult,
    UnwoundCyclicBar,
    hh,
    subdivision_model,
)
from .tate import TateComplex, hat_h_dims, period_of, tate_complex

Spot = tuple[int, int]
_FAR = 1 << 30


class _Blocks:
    """Row/column index sets of the s-blocks in one total degree."""

    def __init__(self, cells):
        self.ranges = {s: range(off, off + k) for s, t, off, k in cells}
        self.t = {s: t for s, t, off, k in cells}

    def idx(self, lo: int, hi: int) -> list[int]:
        out: list[int] = []
        for s, r in self.ranges.items():
            if lo <= s <= hi:
                out.extend(r)
        return out


def _rank_sub(d: PrimeFieldMatrix, rows: list[int], cols: list[int]) -> int:
    if not rows or not cols:
        return 0
    return rank(d.submatrix(rows=rows, cols=cols))


@dataclass
class SpectralSequence:
    """Pages r = 1..r_max with dims and outgoing/incoming d_r ranks per spot (s, t)."""

    p: int
    period: int
    degrees: tuple[int, int]
    pages: dict[int, dict[Spot, int]]
    rank_out: dict[int, dict[Spot, int]]
    rank_in: dict[int, dict[Spot, int]]
    stable_page: int
    r_max: int
    provenance: tuple[str, ...] = ()

    @property
    def indexing(self) -> str:
        return ("homological: spot (s, t) has total degree n = s + t; d_r maps (s, t) to (s-r, t+r-1); "
                "cohomological Tate degree is -s")

    @property
    def converged(self) -> bool:
        return self.r_max >= self.stable_page

    def e_infinity(self) -> dict[Spot, int]:
        return self.pages[min(self.r_max, self.stable_page)]

    def total(self, n: int, r: int | None = None) -> int:
        page = self.pages[r] if r is not None else self.e_infinity()
        return sum(k for (s, t), k in page.items() if s + t == n)

    def recurrence_violations(self) -> list[str]:
        """dim E_{r+1} = dim E_r - out - in, monotonicity, and out/in matching."""
        out = []
        for r in range(1, self.r_max):
            for spot, k in self.pages[r].items():
                nxt = self.pages[r + 1].get(spot)
                if nxt is None:
                    continue
                if nxt != k - self.rank_out[r][spot] - self.rank_in[r][spot]:
                    out.append(f"page recurrence fails at r={r}, {spot}")
                if nxt > k:
                    out.append(f"dimension increases at r={r}, {spot}")
        for r in range(1, self.r_max + 1):
            for (s, t), k in self.rank_out[r].items():
                tgt = (s - r, t + r - 1)
                if tgt in self.rank_in[r] and self.rank_in[r][tgt] != k:
                    out.append(f"rank of d_{r} from {(s, t)} differs from the rank into {tgt}")
        return out

    def periodicity_violations(self) -> list[str]:
        out = []
        for r, page in self.pages.items():
            for (s, t), k in page.items():
                other = page.get((s + self.period, t))
                if other is not None and other != k:
                    out.append(f"E_{r} not periodic at {(s, t)}")
        return out

    def d_rank(self, r: int, spot: Spot) -> int:
        return self.rank_out[r].get(spot, 0)


def _page_data(tc: TateComplex, n: int, r: int) -> tuple[dict[int, int], dict[int, int]]:
    """dim of the image of r-cycles and of (r-1)-boundaries in G_s, per s."""
    c = tc.complex
    bn = _Blocks(tc.cells(n))
    bm = _Blocks(tc.cells(n - 1))
    bp = _Blocks(tc.cells(n + 1))
    dn = c.diff(n)
    dn1 = c.diff(n + 1)
    zbar, bbar = {}, {}
    for s, rng in bn.ranges.items():
        g = len(rng)
        rows = bm.idx(s - r + 1, s)
        below = bn.idx(-_FAR, s - 1)
        zbar[s] = g - _rank_sub(dn, rows, below + list(rng)) + _rank_sub(dn, rows, below)
        cols = bp.idx(s, s + r - 1)
        above = bn.idx(s + 1, s + r - 1)
        bbar[s] = _rank_sub(dn1, above + list(rng), cols) - _rank_sub(dn1, above, cols)
    return zbar, bbar


def spectral_sequence(tc: TateComplex, r_max: int | None = None,
                      degrees: tuple[int, int] | None = None) -> SpectralSequence:
    """Pages of the s-filtration for total degrees in ``degrees`` (default: the exact range).

    d_r changes t by r - 1, so E_r is final once r - 1 exceeds the width of
    the t-support: the stable page is width + 2.
    """
    tlo, thi = tc.t_range
    stable = (thi - tlo) + 2
    if r_max is None:
        r_max = stable
    if r_max < 1:
        raise ValueError("r_max must be >= 1")
    if r_max < stable:
        warnings.warn(f"r_max={r_max} is below the degeneration page {stable}; E_infinity not reached")
    lo, hi = degrees or tc.safe
    slo, shi = tc.safe
    if lo < slo or hi > shi:
        raise ValueError(f"degrees {lo}..{hi} outside the exact range {slo}..{shi}")
    pages: dict[int, dict[Spot, int]] = {r: {} for r in range(1, r_max + 2)}
    zb: dict[int, dict[int, dict[int, int]]] = {}
    bb: dict[int, dict[int, dict[int, int]]] = {}
    for n in range(lo - 1, hi + 2):
        if n - 1 < tc.window[0] or n + 1 > tc.window[1]:
            continue
        zb[n], bb[n] = {}, {}
        for r in range(1, r_max + 2):
            zb[n][r], bb[n][r] = _page_data(tc, n, r)
    rank_out: dict[int, dict[Spot, int]] = {r: {} for r in range(1, r_max + 1)}
    rank_in: dict[int, dict[Spot, int]] = {r: {} for r in range(1, r_max + 1)}
    for n in range(lo, hi + 1):
        for s, t, off, k in tc.cells(n):
            for r in range(1, r_max + 2):
                pages[r][(s, t)] = zb[n][r][s] - bb[n][r][s]
            for r in range(1, r_max + 1):
                rank_out[r][(s, t)] = zb[n][r][s] - zb[n][r + 1][s]
                rank_in[r][(s, t)] = bb[n][r + 1][s] - bb[n][r][s]
    pages.pop(r_max + 1)
    prov = (f"filtration by W-degree on window {tc.window}", f"pages 1..{r_max}, stable page {stable}")
    return SpectralSequence(tc.p, tc.period, (lo, hi), pages, rank_out, rank_in, stable, r_max, prov)


# ---------------------------------------------------------------------------
# reports


@dataclass
class ConvergenceReport:
    rows: dict[int, tuple[int, int]]  # n -> (sum E_inf, dim H_n)
    discrepancies: list[int]

    @property
    def ok(self) -> bool:
        return not self.discrepancies


def convergence_check(ss: SpectralSequence, tc: TateComplex) -> ConvergenceReport:
    """Sum of E_infinity on each antidiagonal against dim H_n of the Tate complex."""
    rows = {}
    bad = []
    lo, hi = ss.degrees
    for n in range(lo, hi + 1):
        e = ss.total(n)
        h = tc.complex.homology(n).dim
        rows[n] = (e, h)
        if e != h or not ss.converged:
            bad.append(n)
    return ConvergenceReport(rows, bad)


@dataclass
class D1Report:
    ranks: dict[Spot, int]
    model_top: int

    @property
    def violations(self) -> list[Spot]:
        return sorted(k for k, v in self.ranks.items() if v)

    @property
    def ok(self) -> bool:
        return not self.violations


def model_words(a: DgAlgebra, m: DgBimodule, p: int, top: int) -> int:
    """Number of normalized words the subdivision model needs for a given top degree."""
    levels = top + 1 - p * min(0, m.min_degree())
    return sum(m.dim ** p * (a.dim ** p - 1) ** n for n in range(levels + 1))


def auto_top(a: DgAlgebra, m: DgBimodule, p: int, budget: int, cap: int) -> int:
    top = 0
    while top < cap and model_words(a, m, p, top + 1) <= budget:
        top += 1
    return top


DEFAULT_BUDGET = 20000


def d1_triviality_check(a: DgAlgebra, p: int, window: tuple[int, int] = (-3, 3),
                        top: int | None = None, budget: int = DEFAULT_BUDGET) -> D1Report:
    """rank d_1 at every spot of the SS for the subdivision model of Z(A; A)."""
    m = DgBimodule.regular(a)
    if top is None:
        top = auto_top(a, m, p, budget, cap=4)
    model = subdivision_model(a, m, p, top)
    tc = tate_complex(model, Convention.MIXED, (window[0] - 1, window[1] + 1), compare_variants=False)
    with warnings.catch_warnings():
        # only d_1 is wanted here, E_infinity is irrelevant
        warnings.simplefilter("ignore")
        ss = spectral_sequence(tc, r_max=1, degrees=window)
    return D1Report(dict(ss.rank_out[1]), top)


@dataclass
class DegenerationReport:
    hh_dims: dict[int, int]
    hh_total: int
    model_top: int | None
    tate_dims: dict[int, int]
    e_infinity_totals: dict[int, int]
    classes: tuple[int, ...]
    verdict: str
    reasons: list[str] = field(default_factory=list)
    e2_check: dict = field(default_factory=dict)
    period: int = 2

    @property
    def e_infinity_total(self) -> int | None:
        return self.e_infinity_totals.get(0)


def _e2_cross_check(model: EquivariantComplex, ss: SpectralSequence) -> dict:
    """E_2 of the SS against hat-H(C_p; H_t) computed from the action on homology."""
    c = model.complex
    mismatches = []
    rows = {}
    for t in c.degrees:
        h = c.homology(t).dim
        if h == 0:
            ev, od = 0, 0
        else:
            ev, od = hat_h_dims(model.homology_action(t), model.order)
        rows[t] = {"H_t": h, "even": ev, "odd": od}
        if 2 not in ss.pages:
            continue
        for (s, tt), k in ss.pages[2].items():
            if tt == t and k != (od if s % 2 else ev):
                mismatches.append((s, t))
    return {"rows": rows, "mismatches": mismatches, "ok": not mismatches}


def _coefficient_cross_check(a: DgAlgebra, m: DgBimodule, p: int, top: int,
                             model: EquivariantComplex, budget: int) -> dict:
    """H_t of the model against HH_t(A^p; M twisted), and against HH_t(A; A) when M = A."""
    from .dg_algebra import CyclicPowerAlgebra, twisted_power

    mh = {t: model.complex.homology(t).dim for t in range(0, top)}
    out: dict = {"model_homology": mh}
    ok = True
    if model_words(a, m, p, top) <= budget:
        pa = CyclicPowerAlgebra(a, p)
        tw = twisted_power(m, a, p, pa)
        th = hh(pa, tw, top - 1, check_stable=False).dims
        out["hh_twisted_power"] = th
        ok &= all(th.get(t, 0) == v for t, v in mh.items())
    if m.is_regular_of(a):
        ah = hh(a, m, top - 1, check_stable=False).dims
        out["hh_of_a"] = ah
        ok &= all(ah.get(t, 0) == v for t, v in mh.items())
    out["coefficients_ok"] = bool(ok)
    return out


def degeneration_check(a: DgAlgebra, m: DgBimodule | None = None, p: int | None = None, D: int = 6,
                       window: tuple[int, int] = (-3, 4), budget: int = DEFAULT_BUDGET,
                       cross_check: bool = True) -> DegenerationReport:
    """Compare sum dim HH_*(A; M), dim H_0(Tate) and the ungraded E_infinity total.

    The subdivision model is exact through its top degree T.  T is the least
    value with HH_k(A; M) = 0 for T < k <= D; the model is built through
    T + 1 and must have H_{T+1} = 0.  Otherwise, or when the model exceeds
    the word budget, the verdict is "inconclusive".
    """
    m = DgBimodule.regular(a) if m is None else m
    p = a.p if p is None else p
    if p != a.p:
        raise ValueError(f"group order {p} must equal the characteristic {a.p}")
    res: HHResult = hh(a, m, D)
    dims = res.dims
    total = sum(dims.values())
    per = period_of(p)
    classes = (0,) if per == 1 else (0, 1)
    reasons: list[str] = []
    nonzero = [k for k, v in dims.items() if v]
    if not nonzero:
        T = 0
    elif dims.get(D, 0):
        T = None
        reasons.append(f"HH_{D} = {dims[D]} is nonzero: no vanishing range inside degrees <= {D}")
    else:
        T = max(nonzero)
    if T is not None and model_words(a, m, p, T + 1) > budget:
        reasons.append(f"subdivision model through degree {T + 1} exceeds the budget of {budget} words")
        T = None
    if T is None:
        return DegenerationReport(dims, total, None, {}, {}, classes, "inconclusive", reasons, period=per)
    model = subdivision_model(a, m, p, T + 1)
    mh = {n: model.complex.homology(n).dim for n in model.complex.degrees}
    if mh.get(T + 1, 0):
        reasons.append(f"model homology in degree {T + 1} is nonzero")
        return DegenerationReport(dims, total, T, {}, {}, classes, "inconclusive", reasons, period=per)
    tc = tate_complex(model, Convention.MIXED, window, compare_variants=False)
    lo, hi = tc.safe
    ss = spectral_sequence(tc, degrees=(lo, hi))
    tate_dims = tc.homology_dims(lo, hi)
    einf = {n: ss.total(n) for n in range(lo, hi + 1)}
    e2 = {}
    if cross_check:
        e2 = _e2_cross_check(model, ss)
        e2.update(_coefficient_cross_check(a, m, p, T + 1, model, budget))
    ok = True
    for cls in classes:
        if not (einf[cls] == total == tate_dims[cls]):
            ok = False
            reasons.append(f"class {cls}: E_inf total {einf[cls]}, sum HH {total}, dim H_{cls}(Tate) {tate_dims[cls]}")
    for cls in classes:
        if einf.get(cls + per) is not None and einf[cls + per] != einf[cls]:
            reasons.append(f"E_inf totals differ between degrees {cls} and {cls + per}")
            ok = False
    if e2 and not (e2["ok"] and e2.get("coefficients_ok", True)):
        reasons.append(f"E_2 disagrees with hat-H of the homology action at {e2['mismatches']}")
        ok = False
    verdict = "match" if ok else "mismatch"
    if ok:
        reasons.append(f"sum HH = {total} = E_inf total = dim H_0(Tate)")
    return DegenerationReport(dims, total, T, tate_dims, einf, classes, verdict, reasons, e2, per)
