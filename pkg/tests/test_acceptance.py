"""Acceptance criteria 1-10, one test each; the summary prints one PASS/FAIL line per criterion."""

from __future__ import annotations

import time

import pytest

from conftest import ACCEPTANCE
from oracles import (commutator_quotient_dim, cyclic_shift, periodic_resolution_problem, tate_of_representation,
                     unnormalized_hochschild_dims)
from tatehh import hochschild
from tatehh.complexes import Convention
from tatehh.fp_linalg import PrimeFieldMatrix, rank
from tatehh.hochschild import EquivariantComplex, compare_subdivision, hh, hh_via_resolution
from tatehh.problem import CORPUS, load, parse
from tatehh.tate import tate_complex, tate_homology
from tatehh.tate_ss import convergence_check, d1_triviality_check, degeneration_check, spectral_sequence


class Criterion:
    """Context manager timing a criterion and recording its outcome."""

    def __init__(self, key: str, limit: float | None = None):
        self.key, self.limit = key, limit
        self.details: list[str] = []

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        dt = time.perf_counter() - self.t0
        ok = exc_type is None and (self.limit is None or dt < self.limit)
        budget = f" (limit {self.limit:g} s)" if self.limit else ""
        detail = f"{dt:.2f} s{budget}" + ("; " + "; ".join(self.details) if self.details else "")
        if exc_type is not None:
            detail += f"; {exc_type.__name__}: {exc}"
        ACCEPTANCE[self.key] = ("PASS" if ok else "FAIL", detail)
        print(f"criterion {self.key}: {'PASS' if ok else 'FAIL'}  {detail}")
        if exc_type is None and not ok:
            raise AssertionError(f"criterion {self.key} exceeded {self.limit} s ({dt:.2f} s)")
        return False


def _warm_jit():
    # the odd-p elimination kernel is JIT compiled on first use; keep that out of the timings
    rank(PrimeFieldMatrix.from_dense(3, [[1, 2], [2, 1]]))


def test_criterion_1_trivial_module():
    _warm_jit()
    with Criterion("1", 1.0) as c:
        for p in (2, 3, 5):
            dims = tate_homology(EquivariantComplex.trivial(p, {0: 1}), (-6, 6))
            assert tate_of_representation([[1]], p) == (1, 1)
            assert dims == {n: 1 for n in range(-6, 7)}, (p, dims)
        c.details.append("p = 2, 3, 5: dim 1 in every degree of [-6, 6]")


def test_criterion_2_free_module():
    _warm_jit()
    with Criterion("2", 1.0) as c:
        for p in (2, 3, 5):
            dims = tate_homology(EquivariantComplex.regular(p), (-6, 6))
            assert tate_of_representation(cyclic_shift(p), p) == (0, 0)
            assert dims == {n: 0 for n in range(-6, 7)}, (p, dims)
        c.details.append("p = 2, 3, 5: zero in every degree of [-6, 6]")


def test_criterion_3_variant_agreement(equivariant_corpus):
    with Criterion("3") as c:
        for name, m in equivariant_corpus.items():
            for lo, hi in ((-6, 6), (-3, 8)):
                tc = tate_complex(m, Convention.MIXED, (lo, hi), compare_variants=False)
                others = [tate_complex(m, v, (lo, hi), compare_variants=False).complex for v in Convention]
                assert all(tc.complex.same_as(o) for o in others), name
        c.details.append(f"{len(equivariant_corpus)} bounded inputs, sum = product = mixed")


def test_criterion_4_periodicity(equivariant_corpus):
    with Criterion("4") as c:
        for name, m in equivariant_corpus.items():
            tc = tate_complex(m, window=(-6, 6), compare_variants=False)
            assert tc.certificate.ok, (name, tc.certificate.failures)
            dims = tc.homology_dims()
            lo, hi = tc.safe
            for n in range(lo, hi - 1):
                assert dims[n] == dims[n + 2], (name, n)
            if m.p == 2:
                for n in range(lo, hi):
                    assert dims[n] == dims[n + 1], (name, n)
        c.details.append(f"{len(equivariant_corpus)} inputs, period 2 (and 1 for p = 2) on the safe window")


def test_criterion_5_convergence(equivariant_corpus):
    with Criterion("5", 60.0) as c:
        for name, m in equivariant_corpus.items():
            tc = tate_complex(m, window=(-4, 5), compare_variants=False)
            ss = spectral_sequence(tc)
            rep = convergence_check(ss, tc)
            assert rep.ok, (name, rep.rows)
        c.details.append(f"{len(equivariant_corpus)} inputs, sum E_inf = dim H_n on [-3, 4]")


def test_criterion_6_subdivision():
    with Criterion("6", 60.0) as c:
        levels = []
        for name in CORPUS:
            s = load(name)
            for p in (2, 3):
                rep = compare_subdivision(s.algebra, s.module, p, L=3)
                assert rep.ok, (name, p, rep.failures()[:3])
                levels.append(rep.truncation)
        c.details.append(f"{len(levels)} (input, p) pairs, compared levels 0..{min(levels)} to 0..{max(levels)}")


def test_criterion_7_hh_oracles():
    with Criterion("7", 120.0) as c:
        D = 4
        for name in CORPUS:
            a = load(name).algebra
            assert hh(a, D=D).dims == hh_via_resolution(a, D=D), name
        f2eps = parse(periodic_resolution_problem(D))
        periodic = hh_via_resolution(f2eps.algebra, D=D, resolution=f2eps.resolution)
        assert periodic == {n: 2 for n in range(D + 1)}
        assert hh(f2eps.algebra, D=D).dims == periodic
        m2 = load("m2f2").algebra
        assert hh(m2, D=D).dims == unnormalized_hochschild_dims(m2.mult, 2, D) == {0: 1, 1: 0, 2: 0, 3: 0, 4: 0}
        a2 = load("a2quiver").algebra
        brute = unnormalized_hochschild_dims(a2.mult, 2, D)
        assert hh(a2, D=D).dims == brute == {0: 2, 1: 0, 2: 0, 3: 0, 4: 0}
        assert commutator_quotient_dim(a2.mult, 2) == 2
        c.details.append("all corpus algebras agree with the tensor-over-A^e route through degree 4")
        c.details.append("F_2[e] = 2 in each degree (periodic resolution); M_2(F_2) = 1 in degree 0 (brute force)")
        c.details.append("A_2 quiver = 2 in degree 0 by brute force; stated value 1 is an erratum, see 7-literal")


@pytest.mark.xfail(strict=True, reason="stated HH_0 = 1 for the A_2 quiver contradicts every oracle (value 2)")
def test_criterion_7_literal_a2_value():
    try:
        assert hh(load("a2quiver").algebra, D=4).dims == {0: 1, 1: 0, 2: 0, 3: 0, 4: 0}
    except AssertionError:
        ACCEPTANCE["7 literal"] = ("FAIL", "A_2 quiver stated as dim 1; computed 2 by all routes (erratum, expected failure)")
        raise
    ACCEPTANCE["7 literal"] = ("PASS", "")


def test_criterion_8_d1_triviality():
    with Criterion("8") as c:
        for name in ("f2", "f2eps", "m2f2"):
            rep = d1_triviality_check(load(name).algebra, 2)
            assert rep.ranks and rep.ok, (name, rep.violations)
            c.details.append(f"{name}: rank d_1 = 0 at {len(rep.ranks)} spots")


def test_criterion_9_degeneration():
    with Criterion("9", 300.0) as c:
        verdicts = {}
        for name in ("f2", "m2f2", "f2eps"):
            first = degeneration_check(load(name).algebra, p=2)
            again = degeneration_check(load(name).algebra, p=2)
            assert first == again, name
            verdicts[name] = first.verdict
        assert verdicts["f2"] == "match"
        assert verdicts["m2f2"] == "match"
        assert verdicts["f2eps"] in ("inconclusive", "mismatch")
        c.details.append(", ".join(f"{k}: {v}" for k, v in verdicts.items()))


def test_criterion_10_truncation_stabilization():
    with Criterion("10") as c:
        D = 4
        for name in CORPUS:
            s = load(name)
            L = D + 1 - min(0, s.module.min_degree())
            one = hochschild._hh_dims(s.algebra, s.module, D, L)
            two = hochschild._hh_dims(s.algebra, s.module, D, L + 1)
            assert one == two, (name, one, two)
        c.details.append(f"all {len(CORPUS)} corpus inputs stable through degree {D}")
