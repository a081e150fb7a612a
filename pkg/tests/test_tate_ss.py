from __future__ import annotations

import warnings

import pytest

from oracles import filtered_page_dim
from tatehh.complexes import ChainComplex
from tatehh.fp_linalg import PrimeFieldMatrix
from tatehh.hochschild import EquivariantComplex
from tatehh.problem import load
from tatehh.tate import tate_complex
from tatehh.tate_ss import convergence_check, d1_triviality_check, degeneration_check, spectral_sequence


def free_extension() -> EquivariantComplex:
    """F_2[C_2] -> F_2[C_2] by 1 + t in degrees 1 -> 0: trivial homology, zero Tate."""
    n = PrimeFieldMatrix.from_dense(2, [[1, 1], [1, 1]])
    c = ChainComplex(2, {0: 2, 1: 2}, {1: n})
    t = PrimeFieldMatrix.from_dense(2, [[0, 1], [1, 0]])
    return EquivariantComplex.from_matrices(c, {0: t, 1: t}, 2)


def test_trivial_module_pages():
    tc = tate_complex(EquivariantComplex.trivial(3, {0: 1}), window=(-4, 4))
    ss = spectral_sequence(tc)
    assert ss.stable_page == 2
    assert set(ss.pages[1].values()) == {1}
    assert all(v == 0 for r in ss.rank_out for v in ss.rank_out[r].values())


def test_free_module_pages():
    tc = tate_complex(EquivariantComplex.regular(2), window=(-4, 4))
    ss = spectral_sequence(tc)
    assert set(ss.pages[1].values()) == {2}
    assert set(ss.rank_out[1].values()) == {1}
    assert set(ss.pages[2].values()) == {0}


def test_constructed_d2():
    tc = tate_complex(free_extension(), window=(-5, 5))
    ss = spectral_sequence(tc)
    assert ss.stable_page == 3
    assert set(ss.pages[2].values()) == {1}
    assert set(ss.rank_out[2].values()) == {0, 1}
    # d_2 : (s, 0) -> (s - 2, 1) is an isomorphism wherever both spots are in range
    assert all(ss.rank_out[2][(s, 0)] == 1 for s, t in ss.pages[2] if t == 0 and (s - 2, 1) in ss.pages[2])
    assert set(ss.pages[3].values()) == {0}
    assert all(v == 0 for v in tc.homology_dims().values())


def test_pages_against_subspace_oracle(equivariant_corpus):
    names = ["f2eps_model", "f3eps_model", "trivial_plus_free_p3", "dg1_model"]
    for name in names:
        tc = tate_complex(equivariant_corpus[name], window=(-3, 3), compare_variants=False)
        ss = spectral_sequence(tc)
        for r in range(1, ss.r_max + 1):
            for (s, t), k in ss.pages[r].items():
                assert k == filtered_page_dim(tc.complex, s + t, s, r), (name, r, s, t)


def test_constructed_d2_against_subspace_oracle():
    tc = tate_complex(free_extension(), window=(-5, 5))
    ss = spectral_sequence(tc)
    for r in (1, 2, 3):
        for (s, t), k in ss.pages[r].items():
            assert k == filtered_page_dim(tc.complex, s + t, s, r)


def test_recurrence_convergence_and_periodicity(equivariant_corpus):
    for name, m in equivariant_corpus.items():
        tc = tate_complex(m, window=(-3, 4), compare_variants=False)
        ss = spectral_sequence(tc)
        assert ss.recurrence_violations() == [], name
        assert ss.periodicity_violations() == [], name
        rep = convergence_check(ss, tc)
        assert rep.ok, (name, rep.rows)


def test_low_r_max_warns_and_is_not_converged():
    tc = tate_complex(free_extension(), window=(-4, 4))
    with pytest.warns(UserWarning):
        ss = spectral_sequence(tc, r_max=1)
    assert not ss.converged
    assert not convergence_check(ss, tc).ok


@pytest.mark.parametrize("name", ["f2", "f2eps", "m2f2"])
def test_d1_trivial(name):
    rep = d1_triviality_check(load(name).algebra, 2)
    assert rep.ok
    assert rep.ranks


def test_d1_detects_nontrivial_action():
    # a module where t acts nontrivially on H_0: d_1 between E_1 columns is t - 1 or N on H_t
    m = EquivariantComplex.regular(2)
    tc = tate_complex(m, window=(-3, 3))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        ss = spectral_sequence(tc, r_max=1)
    assert any(v for v in ss.rank_out[1].values())


@pytest.mark.parametrize("name", ["f2", "m2f2", "f2xf2", "a2quiver", "dg1", "f3"])
def test_degeneration_match(name):
    rep = degeneration_check(load(name).algebra)
    assert rep.verdict == "match", rep.reasons
    assert rep.e_infinity_total == rep.hh_total
    assert rep.e2_check["ok"] and rep.e2_check["coefficients_ok"]


@pytest.mark.parametrize("name", ["f2eps", "f3eps"])
def test_degeneration_non_smooth_is_not_a_match(name):
    rep = degeneration_check(load(name).algebra)
    assert rep.verdict in ("inconclusive", "mismatch")
    assert rep.reasons


def test_odd_p_checks_both_classes():
    rep = degeneration_check(load("f3").algebra)
    assert rep.classes == (0, 1)
    assert rep.e_infinity_totals[0] == rep.e_infinity_totals[1] == 1
    assert degeneration_check(load("f2").algebra).classes == (0,)


def test_degeneration_is_deterministic():
    a = degeneration_check(load("m2f2").algebra)
    b = degeneration_check(load("m2f2").algebra)
    assert a == b
