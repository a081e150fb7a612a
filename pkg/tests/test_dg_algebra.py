from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import algebra_axioms_hold
from tatehh.dg_algebra import (CyclicPowerAlgebra, DgAlgebra, DgBimodule, bar_augmentation, koszul_sign,
                               tor_dims, twisted_power, two_sided_bar, validate)
from tatehh.problem import CORPUS, load

CHARACTERS = {
    "f2": [(1,)],
    "f3": [(1,)],
    "f2xf2": [(1, 0), (1, 1)],
    "f2eps": [(1, 0)],
    "f3eps": [(1, 0)],
    "a2quiver": [(1, 0, 0), (1, 1, 0)],
    "dg1": [(1, 0, 0)],
}


@pytest.mark.parametrize("name", CORPUS)
def test_corpus_validates(name):
    s = load(name)
    assert validate(s.algebra) == []
    assert validate(s.module) == []


@given(st.sampled_from(CORPUS), st.data())
def test_validate_agrees_with_brute_force_on_perturbations(name, data):
    a = load(name).algebra
    n, p = a.dim, a.p
    which = data.draw(st.sampled_from(["mult", "diff"]))
    delta = data.draw(st.integers(1, p - 1))
    mult, diff = a.mult.copy(), a.diff.copy()
    if which == "mult":
        i, j, k = (data.draw(st.integers(0, n - 1)) for _ in range(3))
        mult[i, j, k] = (mult[i, j, k] + delta) % p
    else:
        i, j = (data.draw(st.integers(0, n - 1)) for _ in range(2))
        diff[i, j] = (diff[i, j] + delta) % p
    b = DgAlgebra(p, a.labels, a.degrees, a.unit, mult, diff)
    assert (validate(b) == []) == algebra_axioms_hold(mult, diff, a.degrees, a.unit, p)


@given(st.sampled_from(CORPUS), st.data())
def test_perturbing_a_unit_product_always_fails(name, data):
    a = load(name).algebra
    n = a.dim
    j, k = data.draw(st.integers(0, n - 1)), data.draw(st.integers(0, n - 1))
    mult = a.mult.copy()
    mult[a.unit, j, k] = (mult[a.unit, j, k] + 1) % a.p
    problems = validate(DgAlgebra(a.p, a.labels, a.degrees, a.unit, mult, a.diff))
    assert any("unit" in msg for msg in problems)


def test_nonassociative_table_names_the_triple():
    # e*e = 1 + e over F_2 is fine; e*e = f, f*e = e, e*f = 0 breaks associativity
    mult = np.zeros((3, 3, 3), dtype=np.int64)
    for i in range(3):
        mult[0, i, i] = mult[i, 0, i] = 1
    mult[1, 1, 2] = 1
    mult[2, 1, 1] = 1
    problems = validate(DgAlgebra(2, ["1", "e", "f"], [0, 0, 0], 0, mult))
    assert any("associativity fails on (e, e, e)" in msg for msg in problems)


def test_koszul_sign():
    assert koszul_sign([1, 1], [1, 0]) == -1
    assert koszul_sign([1, 2], [1, 0]) == 1
    assert koszul_sign([1, 1, 1], [2, 0, 1]) == 1


@pytest.mark.parametrize("name", CORPUS)
def test_bar_augmentation_is_quasi_isomorphism(name):
    a = load(name).algebra
    A = DgBimodule.regular(a)
    L = 4
    bar = two_sided_bar(A, a, A, L)
    c = bar.realize()
    f = bar_augmentation(bar, c)
    target = a.as_complex()
    for n in range(0, L):
        h = target.homology(n).dim
        assert c.homology(n).dim == h
        assert f.homology_rank(n) == h


@pytest.mark.parametrize("name", sorted(CHARACTERS))
def test_tor_symmetry(name):
    a = load(name).algebra
    aop = a.opposite()
    mods = [DgBimodule.regular(a)] + [DgBimodule.from_character(a, v) for v in CHARACTERS[name]]
    for m in mods:
        for n in mods:
            lhs = tor_dims(m, a, n, 3)
            rhs = tor_dims(n.opposite(aop), aop, m.opposite(aop), 3)
            assert lhs == rhs


def test_tor_over_dual_numbers():
    # Tor^{F_2[e]}(F_2, F_2) is F_2 in every degree (periodic resolution, e acting by 0)
    a = load("f2eps").algebra
    k = DgBimodule.from_character(a, (1, 0))
    assert tor_dims(k, a, k, 4) == {n: 1 for n in range(5)}
    # exterior algebra on a degree-1 class: divided powers, one class in each even degree
    b = load("f3eps").algebra
    k3 = DgBimodule.from_character(b, (1, 0))
    assert tor_dims(k3, b, k3, 5) == {0: 1, 1: 0, 2: 1, 3: 0, 4: 1, 5: 0}


def test_tor_with_free_module_is_concentrated_in_degree_zero():
    for name in CORPUS:
        a = load(name).algebra
        A = DgBimodule.regular(a)
        dims = tor_dims(A, a, A, 3)
        assert dims == {n: a.as_complex().homology(n).dim for n in dims}


@pytest.mark.parametrize("name", CORPUS)
@pytest.mark.parametrize("n", [1, 2, 3])
def test_twisted_power_action(name, n):
    s = load(name)
    pa = CyclicPowerAlgebra(s.algebra, n)
    assert pa.rotation_violations() == []
    if pa.dim <= 27:
        assert validate(pa) == []
    tw = twisted_power(s.module, s.algebra, n, pa)
    assert tw.equivariance_violations() == []
    t = tw.twist()
    assert t.power(n) == t.power(0)
