from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tatehh.complexes import (Bicomplex, ChainComplex, ChainMap, ComplexError, Convention, cone, dual,
                              simplicial_violations, tensor, totalize)
from tatehh.dg_algebra import DgBimodule, two_sided_bar
from tatehh.fp_linalg import PrimeFieldMatrix, rank


def M(p, rows):
    return PrimeFieldMatrix.from_dense(p, rows)


# --- homology examples -------------------------------------------------------

def test_isomorphism_differential_is_acyclic():
    c = ChainComplex(2, {0: 1, 1: 1}, {1: M(2, [[1]])})
    assert c.homology_dims(-1, 2) == {-1: 0, 0: 0, 1: 0, 2: 0}


def test_zero_differential_homology_is_dims():
    c = ChainComplex(5, {0: 2, 1: 3, 4: 1})
    assert c.homology_dims(0, 4) == {0: 2, 1: 3, 2: 0, 3: 0, 4: 1}


def test_written_zero_map():
    c = ChainComplex(3, {0: 1, 1: 1}, {1: M(3, [[0]])})
    assert c.homology_dims(0, 1) == {0: 1, 1: 1}


def test_d_squared_checked():
    with pytest.raises(ComplexError):
        ChainComplex(2, {0: 1, 1: 1, 2: 1}, {1: M(2, [[1]]), 2: M(2, [[1]])})


def test_homology_representatives_are_cycles():
    c = ChainComplex(3, {0: 2, 1: 2}, {1: M(3, [[1, 2], [0, 0]])})
    h = c.homology(1, representatives=True)
    assert h.dim == 1
    for v in h.representatives:
        assert not (c.diff(1) @ v).any()


# --- random complexes with known homology ------------------------------------

@st.composite
def complexes(draw, lo=-2, hi=3):
    """Direct sum of spheres and disks, conjugated by random invertible matrices.

    Returns the complex together with its homology dims (the number of spheres
    per degree), which serves as the oracle.
    """
    p = draw(st.sampled_from([2, 3, 5]))
    spheres = {n: draw(st.integers(0, 2)) for n in range(lo, hi + 1)}
    disks = {n: draw(st.integers(0, 2)) for n in range(lo + 1, hi + 1)}  # disk n spans n, n-1
    dims = {n: spheres[n] + disks.get(n, 0) + disks.get(n + 1, 0) for n in range(lo, hi + 1)}
    # basis in degree n: spheres, then tops of disks n, then bottoms of disks n+1
    d = {}
    for n in range(lo + 1, hi + 1):
        mat = np.zeros((dims[n - 1], dims[n]), dtype=np.int64)
        for k in range(disks[n]):
            mat[spheres[n - 1] + disks.get(n - 1, 0) + k, spheres[n] + k] = 1
        d[n] = mat
    g, ginv = {}, {}
    for n, k in dims.items():
        # random unipotent lower-triangular change of basis, with explicit inverse
        low = np.tril(np.array(draw(st.lists(st.integers(0, p - 1), min_size=k * k, max_size=k * k)),
                               dtype=np.int64).reshape(k, k), -1)
        g[n] = PrimeFieldMatrix.from_dense(p, np.eye(k, dtype=np.int64) + low)
        inv = np.eye(k, dtype=np.int64)
        power = np.eye(k, dtype=np.int64)
        for _ in range(1, k):
            power = (-power @ low) % p
            inv = (inv + power) % p
        ginv[n] = PrimeFieldMatrix.from_dense(p, inv)
    dd = {n: g[n - 1] @ PrimeFieldMatrix.from_dense(p, d[n]) @ ginv[n] for n in d}
    return ChainComplex(p, dims, dd), {n: spheres[n] for n in dims}


@given(complexes())
def test_homology_of_random_complexes(data):
    c, h = data
    assert c.homology_dims(-2, 3) == h


@given(complexes())
def test_euler_characteristic(data):
    c, h = data
    assert c.euler_characteristic() == sum((-1) ** (n % 2) * k for n, k in h.items())


@given(complexes())
def test_cone_of_identity_is_acyclic(data):
    c, _ = data
    cc = cone(ChainMap.identity(c)).complex
    assert all(v == 0 for v in cc.homology_dims(-3, 5).values())


@given(complexes(lo=-1, hi=2), st.data())
def test_kunneth(data, more):
    c, h = data
    p = c.p
    spheres = {n: more.draw(st.integers(0, 2)) for n in range(0, 2)}
    e = ChainComplex(p, spheres)
    t = tensor(c, e)
    want = {}
    for i, a in h.items():
        for j, b in spheres.items():
            want[i + j] = want.get(i + j, 0) + a * b
    got = t.homology_dims(-1, 3)
    assert all(got[n] == want.get(n, 0) for n in got)


@given(complexes())
def test_tensor_with_nontrivial_second_factor(data):
    c, h = data
    disk = ChainComplex(c.p, {0: 1, 1: 1}, {1: M(c.p, [[1]])})
    assert all(v == 0 for v in tensor(c, disk).homology_dims(-3, 5).values())


@given(complexes())
def test_dual_reflects_homology(data):
    c, h = data
    dc = dual(c)
    assert all(dc.homology(-n).dim == h.get(n, 0) for n in range(-2, 4))


@given(complexes())
def test_shift(data):
    c, h = data
    s = c.shift(3)
    assert all(s.homology(n + 3).dim == h.get(n, 0) for n in range(-2, 4))


# --- totalization ------------------------------------------------------------

def test_single_cell_bicomplex():
    b = Bicomplex(3, {(0, 0): 1})
    for conv in Convention:
        t = totalize(b, conv, (-1, 1))
        assert t.space.dims == {0: 1}


def test_single_column_is_vertical_complex():
    dv = {(0, 1): M(2, [[1]]), (0, 2): M(2, [[0]])}
    b = Bicomplex(2, {(0, 0): 1, (0, 1): 1, (0, 2): 1}, dv=dv)
    t = totalize(b, Convention.SUM, (0, 2))
    assert t.homology_dims(0, 2) == {0: 0, 1: 0, 2: 1}


def test_conventions_agree_on_bounded_t():
    # s unbounded in both directions, t in [0, 1]; horizontal maps alternate 0 and 1
    one = M(2, [[1]])

    def dh(s, t):
        return one if s % 2 == 0 else M(2, [[0]])

    b = Bicomplex(2, lambda s, t: 1, dh, lambda s, t: one if t == 1 else None,
                  s_bounds=(None, None), t_bounds=(0, 1))
    outs = [totalize(b, conv, (-4, 4)) for conv in Convention]
    assert outs[0].same_as(outs[1]) and outs[1].same_as(outs[2])


def test_totalize_sign_makes_d_square_zero():
    # commuting square of identities; without the (-1)^s sign d^2 would be 2 != 0 mod 3
    one = M(3, [[1]])
    b = Bicomplex(3, {(0, 0): 1, (1, 0): 1, (0, 1): 1, (1, 1): 1},
                  dh={(1, 0): one, (1, 1): one}, dv={(0, 1): one, (1, 1): one})
    t = totalize(b, Convention.SUM, (0, 2))
    assert all(v == 0 for v in t.homology_dims(0, 2).values())


# --- simplicial objects --------------------------------------------------------

def test_bar_object_satisfies_simplicial_identities(specs):
    for name in ("f2eps", "a2quiver", "dg1"):
        a = specs[name].algebra
        A = DgBimodule.regular(a)
        s = two_sided_bar(A, a, A, 3).to_simplicial_object()
        assert simplicial_violations(s) == []


def test_broken_face_is_detected(specs):
    a = specs["f2eps"].algebra
    A = DgBimodule.regular(a)
    s = two_sided_bar(A, a, A, 2).to_simplicial_object(check=False)
    s.faces[2][0] = ChainMap.zero(s.levels[2], s.levels[1])
    assert simplicial_violations(s)
