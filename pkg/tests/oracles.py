"""Independent reference computations used as test oracles.

They are written directly from textbook formulas and share no code with the
package except, for the larger Hochschild matrices, the rank routine (which
test_fp_linalg checks against ``ref_rank``).
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from tatehh.fp_linalg import PrimeFieldMatrix, rank


def ref_rank(rows: list[list[int]], p: int) -> int:
    """Plain Gaussian elimination over F_p on lists of ints."""
    m = [[x % p for x in r] for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = pow(m[r][c], p - 2, p)
        m[r] = [(x * inv) % p for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [(x - f * y) % p for x, y in zip(m[i], m[r])]
        r += 1
    return r


def _mu(mult: np.ndarray) -> sp.csr_array:
    """A (x) A -> A as a k x k^2 matrix."""
    k = mult.shape[0]
    rows, cols, vals = [], [], []
    for x in range(k):
        for y in range(k):
            for z in range(k):
                if mult[x, y, z]:
                    rows.append(z); cols.append(x * k + y); vals.append(int(mult[x, y, z]))
    return sp.csr_array((vals, (rows, cols)), shape=(k, k * k), dtype=np.int64)


def _cycle_last_to_front(k: int, n: int) -> sp.csr_array:
    """Permutation of A^{(x) n} sending a_1 (x) ... (x) a_n to a_n (x) a_1 (x) ... (x) a_{n-1}."""
    size = k ** n
    src = np.arange(size)
    last = src % k
    rest = src // k
    tgt = last * k ** (n - 1) + rest
    return sp.csr_array((np.ones(size, dtype=np.int64), (tgt, src)), shape=(size, size))


def unnormalized_hochschild_dims(mult: np.ndarray, p: int, D: int) -> dict[int, int]:
    """HH_n(A; A), n <= D, for an ungraded algebra from the full Hochschild complex.

    C_n = A^{(x) n+1}, b = sum_i (-1)^i d_i with d_i multiplying factors i, i+1
    and d_n multiplying the last factor onto the front.
    """
    k = mult.shape[0]
    mu = _mu(mult)

    def eye(n):
        return sp.identity(k ** n, dtype=np.int64, format="csr")

    def b(n):
        # C_n -> C_{n-1}, n >= 1
        total = None
        for i in range(n):
            di = sp.kron(sp.kron(eye(i), mu), eye(n - 1 - i))
            term = di if i % 2 == 0 else -di
            total = term if total is None else total + term
        dn = sp.kron(mu, eye(n - 1)) @ _cycle_last_to_front(k, n + 1)
        total = total + (dn if n % 2 == 0 else -dn)
        return PrimeFieldMatrix.from_dense(p, (total.toarray() % p)) if total.shape[0] * total.shape[1] <= 4_000_000 \
            else PrimeFieldMatrix.from_triplets(p, *total.shape, *_coo(total, p))

    ranks = {n: rank(b(n)) for n in range(1, D + 2)}
    ranks[0] = 0
    return {n: k ** (n + 1) - ranks[n] - ranks[n + 1] for n in range(D + 1)}


def _coo(m, p):
    c = sp.coo_array(m)
    return c.row, c.col, c.data % p


def commutator_quotient_dim(mult: np.ndarray, p: int) -> int:
    """dim A / [A, A] by direct linear algebra."""
    k = mult.shape[0]
    rows = []
    for x in range(k):
        for y in range(k):
            rows.append([int(mult[x, y, z] - mult[y, x, z]) for z in range(k)])
    return k - ref_rank(rows, p)


def tate_of_representation(t: list[list[int]], p: int) -> tuple[int, int]:
    """(ker(t-1)/im N, ker N/im(t-1)) for a C_p representation given as an integer matrix."""
    n = len(t)
    tm1 = [[t[i][j] - (i == j) for j in range(n)] for i in range(n)]
    power = [[int(i == j) for j in range(n)] for i in range(n)]
    norm = [[0] * n for _ in range(n)]
    for _ in range(p):
        norm = [[norm[i][j] + power[i][j] for j in range(n)] for i in range(n)]
        power = [[sum(power[i][k] * t[k][j] for k in range(n)) % p for j in range(n)] for i in range(n)]
    r_t, r_n = ref_rank(tm1, p), ref_rank(norm, p)
    return n - r_t - r_n, n - r_n - r_t


def cyclic_shift(p: int) -> list[list[int]]:
    return [[int(i == (j + 1) % p) for j in range(p)] for i in range(p)]


def algebra_axioms_hold(mult: np.ndarray, diff: np.ndarray, degrees, unit: int, p: int) -> bool:
    """Brute-force check of the DG algebra axioms, one basis tuple at a time."""
    n = len(degrees)

    def prod(x, y):
        out = np.zeros(n, dtype=np.int64)
        for i in range(n):
            for j in range(n):
                if x[i] and y[j]:
                    out += x[i] * y[j] * mult[i, j]
        return out % p

    def d(x):
        return (diff @ x) % p

    basis = np.eye(n, dtype=np.int64)
    for i in range(n):
        if degrees[i] < 0:
            return False
        if d(basis[i]).any() and any(degrees[k] != degrees[i] - 1 for k in np.flatnonzero(d(basis[i]))):
            return False
        if d(d(basis[i])).any():
            return False
        if not (np.array_equal(prod(basis[unit], basis[i]), basis[i])
                and np.array_equal(prod(basis[i], basis[unit]), basis[i])):
            return False
        for j in range(n):
            xy = prod(basis[i], basis[j])
            if any(degrees[k] != degrees[i] + degrees[j] for k in np.flatnonzero(xy)):
                return False
            sign = -1 if degrees[i] % 2 else 1
            if not np.array_equal(d(xy), (prod(d(basis[i]), basis[j]) + sign * prod(basis[i], d(basis[j]))) % p):
                return False
            for k in range(n):
                if not np.array_equal(prod(xy, basis[k]), prod(basis[i], prod(basis[j], basis[k]))):
                    return False
    return degrees[unit] == 0


def filtered_page_dim(c, n: int, s: int, r: int) -> int:
    """dim E_r at filtration s in total degree n of a filtered complex, from subspaces.

    Filtration F_s = span of cells with filtration index <= s (cells as recorded
    by totalization).  E_r^s = Z_r^s / (Z_{r-1}^{s-1} + d Z_{r-1}^{s+r-1}) with
    Z_r^s = {x in F_s : dx in F_{s-r}}.
    """
    from tatehh.fp_linalg import hstack, kernel_basis, stack_columns

    p = c.p

    def coords(deg, pred):
        out = []
        for ss, _t, off, k in c.cells.get(deg, ()):
            if pred(ss):
                out.extend(range(off, off + k))
        return out

    def cycles(deg, s_, r_):
        cols = coords(deg, lambda x: x <= s_)
        rows = coords(deg - 1, lambda x: x > s_ - r_)
        dim = c.dim(deg)
        if not cols:
            return PrimeFieldMatrix.zeros(p, dim, 0)
        sub = c.diff(deg).submatrix(rows=rows, cols=cols)
        vecs = []
        for v in kernel_basis(sub) if rows else [np.eye(len(cols), dtype=np.int64)[:, j] for j in range(len(cols))]:
            full = np.zeros(dim, dtype=np.int64)
            full[cols] = v
            vecs.append(full)
        return stack_columns(p, dim, vecs)

    zr = cycles(n, s, r)
    low = cycles(n, s - 1, r - 1)
    high = c.diff(n + 1) @ cycles(n + 1, s + r - 1, r - 1)
    denom = hstack(p, [low, high], rows=c.dim(n))
    return rank(zr) - rank(denom)


def periodic_resolution_problem(D: int) -> dict:
    """Two-periodic A^e-resolution of F_2[e]/(e^2): W_k = A (x) A, d = e (x) 1 + 1 (x) e.

    Basis of A (x) A: index 2x + y for x (x) y.  Left e: x (x) y -> ex (x) y,
    right e: x (x) y -> x (x) ye.
    """
    dims = {str(k): 4 for k in range(D + 3)}
    d_entries = [[2, 0, 1], [1, 0, 1], [3, 1, 1], [3, 2, 1]]  # e(x)1 + 1(x)e
    diff = {str(k): d_entries for k in range(1, D + 3)}
    left = {str(k): {"eps": [[2, 0, 1], [3, 1, 1]]} for k in range(D + 3)}
    right = {str(k): {"eps": [[1, 0, 1], [3, 2, 1]]} for k in range(D + 3)}
    from tatehh.problem import load

    raw = load("f2eps").raw
    return dict(raw, resolution={"dims": dims, "diff": diff, "left": left, "right": right})
