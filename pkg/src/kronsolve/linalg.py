"""Small dense matrix helpers over an arbitrary ring.

Matrices are lists of row lists.  Cubic algorithms throughout; the
dimensions here are the number of variables or equations, which stay small
compared with the polynomial degrees.
"""

from __future__ import annotations

from .errors import SingularMatrix


def identity(ring, n):
    return [[ring.one if i == j else ring.zero for j in range(n)] for i in range(n)]


def mat_mul(ring, a, b):
    n, m, k = len(a), len(b[0]), len(b)
    out = [[ring.zero] * m for _ in range(n)]
    for i in range(n):
        for t in range(k):
            c = a[i][t]
            if ring.is_zero(c):
                continue
            row = b[t]
            oi = out[i]
            for j in range(m):
                oi[j] = ring.add(oi[j], ring.mul(c, row[j]))
    return out


def mat_vec(ring, a, v):
    out = []
    for row in a:
        acc = ring.zero
        for c, x in zip(row, v):
            acc = ring.add(acc, ring.mul(c, x))
        out.append(acc)
    return out


def mat_inv(ring, a):
    """Gauss-Jordan inverse with unit pivots; SingularMatrix if none exists.

    Works over fields and over Z/p^k (a pivot must be a unit, not merely
    nonzero).
    """
    n = len(a)
    m = [list(row) + ident_row for row, ident_row in zip(a, identity(ring, n))]
    for col in range(n):
        pivot = None
        for row in range(col, n):
            if ring.is_unit(m[row][col]):
                pivot = row
                break
        if pivot is None:
            raise SingularMatrix(f"no unit pivot in column {col}")
        m[col], m[pivot] = m[pivot], m[col]
        inv = ring.inv(m[col][col])
        m[col] = [ring.mul(inv, x) for x in m[col]]
        for row in range(n):
            if row == col:
                continue
            c = m[row][col]
            if ring.is_zero(c):
                continue
            m[row] = [ring.sub(x, ring.mul(c, y)) for x, y in zip(m[row], m[col])]
    return [row[n:] for row in m]


def berkowitz(ring, a):
    """Division-free determinant and adjugate via Samuelson-Berkowitz.

    Returns (det, adj) with adj * a = det * I.  O(n^4) ring operations.
    """
    n = len(a)
    if n == 0:
        return ring.one, []
    # Characteristic polynomial of the leading principal blocks, held as a
    # descending coefficient list des = [1, c_{k-1}, ..., c_0] for the k x k
    # block; each step multiplies by the Berkowitz Toeplitz column.
    des = [ring.one, ring.neg(a[0][0])]
    for k in range(1, n):
        row = a[k][:k]
        col = [a[i][k] for i in range(k)]
        block = [r[:k] for r in a[:k]]
        # t_0 = 1, t_1 = -a[k][k], t_j = -row . block^{j-2} . col  (j >= 2)
        ts = [ring.one, ring.neg(a[k][k])]
        vec = col
        for _ in range(k):
            ts.append(ring.neg(_dot(ring, row, vec)))
            vec = mat_vec(ring, block, vec)
        new = [ring.zero] * (k + 2)
        for i in range(k + 2):
            acc = ring.zero
            for j in range(max(0, i - (k + 1)), min(i, k) + 1):
                acc = ring.add(acc, ring.mul(ts[i - j], des[j]))
            new[i] = acc
        des = new
    # ascending coefficients: chi(x) = x^n + c_{n-1} x^{n-1} + ... + c_0
    coeffs = list(reversed(des))
    det = coeffs[0] if n % 2 == 0 else ring.neg(coeffs[0])
    # adjugate via Cayley-Hamilton:
    # adj(A) = (-1)^{n+1} (A^{n-1} + c_{n-1} A^{n-2} + ... + c_1 I)
    acc = [[coeffs[1] if i == j else ring.zero for j in range(n)] for i in range(n)]
    power = identity(ring, n)
    for j in range(2, n + 1):
        power = mat_mul(ring, power, a)
        cj = coeffs[j]
        for i in range(n):
            for t in range(n):
                acc[i][t] = ring.add(acc[i][t], ring.mul(cj, power[i][t]))
    if n % 2 == 0:
        acc = [[ring.neg(x) for x in row] for row in acc]
    return det, acc


def _dot(ring, u, v):
    acc = ring.zero
    for x, y in zip(u, v):
        acc = ring.add(acc, ring.mul(x, y))
    return acc
