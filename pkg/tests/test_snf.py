"""Smith form over Z/p^M: transforms, diagonals, kernels."""

import numpy as np

from ptriple.limbs import LimbContext
from ptriple.snf import kernel_columns, snf_diag_q, snf_int, val_of


def matmul_mod(A, B, mod):
    n, k = len(A), len(A[0])
    m = len(B[0])
    out = [[0] * m for _ in range(n)]
    for i in range(n):
        for t in range(k):
            a = A[i][t]
            if a:
                row = B[t]
                oi = out[i]
                for j in range(m):
                    oi[j] = (oi[j] + a * row[j]) % mod
    return out


def det_int(A):
    n = len(A)
    if n == 1:
        return A[0][0]
    tot = 0
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in A[1:]]
        term = A[0][j] * det_int(minor)
        tot += term if j % 2 == 0 else -term
    return tot


def check_snf(mat, p, M):
    pM = p ** M
    res = snf_int(mat, p, M, want_p=True)
    vals = res["vals"]
    assert vals == sorted(vals)
    r, c = len(mat), len(mat[0])
    D = matmul_mod(matmul_mod(res["Q"], mat, pM), res["P"], pM)
    for i in range(r):
        for j in range(c):
            want = p ** vals[i] % pM if (i == j and i < len(vals) and vals[i] < M) else 0
            assert D[i][j] == want, (i, j, D[i][j], want)
    # transforms are unimodular: their own diagonals are all units
    assert snf_int(res["Q"], p, M)["vals"] == [0] * r
    assert snf_int(res["P"], p, M)["vals"] == [0] * c
    return res


def test_snf_int_random_square():
    rng = np.random.default_rng(20260816)
    p, M = 5, 10
    pM = p ** M
    for size in (3, 5, 8):
        for _ in range(40):
            mat = [
                [int(rng.integers(0, pM)) for _ in range(size)]
                for _ in range(size)
            ]
            res = check_snf(mat, p, M)
            s = sum(res["vals"])
            if s < M:
                d = det_int(mat)
                assert val_of(d % pM, p, M) == s


def test_snf_int_planted_divisors():
    rng = np.random.default_rng(7)
    p, M = 7, 9
    pM = p ** M
    for _ in range(25):
        vals = sorted(int(v) for v in rng.integers(0, 5, size=4))
        D = [[p ** vals[i] if i == j else 0 for j in range(4)] for i in range(4)]
        U = [[int(rng.integers(0, pM)) for _ in range(4)] for _ in range(4)]
        V = [[int(rng.integers(0, pM)) for _ in range(4)] for _ in range(4)]
        for W in (U, V):  # force unimodular by planting a unit triangle
            for i in range(4):
                for j in range(i):
                    W[i][j] = (W[i][j] // p) * p
                if W[i][i] % p == 0:
                    W[i][i] += 1
        mat = matmul_mod(matmul_mod(U, D, pM), V, pM)
        got = snf_int(mat, p, M)["vals"]
        assert got == vals


def test_snf_int_rectangular_and_zero():
    p, M = 3, 6
    res = check_snf([[0, 0], [0, 0], [0, 0]], p, M)
    assert res["vals"] == [M, M]
    res = check_snf([[3, 9, 1], [6, 18, 2]], p, M)
    assert res["vals"] == [0, M]
    mat = [[p ** 2 * 5, p ** 2 * 7], [p ** 2 * 11, p ** 2 * 2], [p ** 3, p ** 5]]
    res = check_snf(mat, p, M)
    assert res["vals"][0] == 2


def test_kernel_columns_planted():
    rng = np.random.default_rng(11)
    p, M = 5, 12
    pM = p ** M
    for _ in range(20):
        n = 5
        # build mat with a planted one-dimensional kernel: mat = U D V with
        # one diagonal entry zero to precision
        vals = [0, 0, 1, 2, M]
        D = [
            [p ** vals[i] % pM if i == j and vals[i] < M else 0 for j in range(n)]
            for i in range(n)
        ]
        U = [[int(rng.integers(0, pM)) for _ in range(n)] for _ in range(n)]
        V = [[int(rng.integers(0, pM)) for _ in range(n)] for _ in range(n)]
        for W in (U, V):
            for i in range(n):
                for j in range(i):
                    W[i][j] = (W[i][j] // p) * p
                if W[i][i] % p == 0:
                    W[i][i] += 1
        mat = matmul_mod(matmul_mod(U, D, pM), V, pM)
        cols, certified = kernel_columns(mat, p, M)
        assert len(cols) == 1
        assert certified == M - 2
        pc = p ** certified
        v = cols[0]
        assert any(x % p != 0 for x in v), "kernel vector should be primitive"
        for i in range(n):
            s = sum(mat[i][j] * v[j] for j in range(n)) % pM
            assert s % pc == 0


def test_snf_diag_q_matches_int_path():
    rng = np.random.default_rng(2026)
    p, M = 5, 10
    pM = p ** M
    ctx = LimbContext(p, M)
    for size, pnl in ((6, 4), (13, 4), (30, 8)):
        for _ in range(6):
            mat = [
                [int(rng.integers(0, pM)) for _ in range(size)]
                for _ in range(size)
            ]
            # plant some p-structure so tails actually trigger
            style = rng.integers(0, 3)
            if style == 1:
                for j in range(size):
                    mat[size - 1][j] = (mat[size - 2][j] * 3) % pM
            elif style == 2:
                for j in range(size):
                    mat[size - 1][j] = (mat[size - 1][j] // p ** 7) * p ** 7
                    mat[size - 2][j] = (mat[size - 2][j] // p ** 2) * p ** 2
            want = snf_int(mat, p, M)["vals"]
            vals, Q, loss = snf_diag_q(ctx, ctx.from_ints(mat), panel=pnl)
            assert vals == want
            assert loss == max([v for v in want if v < M], default=0)
            # row t of Q @ mat has valuation >= min(vals[t], M - loss)
            prod = ctx.matmul(Q, ctx.from_ints(mat))
            rowval = ctx.valuation(prod).min(axis=1)
            for tt in range(size):
                assert rowval[tt] >= min(vals[tt], M - loss)
            # Q stays unimodular
            qv = snf_int(ctx.to_ints(Q).tolist(), p, M)["vals"]
            assert qv == [0] * size


def test_snf_diag_q_deterministic():
    rng = np.random.default_rng(99)
    p, M = 17, 8
    pM = p ** M
    ctx = LimbContext(p, M)
    mat = [[int(rng.integers(0, pM)) for _ in range(15)] for _ in range(15)]
    a = snf_diag_q(ctx, ctx.from_ints(mat), panel=4)
    b = snf_diag_q(ctx, ctx.from_ints(mat), panel=4)
    assert a[0] == b[0]
    assert (a[1] == b[1]).all()
