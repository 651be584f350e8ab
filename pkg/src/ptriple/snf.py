"""Smith-form diagonals, transforms, and kernels over Z/p^M.

Two entry points:

* snf_int: exact small-matrix Smith normal form in python integers with
  minimal-valuation pivoting (lexicographic tie-break).  Returns the diagonal
  valuations, the unimodular transforms, and the trust level of the
  transforms' entries.  Used for kernel extraction, for unit tests, and as
  the tail solver of the big path.

* snf_diag_q: diagonal valuations plus the left transform Q for big square
  limb matrices.  Phase 1 runs blocked row elimination choosing unit pivots
  (full row/column pivoting), under which Schur updates are exact mod p^M;
  when no unit remains the small leftover block goes through snf_int.
  The last row of Q is a left kernel vector of the input whenever the last
  diagonal entry vanishes to working precision.

Precision discipline: a division by p^v during elimination leaves the
quotient determined mod p^(M-v) only, so the transforms are trusted mod
p^(M - loss) with loss = max valuation over the nonzero diagonal entries.
Minimal-valuation pivoting keeps the matrix entries themselves exact mod
p^M at every step (the junk in a multiplier is killed by the pivot's own
p-power when it hits a column entry of valuation >= pivot valuation).
"""

import numpy as np

from . import errors
from .limbs import MAX_INNER


def val_of(x, p, cap):
    if x == 0:
        return cap
    v = 0
    while v < cap and x % p == 0:
        x //= p
        v += 1
    return v


def snf_int(mat, p, M, want_p=False):
    """Exact SNF of a small integer matrix over Z/p^M.

    mat: list of lists (or 2d array) of python ints.  Returns a dict with
    vals (diagonal valuations, M meaning zero-to-precision), Q (r x r),
    P (c x c, when requested), and loss (max valuation among the nonzero
    diagonal entries).  Q mat P = diag(p^vals) mod p^M with unit-determinant
    Q and P.
    """
    pM = p ** M
    R = [[int(x) % pM for x in row] for row in mat]
    r = len(R)
    c = len(R[0]) if r else 0
    Q = [[int(i == j) for j in range(r)] for i in range(r)]
    P = [[int(i == j) for j in range(c)] for i in range(c)] if want_p else None
    vals = []
    steps = min(r, c)
    for t in range(steps):
        best = None
        for i in range(t, r):
            for j in range(t, c):
                v = val_of(R[i][j], p, M)
                if best is None or v < best[0]:
                    best = (v, i, j)
                    if v == 0:
                        break
            if best is not None and best[0] == 0:
                break
        v, bi, bj = best
        if v >= M:
            vals.extend([M] * (steps - t))
            break
        if bi != t:
            R[t], R[bi] = R[bi], R[t]
            Q[t], Q[bi] = Q[bi], Q[t]
        if bj != t:
            for row in R:
                row[t], row[bj] = row[bj], row[t]
            if want_p:
                for row in P:
                    row[t], row[bj] = row[bj], row[t]
        pv = p ** v
        unit = R[t][t] // pv
        assert unit % p != 0
        uinv = pow(unit, -1, pM)
        R[t] = [(x * uinv) % pM for x in R[t]]
        Q[t] = [(x * uinv) % pM for x in Q[t]]
        # eliminate below: multiplier = entry / p^v, exact on representatives
        for i in range(t + 1, r):
            e = R[i][t]
            if e:
                assert e % pv == 0, "pivot was not minimal"
                f = e // pv
                R[i] = [(x - f * y) % pM for x, y in zip(R[i], R[t])]
                Q[i] = [(x - f * y) % pM for x, y in zip(Q[i], Q[t])]
        # eliminate right within row t (lower rows have 0 in column t)
        for j in range(t + 1, c):
            e = R[t][j]
            if e:
                assert e % pv == 0, "pivot was not minimal"
                g = e // pv
                R[t][j] = 0
                if want_p:
                    for row in P:
                        row[j] = (row[j] - g * row[t]) % pM
        vals.append(v)
    loss = max([v for v in vals if v < M], default=0)
    out = {"vals": vals, "Q": Q, "loss": loss}
    if want_p:
        out["P"] = P
    return out


def kernel_columns(mat, p, M, min_gap=3):
    """Right kernel vectors of a small integer matrix over Z/p^M.

    Returns (vectors, certified) where vectors are the P columns whose
    diagonal entries vanish to precision and certified = M - (largest
    non-vanishing diagonal valuation): the kernel is the span of these
    vectors modulo p^certified.  min_gap guards against treating a deep
    near-zero as structural.
    """
    r = len(mat)
    c = len(mat[0])
    res = snf_int(mat, p, M, want_p=True)
    dead = [j for j, v in enumerate(res["vals"]) if v >= M] + list(
        range(min(r, c), c)
    )
    loss = res["loss"]
    assert M - loss >= min_gap, "kernel not separated from torsion"
    cols = [[res["P"][i][j] for i in range(c)] for j in sorted(dead)]
    return cols, M - loss


def _flush_delayed(ctx, R, Q, F, t, s, width):
    """Apply the panel's pending updates to rows s.. (columns >= width, all Q)."""
    if s == t:
        return
    mats = [(R[:, width:], R[t:s, width:]), (Q, Q[t:s, :])]
    for target, rows in mats:
        if target.shape[1] == 0:
            continue
        sub = target[s:]
        if sub.shape[0] == 0:
            continue
        planes = np.zeros(sub.shape[:2] + (2 * ctx.L - 1,), dtype=np.int64)
        planes[..., : ctx.L] += sub
        ctx.accumulate_product(planes, F[s:, : s - t], rows, sign=-1)
        target[s:] = ctx.reduce_planes(planes)


def _blocked_mac_neg(ctx, target, a, b, col_block=2048):
    """target -= a @ b over Z/p^M, column-blocked; shapes (n,m,L),(n,k,L),(k,m,L)."""
    n, k, L = a.shape
    assert k * 2 ** 30 < 2 ** 52 and k <= MAX_INNER
    m = target.shape[1]
    for c0 in range(0, m, col_block):
        c1 = min(m, c0 + col_block)
        planes = np.zeros((n, c1 - c0, 2 * L - 1), dtype=np.int64)
        planes[..., :L] += target[:, c0:c1]
        ctx.accumulate_product(planes, a, b[:, c0:c1], sign=-1)
        target[:, c0:c1] = ctx.reduce_planes(planes)


def snf_diag_q(ctx, mat, panel=32, tail_cap=80):
    """Diagonal valuations and left transform for a square limb matrix.

    Returns (vals, Q, loss): vals are the Smith diagonal valuations
    (ctx.M = vanishes to precision), Q is the accumulated left transform
    (trusted mod p^(ctx.M - loss)), and the last row of Q kills the input
    from the left whenever vals[-1] == ctx.M.
    """
    d = mat.shape[0]
    assert mat.shape[0] == mat.shape[1]
    R = mat.copy()
    Q = ctx.zeros((d, d))
    idx = np.arange(d)
    Q[idx, idx] = ctx.from_int(1)
    vals = []
    t = 0
    while t < d:
        width = min(t + panel, d)
        F = ctx.zeros((d, width - t))
        s = t
        while s < width:
            # find a unit pivot: panel columns first, then swap one in
            placed = False
            for j in range(s, width):
                units = ctx.is_unit(R[s:, j])
                if units.any():
                    i = s + int(np.argmax(units))
                    if j != s:
                        R[:, [s, j]] = R[:, [j, s]]
                    placed = True
                    break
            if not placed:
                # trailing entries of rows >= s are behind by the pending
                # panel updates; apply those before reading them
                _flush_delayed(ctx, R, Q, F, t, s, width)
                F[s:, : s - t] = 0
                rest = ctx.is_unit(R[s:, width:]) if width < d else None
                if rest is not None and rest.any():
                    flat = int(np.argmax(rest.any(axis=0)))
                    j = width + flat
                    i = s + int(np.argmax(rest[:, flat]))
                    R[:, [s, j]] = R[:, [j, s]]
                    placed = True
            if not placed:
                break
            if i != s:
                R[[s, i], :] = R[[i, s], :]
                Q[[s, i], :] = Q[[i, s], :]
                F[[s, i], :] = F[[i, s], :]
            # delayed tail fix for row s from earlier panel steps, before
            # scaling: the stored multipliers predate the normalization
            if s > t:
                f_row = F[s, : s - t]
                if f_row.any():
                    if width < d:
                        prod = ctx.matmul(
                            f_row[None, :, :], R[t:s, width:]
                        )
                        R[s, width:] = ctx.sub(R[s, width:], prod[0])
                    prod = ctx.matmul(f_row[None, :, :], Q[t:s, :])
                    Q[s, :] = ctx.sub(Q[s, :], prod[0])
            uinv = ctx.inv_unit(R[s, s][None, :])[0]
            R[s, s:] = ctx.mul(uinv[None, :], R[s, s:])
            Q[s, :] = ctx.mul(uinv[None, :], Q[s, :])
            col = R[s + 1:, s]
            if col.size and col.any():
                F[s + 1:, s - t] = col
                R[s + 1:, s:width] = ctx.sub(
                    R[s + 1:, s:width],
                    ctx.mul(col[:, None, :], R[s, s:width][None, :, :]),
                )
            vals.append(0)
            s += 1
        if s < width:
            # no unit anywhere: flush pending updates, then exact tail
            _flush_delayed(ctx, R, Q, F, t, s, width)
            tail = d - s
            if tail > tail_cap:
                raise errors.MultiplicityAboveOne(
                    "non-unit block of size %d; eigenvalue cluster too large"
                    % tail
                )
            block = ctx.to_ints(R[s:, s:])
            res = snf_int(block.tolist(), ctx.p, ctx.M)
            qt = ctx.from_ints(res["Q"])
            Q[s:, :] = ctx.matmul(qt, Q[s:, :])
            vals.extend(res["vals"])
            loss = max([v for v in vals if v < ctx.M], default=0)
            return vals, Q, loss
        # panel done: one blocked update of the trailing rows
        if width < d:
            F_below = F[width:]
            if F_below.any():
                _blocked_mac_neg(ctx, R[width:, width:], F_below, R[t:width, width:])
                _blocked_mac_neg(ctx, Q[width:, :], F_below, Q[t:width, :])
        t = width
    loss = max([v for v in vals if v < ctx.M], default=0)
    return vals, Q, loss
