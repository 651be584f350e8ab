"""Extract the rational eigenform fixtures of weight 4 (level 45) and 6 (level 21).

Strategy: build the classical space with the package's own ladder machinery at
a short working length, materialize the basis at twice the fixture target,
form the matrices of T_2, T_q1, T_q2 in that basis, and cut each eigenform out
as the joint kernel of the stacked shifted operators (dimension exactly 1 is
asserted; the extra operators guard against old/Eisenstein eigenvalue
collisions mod p).  Coefficients come out modulo p^M; since p^M/2 exceeds the
Deligne bound d(n) n^((k-1)/2) at every index we keep, centered lifts are the
exact integers.  Validation: the pinned q-prefix, full-length T_2 and T_q
eigen-identities, and multiplicativity spot checks.
"""

import os
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)),
                                "..", "src"))

from ptriple.characters import TRIVIAL  # noqa: E402
from ptriple.limbs import LimbContext  # noqa: E402
from ptriple.qexp import QExpansion  # noqa: E402
from ptriple.snf import kernel_columns  # noqa: E402
from ptriple.spaces import DimensionTable, SpaceCache  # noqa: E402

HERE = os.path.dirname(os.path.abspath(__file__))
FIX = os.path.join(HERE, "..", "fixtures")

# label -> (N, k, p, pinned a_1..a_11)
TARGETS = {
    "45.4.f": (45, 4, 17, [1, -1, 0, -7, -5, 0, -24, 15, 0, 5, -52]),
    "45.4.g": (45, 4, 17, [1, -3, 0, 1, 5, 0, 20, 21, 0, -15, 24]),
    "45.4.h": (45, 4, 17, [1, 4, 0, 8, 5, 0, 6, 0, 0, 20, -32]),
    "45.4.h2": (45, 4, 17, [1, -5, 0, 17, 5, 0, -30, -45, 0, -25, -50]),
    "45.4.h3": (45, 4, 17, [1, 5, 0, 17, -5, 0, -30, 45, 0, -25, 50]),
    "21.6.f": (21, 6, 11, [1, 1, -9, -31, -34, -9, -49, -63, 81, -34, -340]),
    "21.6.g": (21, 6, 11, [1, 5, 9, -7, 94, 45, -49, -195, 81, 470, 52]),
    "21.6.h": (21, 6, 11, [1, 10, 9, 68, -106, 90, -49, 360, 81, -1060, 92]),
}

# per (N, k): output length, working modulus exponent, joint Hecke primes
PLANS = {
    (45, 4): dict(out_len=27500, M=16, ops=(2, 7, 11), qshort=400),
    (21, 6): dict(out_len=5600, M=16, ops=(2, 5, 11), qshort=400),
}


def coords_of(ctx, rows, pivs, vec, mtrust):
    """Coefficients of vec in the unit-pivot echelon rows.

    The residual must vanish modulo p^mtrust (rows with saturation loss are
    only good to that level)."""
    width = min(vec.shape[0], rows.shape[1])
    assert max(pivs) < width, "working length too short for the pivots"
    res = vec[:width].copy()
    out = []
    for j, pc in enumerate(pivs):
        c = res[pc].copy()
        out.append(int(ctx.to_ints(c[None, :])[0]))
        if c.any():
            res = ctx.sub(res, ctx.mul(c[None, :], rows[j][:width]))
    if res.any():
        assert int(ctx.valuation(res[None, :]).min()) >= mtrust, "vector left the span"
    return out


def hecke_matrix(ctx, cache, basis, q, mtrust):
    """Matrix of T_q in basis coordinates, columns indexed by basis rows."""
    cols = []
    for j in range(basis.dim):
        f = QExpansion(ctx, basis.rows[j], basis.weight, basis.N, basis.char)
        tf = f.hecke_tp(q)
        cols.append(coords_of(ctx, basis.rows, basis.pivcols, tf.coeffs, mtrust))
    return [list(col) for col in zip(*cols)]  # row-major


def joint_kernel(mats_minus_eig, p, M):
    """One-dimensional kernel of the stacked matrices over Z/p^M.

    Goes through the Smith form: congruences mod p between eigenvalue
    systems (newform meeting an old or Eisenstein system mod p) would make a
    naive unit-pivot reduction see spurious free columns, while the Smith
    diagonal separates the true kernel from torsion and certifies how many
    digits of the kernel vector are trustworthy."""
    rows = [list(r) for m in mats_minus_eig for r in m]
    cols, certified = kernel_columns(rows, p, M, min_gap=6)
    assert len(cols) == 1, "joint kernel dimension %d, want 1" % len(cols)
    return cols[0], certified


def divisor_counts(limit):
    d = np.zeros(limit + 1, dtype=np.int64)
    for i in range(1, limit + 1):
        d[i::i] += 1
    return d


SEEDS = {45: ["45.2.f0", "15.2.a"], 21: ["21.2.f0"]}


def load_fixture(ctx, label, qprec):
    path = os.path.join(FIX, "newforms", label + ".tsv")
    with open(path) as fh:
        head = fh.readline().split("\t")
        N, k = int(head[1]), int(head[2])
        coeffs = [0] * qprec
        for line in fh:
            n_s, a_s = line.split("\t")
            n = int(n_s)
            if n < qprec:
                coeffs[n] = int(a_s)
    return QExpansion.from_ints(ctx, coeffs, k, N)


def main():
    dims = DimensionTable.load(os.path.join(FIX, "dims.tsv"))
    os.makedirs(os.path.join(FIX, "newforms"), exist_ok=True)
    by_space = {}
    for label, (N, k, p, prefix) in TARGETS.items():
        by_space.setdefault((N, k, p), []).append((label, prefix))
    prefix_lines = []
    for (N, k, p), members in sorted(by_space.items()):
        plan = PLANS[(N, k)]
        pM = p ** plan["M"]
        qbig = 2 * plan["out_len"] + 64
        ctx = LimbContext(p, plan["M"])
        seeds = [(lab, load_fixture(ctx, lab, qbig)) for lab in sorted(SEEDS[N])]
        short_seeds = [(lab, f.truncate(plan["qshort"])) for lab, f in seeds]
        cache = SpaceCache(ctx, N, plan["qshort"], dims, ingested=short_seeds)
        t0 = time.time()
        basis = cache.basis(TRIVIAL, k)
        maxshift = max(basis.shifts, default=0)
        assert maxshift <= 4, "basis loss %d too high" % maxshift
        mtrust = plan["M"] - maxshift
        pT = p ** mtrust
        print("(%d, k=%d): dim %d basis (loss %d) in %.1fs"
              % (N, k, basis.dim, maxshift, time.time() - t0))
        mats = {q: hecke_matrix(ctx, cache, basis, q, mtrust) for q in plan["ops"]}
        t0 = time.time()
        rows_long = cache.materialize(basis, qbig, long_ingested=seeds)
        ints_long = ctx.to_ints(rows_long)
        print("  materialized %d rows at q^%d in %.1fs"
              % (basis.dim, qbig, time.time() - t0))
        dcounts = divisor_counts(plan["out_len"])
        for label, prefix in sorted(members):
            t0 = time.time()
            eig = {q: prefix[q - 1] for q in plan["ops"]}
            shifted = []
            for q in plan["ops"]:
                m = [[v % pT for v in r] for r in mats[q]]
                for i in range(basis.dim):
                    m[i][i] = (m[i][i] - eig[q]) % pT
                shifted.append(m)
            x, certified = joint_kernel(shifted, p, mtrust)
            pC = p ** certified
            series = np.zeros(qbig, dtype=object)
            for j in range(basis.dim):
                if x[j]:
                    series += int(x[j]) * ints_long[j]
            series %= pC
            a1inv = pow(int(series[1]), -1, pC)  # unit or this raises
            series = (series * a1inv) % pC
            # full-length eigen identities (good primes here, chi trivial):
            # (T_q f)_n = a_(qn) + q^(k-1) a_(n/q), the last term when q | n
            for q in plan["ops"]:
                half = (qbig - 1) // q
                tq = series[::q][: half + 1].copy()
                tq[q::q] = (tq[q::q] + q ** (k - 1) * series[1: half // q + 1]) % pC
                want = (eig[q] * series[: half + 1]) % pC
                assert (tq == want).all(), "T_%d eigen-check failed for %s" % (q, label)
            out_len = plan["out_len"]
            a = series[: out_len + 1].copy()
            big = a > pC // 2
            a[big] -= pC
            bound = dcounts * (np.arange(out_len + 1, dtype=float) ** ((k - 1) / 2) + 1)
            assert all(abs(int(a[n])) <= bound[n] for n in range(1, out_len + 1)), \
                "centered lift exceeds the Deligne bound"
            assert [int(v) for v in a[1:12]] == prefix, "prefix mismatch for %s" % label
            for (u, v) in ((2, 9), (4, 25), (7, 11)):
                if u * v <= out_len:
                    assert int(a[u * v]) == int(a[u]) * int(a[v])
            with open(os.path.join(FIX, "newforms", label + ".tsv"), "w") as fh:
                fh.write("%s\t%d\t%d\ttrivial\n" % (label, N, k))
                for n in range(1, out_len + 1):
                    fh.write("%d\t%d\n" % (n, int(a[n])))
            prefix_lines.append("%s\t%d\t%d\ttrivial\t%s"
                                % (label, N, k,
                                   ",".join(str(int(a[n])) for n in range(1, 12))))
            print("  %s: %d coefficients (kernel certified mod %d^%d) in %.1fs"
                  % (label, out_len, p, certified, time.time() - t0))
    with open(os.path.join(FIX, "newforms", "prefixes.tsv"), "a") as fh:
        for line in prefix_lines:
            fh.write(line + "\n")
    print("done")


if __name__ == "__main__":
    sys.exit(main())
