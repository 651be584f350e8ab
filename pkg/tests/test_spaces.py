"""Space builder tests against textbook dimensions and expansions."""

import pathlib

import numpy as np
import pytest

from ptriple import errors
from ptriple.characters import TRIVIAL, DirichletCharacter
from ptriple.limbs import LimbContext
from ptriple.qexp import QExpansion
from ptriple.spaces import (
    DimensionTable,
    EchelonRows,
    SpaceCache,
    complementary_space,
    index_mu,
    sturm_bound,
)

DIMS = DimensionTable.load(
    str(pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "dims.tsv")
)


def eleven_a(qprec):
    """Level-11 weight-2 cusp form from its eta-product expansion."""
    f = [1] + [0] * (qprec - 1)
    for n in range(1, qprec):
        for m in (n, 11 * n):
            if m >= qprec:
                continue
            for _ in range(2):
                for i in range(qprec - 1, m - 1, -1):
                    f[i] -= f[i - m]
    return [0] + f[: qprec - 1]


def psi_power_form(exp, qprec):
    """CM cusp form of weight exp+1 at level 11: sum of psi^exp over ideals.

    Ideals of Z[w], w^2 = w - 3, are lattice points x + y w up to sign;
    even exp makes the sign irrelevant.  The w-components cancel under
    conjugation, leaving integer coefficients.
    """
    assert exp % 2 == 0 and exp >= 2
    acc_u = [0] * qprec
    acc_v = [0] * qprec
    ymax = int((4 * qprec / 11.0) ** 0.5) + 2
    for y in range(-ymax, ymax + 1):
        x = -abs(y) - int(qprec ** 0.5) - 2
        while x <= abs(y) + int(qprec ** 0.5) + 2:
            n = x * x + x * y + 3 * y * y
            x += 1
            if n <= 0 or n >= qprec:
                continue
            u, v = x - 1, y
            pu, pv = 1, 0
            e = exp
            while e:
                if e & 1:
                    pu, pv = pu * u - 3 * pv * v, pu * v + pv * u + pv * v
                e >>= 1
                if e:
                    u, v = u * u - 3 * v * v, 2 * u * v + v * v
            acc_u[n - 0] += pu
            acc_v[n - 0] += pv
    assert all(v == 0 for v in acc_v)
    assert all(u % 2 == 0 for u in acc_u)
    return [u // 2 for u in acc_u]


def test_index_mu_and_sturm():
    assert index_mu(1) == 1
    assert index_mu(11) == 12
    assert index_mu(45) == 72
    assert index_mu(57) == 80
    assert sturm_bound(1, 12) == 2
    assert sturm_bound(11, 2) == 3
    assert sturm_bound(45, 16) == 97


def test_dimension_table(tmp_path):
    path = tmp_path / "dims.tsv"
    path.write_text("# header\n45\ttrivial\t2\t10\n11\tkronecker:-11\t7\t7\n")
    t = DimensionTable.load(str(path))
    assert t.get(45, TRIVIAL, 2) == 10
    assert t.get(11, "kronecker:-11", 7) == 7
    assert t.get(45, TRIVIAL, 4) is None
    # the generated fixture table
    assert DIMS.get(57, TRIVIAL, 2) == 8
    assert DIMS.get(57, TRIVIAL, 122) == 808
    assert DIMS.get(45, TRIVIAL, 212) == 1270
    assert DIMS.get(11, "kronecker:-11", 293) == 293


def test_echelon_structure():
    ctx = LimbContext(7, 9)
    rng = np.random.default_rng(11)
    cands = ctx.from_ints(
        rng.integers(0, 7 ** 9, size=(8, 14), dtype=np.int64).astype(object)
    )
    ech = EchelonRows(ctx, 14)
    accepted = 0
    for i in range(8):
        if ech.try_add(cands[i]) is not None:
            accepted += 1
    rows, piv, shifts = ech.packed()
    assert rows.shape[0] == accepted
    assert piv == sorted(piv)
    assert shifts == [0] * accepted  # random rows are never p-divisible
    for r, c in enumerate(piv):
        assert int(ctx.to_ints(rows[r, c])) == 1
        # strict echelon: zero strictly before the own pivot
        assert not rows[r, :c].any()
    # a basis row has zero residual against the rows
    res, _ = ech.reduce(rows[1])
    assert not res.any()


def test_echelon_saturation():
    ctx = LimbContext(7, 6)
    c1 = ctx.from_ints([[1, 1, 5, 0], [1, 1 + 7, 5 + 7 * 3, 49]])
    ech = EchelonRows(ctx, 4)
    assert ech.try_add(c1[0]) == (0, 0)
    # residual of the second row is 7 * (0, 1, 3, 7): one division
    assert ech.try_add(c1[1]) == (1, 1)
    rows, piv, shifts = ech.packed()
    assert piv == [0, 1] and shifts == [0, 1]
    assert [int(x) for x in ctx.to_ints(rows[1])] == [0, 1, 3, 7]
    # non-saturable residual (leading coefficient 7, unit further out)
    bad = ctx.from_ints([0, 0, 7, 1])
    assert ech.try_add(bad) is None
    assert ech.max_shift == 1


def test_level1_weights_4_to_10():
    ctx = LimbContext(5, 20)
    cache = SpaceCache(ctx, 1, 24, DIMS)
    assert cache.basis(TRIVIAL, 2).dim == 0
    assert cache.basis(TRIVIAL, 4).dim == 1
    assert cache.basis(TRIVIAL, 6).dim == 1
    assert cache.basis(TRIVIAL, 8).dim == 1
    assert cache.basis(TRIVIAL, 10).dim == 1
    # E_8 = E_4^2 in the echelon: a_1 of the only row is 480
    b8 = cache.basis(TRIVIAL, 8)
    assert b8.pivcols == [0]
    assert int(ctx.to_ints(b8.rows[0, 1])) == 480


def test_level1_m12_delta_oracle():
    ctx = LimbContext(5, 20)
    cache = SpaceCache(ctx, 1, 24, DIMS)
    b = cache.basis(TRIVIAL, 12)
    assert b.dim == 2 and b.pivcols == [0, 1]
    # second row is the normalized cusp form; tau values are classical
    tau = [1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920]
    pM = 5 ** 20
    got = [int(ctx.to_ints(b.rows[1, n])) for n in range(1, 11)]
    assert got == [t % pM for t in tau]
    # first row is E_4^3 = 1 + 720 q + ... (strict echelon keeps its q term)
    assert int(ctx.to_ints(b.rows[0, 0])) == 1
    assert int(ctx.to_ints(b.rows[0, 1])) == 720


def test_materialize_extends_rows():
    ctx = LimbContext(5, 20)
    cache = SpaceCache(ctx, 1, 16, DIMS)
    b = cache.basis(TRIVIAL, 12)
    long = cache.materialize(b, 32)
    assert long.shape[:2] == (2, 32)
    pM = 5 ** 20
    tau_cont = {11: 534612, 12: -370944, 13: -577738, 14: 401856}
    for n, t in tau_cont.items():
        assert int(ctx.to_ints(long[1, n])) == t % pM


def test_m2_11_and_span():
    ctx = LimbContext(23, 8)
    qprec = 40
    f11 = QExpansion.from_ints(ctx, eleven_a(qprec), 2, 11)
    coeffs = eleven_a(12)
    assert coeffs[1:11] == [1, -2, -1, 2, 1, 2, -2, 0, -2, -2]
    cache = SpaceCache(ctx, 11, qprec, DIMS, ingested=[("11a", f11)])
    b = cache.basis(TRIVIAL, 2)
    assert b.dim == 2 and b.pivcols == [0, 1]
    ech = EchelonRows(ctx, qprec)
    for r in range(b.dim):
        ech.try_add(b.rows[r])
    res, _ = ech.reduce(f11.coeffs)
    assert not res.any()


def test_m2_45_without_cusp_fixtures_raises():
    ctx = LimbContext(17, 6)
    cache = SpaceCache(ctx, 45, 40, DIMS)
    with pytest.raises(errors.DimensionNotReached) as info:
        cache.basis(TRIVIAL, 2)
    assert "7 of 10" in str(info.value)


def test_rank_stabilization_fallback():
    ctx = LimbContext(23, 6)
    qprec = 24
    f11 = QExpansion.from_ints(ctx, eleven_a(qprec), 2, 11)
    # table with M_2 present but M_4 missing: the fallback must find 4
    partial = DimensionTable({(11, "trivial", 2): 2})
    cache = SpaceCache(ctx, 11, qprec, partial, ingested=[("11a", f11)])
    b = cache.basis(TRIVIAL, 4)
    assert b.dim == DIMS.get(11, TRIVIAL, 4) == 4
    # too short for the Sturm bound: refuses instead of guessing
    short = SpaceCache(ctx, 11, 4, partial, ingested=[("11a", f11.truncate(4))])
    with pytest.raises(errors.MissingDimensionEntry):
        short.basis(TRIVIAL, 4)


def test_complementary_space():
    ctx = LimbContext(5, 20)
    cache = SpaceCache(ctx, 1, 24, DIMS)
    b = cache.basis(TRIVIAL, 12)
    rows, piv, shifts = complementary_space(cache, b.rows[:1], TRIVIAL, 12)
    assert rows.shape[0] == 1 and piv == [1] and shifts == [0]
    rows2, piv2, _ = complementary_space(cache, b.rows[:0], TRIVIAL, 12)
    assert rows2.shape[0] == 2 and piv2 == [0, 1]


def test_psi_power_prefixes():
    # frozen small coefficients of the CM forms at level 11
    psi2 = psi_power_form(2, 12)
    assert psi2[1:6] == [1, 0, -5, 4, -1]
    assert psi2[9] == 16 and psi2[11] == -11
    psi4 = psi_power_form(4, 12)
    assert psi4[1:6] == [1, 0, 7, 16, -49]
    assert psi4[11] == 121
    psi6 = psi_power_form(6, 12)
    assert psi6[1:6] == [1, 0, 10, 64, 74]
    assert psi6[11] == -1331


def test_chi_spaces_level_11():
    ctx = LimbContext(23, 6)
    chi = DirichletCharacter("kronecker:-11")
    qprec = 40
    f11 = QExpansion.from_ints(ctx, eleven_a(qprec), 2, 11)
    ingested = [("11a", f11)]
    for exp in (2, 4, 6):
        q = QExpansion.from_ints(
            ctx, psi_power_form(exp, qprec), exp + 1, 11, chi
        )
        ingested.append(("11.%d.b" % (exp + 1), q))
    cache = SpaceCache(ctx, 11, qprec, DIMS, ingested=ingested,
                       max_pair_weight=3)
    b1 = cache.basis(chi, 1)
    assert b1.dim == 1 and b1.pivcols == [0]
    assert cache.basis(chi, 3).dim == 3
    assert cache.basis(chi, 5).dim == 5
    assert cache.basis(chi, 7).dim == 7
    assert cache.basis(chi, 9).dim == 9
