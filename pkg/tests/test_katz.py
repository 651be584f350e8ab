"""Ladder engine tests: plan sizes, transform bookkeeping, U_p oracles."""

import numpy as np
import pytest

from ptriple import errors, katz
from ptriple.characters import TRIVIAL
from ptriple.context import hensel_unit_root
from ptriple.ingest import default_store
from ptriple.limbs import LimbContext
from ptriple.snf import snf_diag_q

STORE = default_store()
DIMS = STORE.dims()


def ints_of(ctx, arr):
    return [int(v) for v in np.asarray(ctx.to_ints(arr)).reshape(-1)]


def test_plan_sizes_match_dimension_table():
    rows = [
        ((57, "trivial", 2, 5, 20), (30, 5, 28, 808, 1026, 5130)),
        ((45, "trivial", 4, 17, 12), (13, 0, 15, 1270, 1604, 27268)),
        ((45, "trivial", 2, 17, 12), (13, 0, 15, 1258, 1589, 27013)),
        ((21, "trivial", 6, 11, 12), (14, 1, 16, 388, 501, 5511)),
        ((21, "trivial", 2, 11, 12), (14, 1, 16, 378, 489, 5379)),
        ((11, "trivial", 2, 23, 12), (13, 0, 15, 288, 376, 8648)),
        ((11, "kronecker:-11", 7, 23, 12), (13, 0, 15, 293, 383, 8809)),
    ]
    for (N, ch, k, p, m), want in rows:
        pl = katz.plan_engine(DIMS, p, m, N, ch, k)
        got = (pl.i_max, pl.maxscale, pl.mprime, pl.d, pl.hprime, pl.qlong)
        assert got == want, ((N, ch, k, p, m), got)


def test_tracked_echelon_remembers_the_transform():
    p, M = 5, 8
    ctx = LimbContext(p, M)
    rng = np.random.default_rng(20260816)
    width, n = 14, 6

    def fresh(t):
        # unit lead at column t, random tail: a legitimate echelon candidate
        row = [0] * width
        row[t] = 1 + p * int(rng.integers(0, p ** (M - 1)))
        for c in range(t + 1, width):
            row[c] = int(rng.integers(0, p ** M))
        return row

    ints, cands = [], []
    for t in range(n):
        row = fresh(t)
        if t >= 1:
            # mix earlier candidates in so the tails are nontrivial
            row = [
                (a + 2 * b) % p ** M for a, b in zip(row, ints[t - 1])
            ]
        if t == 3:
            # p times fresh content plus earlier rows: forces a saturation
            row = [
                (p * a + 2 * b + 3 * c) % p ** M
                for a, b, c in zip(fresh(t), ints[0], ints[1])
            ]
        ints.append(row)
        cands.append(ctx.from_ints(row))
    te = katz.TrackedEchelon(ctx, width)
    for c in cands:
        te.add(c)
    assert te.rank == n
    assert max(te.shifts) >= 1 and max(te.exps) >= 1
    for i in range(n):
        lhs = [v * p ** te.exps[i] for v in ints_of(ctx, te.rows[i])]
        tail = ints_of(ctx, te.tails[i])
        rhs = [0] * width
        for j, co in enumerate(tail):
            for t in range(width):
                rhs[t] += co * ints[j][t]
        mod = p ** (M - te.shifts[i])
        assert all((a - b) % mod == 0 for a, b in zip(lhs, rhs)), i
    # a dependent candidate is refused
    dep = [(4 * a + b) % p ** M for a, b in zip(ints[0], ints[1])]
    with pytest.raises(errors.SolveFailed):
        te.add(ctx.from_ints(dep))


@pytest.fixture(scope="module")
def eng1():
    pl = katz.plan_engine(DIMS, 5, 8, 1, TRIVIAL, 0)
    return katz.build_engine(pl, DIMS)


@pytest.fixture(scope="module")
def eng57():
    pl = katz.plan_engine(DIMS, 5, 4, 57, TRIVIAL, 2)
    ctx = LimbContext(pl.p, pl.mprime)
    seeds = STORE.seeds(ctx, 57, pl.qlong)
    return katz.build_engine(pl, DIMS, ingested=seeds)


def test_level_one_ladder_shape(eng1):
    pl = eng1.plan
    assert eng1.d == pl.d
    assert eng1.scales == [i // (pl.p + 1) for i in eng1.layers]
    for i in range(pl.i_max + 1):
        new = eng1.layers.count(i)
        prev = pl.layer_dims[i - 1] if i else 0
        assert new == pl.layer_dims[i] - prev, i


def test_level_one_constant_is_ordinary(eng1):
    ctx = eng1.ctx
    pl = eng1.plan
    one = ctx.zeros((pl.hprime,))
    one[0] = ctx.from_int(1)
    coords = eng1.coordinates(one, what="constant")
    ci = ints_of(ctx, coords)
    assert ci[0] == 1 and not any(ci[1:])
    # U_p fixes the constant
    col = ctx.matmul(eng1.amat, coords[:, None, :])[:, 0, :]
    mod = 5 ** eng1.m_eff
    assert [v % mod for v in ints_of(ctx, col)] == ci
    # and so does the ordinary projector
    _, ruse, defect = eng1.ordinary_projector()
    assert defect is None
    ev, ctxm = eng1.eord_coords(col)
    got = ints_of(ctxm, ev)
    assert got[0] % 5 ** pl.m == 1 and not any(v % 5 ** pl.m for v in got[1:])
    # round trip through the stored basis rows
    rec = eng1.recombine(coords, out_len=20)
    ri = ints_of(ctx, rec)
    assert ri[0] == 1 and not any(ri[1:])


def test_level_one_rejects_junk(eng1):
    rng = np.random.default_rng(7)
    vec = eng1.ctx.from_ints(
        [int(v) for v in rng.integers(0, 5 ** 8, size=eng1.plan.hprime)]
    )
    with pytest.raises(errors.NotInSpan):
        eng1.coordinates(vec, what="junk")


def test_level_one_determinism_and_cache(eng1, tmp_path):
    pl = eng1.plan
    again = katz.build_engine(pl, DIMS)
    assert np.array_equal(
        eng1.ctx.to_ints(eng1.amat), again.ctx.to_ints(again.amat)
    )
    path = katz.cache_path(str(tmp_path), pl)
    eng1.save(path)
    back = katz.read_engine(path, DIMS)
    assert back.m_eff == eng1.m_eff
    assert back.pivots == eng1.pivots
    assert back.scales == eng1.scales
    assert back.exps == eng1.exps and back.shifts == eng1.shifts
    for a, b in ((back.amat, eng1.amat), (back.ech_sel, eng1.ech_sel),
                 (back.tails, eng1.tails), (back.kappa, eng1.kappa)):
        assert np.array_equal(back.ctx.to_ints(a), eng1.ctx.to_ints(b))
    # load_or_build reuses the file; a fixture-key change rebuilds
    got = katz.load_or_build(pl, DIMS, cache_dir=str(tmp_path))
    assert np.array_equal(got.ctx.to_ints(got.amat), eng1.ctx.to_ints(eng1.amat))


def stabilization(eng, label):
    """Ordinary stabilization (coords, alpha) of a weight-2 fixture form."""
    ctx = eng.ctx
    pl = eng.plan
    f = STORE.newform(ctx, label, pl.hprime)
    p = pl.p
    alpha, beta = hensel_unit_root(p, ctx.M, f.coeff(p), p)
    b = (beta.unit * p ** beta.valuation) % ctx.pM
    vf = f.vp(p, out_len=pl.hprime)
    fa = ctx.sub(f.coeffs, ctx.mul_scalar(vf.coeffs, b))
    return eng.coordinates(fa, what=label), alpha, fa


def test_eigenform_is_an_eigenvector(eng57):
    ctx = eng57.ctx
    pl = eng57.plan
    coords, alpha, fa = stabilization(eng57, "57.2.f")
    col = ctx.matmul(eng57.amat, coords[:, None, :])[:, 0, :]
    diff = ctx.sub(col, ctx.mul_scalar(coords, alpha.unit % ctx.pM))
    mod = pl.p ** pl.m
    assert all(v % mod == 0 for v in ints_of(ctx, diff))
    # recombination returns the q-expansion we started from
    rec = eng57.recombine(coords, out_len=60)
    want = ints_of(ctx, fa[:60])
    assert [v % mod for v in ints_of(ctx, rec)] == [v % mod for v in want]


def test_slope_projection_row(eng57):
    pl = eng57.plan
    mm = pl.m
    p = pl.p
    ctxm = LimbContext(p, mm)
    coords, alpha, _ = stabilization(eng57, "57.2.f")
    amod = ctxm.from_ints(eng57.matrix_mod(mm))
    al = alpha.unit % ctxm.pM
    msig = amod.copy()
    idx = np.arange(eng57.d)
    msig[idx, idx] = ctxm.sub(msig[idx, idx], ctxm.from_int(al)[None, :])
    vals, Q, loss = snf_diag_q(ctxm, msig)
    assert vals[-1] == mm, "alpha is an eigenvalue to working precision"
    assert vals[-2] < mm, "eigenvalue multiplicity is one"
    pi = Q[-1]
    res = ctxm.matmul(pi[None, :, :], msig)[0]
    good = mm - loss
    assert int(ctxm.valuation(res, cap=good).min()) >= good
    # the projection pairs nontrivially with the eigenform itself
    cm = ctxm.from_ints([v % ctxm.pM for v in ints_of(eng57.ctx, coords)])
    pair = ctxm.matmul(pi[None, :, :], cm[:, None, :])[0, 0]
    assert ctxm.is_unit(pair[None, :]).all()
