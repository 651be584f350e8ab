"""Katz-basis U_p matrices for overconvergent p-adic modular forms.

The working basis for r-overconvergent forms of weight k, level N, prime p
is assembled along the ladder of weights w_i = k + i(p-1): layer i
contributes rows p^(i // (p+1)) * b / E_(p-1)^i with b running over a
complement of E_(p-1) * M_(w_(i-1)) inside M_(w_i).  U_p is compact here,
and its d x d matrix reduced mod p^m drives all slope computations.

The build runs a short pass and a long pass.  The short pass (q-length h')
picks each layer's complement rows as products of a previous complement row
and a weight-(p-1) basis row, adopting into a strict echelon seeded by the
E_(p-1)-multiples of the layer below; only decisions and short rows are
kept.  The long pass (q-length p*h') recomputes each adopted product with
one series multiplication, divides by the running power of E_(p-1), and
applies U_p by striding.  Coordinates are recovered by forward substitution
against a tracked echelon of the short rows whose bookkeeping expresses
every echelon row over the raw products again, so the U_p matrix lands in
the same raw basis the long rows live in.

All arithmetic is exact over Z/p^M; p-divisions during echelon saturation
cost trusted digits, which are counted, and the build refuses to hand out
a matrix below the precision the plan promised.
"""

import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import errors
from .characters import TRIVIAL, DirichletCharacter
from .eisenstein import eisenstein_normalizer
from .kron import series_mul
from .limbs import LimbContext
from .spaces import EchelonRows, SpaceCache

CACHE_FORMAT = "ptriple-katz-cache 1"


def ladder_extent(p, m):
    """Eisenstein steps needed so truncation errors sit below p^m."""
    return (p + 1) * m // (p - 1)


def space_dim(dims, N, char, w):
    if w == 0:
        return 1 if char.is_trivial else 0
    dim = dims.get(N, char, w)
    if dim is None:
        raise errors.MissingDimensionEntry(
            "no dimension for N=%d char=%s weight=%d" % (N, char.label, w)
        )
    return dim


@dataclass
class EnginePlan:
    """Derived sizes for one engine build; make one through plan_engine."""

    p: int
    m: int
    N: int
    char: DirichletCharacter
    k: int
    extra: int
    i_max: int
    maxscale: int
    mprime: int
    d: int
    hprime: int
    qlong: int
    layer_dims: list = field(default_factory=list)

    @property
    def weights(self):
        return [self.k + i * (self.p - 1) for i in range(self.i_max + 1)]


def plan_engine(dims, p, m, N, char, k, extra=3):
    """Fix every size of the build from (p, m, N, char, k)."""
    assert p >= 5 and N % p != 0
    if isinstance(char, str):
        char = DirichletCharacter(char)
    i_max = ladder_extent(p, m)
    maxscale = i_max // (p + 1)
    layer_dims = [space_dim(dims, N, char, k + i * (p - 1)) for i in range(i_max + 1)]
    assert all(b >= a for a, b in zip(layer_dims, layer_dims[1:]))
    d = layer_dims[-1]
    hprime = d + (d + 3) // 4 + 16
    return EnginePlan(
        p=p,
        m=m,
        N=N,
        char=char,
        k=k,
        extra=extra,
        i_max=i_max,
        maxscale=maxscale,
        mprime=m + maxscale + extra,
        d=d,
        hprime=hprime,
        qlong=p * hprime,
        layer_dims=layer_dims,
    )


class TrackedEchelon:
    """Echelon rows that remember their expansion over the candidates.

    Candidates must each extend the rank; add() adopts or raises.  Along
    with every adopted row it stores an integer coordinate vector over the
    candidates fed in so far, valid up to the power-of-p denominator kept
    in exps, so coordinate solves can be pushed back to the raw candidate
    basis afterwards.
    """

    def __init__(self, ctx, width, max_loss=None):
        self.ctx = ctx
        self.width = width
        self.max_loss = ctx.M // 2 if max_loss is None else max_loss
        self.rows = []
        self.pivcols = []
        self.shifts = []
        self.tails = []
        self.exps = []
        self.ncand = 0

    @property
    def rank(self):
        return len(self.rows)

    def _reduce(self, res, tail, exp, loss):
        ctx = self.ctx
        for i in sorted(range(self.rank), key=lambda t: self.pivcols[t]):
            co = res[self.pivcols[i]].copy()
            if not co.any():
                continue
            res = ctx.sub(res, ctx.mul(co[None, :], self.rows[i]))
            si = self.shifts[i]
            if si:
                v = int(ctx.valuation(co[None, :], cap=si)[0])
                loss = max(loss, si - v)
            ti = self.exps[i]
            if ti > exp:
                tail = ctx.mul_scalar(tail, ctx.p ** (ti - exp))
                exp = ti
            piece = ctx.mul(co[None, :], self.tails[i])
            if exp > ti:
                piece = ctx.mul_scalar(piece, ctx.p ** (exp - ti))
            tail[: piece.shape[0]] = ctx.sub(tail[: piece.shape[0]], piece)
        return res, tail, exp, loss

    def add(self, cand, loss=0):
        """Adopt cand; returns (pivot, loss)."""
        ctx = self.ctx
        tail = ctx.zeros((self.ncand + 1,))
        tail[self.ncand] = ctx.from_int(1)
        self.ncand += 1
        exp = 0
        res, tail, exp, loss = self._reduce(cand.copy(), tail, exp, loss)
        while True:
            if loss > self.max_loss:
                raise errors.PrecisionBelowRequested(
                    "tracked echelon loss %d exceeds cap %d" % (loss, self.max_loss)
                )
            nz = res.any(axis=-1)
            if not nz.any():
                raise errors.SolveFailed("tracked candidate is dependent")
            lead = int(np.argmax(nz))
            if ctx.is_unit(res[lead][None, :]).all():
                break
            quot, rem = ctx.divmod_p(res)
            if rem.any():
                raise errors.SolveFailed("tracked candidate is not saturable")
            loss += 1
            exp += 1
            res, tail, exp, loss = self._reduce(quot, tail, exp, loss)
        assert lead not in self.pivcols
        inv = ctx.inv_unit(res[lead][None, :])
        self.rows.append(ctx.mul(inv, res))
        self.tails.append(ctx.mul(inv, tail))
        self.pivcols.append(lead)
        self.shifts.append(loss)
        self.exps.append(exp)
        return lead, loss


def _exact_shift(ctx, arr, g):
    """arr * p^(-g) with exactness asserted when g > 0."""
    if g < 0:
        return ctx.mul_scalar(arr, ctx.p ** (-g))
    for _ in range(g):
        arr, rem = ctx.divmod_p(arr)
        if rem.any():
            raise errors.SolveFailed("matrix entry not divisible by scale power")
    return arr


class KatzEngine:
    """U_p on the Katz basis: matrix, coordinates, recombination.

    amat acts on column coordinate vectors: coords(U_p x) = amat @ coords(x).
    Row/column index is adoption order, which runs layer-major, so the
    scale exponents come in nondecreasing blocks.  Everything is stored in
    the build context LimbContext(p, mprime) but only trusted mod p^m_eff.
    """

    def __init__(self, plan, ctx, pivots, scales, layers, selcols, ech_sel,
                 tails, exps, shifts, amat, m_eff, kappa=None, report=None,
                 fixtures_key=""):
        self.plan = plan
        self.ctx = ctx
        self.d = len(pivots)
        self.pivots = list(pivots)
        self.scales = list(scales)
        self.layers = list(layers)
        self.selcols = list(selcols)
        self.ech_sel = ech_sel
        self.tails = tails
        self.exps = list(exps)
        self.shifts = list(shifts)
        self.amat = amat
        self.m_eff = m_eff
        self.kappa = kappa
        self.report = report or {}
        self.fixtures_key = fixtures_key
        self.maxshift = max(self.shifts, default=0)
        self.maxexp = max(self.exps, default=0)
        self.last_vres = ctx.M
        pos = {c: t for t, c in enumerate(self.selcols)}
        self.pivpos = [pos[c] for c in self.pivots]
        self._eord = {}

    def _forward(self, block):
        """Forward substitution; block (n, nsel, L) is consumed.

        Returns Y with Y[:, i] the coefficient of echelon row i; the
        leftover in block is the residual, checked by the caller.
        """
        ctx = self.ctx
        Y = ctx.zeros((block.shape[0], self.d))
        for i in sorted(range(self.d), key=lambda t: self.pivots[t]):
            co = block[:, self.pivpos[i]].copy()
            Y[:, i] = co
            if co.any():
                upd = ctx.mul(co[:, None, :], self.ech_sel[i][None, :, :])
                block[:] = ctx.sub(block, upd)
        return Y

    def _sample_positions(self):
        piv = set(self.pivots)
        return [t for t, c in enumerate(self.selcols) if c not in piv]

    def _check_residual(self, block, what):
        """Returns the observed residual valuation at the sample columns.

        The ladder stops at i_max, so an exact member of the module still
        leaves a residual supported on the dropped layers; its valuation
        is at least m by the choice of i_max.  Junk sits at valuation 0.
        """
        ctx = self.ctx
        need = self.plan.m - self.maxshift
        sample = block[:, self._sample_positions()]
        if not sample.any():
            return ctx.M
        vals = ctx.valuation(sample.reshape(-1, ctx.L), cap=ctx.M)
        vres = int(vals.min())
        if vres < need:
            raise errors.NotInSpan(
                "%s residual has valuation %d at %d sampled columns, need %d"
                % (what, vres, sample.shape[1], need)
            )
        return vres

    def raw_coords(self, block, what="input"):
        """Coordinates over the raw product basis, times p^maxexp.

        block: (n, nsel, L) limbs of q-expansions at the kept columns.
        Returns (W, E) with true coords = p^(-E) * W.
        """
        ctx = self.ctx
        Y = self._forward(block)
        self.last_vres = self._check_residual(block, what)
        E = self.maxexp
        for i in range(self.d):
            if E > self.exps[i]:
                Y[:, i] = ctx.mul_scalar(Y[:, i], ctx.p ** (E - self.exps[i]))
        W = ctx.matmul(Y, self.tails)
        return W, E

    def select(self, coeffs):
        """Kept columns of a coefficient array (qprec, L), qprec >= h'."""
        assert coeffs.shape[0] > self.selcols[-1]
        return coeffs[self.selcols].copy()

    def coordinates(self, coeffs, what="input"):
        """Katz-basis coordinates (d, L) of one q-expansion's limbs.

        The expansion must lie in the unit ball of the overconvergent
        module: every raw coordinate must be divisible by the layer scale,
        checked exactly.  Trusted mod p^(m_eff).
        """
        ctx = self.ctx
        W, E = self.raw_coords(self.select(coeffs)[None, :, :], what=what)
        out = ctx.zeros((self.d,))
        for i in range(self.d):
            out[i] = _exact_shift(ctx, W[0, i][None, :], E + self.scales[i])[0]
        return out

    def recombine(self, coords, out_len=None):
        """Sum of coords against the scaled basis rows, as (out_len, L)."""
        assert self.kappa is not None, "engine was built without kappa rows"
        ctx = self.ctx
        out_len = self.kappa.shape[1] if out_len is None else out_len
        scaled = ctx.zeros((self.d,))
        for i in range(self.d):
            scaled[i] = ctx.mul_scalar(coords[i][None, :], ctx.p ** self.scales[i])[0]
        acc = ctx.matmul(scaled[None, :, :], self.kappa[:, :out_len])
        return acc[0]

    def matrix_mod(self, mm):
        """A as plain ints mod p^mm; requires mm <= m_eff."""
        if mm > self.m_eff:
            raise errors.PrecisionBelowRequested(
                "engine certifies mod p^%d, requested p^%d" % (self.m_eff, mm)
            )
        ints = self.ctx.to_ints(self.amat)
        pm = self.plan.p ** mm
        return [[int(v) % pm for v in row] for row in ints]

    def ordinary_projector(self, mm=None, cap=20):
        """(A^R mod p^mm, R_used, defect), doubling R until idempotent.

        R starts at d*(p-1)*p^(mm-1) so unit eigenvalues land on 1; the
        doubling squeezes positive slopes below p^mm.  A nonzero defect
        means the cap was hit and records the worst disagreement digit.
        """
        mm = min(self.plan.m, self.m_eff) if mm is None else mm
        if mm in self._eord:
            return self._eord[mm]
        p = self.plan.p
        ctxm = LimbContext(p, mm)
        amod = ctxm.from_ints(self.matrix_mod(mm))
        expo = self.d * (p - 1) * p ** (mm - 1)
        cur = amod
        acc = None
        for bit in bin(expo)[2:][::-1]:
            if bit == "1":
                acc = cur if acc is None else ctxm.matmul(acc, cur)
            cur = ctxm.matmul(cur, cur)
        ruse = expo
        defect = None
        for _ in range(cap):
            sq = ctxm.matmul(acc, acc)
            if (sq == acc).all():
                break
            acc = sq
            ruse *= 2
        else:
            diff = ctxm.sub(ctxm.matmul(acc, acc), acc)
            defect = mm - int(ctxm.valuation(diff.reshape(-1, ctxm.L), cap=mm).min())
        out = (acc, ruse, defect)
        self._eord[mm] = out
        return out

    def eord_coords(self, up_coords, mm=None):
        """A^(R-1) applied to coordinates of an already-U_p'd form.

        Feeding [U_p f] keeps the growth of truncation junk under control;
        the full projector never touches raw external coordinates.
        """
        mm = min(self.plan.m, self.m_eff) if mm is None else mm
        proj, ruse, defect = self.ordinary_projector(mm)
        if defect:
            raise errors.NoStabilization(
                "projector defect %d digits at R=%d" % (defect, ruse)
            )
        p = self.plan.p
        ctxm = LimbContext(p, mm)
        vec = ctxm.from_ints(
            [int(v) % ctxm.pM for v in self.ctx.to_ints(up_coords)]
        )
        cur = ctxm.from_ints(self.matrix_mod(mm))
        out = vec[:, None, :]
        for bit in bin(ruse - 1)[2:][::-1]:
            if bit == "1":
                out = ctxm.matmul(cur, out)
            cur = ctxm.matmul(cur, cur)
        return out[:, 0, :], ctxm

    def header_fields(self):
        pl = self.plan
        return [pl.p, pl.m, pl.N, pl.char.label, pl.k, self.d, pl.hprime]

    def save(self, path):
        write_engine(self, path)


def _select_columns(plan, pivots):
    hp = plan.hprime
    step = max(1, hp // 48)
    cols = set(range(0, hp, step))
    cols.update(range(max(0, hp - 8), hp))
    cols.update(pivots)
    return sorted(cols)


def build_engine(plan, dims, ingested=(), progress=None):
    """Run the two-pass build and return the finished engine.

    ingested: (label, QExpansion at qlong in the build context) pairs for
    cusp forms the classical spaces cannot reach from Eisenstein products.
    """
    say = progress or (lambda msg: None)
    p = plan.p
    ctx = LimbContext(p, plan.mprime)
    qs, ql = plan.hprime, plan.qlong
    # the space cache sorts its ingest list; stay parallel to it
    ingested = sorted(ingested, key=lambda t: t[0])
    for lab, f in ingested:
        if f.qprec < ql:
            raise errors.InsufficientCoefficients(
                "%s has %d coefficients, engine needs %d" % (lab, f.qprec, ql)
            )
    short_ing = [(lab, f.truncate(qs)) for lab, f in ingested]
    long_ing = [(lab, f.truncate(ql)) for lab, f in ingested]
    cache = SpaceCache(ctx, plan.N, qs, dims, ingested=short_ing)

    t0 = time.time()
    eser = eisenstein_normalizer(ctx, p, ql)
    einv_long = eser.inverse().coeffs
    e_short = eser.coeffs[:qs]
    say("eisenstein series ready %.1fs" % (time.time() - t0))

    # weight p-1 multiplier space, both lengths
    m16 = cache.basis(TRIVIAL, p - 1)
    m16_long = cache.materialize(m16, ql, long_ingested=long_ing)
    say("weight %d multipliers: dim %d" % (p - 1, m16.dim))

    # bottom layer
    if plan.k == 0:
        assert plan.char.is_trivial
        row_s = ctx.zeros((1, qs))
        row_s[0, 0] = ctx.from_int(1)
        row_l = ctx.zeros((1, ql))
        row_l[0, 0] = ctx.from_int(1)
        raws_short, raws_long = row_s, row_l
        raw_shifts = [0]
        base_piv, base_shift = [0], [0]
    else:
        base = cache.basis(plan.char, plan.k)
        raws_short = base.rows
        raws_long = cache.materialize(base, ql, long_ingested=long_ing)
        raw_shifts = list(base.shifts)
        base_piv, base_shift = list(base.pivcols), list(base.shifts)
    assert raws_short.shape[0] == plan.layer_dims[0]

    tracked = TrackedEchelon(ctx, qs)
    kap_rows = []
    u_rows = []
    scales = []
    layers = []
    rescues = 0
    tried = 0

    def absorb_layer(i, rshort, rlong, rshifts, eis, eil):
        # kappa rows, tracked echelon, and U_p slices for one layer's raws
        s_i = i // (p + 1)
        for j in range(rshort.shape[0]):
            if i == 0:
                ks = rshort[j]
                kl = rlong[j]
            else:
                ks = series_mul(ctx, rshort[j], eis, out_len=qs)
                kl = series_mul(ctx, rlong[j], eil, out_len=ql)
                assert (kl[:qs] == ks).all(), "short/long passes disagree"
            tracked.add(ks, loss=rshifts[j])
            kap_rows.append(ks)
            u_rows.append(kl[::p][: plan.hprime].copy())
            scales.append(s_i)
            layers.append(i)

    absorb_layer(0, raws_short, raws_long, raw_shifts, None, None)

    prev_ech = EchelonRows(ctx, qs)
    for t in range(raws_short.shape[0]):
        prev_ech.adopt_unchecked(raws_short[t], base_piv[t], base_shift[t])

    einv_pow_short = None
    einv_pow_long = None
    for i in range(1, plan.i_max + 1):
        t0 = time.time()
        w = plan.k + i * (p - 1)
        target = plan.layer_dims[i]
        if einv_pow_long is None:
            einv_pow_long = einv_long.copy()
        else:
            einv_pow_long = series_mul(ctx, einv_pow_long, einv_long, out_len=ql)
        einv_pow_short = einv_pow_long[:qs]

        ech = EchelonRows(ctx, qs)
        seeds = []
        for t in range(prev_ech.rank):
            srow = series_mul(ctx, e_short, prev_ech.rows[t], out_len=qs)
            ech.adopt_unchecked(srow, prev_ech.pivcols[t], prev_ech.shifts[t])
            seeds.append(srow)
        assert ech.rank == plan.layer_dims[i - 1]

        new_short, new_long, new_shifts = [], [], []
        for j in range(raws_short.shape[0]):
            if ech.rank >= target:
                break
            for r in range(m16.dim):
                if ech.rank >= target:
                    break
                cand = series_mul(ctx, raws_short[j], m16.rows[r], out_len=qs)
                tried += 1
                floor = max(raw_shifts[j], m16.shifts[r])
                got = ech.try_add(cand, loss=floor)
                if got is None:
                    continue
                new_short.append(cand)
                new_shifts.append(floor)
                new_long.append(
                    series_mul(ctx, raws_long[j], m16_long[r], out_len=ql)
                )
        if ech.rank < target:
            # products missed part of the space; fall back on its own basis
            basis_i = cache.basis(plan.char, w)
            rows_long_i = None
            for ridx in range(basis_i.dim):
                if ech.rank >= target:
                    break
                got = ech.try_add(basis_i.rows[ridx], loss=basis_i.shifts[ridx])
                if got is None:
                    continue
                if rows_long_i is None:
                    rows_long_i = cache.materialize(basis_i, ql, long_ingested=long_ing)
                rescues += 1
                new_short.append(basis_i.rows[ridx].copy())
                new_shifts.append(basis_i.shifts[ridx])
                new_long.append(rows_long_i[ridx].copy())
        if ech.rank < target:
            raise errors.DimensionNotReached(
                "layer %d weight %d reached %d of %d" % (i, w, ech.rank, target)
            )

        n_new = len(new_short)
        raws_short = (
            np.stack(new_short) if n_new else ctx.zeros((0, qs))
        )
        raws_long = np.stack(new_long) if n_new else ctx.zeros((0, ql))
        raw_shifts = new_shifts
        absorb_layer(i, raws_short, raws_long, raw_shifts,
                     einv_pow_short, einv_pow_long)
        prev_ech = ech
        say(
            "layer %2d w=%3d +%3d rows (%d tried) %.1fs"
            % (i, w, n_new, tried, time.time() - t0)
        )

    d = tracked.rank
    assert d == plan.d, "ladder found %d rows, table says %d" % (d, plan.d)

    # pack the tracked echelon: everything in adoption order
    t0 = time.time()
    selcols = _select_columns(plan, tracked.pivcols)
    ncol = len(selcols)
    ech_sel = ctx.zeros((d, ncol))
    tails = ctx.zeros((d, d))
    for i in range(d):
        ech_sel[i] = tracked.rows[i][selcols]
        tails[i, : tracked.tails[i].shape[0]] = tracked.tails[i]
    kappa = np.stack(kap_rows)
    # row i carries U_p of the SCALED basis element p^(s_i) kappa_i; the
    # unscaled operator image has denominators and would leave the span
    usel = ctx.zeros((d, ncol))
    for i in range(d):
        usel[i] = ctx.mul_scalar(u_rows[i][selcols], p ** scales[i])

    engine = KatzEngine(
        plan=plan,
        ctx=ctx,
        pivots=tracked.pivcols,
        scales=scales,
        layers=layers,
        selcols=selcols,
        ech_sel=ech_sel,
        tails=tails,
        exps=tracked.exps,
        shifts=tracked.shifts,
        amat=None,
        m_eff=0,
        kappa=kappa,
        report={"tried": tried, "rescues": rescues},
    )

    # solve for the matrix in the raw basis, then fold the layer scales in:
    # entry (i, j) of the raw-coordinate matrix W is p^maxexp times the
    # coefficient of kappa_j in U_p(p^(s_i) kappa_i), so the scaled-basis
    # matrix entry is W[i, j] / p^(E + s_j), transposed to act on columns.
    W, E = engine.raw_coords(usel, what="U_p rows")
    gmax = 0
    for a, b in _scale_blocks(scales):
        g = E + scales[a]
        if g > 0 and W[:, a:b].any():
            gmax = max(gmax, g)
        W[:, a:b] = _exact_shift(ctx, W[:, a:b], g)
    amat = np.ascontiguousarray(np.swapaxes(W, 0, 1))
    # certified digits: the solve keeps mprime - gmax of them, the dropped
    # ladder tail keeps last_vres, and row shifts eat into both
    m_eff = min(plan.mprime - gmax, engine.last_vres) - engine.maxshift
    if m_eff < plan.m:
        raise errors.PrecisionBelowRequested(
            "engine certifies mod p^%d, plan wanted p^%d" % (m_eff, plan.m)
        )
    engine.amat = amat
    engine.m_eff = m_eff
    engine.report["loss"] = engine.maxshift
    engine.report["gmax"] = gmax
    engine.report["vres"] = engine.last_vres
    say(
        "matrix d=%d solved, m_eff=%d, loss=%d (%.1fs)"
        % (d, m_eff, engine.maxshift, time.time() - t0)
    )
    if plan.d > 900:
        # recombination is only ever asked of the small engines
        engine.kappa = None
    return engine


def _scale_blocks(scales):
    """Contiguous runs of equal scale, as (start, stop) pairs."""
    out = []
    a = 0
    for t in range(1, len(scales) + 1):
        if t == len(scales) or scales[t] != scales[a]:
            out.append((a, t))
            a = t
    return out


_ALPH = "0123456789abcdefghijklmnopqrstuvwxyz"


def _to_base(x, p):
    if x == 0:
        return "0"
    out = []
    while x:
        out.append(_ALPH[x % p])
        x //= p
    return "".join(reversed(out))


def _write_matrix(fh, ctx, arr, p):
    flat = ctx.to_ints(arr)
    for row in flat:
        fh.write(" ".join(_to_base(int(v), p) for v in row))
        fh.write("\n")


def _read_matrix(fh, ctx, nrows, ncols, p):
    out = []
    for _ in range(nrows):
        row = [int(tok, p) for tok in fh.readline().split()]
        assert len(row) == ncols
        out.append(row)
    return ctx.from_ints(out)


def write_engine(engine, path):
    """Serialize to header plus row-major base-p residue text."""
    pl = engine.plan
    ctx = engine.ctx
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(CACHE_FORMAT + "\n")
        fh.write(
            "%d %d %d %s %d %d %d\n"
            % (pl.p, pl.m, pl.N, pl.char.label, pl.k, engine.d, pl.hprime)
        )
        fh.write(
            "extra %d m_eff %d kappa %d fixtures %s\n"
            % (pl.extra, engine.m_eff, int(engine.kappa is not None),
               engine.fixtures_key or "-")
        )
        for name, vals in (
            ("pivots", engine.pivots),
            ("scales", engine.scales),
            ("layers", engine.layers),
            ("selcols", engine.selcols),
            ("exps", engine.exps),
            ("shifts", engine.shifts),
        ):
            fh.write(name + " " + " ".join(str(v) for v in vals) + "\n")
        _write_matrix(fh, ctx, engine.amat, pl.p)
        _write_matrix(fh, ctx, engine.ech_sel, pl.p)
        _write_matrix(fh, ctx, engine.tails, pl.p)
        if engine.kappa is not None:
            _write_matrix(fh, ctx, engine.kappa, pl.p)
    os.replace(tmp, path)


def read_engine(path, dims):
    """Rebuild an engine object from a cache file."""
    with open(path) as fh:
        line = fh.readline().strip()
        assert line == CACHE_FORMAT, "unknown cache format %r" % line
        p, m, N, charlabel, k, d, hprime = fh.readline().split()
        p, m, N, k, d, hprime = map(int, (p, m, N, k, d, hprime))
        meta = fh.readline().split()
        assert meta[0] == "extra" and meta[2] == "m_eff" and meta[4] == "kappa"
        extra, m_eff, has_kappa = int(meta[1]), int(meta[3]), int(meta[5])
        fixtures_key = meta[7] if meta[7] != "-" else ""
        plan = plan_engine(dims, p, m, N, charlabel, k, extra=extra)
        assert plan.d == d and plan.hprime == hprime, "cache does not match plan"
        fields = {}
        for name in ("pivots", "scales", "layers", "selcols", "exps", "shifts"):
            parts = fh.readline().split()
            assert parts[0] == name
            fields[name] = [int(v) for v in parts[1:]]
        ctx = LimbContext(p, plan.mprime)
        ncol = len(fields["selcols"])
        amat = _read_matrix(fh, ctx, d, d, p)
        ech_sel = _read_matrix(fh, ctx, d, ncol, p)
        tails = _read_matrix(fh, ctx, d, d, p)
        kappa = _read_matrix(fh, ctx, d, hprime, p) if has_kappa else None
    return KatzEngine(
        plan=plan,
        ctx=ctx,
        pivots=fields["pivots"],
        scales=fields["scales"],
        layers=fields["layers"],
        selcols=fields["selcols"],
        ech_sel=ech_sel,
        tails=tails,
        exps=fields["exps"],
        shifts=fields["shifts"],
        amat=amat,
        m_eff=m_eff,
        kappa=kappa,
        fixtures_key=fixtures_key,
    )


def cache_path(cache_dir, plan):
    name = "katz_N%d_%s_k%d_p%d_m%d.txt" % (
        plan.N,
        plan.char.label.replace(":", ""),
        plan.k,
        plan.p,
        plan.m,
    )
    return os.path.join(cache_dir, name)


def load_or_build(plan, dims, ingested=(), cache_dir=None, fixtures_key="",
                  progress=None):
    """Disk-cached engine: reuse a matching file or build and save one."""
    path = cache_path(cache_dir, plan) if cache_dir else None
    if path and os.path.exists(path):
        try:
            eng = read_engine(path, dims)
        except (AssertionError, ValueError, errors.PTripleError):
            eng = None
        if (
            eng is not None
            and eng.plan.mprime == plan.mprime
            and eng.fixtures_key == fixtures_key
            and eng.m_eff >= plan.m
        ):
            return eng
    eng = build_engine(plan, dims, ingested=ingested, progress=progress)
    eng.fixtures_key = fixtures_key
    if path:
        os.makedirs(cache_dir, exist_ok=True)
        eng.save(path)
    return eng
