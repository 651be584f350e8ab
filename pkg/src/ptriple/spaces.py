"""Bases of classical modular-form spaces by greedy unit-pivot echelon.

A space M_w(N, chi) is spanned by streaming candidates in a fixed order:
Eisenstein pool members of the exact weight, ingested cusp fixtures with
their V-shifts inside the level, products of weight-1/2 pool members
with lower-weight spaces, then space-times-space splits.  Accepted rows
are kept in reduced echelon form with pivot coefficient exactly 1.

When a residual is divisible by p across all columns it is divided out
before testing for a unit pivot: products of integral forms can span a
sublattice of finite p-power index, and by the q-expansion principle the
quotient of such a residual by p is again the expansion of an integral
form.  Each division costs one digit of working precision on that row,
so the per-row shift is recorded.

A basis remembers the accepted candidates (descriptors) in order; the
same construction replayed on longer expansions of the same candidates
makes the same decisions column by column, which is how bases are
re-materialized at a longer coefficient length.

Dimension targets come from the ingested dimension table; when an entry
is missing, rank stabilization (three consecutive candidates without
rank growth, with the working length past the Sturm bound) stands in.
"""

import numpy as np

from . import errors
from .characters import TRIVIAL, DirichletCharacter
from .eisenstein import eisenstein_pool
from .kron import series_mul


def prime_divisors(N):
    out, q, n = [], 2, N
    while q * q <= n:
        if n % q == 0:
            out.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        out.append(n)
    return out


def index_mu(N):
    """Index of Gamma_0(N) in the full modular group."""
    mu = N
    for q in prime_divisors(N):
        mu = mu // q * (q + 1)
    return mu


def sturm_bound(N, w):
    """Forms of weight w on Gamma_0(N) agreeing past this index agree."""
    return w * index_mu(N) // 12 + 1


class DimensionTable:
    """Rows `N <tab> charlabel <tab> weight <tab> dim`."""

    def __init__(self, entries=None):
        self.entries = dict(entries or {})

    @classmethod
    def load(cls, path):
        entries = {}
        with open(path) as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                N, charlabel, w, dim = line.split("\t")
                entries[(int(N), charlabel, int(w))] = int(dim)
        return cls(entries)

    def get(self, N, char, w):
        label = char.label if isinstance(char, DirichletCharacter) else char
        return self.entries.get((N, label, w))


class EchelonRows:
    """Strict unit-pivot echelon rows over Z/p^M with p-saturation.

    Adopted rows are immutable.  Each row carries a loss count: the top
    digits no longer trusted, accumulated from exact divisions by p and
    from reducing against rows that already carry loss.  A row with loss
    s is only valid modulo p^(M - s); try_add refuses any candidate whose
    loss would exceed max_loss, so junk digits can never reach a pivot.
    """

    def __init__(self, ctx, width, max_loss=None):
        self.ctx = ctx
        self.width = width
        self.max_loss = ctx.M // 2 if max_loss is None else max_loss
        assert 0 <= self.max_loss < ctx.M
        self.rows = []
        self.pivcols = []
        self.shifts = []

    @property
    def rank(self):
        return len(self.rows)

    @property
    def max_shift(self):
        return max(self.shifts, default=0)

    def _order(self):
        return sorted(range(self.rank), key=lambda i: self.pivcols[i])

    def adopt_unchecked(self, row, pivot, shift):
        """Install a row whose echelon facts are already known.

        The caller vouches that row leads at pivot with a unit coefficient
        and zeros to the left; rows adopted this way need not be reduced
        against each other.  Used for seeding a layer with rows inherited
        from an echelon one weight step down.
        """
        assert pivot not in self.pivcols
        assert shift <= self.max_loss
        self.rows.append(row)
        self.pivcols.append(pivot)
        self.shifts.append(shift)

    def reduce(self, cand):
        """Residual of cand against the rows, and the coefficients used."""
        ctx = self.ctx
        res = cand.copy()
        used = ctx.zeros((self.rank,))
        for i in self._order():
            co = res[self.pivcols[i]].copy()
            if co.any():
                res = ctx.sub(res, ctx.mul(co[None, :], self.rows[i]))
                used[i] = co
        return res, used

    def _inherited(self, used):
        """Loss inherited by reducing with the given row coefficients."""
        ctx = self.ctx
        worst = 0
        for i in range(self.rank):
            s = self.shifts[i]
            if s > worst and used[i].any():
                v = int(ctx.valuation(used[i][None, :])[0])
                worst = max(worst, s - min(v, s))
        return worst

    def try_add(self, cand, loss=0):
        """Adopt cand if its (saturated) residual leads with a unit.

        Returns (pivot column, loss) or None.  The stored row is only
        trusted modulo p^(M - loss).
        """
        ctx = self.ctx
        res, used = self.reduce(cand)
        loss = max(loss, self._inherited(used))
        while True:
            if loss > self.max_loss:
                return None
            nz = res.any(axis=-1)
            if not nz.any():
                return None
            lead = int(np.argmax(nz))
            if ctx.is_unit(res[lead][None, :]).all():
                break
            quot, rem = ctx.divmod_p(res)
            if rem.any():
                return None  # not saturable within this candidate
            loss += 1
            # the quotient can be nonzero at pivot columns again
            res, used = self.reduce(quot)
            loss = max(loss, self._inherited(used))
        inv = ctx.inv_unit(res[lead][None, :])[0]
        row = ctx.mul(inv[None, :], res)
        self.rows.append(row)
        self.pivcols.append(lead)
        self.shifts.append(loss)
        return lead, loss

    def packed(self):
        """Rows, pivots, and shifts in pivot-column order."""
        ctx = self.ctx
        order = self._order()
        if self.rows:
            rows = np.stack([self.rows[i] for i in order])
        else:
            rows = ctx.zeros((0, self.width))
        piv = [self.pivcols[i] for i in order]
        shifts = [self.shifts[i] for i in order]
        return rows, piv, shifts


class SpaceBasis:
    """Reduced echelon basis of M_w(N, chi) plus its build script.

    descs lists the adopted candidates in adoption order; adopt_pivots
    and adopt_shifts record the decision the builder made for each, so a
    replay at another length can be checked step by step.  rows/pivcols/
    shifts are the same data re-sorted by pivot column.
    """

    def __init__(self, N, char, weight, rows, pivcols, shifts, descs,
                 adopt_pivots, adopt_shifts, qprec):
        self.N = N
        self.char = char
        self.weight = weight
        self.rows = rows
        self.pivcols = pivcols
        self.shifts = shifts
        self.descs = descs
        self.adopt_pivots = adopt_pivots
        self.adopt_shifts = adopt_shifts
        self.qprec = qprec

    @property
    def dim(self):
        return self.rows.shape[0]

    @property
    def max_shift(self):
        return max(self.shifts, default=0)

    def __repr__(self):
        return "SpaceBasis(N=%d, %s, w=%d, dim=%d)" % (
            self.N, self.char.label, self.weight, self.dim,
        )


class SpaceCache:
    """Memoized space builder for one ambient level and working length.

    ingested: iterable of (label, QExpansion) cusp fixtures with at least
    the working length; sorted by label internally for determinism.
    """

    def __init__(self, ctx, N, qprec, dims, ingested=(), pool_factory=None,
                 max_pair_weight=2, max_loss=None):
        self.ctx = ctx
        self.max_loss = max_loss
        self.N = N
        self.qprec = qprec
        self.dims = dims
        self.ingested = sorted(ingested, key=lambda f: f[0])
        self._pools = {}
        self._memo = {}
        self._pool_factory = pool_factory or (
            lambda char, q: eisenstein_pool(
                self.ctx, self.N, char, q, max_pair_weight=max_pair_weight)
        )

    def pool_for_label(self, label, qprec=None):
        if qprec is not None and qprec != self.qprec:
            return self._pool_factory(DirichletCharacter(label), qprec)
        got = self._pools.get(label)
        if got is None:
            got = self._pool_factory(DirichletCharacter(label), self.qprec)
            self._pools[label] = got
        return got

    def _pool_labels(self, char):
        labels = ["trivial"]
        if not char.is_trivial:
            labels.append(char.label)
        return labels

    def _char_splits(self, char):
        if char.is_trivial:
            return [(TRIVIAL, TRIVIAL)]
        return [(TRIVIAL, char), (char, TRIVIAL)]

    def candidate_stream(self, char, w):
        """Yield (descriptor, coefficient row, prior loss) deterministically.

        The prior loss of a product is the worst loss of its factors: the
        product is only trusted to the precision its factors carry.
        """
        ctx = self.ctx
        # stage 0: pool singles of the exact weight and character
        for label in self._pool_labels(char):
            for i, f in enumerate(self.pool_for_label(label)):
                if f.weight == w and f.char == char:
                    yield ("pool", label, i), f.coeffs[: self.qprec], 0
        # stage 1: ingested cusp forms and their V-shifts
        for j, (_, qexp) in enumerate(self.ingested):
            if qexp.weight != w or qexp.char != char:
                continue
            d = 1
            while d * qexp.level <= self.N:
                if self.N % (d * qexp.level) == 0:
                    row = qexp.vp(d, out_len=self.qprec) if d > 1 else qexp
                    yield ("ingest", j, d), row.coeffs[: self.qprec], 0
                d += 1
        # stage 2: weight-1/2 pool members times lower spaces
        for label in self._pool_labels(char):
            for i, f in enumerate(self.pool_for_label(label)):
                if f.weight not in (1, 2) or f.weight >= w:
                    continue
                sub_char = f.char * char
                try:
                    sub = self.basis(sub_char, w - f.weight)
                except (errors.MissingDimensionEntry, errors.DimensionNotReached):
                    continue
                for r in range(sub.dim):
                    prod = series_mul(
                        ctx, f.coeffs[: self.qprec], sub.rows[r], self.qprec
                    )
                    desc = ("prodpool", label, i, sub_char.label, w - f.weight, r)
                    yield desc, prod, sub.shifts[r]
        # stage 3: space-times-space splits
        for w1 in range(2, w // 2 + 1):
            w2 = w - w1
            for c1, c2 in self._char_splits(char):
                try:
                    s1 = self.basis(c1, w1)
                    s2 = self.basis(c2, w2)
                except (errors.MissingDimensionEntry, errors.DimensionNotReached):
                    continue
                for r1 in range(s1.dim):
                    for r2 in range(s2.dim):
                        prod = series_mul(
                            ctx, s1.rows[r1], s2.rows[r2], self.qprec
                        )
                        desc = ("prodspace", c1.label, w1, r1, c2.label, w2, r2)
                        yield desc, prod, max(s1.shifts[r1], s2.shifts[r2])

    def basis(self, char, w):
        if isinstance(char, str):
            char = DirichletCharacter(char)
        key = (char.label, w)
        got = self._memo.get(key)
        if got is None:
            got = self._build(char, w)
            self._memo[key] = got
        return got

    def _constant_basis(self, char, qprec):
        if not char.is_trivial:
            return SpaceBasis(
                self.N, char, 0, self.ctx.zeros((0, qprec)), [], [], [],
                [], [], qprec,
            )
        row = self.ctx.zeros((1, qprec))
        row[0, 0] = self.ctx.from_int(1)
        return SpaceBasis(
            self.N, char, 0, row, [0], [0], [("one",)], [0], [0], qprec
        )

    def _build(self, char, w):
        ctx = self.ctx
        assert w >= 0
        if w == 0:
            return self._constant_basis(char, self.qprec)
        target = self.dims.get(self.N, char, w)
        ech = EchelonRows(ctx, self.qprec, self.max_loss)
        descs, adopt_pivots, adopt_shifts = [], [], []
        stall = 0
        for desc, row, prior in self.candidate_stream(char, w):
            if target is not None and ech.rank >= target:
                break
            got = ech.try_add(row, prior)
            if got is None:
                stall += 1
            else:
                stall = 0
                descs.append(desc)
                adopt_pivots.append(got[0])
                adopt_shifts.append(got[1])
            if target is None and stall >= 3 and ech.rank > 0:
                break
        if target is None:
            if self.qprec < sturm_bound(self.N, w) or stall < 3:
                raise errors.MissingDimensionEntry(
                    "no dimension entry for (N=%d, %s, w=%d) and "
                    "stabilization is inconclusive" % (self.N, char.label, w)
                )
        elif ech.rank < target:
            raise errors.DimensionNotReached(
                "spanned %d of %d dimensions of M_%d(%d, %s)"
                % (ech.rank, target, w, self.N, char.label)
            )
        rows, piv, shifts = ech.packed()
        return SpaceBasis(
            self.N, char, w, rows, piv, shifts, descs, adopt_pivots,
            adopt_shifts, self.qprec,
        )

    # -- re-materialization at another coefficient length -----------------

    def materialize(self, basis, qlong, long_ingested=None, memo=None):
        """Replay the build on qlong-length candidates; limbs (dim, qlong, L).

        long_ingested: list parallel to self.ingested with expansions of
        at least qlong coefficients (defaults to the build-time ones).
        Rows are only trusted modulo p^(M - shift) where basis.shifts
        records the per-row shift.
        """
        ctx = self.ctx
        memo = {} if memo is None else memo
        key = (basis.char.label, basis.weight)
        got = memo.get(key)
        if got is not None:
            return got
        if long_ingested is None:
            long_ingested = self.ingested
        pools = {}

        def pool_long(label):
            if label not in pools:
                pools[label] = self.pool_for_label(label, qprec=qlong)
            return pools[label]

        ech = EchelonRows(ctx, qlong, self.max_loss)
        for k, desc in enumerate(basis.descs):
            kind = desc[0]
            prior = 0
            if kind == "one":
                row = ctx.zeros((qlong,))
                row[0] = ctx.from_int(1)
            elif kind == "pool":
                _, label, i = desc
                row = pool_long(label)[i].coeffs[:qlong]
            elif kind == "ingest":
                _, j, d = desc
                q = long_ingested[j][1]
                row = (q.vp(d, out_len=qlong) if d > 1 else q).coeffs[:qlong]
            elif kind == "prodpool":
                _, label, i, clabel, w2, r = desc
                sub = self.basis(clabel, w2)
                sub_long = self.materialize(sub, qlong, long_ingested, memo)
                row = series_mul(
                    ctx, pool_long(label)[i].coeffs[:qlong], sub_long[r], qlong
                )
                prior = sub.shifts[r]
            elif kind == "prodspace":
                _, c1, w1, r1, c2, w2, r2 = desc
                s1 = self.basis(c1, w1)
                s2 = self.basis(c2, w2)
                l1 = self.materialize(s1, qlong, long_ingested, memo)
                l2 = self.materialize(s2, qlong, long_ingested, memo)
                row = series_mul(ctx, l1[r1], l2[r2], qlong)
                prior = max(s1.shifts[r1], s2.shifts[r2])
            else:  # pragma: no cover
                raise AssertionError("unknown descriptor %r" % (desc,))
            assert row.shape[0] == qlong
            got_add = ech.try_add(row, prior)
            # the replay must repeat the original decisions exactly
            assert got_add == (basis.adopt_pivots[k], basis.adopt_shifts[k])
        rows, piv, shifts = ech.packed()
        assert piv == basis.pivcols and shifts == basis.shifts
        head = min(qlong, basis.qprec)
        assert (rows[:, :head] == basis.rows[:, :head]).all()
        memo[key] = rows
        return rows


def complementary_space(cache, seed_rows, char, w, seed_shifts=None):
    """Extend seed echelon rows to a basis of M_w(N, chi); new rows only.

    seed_rows: (r, qprec, L) unit-pivot echelon rows lying inside the
    space, trusted modulo p^(M - seed_shifts[i]).  Returns
    (rows, pivcols, shifts) for the complement.
    """
    ctx = cache.ctx
    ech = EchelonRows(ctx, cache.qprec, cache.max_loss)
    seed_pivs = []
    for i in range(seed_rows.shape[0]):
        prior = 0 if seed_shifts is None else seed_shifts[i]
        added = ech.try_add(seed_rows[i], prior)
        assert added is not None, "seed rows are dependent"
        seed_pivs.append(added[0])
    full = cache.basis(char, w)
    target = cache.dims.get(cache.N, char, w)
    if target is None:
        target = full.dim
    for r in range(full.dim):
        if ech.rank >= target:
            break
        ech.try_add(full.rows[r], full.shifts[r])
    if ech.rank < target:
        raise errors.DimensionNotReached(
            "complement stalled at rank %d of %d" % (ech.rank, target)
        )
    rows_all, piv_all, shifts_all = ech.packed()
    keep = [i for i, c in enumerate(piv_all) if c not in set(seed_pivs)]
    assert len(keep) == target - seed_rows.shape[0]
    rows = rows_all[keep]
    return rows, [piv_all[i] for i in keep], [shifts_all[i] for i in keep]
