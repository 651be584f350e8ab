"""Fixed-modulus limb arithmetic on numpy arrays.

Values in Z/p^M are stored little-endian in base 2^15 across the trailing
axis of an int64 array, canonical range [0, p^M).  Products go through
exact float64 matrix multiplies: limbs are below 2^15, so every partial
product is below 2^30 and sums of up to 2^22 of them stay under 2^53,
where float64 addition is still exact.  Reduction is Barrett with
precomputed reciprocals.  Nothing here depends on BLAS thread count or
summation order, so results are bit-identical across runs.
"""

import numpy as np

BASE_BITS = 15
BASE = 1 << BASE_BITS
MASK = BASE - 1

# safe inner-dimension bound for one exact float64 accumulation
MAX_INNER = 1 << 22


def int_to_limbs(x, n):
    """Split a nonnegative int into n little-endian base-2^15 limbs."""
    assert x >= 0 and x >> (BASE_BITS * n) == 0
    out = np.zeros(n, dtype=np.int64)
    for i in range(n):
        out[i] = x & MASK
        x >>= BASE_BITS
    return out


def limbs_to_ints(arr):
    """Reassemble python ints from the trailing limb axis (object array)."""
    arr = np.asarray(arr)
    acc = np.zeros(arr.shape[:-1], dtype=object)
    for s in range(arr.shape[-1] - 1, -1, -1):
        acc = acc * BASE + arr[..., s].astype(object)
    return acc


def carry_normalize(planes, out_len):
    """Propagate carries in a plane stack; works for signed planes.

    planes[..., s] holds an int64 contribution at weight 2^(15s).  Returns
    clean limbs in [0, 2^15) of length out_len; the caller must size
    out_len so the final carry is zero (asserted).
    """
    planes = np.asarray(planes)
    out = np.zeros(planes.shape[:-1] + (out_len,), dtype=np.int64)
    carry = np.zeros(planes.shape[:-1], dtype=np.int64)
    s_in = planes.shape[-1]
    for s in range(out_len):
        cur = carry
        if s < s_in:
            cur = cur + planes[..., s]
        out[..., s] = cur & MASK
        carry = cur >> BASE_BITS
    assert not carry.any(), "carry out of range; out_len too small"
    return out


def _sub_with_borrow(a, b):
    """Clean-limb subtraction a - b; returns (diff limbs, borrow flag)."""
    n = a.shape[-1]
    assert b.shape[-1] == n
    out = np.empty_like(a)
    borrow = np.zeros(a.shape[:-1], dtype=np.int64)
    for s in range(n):
        d = a[..., s] - b[..., s] - borrow
        borrow = (d < 0).astype(np.int64)
        out[..., s] = d + (borrow << BASE_BITS)
    return out, borrow


class LimbContext:
    """Arithmetic mod p^M on limb arrays, with cached Barrett reciprocals."""

    def __init__(self, p, M):
        assert p >= 2 and M >= 1
        self.p = p
        self.M = M
        self.pM = p ** M
        self.nbits = self.pM.bit_length()
        self.L = (self.nbits + BASE_BITS - 1) // BASE_BITS
        self.pM_limbs = int_to_limbs(self.pM, self.L)
        self.nbytes = (self.nbits + 7) // 8
        self._mu = {}
        # 2^(15s) mod p for s = 0..(large enough); used by mod_small paths
        self._pow_cache = {}

    def __repr__(self):
        return "LimbContext(p=%d, M=%d)" % (self.p, self.M)

    # -- packing ---------------------------------------------------------

    def zeros(self, shape):
        if isinstance(shape, int):
            shape = (shape,)
        return np.zeros(tuple(shape) + (self.L,), dtype=np.int64)

    def from_int(self, x):
        return int_to_limbs(x % self.pM, self.L)

    def from_ints(self, values):
        """Pack an iterable (or nested lists) of ints; shape + (L,)."""
        arr = np.asarray(values, dtype=object)
        out = np.zeros(arr.shape + (self.L,), dtype=np.int64)
        flat = arr.reshape(-1)
        oflat = out.reshape(-1, self.L)
        for i, v in enumerate(flat):
            v = int(v) % self.pM
            for s in range(self.L):
                oflat[i, s] = v & MASK
                v >>= BASE_BITS
        return out

    def to_ints(self, arr):
        return limbs_to_ints(arr)

    # -- Barrett ---------------------------------------------------------

    def _mu_for(self, n_x):
        """Barrett reciprocal for inputs of n_x clean limbs."""
        got = self._mu.get(n_x)
        if got is None:
            K = BASE_BITS * n_x
            mu = (1 << K) // self.pM
            n_mu = max(1, (mu.bit_length() + BASE_BITS - 1) // BASE_BITS)
            got = (int_to_limbs(mu, n_mu), n_mu)
            self._mu[n_x] = got
        return got

    def _cond_sub_pM(self, x):
        """One conditional subtraction of p^M; x has >= L limbs, x < 2 p^M."""
        n = x.shape[-1]
        pM_pad = np.zeros(n, dtype=np.int64)
        pM_pad[: self.L] = self.pM_limbs
        diff, borrow = _sub_with_borrow(x, np.broadcast_to(pM_pad, x.shape))
        keep = (borrow == 1)[..., None]
        return np.where(keep, x, diff)

    def reduce_clean(self, x):
        """Reduce clean nonnegative limbs (..., n_x) to canonical (..., L)."""
        n_x = x.shape[-1]
        if n_x <= self.L:
            pad = np.zeros(x.shape[:-1] + (self.L,), dtype=np.int64)
            pad[..., :n_x] = x
            return self._cond_sub_pM(pad)[..., : self.L]
        mu, n_mu = self._mu_for(n_x)
        # q_hat = floor(x * mu / 2^(15 n_x)); error at most 1 below true
        prod = np.zeros(x.shape[:-1] + (n_x + n_mu,), dtype=np.int64)
        for j in range(n_mu):
            if mu[j] == 0:
                continue
            prod[..., j : j + n_x] += x * mu[j]
            # per-plane bound: n_mu terms of 2^30 each stays below 2^36
        clean = carry_normalize(prod, n_x + n_mu + 1)
        qhat = clean[..., n_x:]
        # r = x - qhat * p^M, then at most two conditional subtracts
        qn = np.zeros(x.shape[:-1] + (n_x + 1,), dtype=np.int64)
        for s in range(self.L):
            if self.pM_limbs[s] == 0:
                continue
            lim = n_x + 1 - s
            qn[..., s : s + min(qhat.shape[-1], lim)] += (
                qhat[..., :lim] * self.pM_limbs[s]
            )
        qn = carry_normalize(qn, n_x + 1)
        x_pad = np.zeros(x.shape[:-1] + (n_x + 1,), dtype=np.int64)
        x_pad[..., :n_x] = x
        r, borrow = _sub_with_borrow(x_pad, qn)
        assert not borrow.any(), "Barrett quotient overshot"
        r = self._cond_sub_pM(r)
        r = self._cond_sub_pM(r)
        assert not r[..., self.L :].any(), "Barrett remainder out of range"
        return np.ascontiguousarray(r[..., : self.L])

    def reduce_planes(self, planes):
        """Reduce a signed plane stack (entries |.| < 2^52) to canonical."""
        S = planes.shape[-1]
        # add p^M * 2^(15 (S+4)): dominates any negative value, is 0 mod p^M
        off = S + 4
        n_x = off + self.L
        buf = np.zeros(planes.shape[:-1] + (n_x,), dtype=np.int64)
        buf[..., :S] = planes
        buf[..., off : off + self.L] += self.pM_limbs
        clean = carry_normalize(buf, n_x + 1)
        return self.reduce_clean(clean)

    # -- ring operations -------------------------------------------------

    def add(self, a, b):
        s = carry_normalize(a + b, self.L + 1)
        return np.ascontiguousarray(self._cond_sub_pM(s)[..., : self.L])

    def sub(self, a, b):
        planes = a - b
        planes = planes + self.pM_limbs  # broadcast along trailing axis
        s = carry_normalize(planes, self.L + 1)
        return np.ascontiguousarray(self._cond_sub_pM(s)[..., : self.L])

    def neg(self, a):
        return self.sub(self.zeros(a.shape[:-1]), a)

    def mul(self, a, b):
        """Elementwise product; broadcasting on the leading axes."""
        a, b = np.broadcast_arrays(a, b)
        planes = np.zeros(a.shape[:-1] + (2 * self.L - 1,), dtype=np.int64)
        for i in range(self.L):
            for j in range(self.L):
                planes[..., i + j] += a[..., i] * b[..., j]
        return self.reduce_planes(planes)

    def mul_scalar(self, a, c):
        """Multiply by a python int scalar."""
        return self.mul(a, self.from_int(c))

    def matmul(self, a, b, col_block=4096):
        """Exact (n,k,L) x (k,m,L) -> (n,m,L) canonical matrix product."""
        n, k, L = a.shape
        k2, m, L2 = b.shape
        assert k == k2 and L == self.L and L2 == self.L
        assert k <= MAX_INNER
        out = np.empty((n, m, self.L), dtype=np.int64)
        for c0 in range(0, m, col_block):
            c1 = min(m, c0 + col_block)
            planes = np.zeros((n, c1 - c0, 2 * self.L - 1))
            for j in range(self.L):
                bf = b[:, c0:c1, j].astype(np.float64)
                for i in range(self.L):
                    af = a[:, :, i].astype(np.float64)
                    planes[:, :, i + j] += af @ bf
            out[:, c0:c1] = self.reduce_planes(planes.astype(np.int64))
        return out

    def accumulate_product(self, planes, a, b, sign=1):
        """Add sign * a @ b into an int64 plane stack (n, m, 2L-1).

        The caller owns the headroom budget: total accumulated magnitude
        per plane must stay below 2^52.
        """
        n, k, L = a.shape
        for j in range(self.L):
            bf = b[:, :, j].astype(np.float64)
            for i in range(self.L):
                af = a[:, :, i].astype(np.float64)
                prod = af @ bf
                if sign < 0:
                    planes[:, :, i + j] -= prod.astype(np.int64)
                else:
                    planes[:, :, i + j] += prod.astype(np.int64)

    # -- small-modulus views ---------------------------------------------

    def _pw(self, q):
        got = self._pow_cache.get(q)
        if got is None:
            got = np.array(
                [pow(BASE, s, q) for s in range(self.L)], dtype=np.int64
            )
            self._pow_cache[q] = got
        return got

    def mod_small(self, a, q):
        """Value mod q for q < 2^20, as plain int64 (exact for canonical a)."""
        assert 1 < q < 1 << 20
        pw = self._pw(q)
        return (a * pw).sum(axis=-1) % q

    def divmod_p(self, a):
        """Exact divmod by p: returns (a // p canonical, a mod p int64)."""
        q = np.zeros_like(a)
        r = np.zeros(a.shape[:-1], dtype=np.int64)
        for s in range(self.L - 1, -1, -1):
            cur = (r << BASE_BITS) + a[..., s]
            q[..., s] = cur // self.p
            r = cur - q[..., s] * self.p
        return q, r

    def valuation(self, a, cap=None):
        """p-adic valuation, entrywise; zero-to-precision maps to cap."""
        if cap is None:
            cap = self.M
        v = np.zeros(a.shape[:-1], dtype=np.int64)
        cur = a.copy()
        for _ in range(cap):
            zero = self.is_zero_view(cur)
            q, r = self.divmod_p(cur)
            step = (r == 0) & ~zero
            if not step.any():
                break
            v += step.astype(np.int64)
            cur = np.where(step[..., None], q, cur)
        v = np.where(self.is_zero_view(a), cap, v)
        return np.minimum(v, cap)

    def is_zero_view(self, a):
        return ~a.any(axis=-1)

    def is_unit(self, a):
        return self.mod_small(a, self.p) != 0

    def inv_unit(self, a):
        """Inverse of unit entries mod p^M by Hensel lifting."""
        a0 = self.mod_small(a, self.p)
        assert (a0 != 0).all(), "inverse of a non-unit"
        # inverse mod p by Fermat, via square-and-multiply on int64
        inv0 = np.ones_like(a0)
        base = a0 % self.p
        e = self.p - 2
        while e:
            if e & 1:
                inv0 = (inv0 * base) % self.p
            base = (base * base) % self.p
            e >>= 1
        x = self.from_ints(inv0.astype(object))
        two = self.from_int(2)
        steps = max(1, (self.M - 1).bit_length() + 1)
        for _ in range(steps):
            ax = self.mul(a, x)
            x = self.mul(x, self.sub(np.broadcast_to(two, ax.shape), ax))
        return x

    # -- byte packing for bulk storage ------------------------------------

    def pack_bytes(self, a):
        """Canonical limbs -> little-endian bytes, nbytes per element."""
        nb = self.nbytes
        out = np.zeros(a.shape[:-1] + (nb,), dtype=np.uint8)
        for b in range(nb):
            bit = 8 * b
            s, off = divmod(bit, BASE_BITS)
            v = a[..., s] >> off
            if s + 1 < self.L:
                v = v | (a[..., s + 1] << (BASE_BITS - off))
            out[..., b] = (v & 0xFF).astype(np.uint8)
        return out

    def unpack_bytes(self, packed):
        """Inverse of pack_bytes."""
        nb = self.nbytes
        assert packed.shape[-1] == nb
        out = np.zeros(packed.shape[:-1] + (self.L,), dtype=np.int64)
        for b in range(nb):
            v = packed[..., b].astype(np.int64)
            bit = 8 * b
            s, off = divmod(bit, BASE_BITS)
            out[..., s] |= (v << off) & MASK
            if off > BASE_BITS - 8 and s + 1 < self.L:
                out[..., s + 1] |= v >> (BASE_BITS - off)
        return out
