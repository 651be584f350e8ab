"""Power-series multiplication mod p^M by Kronecker substitution.

Coefficient vectors are packed into one big integer with a byte-aligned
slot per coefficient, wide enough that convolution sums cannot cross slot
boundaries; one gmp multiply then does the whole convolution exactly.
This is the only series-multiplication path in the package, so ladder
builds and bracket evaluations all funnel through here.
"""

import gmpy2
import numpy as np

from .limbs import BASE_BITS, MASK, carry_normalize

_HAS_FROM_BYTES = hasattr(gmpy2.mpz(0), "from_bytes") or hasattr(
    gmpy2, "from_bytes"
)


def _mpz_from_bytes(buf):
    try:
        return gmpy2.mpz.from_bytes(buf, "little")
    except AttributeError:
        return gmpy2.mpz(int.from_bytes(buf, "little"))


def _mpz_to_bytes(x, length):
    try:
        return x.to_bytes(length, "little")
    except (AttributeError, TypeError):
        return int(x).to_bytes(length, "little")


def _slot_bytes(ctx, la, lb):
    terms = max(1, min(la, lb))
    w_bits = 2 * ctx.nbits + terms.bit_length() + 1
    return (w_bits + 7) // 8


def _pack(ctx, coeffs, w8):
    n = coeffs.shape[0]
    buf = np.zeros((n, w8), dtype=np.uint8)
    buf[:, : ctx.nbytes] = ctx.pack_bytes(coeffs)
    return _mpz_from_bytes(buf.tobytes())


def _unpack(ctx, x, n_slots, w8):
    nb = n_slots * w8
    x = x & ((gmpy2.mpz(1) << (8 * nb)) - 1)  # drop slots past n_slots
    raw = np.frombuffer(_mpz_to_bytes(x, nb), dtype=np.uint8).reshape(
        n_slots, w8
    )
    n_planes = (8 * w8) // BASE_BITS + 2
    planes = np.zeros((n_slots, n_planes), dtype=np.int64)
    for b in range(w8):
        v = raw[:, b].astype(np.int64)
        s, off = divmod(8 * b, BASE_BITS)
        planes[:, s] += (v << off) & MASK
        planes[:, s + 1] += v >> (BASE_BITS - off)
    clean = carry_normalize(planes, n_planes + 1)
    return ctx.reduce_clean(clean)


def series_mul(ctx, a, b, out_len=None):
    """Convolution of canonical coefficient arrays (la, L) x (lb, L).

    Returns out_len coefficients (default la + lb - 1), zero-padded past
    the support of the product.
    """
    la, lb = a.shape[0], b.shape[0]
    if out_len is None:
        out_len = la + lb - 1
    if la == 0 or lb == 0:
        return ctx.zeros((out_len,))
    # no need to convolve tails that cannot reach out_len
    la_eff, lb_eff = min(la, out_len), min(lb, out_len)
    w8 = _slot_bytes(ctx, la_eff, lb_eff)
    xa = _pack(ctx, a[:la_eff], w8)
    xb = _pack(ctx, b[:lb_eff], w8)
    full = la_eff + lb_eff - 1
    prod = _unpack(ctx, xa * xb, min(full, out_len), w8)
    if prod.shape[0] < out_len:
        pad = ctx.zeros((out_len,))
        pad[: prod.shape[0]] = prod
        return pad
    return prod


def series_square(ctx, a, out_len=None):
    return series_mul(ctx, a, a, out_len)
