"""Eisenstein series with exact rational constants reduced mod p^M.

Everything is built from Bernoulli data: level-1 E_k, the weight-2
quasimodular P = E_2 and its level-raising combinations P(q) - d P(q^d),
and the two-character families E_k^(psi,phi).  The normalizer for the
unit-root subspace, E_(p-1), is checked to be 1 mod p on construction.
"""

from fractions import Fraction

import numpy as np

from . import errors
from .characters import TRIVIAL, DirichletCharacter
from .qexp import QExpansion, pow_mod_vec


def bernoulli_numbers(upto):
    """B_0..B_upto as Fractions (B_1 = -1/2 convention)."""
    B = [Fraction(1)]
    for k in range(1, upto + 1):
        # from sum_{j=0}^{k} C(k+1, j) B_j = 0
        acc = sum(Fraction(c_binomial(k + 1, j)) * B[j] for j in range(k))
        B.append(-acc / (k + 1))
    return B


def c_binomial(n, k):
    out = 1
    for i in range(k):
        out = out * (n - i) // (i + 1)
    return out


def bernoulli_polynomial_at(k, a, f, B=None):
    """B_k(a/f) as an exact Fraction."""
    if B is None:
        B = bernoulli_numbers(k)
    x = Fraction(a, f)
    return sum(
        Fraction(c_binomial(k, j)) * B[j] * x ** (k - j) for j in range(k + 1)
    )


def generalized_bernoulli(k, char):
    """B_{k,chi} for a real character, exact."""
    f = char.conductor
    B = bernoulli_numbers(k)
    return Fraction(f) ** (k - 1) * sum(
        char(a) * bernoulli_polynomial_at(k, a, f, B) for a in range(1, f + 1)
    )


def fraction_mod(x, ctx):
    """Reduce an exact Fraction with p-unit denominator into Z/p^M."""
    num, den = x.numerator, x.denominator
    assert den % ctx.p != 0, "denominator not a p-adic unit"
    return num % ctx.pM * pow(den, -1, ctx.pM) % ctx.pM


def _sigma_sieve(ctx, power, qprec):
    """sigma_power(n) for n = 0..qprec-1 as canonical limbs; sigma(0) = 0."""
    dk = ctx.from_ints(pow_mod_vec(np.arange(qprec, dtype=object), power, ctx.pM))
    acc = np.zeros((qprec, ctx.L), dtype=np.int64)
    for d in range(1, qprec):
        acc[d::d] += dk[d]
    # at most sigma_0(n) < 2^9 terms of 2^15 each: safe, one reduction
    return ctx.reduce_planes(acc)


def e2_quasimodular(ctx, qprec):
    """P = 1 - 24 sum sigma_1(n) q^n (weight-2 quasimodular)."""
    sig = _sigma_sieve(ctx, 1, qprec)
    coeffs = ctx.mul_scalar(sig, -24)
    coeffs[0] = ctx.from_int(1)
    return QExpansion(ctx, coeffs, 2, 1, TRIVIAL)


def e2_level(ctx, d, qprec):
    """P(q) - d P(q^d): holomorphic, weight 2, level d."""
    assert d > 1
    P = e2_quasimodular(ctx, qprec)
    return QExpansion(
        ctx,
        ctx.sub(P.coeffs, P.vp(d, out_len=qprec).scale(d).coeffs),
        2,
        d,
        TRIVIAL,
    )


def eisenstein_level1(ctx, k, qprec):
    """E_k = 1 - (2k / B_k) sum sigma_(k-1)(n) q^n, even k >= 4."""
    assert k >= 4 and k % 2 == 0
    B = bernoulli_numbers(k)[k]
    c = fraction_mod(-Fraction(2 * k) / B, ctx)
    sig = _sigma_sieve(ctx, k - 1, qprec)
    coeffs = ctx.mul_scalar(sig, c)
    coeffs[0] = ctx.from_int(1)
    return QExpansion(ctx, coeffs, k, 1, TRIVIAL)


def eisenstein_normalizer(ctx, p, qprec):
    """E_(p-1) for the ambient prime; congruent to 1 mod p by construction."""
    e = eisenstein_level1(ctx, p - 1, qprec)
    ones = ctx.zeros((qprec,))
    ones[0] = ctx.from_int(1)
    resid = ctx.sub(e.coeffs, ones)
    assert (ctx.mod_small(resid, p) == 0).all(), "E_(p-1) is not 1 mod p"
    return e


def eisenstein_pair(ctx, k, psi, phi, qprec):
    """E_k^(psi,phi): two-character Eisenstein series, weight k >= 1.

    Normalized so a nonzero constant term equals 1.  Requires the parity
    psi(-1) phi(-1) = (-1)^k, otherwise the series vanishes identically.
    """
    assert k >= 1
    if psi.parity * phi.parity != (-1) ** k:
        raise errors.UnsupportedCharacter(
            "parity mismatch for E_%d^(%s,%s)" % (k, psi.label, phi.label)
        )
    psi_vals = psi.values(qprec)
    phi_vals = phi.values(qprec)
    dk = pow_mod_vec(np.arange(qprec, dtype=object), k - 1, ctx.pM)
    acc = np.zeros((qprec,), dtype=object)
    for d in range(1, qprec):
        if phi_vals[d] == 0:
            continue
        e = int(phi_vals[d]) * dk[d]
        for n in range(d, qprec, d):
            pv = psi_vals[n // d]
            if pv:
                acc[n] += pv * e
    if psi.is_trivial:
        c = fraction_mod(-Fraction(2 * k) / generalized_bernoulli(k, phi), ctx)
        packed = ctx.from_ints(
            [1] + [int(acc[n]) * c % ctx.pM for n in range(1, qprec)]
        )
    else:
        packed = ctx.from_ints([int(acc[n]) % ctx.pM for n in range(qprec)])
    level = psi.conductor * phi.conductor
    return QExpansion(ctx, packed, k, level, psi * phi)


def quadratic_characters_dividing(N):
    """Fundamental discriminants D != 1 with |D| dividing N."""
    out = []
    for d in range(2, N + 1):
        if N % d == 0:
            for D in (d, -d):
                ch = None
                try:
                    ch = DirichletCharacter("kronecker:%d" % D)
                except errors.UnsupportedCharacter:
                    continue
                out.append(ch)
    return out


def eisenstein_pool(ctx, N, char, qprec, p=None, max_pair_weight=2):
    """Candidate Eisenstein generators for level N with given character.

    Two-character series at weights 1 through max_pair_weight, weight-2
    level combinations, and level-1 E_4, E_6, all shifted by V_d whenever
    the shifted level still divides N.  Deterministically ordered.
    """
    if isinstance(char, str):
        char = DirichletCharacter(char)
    base = []
    # ordered (psi, phi) with psi * phi == char and level dividing N
    opairs = []
    seen = set()
    for ch in [TRIVIAL] + quadratic_characters_dividing(N):
        try:
            other = ch * char
        except errors.UnsupportedCharacter:
            continue
        for psi, phi in ((ch, other), (other, ch)):
            key = (psi.D, phi.D)
            lev = psi.conductor * phi.conductor
            if key in seen or lev > N or N % lev:
                continue
            seen.add(key)
            opairs.append((psi, phi))
    # weight 1 is symmetric in (psi, phi); higher weights are not
    done1 = set()
    for psi, phi in opairs:
        if psi.parity * phi.parity != -1:
            continue
        key = tuple(sorted((psi.D, phi.D)))
        if key in done1:
            continue
        done1.add(key)
        base.append(eisenstein_pair(ctx, 1, psi, phi, qprec))
    for k in range(2, max_pair_weight + 1):
        want = 1 if k % 2 == 0 else -1
        for psi, phi in opairs:
            if psi.is_trivial and phi.is_trivial:
                continue  # level-1 series handled separately
            if psi.parity * phi.parity != want:
                continue
            base.append(eisenstein_pair(ctx, k, psi, phi, qprec))
    # weight 2; the P(q) - d P(q^d) family spans its own V-shifts
    # (V_d of a member is (E2^(de) - E2^(d)) / d), so those are not shifted
    no_shift = []
    if char.is_trivial:
        for d in sorted(k for k in range(2, N + 1) if N % k == 0):
            no_shift.append(e2_level(ctx, d, qprec))
    # weight 4 and 6, level 1 (trivial character only)
    if char.is_trivial:
        base.append(eisenstein_level1(ctx, 4, qprec))
        base.append(eisenstein_level1(ctx, 6, qprec))
    # V_d shifts that stay inside level N
    out = list(no_shift)
    for f in base:
        out.append(f)
        d = 2
        while d * f.level <= N:
            if N % (d * f.level) == 0:
                shifted = f.vp(d, out_len=qprec)
                shifted.level = d * f.level
                out.append(shifted)
            d += 1
    out.sort(key=lambda f: (f.weight, f.level, f.char.label))
    return out
