"""Truncated q-expansions over Z/p^M and the standard series operators.

A QExpansion owns qprec coefficients a_0..a_(qprec-1), canonical limb
arrays, plus weight / level / character metadata.  The metadata follows
the usual bookkeeping: products add weights and multiply characters,
the theta operator d = q d/dq adds 2 to the weight each time, V keeps
the tame level (the p-adic family viewpoint; stabilized forms still
carry their tame level here).
"""

import numpy as np

from . import errors
from .characters import TRIVIAL, DirichletCharacter
from .kron import series_mul

try:
    from math import lcm
except ImportError:  # pragma: no cover
    from math import gcd

    def lcm(a, b):
        return a * b // gcd(a, b)


class QExpansion:
    __slots__ = ("ctx", "coeffs", "weight", "level", "char")

    def __init__(self, ctx, coeffs, weight, level, char=TRIVIAL):
        if isinstance(char, str):
            char = DirichletCharacter(char)
        assert coeffs.ndim == 2 and coeffs.shape[1] == ctx.L
        self.ctx = ctx
        self.coeffs = coeffs
        self.weight = weight
        self.level = level
        self.char = char

    @classmethod
    def from_ints(cls, ctx, values, weight, level, char=TRIVIAL):
        return cls(ctx, ctx.from_ints(list(values)), weight, level, char)

    @property
    def qprec(self):
        return self.coeffs.shape[0]

    def coeff(self, n):
        """Coefficient a_n as a python int in [0, p^M)."""
        assert 0 <= n < self.qprec
        return int(self.ctx.to_ints(self.coeffs[n]))

    def to_ints(self):
        return self.ctx.to_ints(self.coeffs)

    def copy(self, coeffs=None, weight=None, level=None, char=None):
        return QExpansion(
            self.ctx,
            self.coeffs.copy() if coeffs is None else coeffs,
            self.weight if weight is None else weight,
            self.level if level is None else level,
            self.char if char is None else char,
        )

    def truncate(self, qprec):
        assert qprec <= self.qprec, "cannot extend a truncated series"
        return self.copy(coeffs=np.ascontiguousarray(self.coeffs[:qprec]))

    def __repr__(self):
        head = ", ".join(str(self.coeff(n)) for n in range(min(4, self.qprec)))
        return "QExpansion(w=%s, N=%d, %s; q^0..: %s...; qprec=%d)" % (
            self.weight,
            self.level,
            self.char.label,
            head,
            self.qprec,
        )

    # -- ring structure ----------------------------------------------------

    def _common(self, other):
        assert self.ctx is other.ctx, "mixed moduli"
        return min(self.qprec, other.qprec)

    def __add__(self, other):
        q = self._common(other)
        assert self.weight == other.weight and self.char == other.char
        return QExpansion(
            self.ctx,
            self.ctx.add(self.coeffs[:q], other.coeffs[:q]),
            self.weight,
            lcm(self.level, other.level),
            self.char,
        )

    def __sub__(self, other):
        q = self._common(other)
        assert self.weight == other.weight and self.char == other.char
        return QExpansion(
            self.ctx,
            self.ctx.sub(self.coeffs[:q], other.coeffs[:q]),
            self.weight,
            lcm(self.level, other.level),
            self.char,
        )

    def __mul__(self, other):
        if isinstance(other, int):
            return self.scale(other)
        q = self._common(other)
        return QExpansion(
            self.ctx,
            series_mul(self.ctx, self.coeffs[:q], other.coeffs[:q], q),
            self.weight + other.weight,
            lcm(self.level, other.level),
            self.char * other.char,
        )

    __rmul__ = __mul__

    def scale(self, c):
        return self.copy(coeffs=self.ctx.mul_scalar(self.coeffs, c))

    def inverse(self):
        """Multiplicative inverse; requires a unit constant term."""
        ctx = self.ctx
        a0 = self.coeffs[0]
        if not ctx.is_unit(a0[None, :]).all():
            raise errors.NonInvertibleSeries(
                "constant term has positive valuation"
            )
        q = self.qprec
        inv = ctx.inv_unit(a0[None, :])
        cur = 1
        while cur < q:
            cur = min(2 * cur, q)
            # x <- x (2 - a x), doubling correct length each pass
            ax = series_mul(ctx, self.coeffs[:cur], inv, cur)
            two_minus = ctx.sub(ctx.zeros((cur,)), ax)
            two_minus[0] = ctx.add(two_minus[0], ctx.from_int(2))
            inv = series_mul(ctx, inv, two_minus, cur)
        return QExpansion(
            ctx, inv, -self.weight, self.level, self.char
        )

    def __truediv__(self, other):
        return self * other.inverse()

    # -- operators ----------------------------------------------------------

    def up(self, p):
        """U_p: picks coefficients at indices divisible by p."""
        return self.copy(
            coeffs=np.ascontiguousarray(self.coeffs[::p])
        )

    def vp(self, p, out_len=None):
        """V_p: pushes a_n to index p n; tame level kept (see module doc)."""
        if out_len is None:
            out_len = (self.qprec - 1) * p + 1
        out = self.ctx.zeros((out_len,))
        src = self.coeffs[: (out_len - 1) // p + 1]
        out[:: p][: src.shape[0]] = src
        return self.copy(coeffs=out)

    def hecke_tp(self, p):
        """T_p = U_p + chi(p) p^(k-1) V_p at weight k."""
        k = self.weight
        assert k >= 1
        u = self.up(p)
        v = self.vp(p, out_len=u.qprec)
        return u + v.scale(self.char(p) * p ** (k - 1))

    def deplete(self, p):
        """f - V_p U_p f: kills every coefficient with index divisible by p."""
        out = self.coeffs.copy()
        out[::p] = 0
        return self.copy(coeffs=out)

    def is_depleted(self, p):
        return not self.coeffs[::p].any()

    def serre_d(self, power=1):
        """(q d/dq)^power; raises weight by 2 per application."""
        assert power >= 0
        ctx = self.ctx
        n = np.arange(self.qprec, dtype=object)
        mult = ctx.from_ints(pow_mod_vec(n, power, ctx.pM))
        return self.copy(
            coeffs=ctx.mul(self.coeffs, mult), weight=self.weight + 2 * power
        )

    def serre_d_inverse(self, p, power=1):
        """d^(-power) on a p-depleted series; NotDepleted otherwise."""
        assert power >= 1
        if not self.is_depleted(p):
            raise errors.NotDepleted(
                "d^-1 needs zero coefficients at indices divisible by %d" % p
            )
        ctx = self.ctx
        n = np.arange(self.qprec, dtype=np.int64)
        keep = (n % p) != 0
        keep[0] = False
        safe = np.where(keep, n, 1).astype(object)
        inv = ctx.inv_unit(ctx.from_ints(pow_mod_vec(safe, power, ctx.pM)))
        inv[~keep] = 0
        return self.copy(
            coeffs=ctx.mul(self.coeffs, inv), weight=self.weight - 2 * power
        )

    # -- comparisons ---------------------------------------------------------

    def agree_val(self, other, upto=None):
        """min over the first upto coefficients of val(a_n - b_n)."""
        q = self._common(other) if upto is None else upto
        diff = self.ctx.sub(self.coeffs[:q], other.coeffs[:q])
        return int(self.ctx.valuation(diff).min())

    def agrees_mod(self, other, e, upto=None):
        return self.agree_val(other, upto) >= e


def pow_mod_vec(values, power, mod):
    """Elementwise values**power mod `mod` on an object array."""
    out = np.empty(len(values), dtype=object)
    for i, v in enumerate(values):
        out[i] = pow(int(v), power, mod)
    return out
