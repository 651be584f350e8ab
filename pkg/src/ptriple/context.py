"""Scaled p-adic numbers and precision contexts.

A ScaledPadic is p^valuation * unit with the unit carried modulo
p^prec (relative precision).  Zero-to-precision is unit == 0: the value
is only known to vanish modulo p^valuation.  All L-values, eigenvalues
and periods move through this type so certified precision is explicit
at every step.
"""

from . import errors
from .limbs import LimbContext


def val_p(x, p, cap):
    """Valuation of a python int, capped; cap for x == 0."""
    if x == 0:
        return cap
    v = 0
    while v < cap and x % p == 0:
        x //= p
        v += 1
    return v


class ScaledPadic:
    __slots__ = ("p", "valuation", "unit", "prec")

    def __init__(self, p, valuation, unit, prec):
        assert prec >= 0
        self.p = p
        self.valuation = valuation
        self.prec = prec
        unit = unit % p**prec if prec > 0 else 0
        if unit == 0:
            # zero to precision: certified to vanish mod p^(valuation+prec)
            self.valuation = valuation + prec
            self.prec = 0
            self.unit = 0
        else:
            if unit % p == 0:
                raise ValueError("unit part is divisible by p; normalize first")
            self.unit = unit

    @classmethod
    def zero(cls, p, abs_prec):
        return cls(p, abs_prec, 0, 0)

    @classmethod
    def from_int(cls, p, x, abs_prec):
        """Value of an integer known exactly, certified mod p^abs_prec."""
        return cls.from_absolute(p, 0, x, abs_prec)

    @classmethod
    def from_absolute(cls, p, base_val, x, abs_prec):
        """p^base_val * x with x known mod p^(abs_prec - base_val)."""
        rel = abs_prec - base_val
        assert rel >= 0
        x %= p**rel if rel > 0 else 1
        w = val_p(x, p, rel)
        if w >= rel:
            return cls.zero(p, abs_prec)
        return cls(p, base_val + w, x // p**w, rel - w)

    @property
    def is_zero(self):
        return self.unit == 0

    @property
    def abs_prec(self):
        return self.valuation + self.prec

    def lift(self):
        """Smallest nonnegative representative p^valuation * unit."""
        if self.is_zero:
            return 0
        assert self.valuation >= 0, "lift of a negative-valuation value"
        return self.p**self.valuation * self.unit

    def with_prec(self, prec):
        if self.is_zero:
            return self
        return ScaledPadic(self.p, self.valuation, self.unit, min(self.prec, prec))

    def shift(self, k):
        """Multiply by p^k without touching the unit."""
        return ScaledPadic(self.p, self.valuation + k, self.unit, self.prec)

    def __neg__(self):
        if self.is_zero:
            return self
        return ScaledPadic(self.p, self.valuation, -self.unit, self.prec)

    def __add__(self, other):
        p = self.p
        assert other.p == p
        abs_prec = min(self.abs_prec, other.abs_prec)
        v0 = min(self.valuation, other.valuation)
        rel = abs_prec - v0
        if rel <= 0:
            return ScaledPadic.zero(p, abs_prec)
        x = self.unit * p ** (self.valuation - v0) + other.unit * p ** (
            other.valuation - v0
        )
        return ScaledPadic.from_absolute(p, v0, x, abs_prec)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        p = self.p
        assert other.p == p
        if self.is_zero or other.is_zero:
            return ScaledPadic.zero(p, self.valuation + other.valuation)
        return ScaledPadic(
            p,
            self.valuation + other.valuation,
            self.unit * other.unit,
            min(self.prec, other.prec),
        )

    def __truediv__(self, other):
        p = self.p
        assert other.p == p
        if other.is_zero:
            raise errors.PrecisionExhausted(
                "division by a value that is zero at working precision"
            )
        prec = min(self.prec, other.prec)
        if self.is_zero:
            return ScaledPadic.zero(p, self.valuation - other.valuation)
        inv = pow(other.unit, -1, p**prec)
        return ScaledPadic(
            p, self.valuation - other.valuation, self.unit * inv, prec
        )

    def equal_mod(self, other, e):
        """Agreement of the two values modulo p^e (certified digits only)."""
        cap = min(self.abs_prec, other.abs_prec)
        if e > cap:
            raise errors.PrecisionBelowRequested(
                "equality mod p^%d requested, only %d digits certified" % (e, cap)
            )
        return self.agreement_exponent(other) >= e

    def agreement_exponent(self, other):
        """Largest certified e with self == other mod p^e."""
        p = self.p
        assert other.p == p
        cap = min(self.abs_prec, other.abs_prec)
        diff = self - other
        if diff.is_zero:
            return diff.valuation  # == cap
        return min(diff.valuation, cap)

    def digits(self, n=None):
        """Base-p digits of the unit, least significant first."""
        if self.is_zero:
            return []
        n = self.prec if n is None else min(n, self.prec)
        u, out = self.unit, []
        for _ in range(n):
            out.append(u % self.p)
            u //= self.p
        return out

    def __repr__(self):
        if self.is_zero:
            return "O(%d^%d)" % (self.p, self.valuation)
        return "%d^%d * %d + O(%d^%d)" % (
            self.p,
            self.valuation,
            self.unit,
            self.p,
            self.abs_prec,
        )

    def __eq__(self, other):
        if not isinstance(other, ScaledPadic):
            return NotImplemented
        return (
            self.p == other.p
            and self.valuation == other.valuation
            and self.unit == other.unit
            and self.prec == other.prec
        )

    def __hash__(self):
        return hash((self.p, self.valuation, self.unit, self.prec))


def default_guard(m):
    return (m + 3) // 4 + 4


class PadicContext:
    """Precision plumbing for one run: target modulus p^m, working p^mw.

    extra = maxscale + guard digits absorb the scaling denominators that
    appear inside the basis matrix and the solver's divisions.
    """

    def __init__(self, p, m, extra=0):
        assert p >= 5, "odd primes below 5 are not supported"
        assert m >= 1
        self.p = p
        self.m = m
        self.extra = extra
        self.mw = m + extra
        self.work = LimbContext(p, self.mw)
        self.out = LimbContext(p, m)

    def __repr__(self):
        return "PadicContext(p=%d, m=%d, working=%d)" % (self.p, self.m, self.mw)

    def to_scaled(self, x, abs_prec=None):
        return ScaledPadic.from_int(
            self.p, int(x), self.m if abs_prec is None else abs_prec
        )


def hensel_unit_root(p, m, ap, c):
    """Split x^2 - ap x + c into (unit root, complement root).

    Requires ap to be a p-adic unit (ordinarity) and val(c) > 0 so the
    two roots have distinct valuations.  Returns ScaledPadics (alpha,
    beta) with alpha a unit mod p^m and beta = c / alpha.
    """
    ap, c = int(ap), int(c)
    if ap % p == 0:
        raise errors.NotOrdinary("a_p = %d is divisible by p = %d" % (ap, p))
    vc = val_p(c, p, m + 1)
    if vc == 0:
        raise errors.SplittingFailed(
            "constant term %d is a unit; roots are not slope-separated" % c
        )
    mod = p
    x = ap % p
    # Newton doubling on f(x) = x^2 - ap x + c; f'(x) is a unit near x0
    while mod < p**m:
        mod = min(mod * mod, p**m)
        fx = (x * x - ap * x + c) % mod
        fpx = (2 * x - ap) % mod
        x = (x - fx * pow(fpx, -1, mod)) % mod
    assert (x * x - ap * x + c) % p**m == 0
    assert x % p != 0
    alpha = ScaledPadic(p, 0, x, m)
    # beta = c / alpha: exact integer arithmetic on the unit parts
    c_unit = c // p**vc
    beta_unit = (c_unit * pow(x, -1, p**m)) % p**m
    beta = ScaledPadic(p, vc, beta_unit, m)
    return alpha, beta
