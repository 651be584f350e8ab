"""Dirichlet characters of order at most two.

Only the trivial character and real quadratic characters given by a
Kronecker symbol appear here; labels are "trivial" or "kronecker:D" with
D a fundamental discriminant.
"""

import gmpy2
import numpy as np

from . import errors

_FUND_OK_CACHE = {}


def _is_fundamental(D):
    if D == 1:
        return True
    if D % 4 == 1:
        return _squarefree(D)
    if D % 4 == 0:
        q = D // 4
        return q % 4 in (2, 3) and _squarefree(q)
    return False


def _squarefree(n):
    n = abs(n)
    if n == 0:
        return False
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True


class DirichletCharacter:
    """Real character; evaluates via the Kronecker symbol."""

    def __init__(self, label):
        if label == "trivial":
            self.label = label
            self.D = 1
            self.conductor = 1
            return
        if not label.startswith("kronecker:"):
            raise errors.UnsupportedCharacter("bad character label %r" % label)
        try:
            D = int(label.split(":", 1)[1])
        except ValueError:
            raise errors.UnsupportedCharacter("bad character label %r" % label)
        if D == 1 or not _is_fundamental(D):
            raise errors.UnsupportedCharacter(
                "%d is not a fundamental discriminant" % D
            )
        self.label = label
        self.D = D
        self.conductor = abs(D)

    @property
    def is_trivial(self):
        return self.D == 1

    @property
    def parity(self):
        """chi(-1): +1 even, -1 odd."""
        return 1 if self.D > 0 else -1

    def __call__(self, n):
        if self.is_trivial:
            return 1
        return int(gmpy2.kronecker(self.D, int(n)))

    def values(self, upto):
        """int64 array of chi(0..upto-1)."""
        if self.is_trivial:
            out = np.ones(upto, dtype=np.int64)
            if upto > 0:
                out[0] = 1
            return out
        return np.array(
            [int(gmpy2.kronecker(self.D, n)) for n in range(upto)],
            dtype=np.int64,
        )

    def __mul__(self, other):
        if self.is_trivial:
            return other
        if other.is_trivial:
            return self
        if self.D == other.D:
            return DirichletCharacter("trivial")
        raise errors.UnsupportedCharacter(
            "product of distinct quadratic characters %s, %s"
            % (self.label, other.label)
        )

    def __eq__(self, other):
        return isinstance(other, DirichletCharacter) and self.D == other.D

    def __hash__(self):
        return hash(self.D)

    def __repr__(self):
        return "DirichletCharacter(%r)" % self.label


TRIVIAL = DirichletCharacter("trivial")
