"""Generate the weight-7 CM newform fixture at level 11 (character kronecker:-11).

The form is the theta lift of the sixth power of the canonical Grossencharacter
of Q(sqrt(-11)) (class number 1, units +-1).  With w = (1 + sqrt(-11))/2 the
ring of integers is Z[w], w^2 = w - 3, and the norm form is
Q(x,y) = x^2 + xy + 3y^2.  Then

    a_n = (1/2) * sum over Q(x,y) = n of (x + y w)^6,

which is rational because the lattice sum pairs conjugates.  All arithmetic
is exact integer arithmetic in the (u, v) coordinates of u + v w.
"""

import os
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "fixtures", "newforms")

LABEL = "11.7.f"
LENGTH = 8900
PREFIX = {1: 1, 3: 10, 4: 64, 5: 74, 9: -629, 11: -1331}


def power6(x, y):
    """(u, v) with (x + y w)^6 = u + v w, w^2 = w - 3."""
    u, v = 1, 0
    for _ in range(6):
        u, v = u * x - 3 * v * y, u * y + v * x + v * y
    return u, v


def lattice_sums(length):
    su = [0] * (length + 1)
    sv = [0] * (length + 1)
    ybound = int((4 * length / 11) ** 0.5) + 2
    for y in range(-ybound, ybound + 1):
        # x^2 + xy + 3y^2 <= length
        disc = y * y - 4 * (3 * y * y - length)
        if disc < 0:
            continue
        r = int(disc ** 0.5) + 2
        for x in range((-y - r) // 2 - 2, (-y + r) // 2 + 3):
            n = x * x + x * y + 3 * y * y
            if 1 <= n <= length:
                u, v = power6(x, y)
                su[n] += u
                sv[n] += v
    return su, sv


def main():
    su, sv = lattice_sums(LENGTH)
    a = [0] * (LENGTH + 1)
    for n in range(1, LENGTH + 1):
        assert sv[n] == 0, "lattice sum not rational at %d" % n
        assert su[n] % 2 == 0
        a[n] = su[n] // 2
    for n, want in PREFIX.items():
        assert a[n] == want, (n, a[n], want)
    # eigenform sanity: split prime recursion a_9 = a_3^2 - chi(3) 3^6
    assert a[9] == a[3] * a[3] - 729
    # multiplicativity spot checks
    assert a[15] == a[3] * a[5] and a[55] == a[5] * a[11]
    assert a[2] == 0 and a[7] == 0 and a[13] == 0  # inert primes
    os.makedirs(OUT, exist_ok=True)
    with open(os.path.join(OUT, LABEL + ".tsv"), "w") as fh:
        fh.write("%s\t11\t7\tkronecker:-11\n" % LABEL)
        for n in range(1, LENGTH + 1):
            fh.write("%d\t%d\n" % (n, a[n]))
    with open(os.path.join(OUT, "prefixes.tsv"), "a") as fh:
        fh.write("%s\t11\t7\tkronecker:-11\t%s\n"
                 % (LABEL, ",".join(str(a[n]) for n in range(1, 12))))
    print("%s: %d coefficients, a_3=%d a_1331-check=%d" % (LABEL, LENGTH, a[3], a[11]))


if __name__ == "__main__":
    sys.exit(main())
