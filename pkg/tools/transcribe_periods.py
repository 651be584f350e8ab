"""Write fixtures/periods.tsv from the reference period values.

The weight-2 periods Omega = <omega, phi(omega)> below are reference
values (Frobenius pairing on the associated elliptic curve, (2,1) entry
of the Frobenius matrix on (dx/y, x dx/y)).  Each is unit * p^val with
the unit certified mod p^prec; the file stores the unit's base-p digits
least significant first so no decimal parsing happens at load time.

gen_periods.py recomputes these independently and adds the pairs the
reference list leaves out; run it after this script when regenerating.
"""

import os

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "fixtures", "periods.tsv")

# label, p, valuation, unit (decimal), relative precision (unit digits)
ROWS = [
    ("57.2.f", 5, 2,
     29505681199130962626561255838977599356333294679056282865324073514068, 98),
    ("57.2.g", 5, 1,
     -159133461381175901704339380528584168392746264473700984619726139435577, 99),
    ("57.2.h", 5, 2,
     78414893708965262061304860105818868793779659587029031834898206619639, 98),
    ("45.2.f0", 17, 1, 73740522216959426358743952636082111, 29),
    ("21.2.f0", 11, 1,
     412797842384875685536202567431940950593928402977097, 49),
]


def digits_of(u, p, n):
    u %= p ** n
    out = []
    for _ in range(n):
        out.append(str(u % p))
        u //= p
    return out


def main():
    lines = ["# label\tp\tvaluation\tunit-digits-base-p\tprec\n"]
    for label, p, val, unit, prec in ROWS:
        assert unit % p != 0
        lines.append("%s\t%d\t%d\t%s\t%d\n"
                     % (label, p, val, ",".join(digits_of(unit, p, prec)), prec))
    with open(OUT, "w") as fh:
        fh.writelines(lines)
    print("wrote %d periods" % len(ROWS))


if __name__ == "__main__":
    main()
