"""Generate fixtures/dims.tsv: dimensions of M_w(N, chi).

Trivial character: the standard genus / elliptic-point / cusp-count
formulas for Gamma_0(N).  The kronecker:-11 rows at N = 11 come from the
odd-weight dimension formula at prime level; both elliptic correction
terms vanish there because -1 and -3 are non-squares mod 11, leaving
dim M_w = w for odd w >= 3 (w - 2 cuspidal plus two Eisenstein series).

Run from the repository root: python3 tools/gen_dims.py
"""

import os


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


def kron_sym(a, p):
    """Legendre symbol for odd prime p."""
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def gcd(a, b):
    while b:
        a, b = b, a % b
    return a


def phi(n):
    out = n
    for q in prime_divisors(n):
        out = out // q * (q - 1)
    return out


def gamma0_invariants(N):
    """(mu, nu2, nu3, nu_inf, genus) for Gamma_0(N)."""
    mu = N
    for q in prime_divisors(N):
        mu = mu // q * (q + 1)
    if N % 4 == 0:
        nu2 = 0
    else:
        nu2 = 1
        for q in prime_divisors(N):
            nu2 *= 1 + (1 if q == 2 else kron_sym(-1, q))
    if N % 9 == 0:
        nu3 = 0
    else:
        nu3 = 1
        for q in prime_divisors(N):
            nu3 *= 1 + (-1 if q == 2 else kron_sym(-3, q))
    nu_inf = sum(phi(gcd(d, N // d)) for d in range(1, N + 1) if N % d == 0)
    g12 = 12 + mu - 3 * nu2 - 4 * nu3 - 6 * nu_inf
    assert g12 % 12 == 0
    g = g12 // 12
    return mu, nu2, nu3, nu_inf, g


def dim_m_gamma0(N, w):
    """dim M_w(Gamma_0(N)), trivial character."""
    if w < 0 or w % 2 == 1:
        return 0
    if w == 0:
        return 1
    mu, nu2, nu3, nu_inf, g = gamma0_invariants(N)
    if w == 2:
        return g + nu_inf - 1
    s = (w - 1) * (g - 1) + (w // 4) * nu2 + (w // 3) * nu3
    s += (w // 2 - 1) * nu_inf
    return s + nu_inf


def dim_m_11_chi(w):
    """dim M_w(11, kronecker:-11); odd character, so even weights vanish."""
    if w % 2 == 0 or w < 1:
        return 0
    if w == 1:
        return 1  # the single weight-1 Eisenstein series
    return w  # (w - 2) cusp forms + 2 Eisenstein series


def main():
    # anchors for the invariants
    assert gamma0_invariants(1) == (1, 1, 1, 1, 0)
    assert gamma0_invariants(11)[4] == 1
    assert gamma0_invariants(21)[4] == 1
    assert gamma0_invariants(45) == (72, 0, 0, 8, 3)
    assert gamma0_invariants(57)[4] == 5
    # anchors for the dimensions
    assert dim_m_gamma0(1, 12) == 2
    assert dim_m_gamma0(1, 4) == 1
    assert dim_m_gamma0(1, 2) == 0
    assert dim_m_gamma0(11, 2) == 2
    assert dim_m_gamma0(21, 2) == 4
    assert dim_m_gamma0(45, 2) == 10
    assert dim_m_gamma0(57, 2) == 8
    assert dim_m_gamma0(45, 4) == 22
    # the engine sizes the rest of the code base expects
    assert dim_m_gamma0(57, 122) == 808
    assert dim_m_gamma0(45, 180) == 1078
    assert dim_m_gamma0(45, 212) == 1270
    assert dim_m_gamma0(45, 210) == 1258
    assert dim_m_gamma0(21, 142) == 378
    assert dim_m_gamma0(21, 146) == 388
    assert dim_m_gamma0(11, 288) == 288
    assert dim_m_11_chi(293) == 293

    levels = [1, 5, 7, 11, 15, 19, 21, 23, 45, 57]
    top = 300
    root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
    out_path = os.path.join(root, "fixtures", "dims.tsv")
    os.makedirs(os.path.dirname(out_path), exist_ok=True)
    with open(out_path, "w") as fh:
        fh.write("# N\tcharlabel\tweight\tdim\n")
        for N in levels:
            for w in range(1, top + 1):
                fh.write("%d\ttrivial\t%d\t%d\n" % (N, w, dim_m_gamma0(N, w)))
        for w in range(1, top + 1):
            fh.write("11\tkronecker:-11\t%d\t%d\n" % (w, dim_m_11_chi(w)))
    print("wrote", out_path)


if __name__ == "__main__":
    main()
