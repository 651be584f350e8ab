import numpy as np
import pytest

from ptriple import errors
from ptriple.limbs import LimbContext
from ptriple.qexp import QExpansion


def make(ctx, vals, weight=2, level=11, char="trivial"):
    return QExpansion.from_ints(ctx, vals, weight, level, char)


@pytest.fixture
def ctx():
    return LimbContext(5, 8)


def test_add_mul_metadata(ctx):
    f = make(ctx, [1, 2, 3, 4], weight=2)
    g = make(ctx, [5, 6, 7, 8, 9], weight=2)
    s = f + g
    assert s.qprec == 4
    assert s.to_ints().tolist() == [6, 8, 10, 12]
    h = f * g
    assert h.weight == 4
    assert h.qprec == 4
    assert h.coeff(0) == 5
    assert h.coeff(3) == (1 * 8 + 2 * 7 + 3 * 6 + 4 * 5) % ctx.pM


def test_scale_negative(ctx):
    f = make(ctx, [1, 2, 3])
    g = f.scale(-1)
    assert g.coeff(1) == ctx.pM - 2
    assert (2 * f).coeff(2) == 6


def test_inverse_and_division(ctx):
    f = make(ctx, [1, 7, 3, 0, 2, 9, 11, 4], weight=4)
    inv = f.inverse()
    assert inv.weight == -4
    one = f * inv
    assert one.coeff(0) == 1
    assert not one.coeffs[1:].any()
    g = make(ctx, [2, 1, 0, 5, 5, 1, 2, 8], weight=6)
    q = g / f
    assert q.weight == 2
    assert (q * f).agrees_mod(g, 8)


def test_inverse_requires_unit(ctx):
    f = make(ctx, [5, 1, 1])
    with pytest.raises(errors.NonInvertibleSeries):
        f.inverse()


def test_up_vp_deplete(ctx):
    vals = list(range(1, 26))
    f = make(ctx, vals)
    u = f.up(5)
    assert u.to_ints().tolist() == [1, 6, 11, 16, 21]
    v = u.vp(5, out_len=25)
    assert v.coeff(5) == 6 and v.coeff(4) == 0
    d = f.deplete(5)
    assert d.is_depleted(5)
    assert d.coeff(5) == 0 and d.coeff(6) == 7
    # U_p V_p = identity
    assert v.up(5).to_ints().tolist() == [1, 6, 11, 16, 21]


def test_hecke_tp(ctx):
    # T_p on a weight-2 series: a'_n = a_(pn) + chi(p) p a_(n/p)
    vals = list(range(2, 32))
    f = make(ctx, vals, weight=2)
    t = f.hecke_tp(5)
    assert t.qprec == 6
    for n in range(6):
        want = vals[5 * n] + (5 * vals[n // 5] if n % 5 == 0 and n > 0 else (5 * vals[0] if n == 0 else 0))
        # index 0: a_0 + p a_0 contribution only through V at index 0
        if n == 0:
            want = vals[0] + 5 * vals[0]
        assert t.coeff(n) == want % ctx.pM


def test_serre_d_and_inverse(ctx):
    vals = [0, 1, 2, 0, 4, 0, 6, 7, 8, 0, 10, 11]
    f = make(ctx, vals, weight=3)
    df = f.serre_d()
    assert df.weight == 5
    assert df.to_ints().tolist() == [(n * v) % ctx.pM for n, v in enumerate(vals)]
    d3 = f.serre_d(3)
    assert d3.coeff(2) == (8 * 2) % ctx.pM
    dep = f.deplete(5)
    back = dep.serre_d(2).serre_d_inverse(5, 2)
    assert back.agrees_mod(dep, 8)
    assert back.weight == dep.weight


def test_serre_d_inverse_requires_depleted(ctx):
    f = make(ctx, [0, 1, 2, 3, 4, 5, 6])
    with pytest.raises(errors.NotDepleted):
        f.serre_d_inverse(5)


def test_serre_d_inverse_values(ctx):
    f = make(ctx, [0, 1, 0, 3, 0, 0, 6], weight=2).deplete(5)
    g = f.serre_d_inverse(5, 1)
    assert g.weight == 0
    assert g.coeff(1) == 1
    assert g.coeff(3) == (3 * pow(3, -1, ctx.pM)) % ctx.pM
    assert g.coeff(6) == (6 * pow(6, -1, ctx.pM)) % ctx.pM
    assert g.coeff(5) == 0 and g.coeff(0) == 0


def test_truncate_and_agreement(ctx):
    f = make(ctx, [1, 2, 3, 4, 5])
    g = make(ctx, [1, 2, 3 + 5**6, 4, 5])
    assert f.agree_val(g) == 6
    assert f.agrees_mod(g, 6)
    assert not f.agrees_mod(g, 7)
    t = f.truncate(3)
    assert t.qprec == 3
    with pytest.raises(AssertionError):
        t.truncate(10)


def test_character_metadata():
    ctx = LimbContext(23, 5)
    f = QExpansion.from_ints(ctx, [1, 1], 7, 11, "kronecker:-11")
    g = QExpansion.from_ints(ctx, [1, 2], 7, 11, "kronecker:-11")
    prod = f * g
    assert prod.char.is_trivial
    assert prod.weight == 14
    h = prod * f
    assert h.char.label == "kronecker:-11"
