import pytest

from ptriple import errors
from ptriple.characters import TRIVIAL, DirichletCharacter


def test_trivial():
    assert TRIVIAL.is_trivial
    assert TRIVIAL(7) == 1 and TRIVIAL.parity == 1
    assert TRIVIAL.conductor == 1


def test_kronecker_minus11():
    chi = DirichletCharacter("kronecker:-11")
    assert chi.parity == -1
    assert chi.conductor == 11
    # squares mod 11 are {1,3,4,5,9}
    want = {1: 1, 2: -1, 3: 1, 4: 1, 5: 1, 6: -1, 7: -1, 8: -1, 9: 1, 10: -1, 11: 0}
    for n, v in want.items():
        assert chi(n) == v, n
    assert chi(23) == 1  # 23 = 11*2 + 1
    vals = chi.values(12)
    assert vals.tolist() == [0] + [want[n] for n in range(1, 12)]


def test_products():
    chi = DirichletCharacter("kronecker:-11")
    assert (chi * chi).is_trivial
    assert (chi * TRIVIAL).D == -11
    other = DirichletCharacter("kronecker:-3")
    with pytest.raises(errors.UnsupportedCharacter):
        chi * other


def test_bad_labels():
    for label in ("kronecker:9", "kronecker:1", "kronecker:45", "legendre:5", "x"):
        with pytest.raises(errors.UnsupportedCharacter):
            DirichletCharacter(label)


def test_fundamental_negatives():
    for D in (-3, -4, -8, -11, -15, -19, 5, 8, 12, 57):
        ch = DirichletCharacter("kronecker:%d" % D)
        assert ch.parity == (1 if D > 0 else -1)
