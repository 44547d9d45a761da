import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from modkron.cyclotomic import CycNumber
from modkron.jreduce import (
    JPolynomial,
    PrecisionError,
    ReductionError,
    char_poly_coefficients,
    elementary_symmetric,
    integrality_certificate,
    orbit,
    orbit_char_poly,
    reduce_to_j_polynomial,
)
from modkron.modforms import FrickeIndex, delta_tilde, eisenstein, j_expansion
from modkron.qseries import QSeries


def test_reduce_j_and_constants():
    j = j_expansion(10)
    poly, rem = reduce_to_j_polynomial(j)
    assert poly.integer_coefficients() == [0, 1] and not rem.terms
    assert str(reduce_to_j_polynomial(j - 744)[0]) == "j - 744"
    assert str(reduce_to_j_polynomial(QSeries.constant(744, 5))[0]) == "744"


@given(st.lists(st.integers(-10 ** 6, 10 ** 6), min_size=1, max_size=6))
def test_reduction_inverts_evaluation(coeffs):
    poly = JPolynomial(coeffs)
    series = poly.evaluate(j_expansion(12))
    back, rem = reduce_to_j_polynomial(series)
    assert back == poly
    assert not rem.terms


def test_remainder_is_reported():
    # E4 has no pole and is not constant: the remainder O(q) is returned
    poly, rem = reduce_to_j_polynomial(eisenstein(4, 6))
    assert str(poly) == "1" and rem.valuation() == 1


def test_fractional_exponents_are_rejected():
    with pytest.raises(ValueError):
        reduce_to_j_polynomial(QSeries({-1: 1}, 4, exp_denom=2))


def test_short_window_is_rejected():
    with pytest.raises(PrecisionError):
        reduce_to_j_polynomial(QSeries({-2: 1}, 0))


def test_elementary_symmetric_against_sympy():
    x = sympy.Symbol("x")
    vals = [3, -5, 7, 2]
    series = [QSeries.constant(v, 4) for v in vals]
    got = [1] + [s.terms.get(0, CycNumber.zero(1)).to_fraction() for s in elementary_symmetric(series)[1:]]
    ref = sympy.Poly(sympy.prod([x - v for v in vals]), x).all_coeffs()
    assert got == ref


@pytest.mark.parametrize("n,size", [(2, 3), (3, 4), (4, 6), (5, 12), (6, 12)])
def test_orbit_sizes(n, size):
    # primitive vectors of order n in (Z/n)^2, up to sign
    assert len(orbit(FrickeIndex(n, 0, 1))) == size


def test_level_two_certificate():
    polys = orbit_char_poly(FrickeIndex(2, 0, 1))
    assert len(polys) == 4 and polys[0] == JPolynomial([1])
    assert all(p.is_integral() and p.is_rational() for p in polys)
    assert [str(p) for p in polys] == [
        "1", "0", "-3*j^2 + 5184*j", "2*j^3 - 6912*j^2 + 5971968*j"]


@pytest.mark.parametrize("v", [FrickeIndex(3, 0, 1), FrickeIndex(4, 0, 1), FrickeIndex(6, 0, 1)])
def test_fricke_orbits_are_integral(v):
    polys = orbit_char_poly(v)
    assert all(p.is_integral() and p.is_rational() for p in polys)


def test_level_five_orbit_is_not_integral():
    # the (0, b)/5 functions carry 5-power denominators, so their orbit is only
    # integral away from 5
    polys = orbit_char_poly(FrickeIndex(5, 0, 1))
    dens = {c.denom for p in polys for c in p.coeffs}
    assert dens - {1} and all(sympy.factorint(d).keys() <= {5} for d in dens)


def test_j2_orbit_reproduces_phi2():
    j = j_expansion(40)
    cert = integrality_certificate("j(2tau)", [j.substitute_up(2), j.twist_shift(0, 2),
                                               j.twist_shift(1, 2)])
    assert cert.all_integral and cert.witness is None
    assert [p.integer_coefficients() for p in cert.char_poly] == [
        [1],
        [-162000, 1488, -1],
        [8748000000, 40773375, 1488],
        [-157464000000000, 8748000000, -162000, 1],
    ]
    assert cert.to_dict()["monic"]


def test_non_invariant_input_is_trapped():
    j = j_expansion(20)
    with pytest.raises(ReductionError):
        char_poly_coefficients([j.twist_shift(0, 2), j.twist_shift(1, 3)])
