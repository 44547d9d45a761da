from fractions import Fraction

import mpmath as mp
import pytest
from sympy import divisor_sigma

from modkron.modforms import (
    EtaQuotientSpec,
    FrickeIndex,
    J,
    NamedForm,
    delta_tilde,
    eisenstein,
    eta_quotient_expansion,
    fricke_expansion,
    j_expansion,
    parse_function,
    weierstrass_p_expansion,
)
from modkron.qseries import QSeries
from modkron.transform import Matrix

mp.mp.dps = 40


# --- oracles -------------------------------------------------------------

def brute_product(factors, prec):
    """prod (1 - q^n)^e over (n-multiplier m, e) factors by repeated multiplication."""
    c = [0] * prec
    c[0] = 1
    for m, e in factors:
        for n in range(1, prec):
            step = m * n
            if step >= prec:
                break
            for _ in range(abs(e)):
                if e > 0:
                    for k in range(prec - 1, step - 1, -1):
                        c[k] -= c[k - step]
                else:
                    for k in range(step, prec):
                        c[k] += c[k - step]
    return c


def wp(z, tau):
    """Weierstrass P for the lattice [tau, 1] through Jacobi theta functions."""
    qn = mp.exp(1j * mp.pi * tau)
    t2, t3 = mp.jtheta(2, 0, qn), mp.jtheta(3, 0, qn)
    ratio = mp.jtheta(4, mp.pi * z, qn) / mp.jtheta(1, mp.pi * z, qn)
    return (mp.pi * t2 * t3 * ratio) ** 2 - mp.pi ** 2 / 3 * (t2 ** 4 + t3 ** 4)


def fricke_direct(v, tau):
    """-2^7 3^5 g2 g3 / Delta * P(v1 tau + v2), invariants from half-period values."""
    e1, e2, e3 = wp(mp.mpf(1) / 2, tau), wp(tau / 2, tau), wp((1 + tau) / 2, tau)
    g2 = 2 * (e1 ** 2 + e2 ** 2 + e3 ** 2)
    g3 = 4 * e1 * e2 * e3
    disc = g2 ** 3 - 27 * g3 ** 2
    z = mp.mpf(v.a) / v.N * tau + mp.mpf(v.b) / v.N
    return -2 ** 7 * 3 ** 5 * g2 * g3 / disc * wp(z, tau)


def series_value(s, tau):
    z = mp.exp(2j * mp.pi / s.coeff_level)
    total = 0
    for n, c in s.items():
        val = sum(x * z ** k for k, x in enumerate(c.coords)) / c.denom
        total += val * mp.exp(2j * mp.pi * n * tau / s.exp_denom)
    return total


def moebius(alpha, tau):
    a, b, c, d = alpha
    return (a * tau + b) / (c * tau + d)


# --- level one -----------------------------------------------------------

def test_delta_tilde_against_brute_product():
    ref = brute_product([(1, 24)], 40)
    d = delta_tilde(41)
    assert d.low == 1
    assert [d[n + 1].to_fraction() for n in range(40)] == ref
    assert d[2] == -24 and d[3] == 252


def test_delta_tilde_small_window():
    d = delta_tilde(2)
    assert d.terms == {1: 1} and d.prec == 2


def test_eisenstein_against_divisor_sums():
    e4, e6 = eisenstein(4, 30), eisenstein(6, 30)
    assert e4[0] == 1 and e6[0] == 1
    for n in range(1, 30):
        assert e4[n] == 240 * int(divisor_sigma(n, 3))
        assert e6[n] == -504 * int(divisor_sigma(n, 5))


def test_normalization_lock():
    prec = 100
    e4, e6 = eisenstein(4, prec), eisenstein(6, prec)
    lhs = e4 ** 3 - e6 ** 2
    rhs = delta_tilde(prec) * 1728
    assert lhs.truncate(prec).terms == rhs.terms


def test_j_times_delta_is_e4_cubed():
    prec = 60
    j = j_expansion(prec)
    lhs = (j * delta_tilde(prec + 2)).truncate(prec)
    assert lhs.terms == (eisenstein(4, prec) ** 3).truncate(prec).terms


def test_j_golden_coefficients():
    j = j_expansion(3)
    assert [j[n] for n in (-1, 0, 1, 2)] == [1, 744, 196884, 21493760]
    assert j.is_integral() and j.is_rational()


def test_j_numerically():
    tau = mp.mpc(0.21, 0.93)
    qn = mp.exp(1j * mp.pi * tau)
    t2, t3, t4 = (mp.jtheta(k, 0, qn) for k in (2, 3, 4))
    ref = 32 * (t2 ** 8 + t3 ** 8 + t4 ** 8) ** 3 / (t2 * t3 * t4) ** 8
    assert abs(series_value(j_expansion(80), tau) - ref) < mp.mpf(10) ** -25 * abs(ref)


# --- Weierstrass P and Fricke functions --------------------------------------

def test_wp_constant_term_at_half():
    s = weierstrass_p_expansion(FrickeIndex(2, 0, 1), 10)
    assert s[0].to_fraction() == Fraction(-1, 6)
    assert s.is_rational()


def test_index_is_canonical_mod_sign():
    for n in (2, 3, 5, 6):
        for a in range(n):
            for b in range(n):
                if (a, b) == (0, 0):
                    continue
                v, w = FrickeIndex(n, a, b), FrickeIndex(n, -a, -b)
                assert v == w
                assert fricke_expansion(v, 4 * n) == fricke_expansion(w, 4 * n)
    with pytest.raises(ValueError):
        FrickeIndex(4, 4, 8)


def test_three_functions_at_level_two():
    idx = {FrickeIndex(2, a, b) for a in range(2) for b in range(2) if (a, b) != (0, 0)}
    assert len(idx) == 3
    assert all(fricke_expansion(v, 20).is_rational() for v in idx)


@pytest.mark.parametrize("v", [FrickeIndex(2, 0, 1), FrickeIndex(2, 1, 1), FrickeIndex(3, 1, 0),
                               FrickeIndex(3, 1, 2), FrickeIndex(4, 0, 1), FrickeIndex(4, 1, 3),
                               FrickeIndex(5, 2, 3), FrickeIndex(6, 1, 4)])
def test_fricke_normalization_against_theta_oracle(v):
    tau = mp.mpc(0.13, 1.05)
    ref = fricke_direct(v, tau)
    got = series_value(fricke_expansion(v, 60 * v.N), tau)
    assert abs(got - ref) < mp.mpf(10) ** -25 * abs(ref)


@pytest.mark.parametrize("alpha", [(0, -1, 1, 0), (1, 1, 0, 1), (2, 1, 1, 1), (1, 0, 3, 1),
                                   (3, -1, 4, -1)])
@pytest.mark.parametrize("v", [FrickeIndex(3, 1, 0), FrickeIndex(4, 0, 1), FrickeIndex(5, 1, 2)])
def test_action_matches_composition_numerically(v, alpha):
    # f_v(alpha tau) = f_{v alpha}(tau); tau keeps both points high and avoids
    # the elliptic points, where g3 and hence f_v vanish
    assert Matrix(*alpha).det() == 1
    a, b, c, d = alpha
    tau = mp.mpc(0.17 - d, 1) / c if c else mp.mpc(0.1, 1.1)
    lhs = series_value(fricke_expansion(v, 200 * v.N), moebius(alpha, tau))
    rhs = series_value(fricke_expansion(v.act(alpha), 200 * v.N), tau)
    assert abs(lhs - rhs) < mp.mpf(10) ** -25 * abs(lhs)


def test_galois_index_matches_coefficient_conjugation():
    for v, d in [(FrickeIndex(5, 1, 2), 2), (FrickeIndex(5, 0, 1), 3), (FrickeIndex(4, 1, 1), 3)]:
        lhs = fricke_expansion(v, 30).galois_on_coeffs(d)
        assert lhs == fricke_expansion(v.galois(d), 30)


def test_pole_order_at_infinity():
    for v in (FrickeIndex(3, 1, 1), FrickeIndex(5, 0, 2), FrickeIndex(6, 1, 0)):
        assert fricke_expansion(v, 10).valuation() >= -v.N


def test_fricke_leading_coefficient_denominator_at_level_five():
    # f_{(0,1)/5} is only integral away from 5
    c = fricke_expansion(FrickeIndex(5, 0, 1), 1)[-5]
    assert c.denom == 5


def test_fricke_cache_truncates():
    v = FrickeIndex(3, 1, 1)
    big = fricke_expansion(v, 60)
    small = fricke_expansion(v, 12)
    assert small.prec == 12 and big.truncate(12).terms == small.terms


# --- eta quotients ---------------------------------------------------------

def test_eta_quotient_against_brute_product():
    s = eta_quotient_expansion(EtaQuotientSpec(((2, 24), (1, -24))), 30)
    ref = brute_product([(2, 24), (1, -24)], 29)
    assert [s[n + 1].to_fraction() for n in range(29)] == ref
    assert [s[n] for n in (1, 2, 3)] == [1, 24, 300]


def test_eta_trivial_quotients():
    assert eta_quotient_expansion(EtaQuotientSpec(((1, 24), (1, -24))), 10).terms == {0: 1}
    up = EtaQuotientSpec(((2, 24), (1, -24))).expand(12)
    down = EtaQuotientSpec(((1, 24), (2, -24))).expand(10)
    assert (up * down).tightened().terms == {0: 1}


def test_eta_rejections():
    with pytest.raises(ValueError):
        EtaQuotientSpec(((1, 1),)).expand(5)  # weight 1/2
    with pytest.raises(ValueError):
        EtaQuotientSpec(((1, -1), (2, 1)), N=2)  # exponent 1/24
    assert EtaQuotientSpec(((1, -1), (2, 1))).N == 24


# --- the function vocabulary -------------------------------------------------

def test_parse_function_vocabulary():
    assert parse_function("j") is J
    assert parse_function(" fricke(4, 1, 3) ") == FrickeIndex(4, 1, 3)
    assert parse_function("eta(2^24 * 1^-24)") == EtaQuotientSpec(((2, 24), (1, -24)))
    assert parse_function("eta(4 * 2^-1)").factors == ((4, 1), (2, -1))
    assert isinstance(parse_function("E6"), NamedForm)
    assert parse_function("delta").expand(3).terms == {1: 1, 2: -24}
    for bad in ("k", "fricke(3,1)", "eta(2^x)", ""):
        with pytest.raises(ValueError):
            parse_function(bad)
