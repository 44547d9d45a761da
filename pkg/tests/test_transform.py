import itertools
from math import gcd

import mpmath as mp
import pytest
from hypothesis import given
from hypothesis import strategies as st

from modkron.modforms import FrickeIndex, J, j_expansion
from modkron.transform import (
    IDENTITY,
    Matrix,
    coset_representatives,
    cusp_expansion_fp,
    cusp_expansion_galois_operand,
    decompose,
    fricke_sl2_action,
    sample_cosets,
    sl2_order,
)

from test_modforms import fricke_direct, moebius, series_value

mp.mp.dps = 40


@st.composite
def sl2z(draw, bound=40):
    c, d = draw(st.integers(-bound, bound)), draw(st.integers(-bound, bound))
    g = gcd(c, d)
    c, d = (c // g, d // g) if g else (0, 1)
    # a d - b c = 1 via extended Euclid, then shift by a multiple of (c, d)
    g, x, y = _egcd(d, c)
    a, b = x, -y
    s = draw(st.integers(-3, 3))
    return Matrix(a + s * c, b + s * d, c, d)


def _egcd(x, y):
    if y == 0:
        return (x, 1, 0) if x >= 0 else (-x, -1, 0)
    g, s, t = _egcd(y, x % y)
    return g, t, s - (x // y) * t


def brute_sl2(m):
    return [t for t in itertools.product(range(m), repeat=4)
            if (t[0] * t[3] - t[1] * t[2]) % m == 1 % m]


@pytest.mark.parametrize("m", range(1, 9))
def test_sl2_order_matches_enumeration(m):
    assert sl2_order(m) == len(brute_sl2(m))


@pytest.mark.parametrize("m", [2, 3, 4, 6, 10])
def test_coset_representatives_are_complete(m):
    reps = coset_representatives(m)
    assert reps[0] == IDENTITY
    assert all(r.det() == 1 for r in reps)
    residues = {r.mod(m) for r in reps}
    assert len(residues) == len(reps) == sl2_order(m)
    assert residues == {Matrix(*t) for t in brute_sl2(m)}


def test_sample_cosets():
    s = sample_cosets(55, 64, seed=7, p=11)
    assert s[0] == IDENTITY and len(s) == 65
    assert len({x.mod(55) for x in s}) == 65
    assert all(x.det() == 1 for x in s)
    assert any(x.a % 11 == 0 for x in s) and any(x.a % 11 for x in s[1:])
    assert s == sample_cosets(55, 64, seed=7, p=11)
    assert s != sample_cosets(55, 64, seed=8, p=11)


@given(sl2z(), st.sampled_from([2, 3, 5, 7, 11]))
def test_decomposition_identity(alpha, p):
    # [1 0; 0 p] alpha = gamma [p 0; 0 1]   or   gamma' [1 k; 0 p]
    case, gamma, k = decompose(alpha, p)
    lhs = Matrix(alpha.a, alpha.b, p * alpha.c, p * alpha.d)
    assert gamma.det() == 1
    if case == "up":
        assert alpha.a % p == 0
        assert gamma @ Matrix(p, 0, 0, 1) == lhs
    else:
        assert alpha.a % p and 0 <= k < p
        assert gamma @ Matrix(1, k, 0, p) == lhs


@given(sl2z(), st.integers(2, 12), st.integers(0, 11), st.integers(0, 11))
def test_action_is_a_right_action(alpha, n, a, b):
    if (a % n, b % n) == (0, 0):
        return
    v = FrickeIndex(n, a, b)
    beta = Matrix(1, 1, 0, 1)
    assert fricke_sl2_action(fricke_sl2_action(v, alpha), beta) == fricke_sl2_action(v, alpha @ beta)


def test_action_rejects_non_unimodular():
    with pytest.raises(ValueError):
        fricke_sl2_action(FrickeIndex(3, 1, 0), (2, 0, 0, 1))


@pytest.mark.parametrize("v,p,alpha", [
    (FrickeIndex(3, 1, 0), 2, (1, 0, 0, 1)),
    (FrickeIndex(3, 1, 0), 2, (2, 1, 1, 1)),     # p | a
    (FrickeIndex(3, 1, 0), 2, (1, 1, 1, 2)),     # p does not divide a
    (FrickeIndex(4, 0, 1), 3, (3, 2, 1, 1)),
    (FrickeIndex(4, 0, 1), 3, (2, 1, 1, 1)),
    (FrickeIndex(5, 1, 2), 11, (0, -1, 1, 0)),
    (FrickeIndex(5, 1, 2), 11, (1, 3, 0, 1)),
])
def test_cusp_expansion_against_direct_evaluation(v, p, alpha):
    # the series of f_p o alpha at tau equals f((alpha tau)/p)
    tau = mp.mpc(0.31, 0.9) if alpha[2] == 0 else mp.mpc(0.23 - alpha[3], 1) / alpha[2]
    series = cusp_expansion_fp(v, alpha, p, 100 * v.N * p)
    assert series.exp_denom == v.N * p
    with mp.workdps(100):
        ref = fricke_direct(v, moebius(alpha, tau) / p)
        assert abs(series_value(series, tau) - ref) < mp.mpf(10) ** -30 * abs(ref)


def test_cusp_expansion_of_j():
    j = j_expansion(30)
    up = cusp_expansion_fp(J, (2, 1, 1, 1), 2, 60)
    assert up.normalized() == j.substitute_up(2).truncate(30)
    tw = cusp_expansion_fp(J, (1, 1, 0, 1), 2, 30)
    assert tw.agrees_with(j.twist_shift(1, 2))


def test_hypothesis_is_enforced():
    with pytest.raises(ValueError):
        cusp_expansion_fp(FrickeIndex(5, 0, 1), IDENTITY, 3, 10)
    cusp_expansion_fp(FrickeIndex(5, 0, 1), IDENTITY, 3, 10, check=False)


def test_galois_operand_index():
    # Galois first, then the matrix: v diag(1, p) alpha
    v, p, alpha = FrickeIndex(5, 1, 2), 19, Matrix(2, 1, 1, 1)
    s = cusp_expansion_galois_operand(v, alpha, p, 95)
    ref = v.galois(p).act(alpha).expand(5).promote(95)
    assert s == ref
