"""Valuations at primes of Q(zeta_M) above an unramified rational prime.

A prime P above p (p not dividing M) corresponds to a monic factor h of
Phi_M modulo p.  Lifting h to a factor modulo p^k identifies the completion
of Z[zeta_M] at P with Z_p[x]/(h) up to precision p^k, in which v_P is the
least p-adic valuation of the coordinates (P is unramified, so p is a
uniformizer).
"""

from __future__ import annotations

from dataclasses import dataclass

from sympy import ZZ, isprime
from sympy.polys.factortools import dup_zz_hensel_lift
from sympy.polys.galoistools import gf_factor_sqf

from .cyclotomic import CycNumber, LevelMismatch, cyclotomic_polynomial, euler_phi, _vp

__all__ = [
    "PrimeIdealData",
    "ValuationPrecisionError",
    "primes_above",
    "vP_element",
    "wP_series",
    "multiplicative_order",
]

INF = float("inf")
DEFAULT_LIFT = 8


class ValuationPrecisionError(ArithmeticError):
    """The valuation is at least the lift precision; a deeper lift is needed."""


def multiplicative_order(p, m):
    if m == 1:
        return 1
    x, f = p % m, 1
    while x != 1:
        x = x * p % m
        f += 1
    return f


@dataclass(frozen=True)
class PrimeIdealData:
    """A prime of Z[zeta_M] above p, with its factor h lifted modulo p^k.

    ``factor`` holds the coefficients of h, lowest degree first.
    """

    p: int
    M: int
    residue_degree: int
    factor: tuple
    lift_precision: int
    index: int = 0

    def residue_factor(self):
        return tuple(c % self.p for c in self.factor)

    def lifted(self, k):
        """The same prime with h lifted to modulus p^k."""
        for P in primes_above(self.p, self.M, k):
            if P.residue_factor() == self.residue_factor():
                return P
        raise AssertionError("conjugate factor lost while lifting")

    def __str__(self):
        return f"({self.p}, {_render_poly(self.residue_factor())})"


def _render_poly(coeffs):
    parts = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = coeffs[i]
        if not c:
            continue
        mono = "" if i == 0 else ("x" if i == 1 else f"x^{i}")
        body = str(c) if not mono else (mono if c == 1 else f"{c}*{mono}")
        parts.append(body)
    return " + ".join(parts) if parts else "0"


def primes_above(p, M, k=DEFAULT_LIFT):
    """All primes of Z[zeta_M] above p, factors Hensel-lifted modulo p^k."""
    if not isprime(p):
        raise ValueError(f"{p} is not prime")
    if M % p == 0:
        raise ValueError(f"p={p} divides M={M}; ramified primes are not supported")
    if k < 1:
        raise ValueError("lift precision must be positive")
    f = multiplicative_order(p, M)
    phi = list(reversed(cyclotomic_polynomial(M)))  # high -> low
    _, factors = gf_factor_sqf([ZZ(c % p) for c in phi], p, ZZ)
    if len(factors) != euler_phi(M) // f or any(len(h) - 1 != f for h in factors):
        raise AssertionError(f"unexpected factorization of Phi_{M} modulo {p}")
    if len(factors) == 1:
        lifted = [phi]
    else:
        lifted = dup_zz_hensel_lift(ZZ(p), [ZZ(c) for c in phi], factors, k, ZZ)
    mod = p ** k
    out = []
    for h in lifted:
        low = tuple(int(c) % mod for c in reversed(h))
        out.append((tuple(c % p for c in low), low))
    out.sort()
    return [PrimeIdealData(p, M, f, low, k, i) for i, (_, low) in enumerate(out)]


def _reduce_mod(coords, h, mod):
    """Remainder of an integer polynomial modulo the monic h, coefficients mod ``mod``."""
    c = [x % mod for x in coords]
    n = len(h) - 1
    for i in range(len(c) - 1, n - 1, -1):
        t = c[i]
        if t:
            for j in range(n + 1):
                c[i - n + j] = (c[i - n + j] - t * h[j]) % mod
    return c[:n] + [0] * max(0, n - len(c))


def vP_element(a, P, deepen=True):
    """v_P(a) for a in Q(zeta_M); infinity for zero.

    A valuation that reaches the lift precision raises
    ValuationPrecisionError unless ``deepen`` is set, in which case the lift
    is doubled until the answer is certified.
    """
    if not isinstance(a, CycNumber):
        a = CycNumber.from_rational(P.M, a)
    if a.level != P.M:
        raise LevelMismatch(f"element of level {a.level} at a prime of level {P.M}")
    if a.is_zero():
        return INF
    while True:
        mod = P.p ** P.lift_precision
        r = _reduce_mod(a.coords, P.factor, mod)
        nz = [x for x in r if x]
        if nz:
            return min(_vp(x, P.p) for x in nz) - _vp(a.denom, P.p)
        if not deepen:
            raise ValuationPrecisionError(
                f"valuation at {P} is at least {P.lift_precision}; lift deeper")
        P = P.lifted(2 * P.lift_precision)


def wP_series(g, P, deepen=True):
    """Least v_P over the stored coefficients of an integral series."""
    if g.coeff_level != P.M:
        g = g.promote(coeff_level=P.M) if P.M % g.coeff_level == 0 else None
        if g is None:
            raise LevelMismatch("coefficient level does not divide the prime's level")
    best = INF
    for _, c in g.items():
        if c.denom != 1:
            raise ValueError(f"coefficient {c} is not an algebraic integer")
        best = min(best, vP_element(c, P, deepen))
        if best == 0:
            break
    return best
