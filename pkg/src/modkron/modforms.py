"""Built-in exact q-expansions: Delta, E4, E6, j, eta quotients, Fricke functions.

Precision arguments are exclusive upper bounds on the keys of the returned
series (exponents in units of 1/exp_denom).
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd

from .cyclotomic import CycNumber, euler_phi, reduce_mod_cyclotomic
from .qseries import QSeries

__all__ = [
    "J",
    "JInvariant",
    "FrickeIndex",
    "EtaQuotientSpec",
    "NamedForm",
    "parse_function",
    "euler_product",
    "delta_tilde",
    "eisenstein",
    "j_expansion",
    "weierstrass_p_expansion",
    "fricke_expansion",
    "eta_quotient_expansion",
]


@dataclass(frozen=True)
class FrickeIndex:
    """v = (a/N, b/N) modulo Z^2 and modulo sign.

    The stored pair is the lexicographically smaller of (a, b) and (-a, -b)
    reduced into [0, N).
    """

    N: int
    a: int
    b: int

    def __post_init__(self):
        N = self.N
        if N < 2:
            raise ValueError("Fricke level must be at least 2")
        a, b = self.a % N, self.b % N
        if a == 0 and b == 0:
            raise ValueError(f"({self.a}, {self.b}) is zero modulo {N}")
        a, b = min((a, b), ((-a) % N, (-b) % N))
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def level(self):
        return self.N

    def act(self, alpha):
        """Row vector times matrix: the index of f_v o alpha."""
        p, q, r, s = alpha
        return FrickeIndex(self.N, self.a * p + self.b * r, self.a * q + self.b * s)

    def galois(self, d):
        """Index of f_v under sigma_{N,d}, i.e. v * diag(1, d)."""
        if gcd(d, self.N) != 1:
            raise ValueError(f"d={d} is not coprime to N={self.N}")
        return FrickeIndex(self.N, self.a, self.b * d)

    def expand(self, precision):
        return fricke_expansion(self, precision)

    def __str__(self):
        return f"fricke({self.N},{self.a},{self.b})"


class JInvariant:
    """The j-function as a level-one subject; every SL2(Z) and Galois action fixes it."""

    level = 1

    def act(self, alpha):
        return self

    def galois(self, d):
        return self

    def expand(self, precision):
        return j_expansion(precision)

    def __eq__(self, other):
        return isinstance(other, JInvariant)

    def __hash__(self):
        return hash("j")

    def __str__(self):
        return "j"


J = JInvariant()


@dataclass(frozen=True)
class EtaQuotientSpec:
    """prod eta(m tau)^e over the (m, e) pairs, expanded in q^(1/N).

    N defaults to the denominator of the leading exponent.
    """

    factors: tuple
    N: int = 0

    def __post_init__(self):
        factors = tuple((int(m), int(e)) for m, e in self.factors)
        if not factors:
            raise ValueError("empty eta quotient")
        if any(m < 1 for m, _ in factors):
            raise ValueError("eta arguments must be positive")
        object.__setattr__(self, "factors", factors)
        n = self.N or self.leading_exponent().denominator
        if (self.leading_exponent() * n).denominator != 1:
            raise ValueError(
                f"leading exponent {self.leading_exponent()} is not in (1/{n})Z")
        object.__setattr__(self, "N", n)

    def weight(self):
        return Fraction(sum(e for _, e in self.factors), 2)

    def leading_exponent(self):
        return Fraction(sum(m * e for m, e in self.factors), 24)

    @property
    def level(self):
        return self.N

    def act(self, alpha):
        if tuple(alpha) not in ((1, 0, 0, 1), (-1, 0, 0, -1)):
            raise ValueError("eta quotients are only expanded at the cusp infinity")
        return self

    def galois(self, d):
        return self

    def expand(self, precision):
        return eta_quotient_expansion(self, precision, self.N)

    def __str__(self):
        return "eta(" + " * ".join(f"{m}^{e}" for m, e in self.factors) + ")"


class NamedForm:
    """Delta, E4 or E6: expandable level-one forms that are not modular functions."""

    level = 1

    def __init__(self, name):
        if name not in _NAMED:
            raise ValueError(f"unknown form {name!r}")
        self.name = name

    def expand(self, precision):
        return _NAMED[self.name](precision)

    def act(self, alpha):
        raise ValueError(f"{self.name} has nonzero weight; only its expansion is available")

    galois = act

    def __eq__(self, other):
        return isinstance(other, NamedForm) and other.name == self.name

    def __hash__(self):
        return hash(("form", self.name))

    def __str__(self):
        return self.name


def _window(series_fn, first):
    def expand(precision):
        if precision <= first:
            return QSeries({}, precision, low=precision)
        return series_fn(precision)
    return expand


_NAMED = {
    "delta": _window(lambda prec: delta_tilde(prec), 1),
    "E4": _window(lambda prec: eisenstein(4, prec), 0),
    "E6": _window(lambda prec: eisenstein(6, prec), 0),
}

_FRICKE_RE = re.compile(r"^fricke\(\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*\)$")
_ETA_RE = re.compile(r"^eta\((.*)\)$")
_ETA_FACTOR_RE = re.compile(r"^(\d+)\s*(?:\^\s*(-?\d+))?$")


def parse_function(text):
    """Parse ``j``, ``delta``, ``E4``, ``E6``, ``fricke(N,a,b)`` or ``eta(m^e * ...)``."""
    t = text.strip()
    if t == "j":
        return J
    if t in _NAMED:
        return NamedForm(t)
    m = _FRICKE_RE.match(t)
    if m:
        return FrickeIndex(*(int(x) for x in m.groups()))
    m = _ETA_RE.match(t)
    if m:
        factors = []
        for part in m.group(1).split("*"):
            fm = _ETA_FACTOR_RE.match(part.strip())
            if not fm:
                raise ValueError(f"bad eta factor {part.strip()!r} in {text!r}")
            factors.append((int(fm.group(1)), int(fm.group(2) or 1)))
        return EtaQuotientSpec(tuple(factors))
    raise ValueError(f"unknown function {text!r}")


# ---------------------------------------------------------------------------
# level one

@lru_cache(maxsize=32)
def _euler_coeffs(prec):
    # pentagonal number theorem
    c = [0] * prec
    k = 0
    while True:
        done = True
        for kk in ((k, -k) if k else (0,)):
            g = kk * (3 * kk - 1) // 2
            if g < prec:
                c[g] += -1 if kk % 2 else 1
                done = False
        if done and k:
            break
        k += 1
    return tuple(c)


def euler_product(prec):
    """prod_{n >= 1} (1 - q^n) on the window [0, prec)."""
    c = _euler_coeffs(prec)
    return QSeries({n: x for n, x in enumerate(c) if x}, prec, low=0)


@lru_cache(maxsize=16)
def delta_tilde(precision):
    """q prod (1 - q^n)^24 on [1, precision)."""
    if precision < 1:
        raise ValueError("precision must be at least 1")
    p24 = euler_product(max(precision - 1, 0)) ** 24 if precision > 1 else None
    if p24 is None:
        return QSeries({}, 1, low=1)
    return QSeries({n + 1: c for n, c in p24.terms.items()}, precision, low=1)


def _divisor_power_sums(k, prec):
    s = [0] * prec
    for d in range(1, prec):
        dk = d ** k
        for m in range(d, prec, d):
            s[m] += dk
    return s


@lru_cache(maxsize=16)
def eisenstein(k, precision):
    """E_4 = 1 + 240 sum sigma_3(n) q^n and E_6 = 1 - 504 sum sigma_5(n) q^n."""
    const = {4: 240, 6: -504}.get(k)
    if const is None:
        raise ValueError("only E4 and E6 are provided")
    if precision < 1:
        raise ValueError("precision must be at least 1")
    s = _divisor_power_sums(k - 1, precision)
    terms = {0: 1}
    for n in range(1, precision):
        terms[n] = const * s[n]
    return QSeries(terms, precision, low=0)


@lru_cache(maxsize=16)
def j_expansion(precision):
    """j = E4^3 / Delta on [-1, precision)."""
    if precision < 0:
        raise ValueError("precision must be at least 0")
    e4 = eisenstein(4, precision + 1)
    j = e4 ** 3 / delta_tilde(precision + 2)
    return j.truncate(precision)


@lru_cache(maxsize=16)
def _e4e6_over_delta(precision):
    """E4 E6 / Delta on [-1, precision) (integer coefficients)."""
    e = eisenstein(4, precision + 1) * eisenstein(6, precision + 1)
    return (e / delta_tilde(precision + 2)).truncate(precision)


# ---------------------------------------------------------------------------
# Weierstrass P and Fricke functions

def _weierstrass_p_raw(N, a, b, precision):
    """(2 pi i)^-2 P(a/N tau + b/N; [tau, 1]) as a series in q^(1/N), 0 <= a < N."""
    if not 0 <= a < N:
        raise ValueError("a must lie in [0, N)")
    acc = {}

    def add(key, power, value):
        if key >= precision:
            return
        row = acc.get(key)
        if row is None:
            row = acc[key] = [0] * N
        row[power % N] += value

    if a:
        for m in range(1, (precision - 1) // a + 1):
            add(a * m, b * m, m)
    n = 1
    while n * N - a < precision:
        for m in range(1, (precision - 1) // (n * N - a) + 1):
            add(m * (n * N + a), b * m, m)
            add(m * (n * N - a), -b * m, m)
            add(m * n * N, 0, -2 * m)
        n += 1
    terms = {}
    for key, row in acc.items():
        c = CycNumber(N, reduce_mod_cyclotomic(row, N))
        if not c.is_zero():
            terms[key] = c
    const = CycNumber.from_rational(N, Fraction(1, 12))
    if a == 0:
        w = CycNumber.zeta(N, b)
        const = const + w / (1 - w) ** 2
    if precision > 0:
        terms[0] = terms[0] + const if 0 in terms else const
    return QSeries(terms, precision, low=min(0, precision), exp_denom=N, coeff_level=N)


def weierstrass_p_expansion(v, precision):
    return _weierstrass_p_raw(v.N, v.a, v.b, precision)


_fricke_cache = {}
_fricke_lock = threading.Lock()


def fricke_expansion(v, precision):
    """f_v = 12 (E4 E6 / Delta) P_v as a series in q^(1/N) on [-N, precision).

    Memoized per index; a request below a cached precision is served by
    truncation.
    """
    key = (v.N, v.a, v.b)
    with _fricke_lock:
        hit = _fricke_cache.get(key)
    if hit is not None and hit.prec >= precision:
        return hit.truncate(precision)
    N = v.N
    # E4E6/Delta has pole -N in these units, P starts at 0
    q_prec = -(-precision // N)
    base = _e4e6_over_delta(q_prec).promote(N, N)
    pser = _weierstrass_p_raw(N, v.a, v.b, precision + N)
    f = (base * pser * 12).truncate(precision)
    with _fricke_lock:
        old = _fricke_cache.get(key)
        if old is None or old.prec < f.prec:
            _fricke_cache[key] = f
    return f


# ---------------------------------------------------------------------------
# eta quotients

def eta_quotient_expansion(spec, precision, exp_denom=1):
    """prod eta(m tau)^e as a series in q^(1/exp_denom) on [lead, precision)."""
    if spec.weight() != 0:
        raise ValueError(f"{spec} has weight {spec.weight()}, not 0")
    lead = spec.leading_exponent() * exp_denom
    if lead.denominator != 1:
        raise ValueError(
            f"leading exponent {spec.leading_exponent()} is not in (1/{exp_denom})Z")
    lead = int(lead)
    rel = precision - lead  # relative window in key units
    if rel <= 0:
        return QSeries({}, precision, low=precision, exp_denom=exp_denom)
    q_rel = -(-rel // exp_denom)
    out = QSeries.constant(1, q_rel)
    for m, e in spec.factors:
        if e == 0:
            continue
        base = euler_product(-(-q_rel // m)).substitute_up(m)
        base = base.promote(1) if base.exp_denom == 1 else base
        out = out * base ** e
    out = out.promote(exp_denom)
    return QSeries({n + lead: c for n, c in out.terms.items() if n + lead < precision},
                   precision, low=lead, exp_denom=exp_denom)
