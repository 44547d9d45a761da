"""SL2(Z) actions on subjects and the cusp expansions of f_p o alpha.

For alpha = [a b; c d] in SL2(Z) and a prime p, the function
tau -> f((a tau + b) / (p (c tau + d))) is rewritten through a unimodular
matrix:

* p | a:  f_p o alpha = (f o [a/p, b; c, p d])(p tau)
* p ∤ a:  f_p o alpha = f o [a, (b - a k)/p; p c, d - c k] o [1 k; 0 p]
          with k the least nonnegative solution of a k = b (mod p)
"""

from __future__ import annotations

import random
from math import gcd
from typing import NamedTuple

from sympy import factorint


__all__ = [
    "Matrix",
    "IDENTITY",
    "fricke_sl2_action",
    "sl2_order",
    "coset_representatives",
    "sample_cosets",
    "decompose",
    "check_hypothesis",
    "cusp_expansion_fp",
    "cusp_expansion_galois_operand",
]


class Matrix(NamedTuple):
    a: int
    b: int
    c: int
    d: int

    def det(self):
        return self.a * self.d - self.b * self.c

    def __matmul__(self, o):
        return Matrix(self.a * o.a + self.b * o.c, self.a * o.b + self.b * o.d,
                      self.c * o.a + self.d * o.c, self.c * o.b + self.d * o.d)

    def mod(self, m):
        return Matrix(self.a % m, self.b % m, self.c % m, self.d % m)

    def moebius(self, tau):
        return (self.a * tau + self.b) / (self.c * tau + self.d)

    def __str__(self):
        return f"[{self.a} {self.b}; {self.c} {self.d}]"


IDENTITY = Matrix(1, 0, 0, 1)


def _check_unimodular(alpha):
    if Matrix(*alpha).det() != 1:
        raise ValueError(f"{alpha} is not in SL2(Z)")


def fricke_sl2_action(v, alpha):
    """Index of f_v o alpha, i.e. v * alpha canonicalized modulo +-1."""
    _check_unimodular(alpha)
    return v.act(alpha)


def sl2_order(m):
    """|SL2(Z/mZ)| = m^3 prod_{l | m} (1 - l^-2)."""
    n = m ** 3
    for l in factorint(m):
        n = n // (l * l) * (l * l - 1)
    return n


def _lift(a, b, c, d, m):
    """A matrix in SL2(Z) congruent to [a b; c d] modulo m (det = 1 mod m)."""
    if m == 1:
        return IDENTITY
    a, b, c, d = a % m, b % m, c % m, d % m
    if c == 0:
        c = m
    # make the bottom row coprime without changing it modulo m
    t = 0
    while gcd(c, d + t * m) != 1:
        t += 1
    d = d + t * m
    # a0 d - b0 c = 1
    g, x, y = _ext_gcd(d, c)
    a0, b0 = x, -y
    # all solutions: (a0 + s c, b0 + s d); pick s matching the top row mod m
    for s in range(m):
        if (a0 + s * c - a) % m == 0 and (b0 + s * d - b) % m == 0:
            return Matrix(a0 + s * c, b0 + s * d, c, d)
    raise ArithmeticError("no lift found; determinant is not 1 modulo m")


def _ext_gcd(x, y):
    if y == 0:
        return (x, 1, 0) if x >= 0 else (-x, -1, 0)
    g, s, t = _ext_gcd(y, x % y)
    return g, t, s - (x // y) * t


def _bottom_rows(m):
    for c in range(m):
        for d in range(m):
            if gcd(gcd(c, d), m) == 1:
                yield c, d


def _top_rows(c, d, m):
    """The m solutions (a, b) of a d - b c = 1 modulo m, in increasing s."""
    # particular solution from a coprime lift of the bottom row
    cc = c if c else m
    t = 0
    while gcd(cc, d + t * m) != 1:
        t += 1
    dd = d + t * m
    _, x, y = _ext_gcd(dd, cc)
    a0, b0 = x % m, (-y) % m
    return [((a0 + s * c) % m, (b0 + s * d) % m) for s in range(m)]


def coset_representatives(m):
    """One SL2(Z) lift of every element of SL2(Z/m), identity first."""
    if m < 1:
        raise ValueError("modulus must be positive")
    if m == 1:
        return [IDENTITY]
    reps = [IDENTITY]
    for c, d in _bottom_rows(m):
        for a, b in sorted(_top_rows(c, d, m)):
            if (a, b, c, d) == (1, 0, 0, 1 % m):
                continue
            reps.append(_lift(a, b, c, d, m))
    return reps


def sample_cosets(m, count, seed, p=None):
    """The identity followed by ``count`` further distinct cosets of Gamma(m), seeded.

    When ``p`` is given and count >= 2 the sample is forced to contain an
    element with p | a and one with p ∤ a.
    """
    rng = random.Random(seed)
    count = min(count, sl2_order(m) - 1)
    seen = {IDENTITY.mod(m)}
    out = [IDENTITY]

    def draw():
        while True:
            c, d = rng.randrange(m), rng.randrange(m)
            if gcd(gcd(c, d), m) == 1:
                break
        a, b = rng.choice(_top_rows(c, d, m))
        return _lift(a, b, c, d, m)

    def add(x):
        if x.mod(m) in seen:
            return False
        seen.add(x.mod(m))
        out.append(x)
        return True

    if p is not None and count >= 2:
        for divisible in (True, False):
            while True:
                x = draw()
                if (x.a % p == 0) == divisible and add(x):
                    break
    while len(out) < count + 1:
        add(draw())
    return out


def decompose(alpha, p):
    """Case data for f_p o alpha.

    Returns ("up", gamma, None) when p | a and ("twist", gamma', k) otherwise;
    the returned matrix is always unimodular.
    """
    a, b, c, d = alpha
    if a % p == 0:
        gamma = Matrix(a // p, b, c, p * d)
        case, k = "up", None
    else:
        k = next(k for k in range(p) if (a * k - b) % p == 0)
        gamma = Matrix(a, (b - a * k) // p, p * c, d - c * k)
        case = "twist"
    if gamma.det() != 1:
        raise AssertionError(f"decomposition of {alpha} produced det {gamma.det()}")
    return case, gamma, k


def check_hypothesis(subject, p):
    n = subject.level
    if p % n not in (1 % n, (n - 1) % n):
        raise ValueError(f"p={p} is not congruent to +-1 modulo N={n}")


def cusp_expansion_fp(subject, alpha, p, precision, check=True):
    """Expansion of f_p o alpha in q^(1/(N p)), keys below ``precision``.

    ``check=False`` skips the p = +-1 (mod N) hypothesis (negative controls).
    """
    alpha = Matrix(*alpha)
    _check_unimodular(alpha)
    if check:
        check_hypothesis(subject, p)
    n = subject.level
    case, gamma, k = decompose(alpha, p)
    g = subject.act(gamma)
    if case == "up":
        # keys of g (units 1/N) land at p^2 * key in units 1/(N p)
        base = g.expand(-(-precision // (p * p)))
        out = base.substitute_up(p)
    else:
        base = g.expand(precision)
        out = base.twist_shift(k, p)
    return out.promote(n * p)


def cusp_expansion_galois_operand(subject, alpha, p, precision):
    """Expansion of (f[1 0; 0 p]) o alpha in q^(1/(N p)), keys below ``precision``.

    The Galois element acts first: its index is v * diag(1, p) * alpha.
    """
    alpha = Matrix(*alpha)
    _check_unimodular(alpha)
    n = subject.level
    if n > 1 and n % p == 0:
        raise ValueError(f"p={p} divides N={n}")
    g = subject.galois(p).act(alpha)
    base = g.expand(-(-precision // p))
    return base.promote(n * p)
