"""Exact arithmetic in the cyclotomic field Q(zeta_M).

Elements are stored in the power basis 1, z, ..., z^(phi(M)-1) of Z[zeta_M]
with a single positive common denominator.  Because Z[zeta_M] is the full
ring of integers, an element is integral exactly when its normalized
denominator is 1, and membership in p*O_K is a coordinate-wise test.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from math import gcd

from sympy import factorint

__all__ = [
    "CycNumber",
    "LevelMismatch",
    "cyclotomic_polynomial",
    "euler_phi",
    "embed_level",
    "restrict_level",
    "galois_apply",
    "is_p_divisible",
    "p_adic_margin",
    "frobenius_residue_check",
    "field_arithmetic",
    "parse_cyc",
]


class LevelMismatch(ValueError):
    pass


@lru_cache(maxsize=None)
def euler_phi(m):
    out = 1
    for p, e in factorint(m).items():
        out *= (p - 1) * p ** (e - 1)
    return out


def _mobius(m):
    fac = factorint(m)
    if any(e > 1 for e in fac.values()):
        return 0
    return -1 if len(fac) % 2 else 1


# ---------------------------------------------------------------------------
# integer polynomials, coefficient lists low -> high

def _trim(c):
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return c


def _pmul(a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for k, y in enumerate(b):
                out[i + k] += x * y
    return out


def _pdivexact(a, b):
    """Quotient of a by the monic polynomial b; the division must be exact."""
    a = _trim(a)
    db = len(b) - 1
    if len(a) - 1 < db:
        if a:
            raise ArithmeticError("inexact polynomial division")
        return []
    q = [0] * (len(a) - db)
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i]
        if c:
            q[i - db] = c
            for k in range(db + 1):
                a[i - db + k] -= c * b[k]
    if any(a):
        raise ArithmeticError("inexact polynomial division")
    return q


@lru_cache(maxsize=None)
def cyclotomic_polynomial(m):
    """Coefficients (low -> high) of the m-th cyclotomic polynomial.

    Built as prod_{d | m} (x^(m/d) - 1)^mu(d): numerator factors are
    multiplied, denominator factors divided out exactly.
    """
    if m < 1:
        raise ValueError("level must be positive")
    num, den = [1], [1]
    for d in range(1, m + 1):
        if m % d:
            continue
        mu = _mobius(d)
        if mu == 0:
            continue
        f = [-1] + [0] * (m // d - 1) + [1]
        if mu == 1:
            num = _pmul(num, f)
        else:
            den = _pmul(den, f)
    return tuple(_pdivexact(num, den))


def reduce_mod_cyclotomic(coeffs, m):
    """Reduce an integer (or Fraction) coefficient list modulo Phi_m."""
    phi_poly = cyclotomic_polynomial(m)
    n = len(phi_poly) - 1
    c = list(coeffs)
    if len(c) <= n:
        return c + [0] * (n - len(c))
    # fold modulo z^m - 1 first, Phi_m divides it
    if len(c) > m:
        folded = [0] * m
        for i, x in enumerate(c):
            folded[i % m] += x
        c = folded
    for i in range(len(c) - 1, n - 1, -1):
        t = c[i]
        if t:
            for k in range(n):
                c[i - n + k] -= t * phi_poly[k]
    return c[:n]


# ---------------------------------------------------------------------------

class CycNumber:
    """An element of Q(zeta_level), immutable and normalized.

    ``coords`` holds phi(level) integers, ``denom`` is positive and coprime
    to the content of ``coords``.
    """

    __slots__ = ("level", "coords", "denom", "_hash")

    def __init__(self, level, coords, denom=1):
        if level < 1:
            raise ValueError("level must be positive")
        if denom == 0:
            raise ZeroDivisionError("zero denominator")
        n = euler_phi(level)
        c = [int(x) for x in coords]
        if len(c) != n:
            c = reduce_mod_cyclotomic(c, level)
        denom = int(denom)
        if denom < 0:
            denom = -denom
            c = [-x for x in c]
        g = denom
        for x in c:
            if g == 1:
                break
            g = gcd(g, x)
        if g > 1:
            c = [x // g for x in c]
            denom //= g
        if not any(c):
            denom = 1
        self.level = level
        self.coords = tuple(c)
        self.denom = denom
        self._hash = None

    # constructors -----------------------------------------------------
    @classmethod
    def from_rational(cls, level, value):
        value = Fraction(value)
        n = euler_phi(level)
        return cls(level, [value.numerator] + [0] * (n - 1), value.denominator)

    @classmethod
    def zero(cls, level):
        return cls(level, [0] * euler_phi(level))

    @classmethod
    def one(cls, level):
        return cls.from_rational(level, 1)

    @classmethod
    def zeta(cls, level, k=1):
        """zeta_level^k, reduced into the power basis."""
        k %= level
        c = [0] * (k + 1)
        c[k] = 1
        return cls(level, reduce_mod_cyclotomic(c, level))

    @classmethod
    def _raw(cls, level, coords, denom):
        # trusted constructor: coords already reduced and normalized
        obj = object.__new__(cls)
        obj.level = level
        obj.coords = coords
        obj.denom = denom
        obj._hash = None
        return obj

    # predicates -------------------------------------------------------
    def is_zero(self):
        return not any(self.coords)

    def is_integral(self):
        return self.denom == 1

    def is_rational(self):
        return not any(self.coords[1:])

    def to_fraction(self):
        if not self.is_rational():
            raise ValueError("element is not rational")
        return Fraction(self.coords[0], self.denom)

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.to_fraction() == other
        if not isinstance(other, CycNumber):
            return NotImplemented
        return (self.level == other.level and self.denom == other.denom
                and self.coords == other.coords)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.level, self.coords, self.denom))
        return self._hash

    # arithmetic -------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, CycNumber):
            if other.level != self.level:
                raise LevelMismatch(
                    f"levels {self.level} and {other.level} differ; embed first")
            return other
        if isinstance(other, (int, Fraction)):
            return CycNumber.from_rational(self.level, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        d1, d2 = self.denom, other.denom
        if d1 == d2:
            return CycNumber(self.level, [a + b for a, b in zip(self.coords, other.coords)], d1)
        return CycNumber(self.level,
                         [a * d2 + b * d1 for a, b in zip(self.coords, other.coords)],
                         d1 * d2)

    __radd__ = __add__

    def __neg__(self):
        return CycNumber._raw(self.level, tuple(-a for a in self.coords), self.denom)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            return CycNumber(self.level, [a * other.numerator for a in self.coords],
                             self.denom * other.denominator)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prod = _pmul(list(self.coords), list(other.coords))
        return CycNumber(self.level, reduce_mod_cyclotomic(prod, self.level),
                         self.denom * other.denom)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        if self.is_rational():
            return CycNumber.from_rational(self.level, 1 / self.to_fraction())
        u = _inverse_mod_cyclotomic(self.coords, self.level)
        # (num/denom)^-1 = denom * num^-1
        lcd = 1
        for x in u:
            lcd = lcd * x.denominator // gcd(lcd, x.denominator)
        return CycNumber(self.level, [int(x * lcd) * self.denom for x in u], lcd)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero")
            return self * (1 / Fraction(other))
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        result = CycNumber.one(self.level)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    # rendering --------------------------------------------------------
    def numerator_str(self):
        return _poly_str(self.coords, "z")

    def __str__(self):
        return f"{_coeff_str(self)} @ level {self.level}"

    def __repr__(self):
        return f"CycNumber({self.level}, {list(self.coords)}, {self.denom})"


def _inverse_mod_cyclotomic(coords, m):
    """Extended Euclid over Q: u with u * a == 1 mod Phi_m."""
    a = [Fraction(x) for x in _trim(coords)]
    b = [Fraction(x) for x in cyclotomic_polynomial(m)]
    # invariants: s0 * a == r0, s1 * a == r1 (mod Phi_m)
    r0, r1 = b, a
    s0, s1 = [], [Fraction(1)]
    while len(r1) > 1:
        q, r = _pdivmod_q(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, _psub(s0, _pmul(q, s1))
    # r1 is a nonzero constant since Phi_m is irreducible
    c = r1[0]
    return [x / c for x in reduce_mod_cyclotomic(s1, m)]


def _psub(a, b):
    n = max(len(a), len(b))
    out = [(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)]
    return _trim(out)


def _pdivmod_q(a, b):
    a = list(a)
    db = len(b) - 1
    lead = b[-1]
    if len(a) - 1 < db:
        return [], _trim(a)
    q = [Fraction(0)] * (len(a) - db)
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i] / lead
        q[i - db] = c
        if c:
            for k in range(db + 1):
                a[i - db + k] -= c * b[k]
    return _trim(q), _trim(a[:db])


# ---------------------------------------------------------------------------
# operations

def field_arithmetic(a, b, op):
    if a.level != b.level:
        raise LevelMismatch(f"levels {a.level} and {b.level} differ")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def embed_level(a, target):
    """Express ``a`` in Q(zeta_target) via zeta_M = zeta_target^(target/M)."""
    if target % a.level:
        raise LevelMismatch(f"level {a.level} does not divide {target}")
    if target == a.level:
        return a
    step = target // a.level
    c = [0] * ((len(a.coords) - 1) * step + 1)
    for i, x in enumerate(a.coords):
        c[i * step] = x
    return CycNumber(target, reduce_mod_cyclotomic(c, target), a.denom)


def restrict_level(a, level):
    """Inverse of embed_level: recognize ``a`` as an element of Q(zeta_level).

    Raises ValueError when ``a`` does not lie in the subfield.
    """
    if a.level % level:
        raise LevelMismatch(f"level {level} does not divide {a.level}")
    if level == a.level:
        return a
    # solve in the subfield basis by comparing images of its basis vectors
    n = euler_phi(level)
    basis = [embed_level(CycNumber.zeta(level, i), a.level).coords for i in range(n)]
    sol = _solve_rational(basis, a.coords)
    if sol is None:
        raise ValueError(f"element does not lie in Q(zeta_{level})")
    lcd = 1
    for x in sol:
        lcd = lcd * x.denominator // gcd(lcd, x.denominator)
    return CycNumber(level, [int(x * lcd) for x in sol], lcd * a.denom)


def _solve_rational(columns, target):
    """Solve sum x_i * columns[i] == target exactly, or None."""
    rows = len(target)
    cols = len(columns)
    mat = [[Fraction(columns[j][i]) for j in range(cols)] + [Fraction(target[i])]
           for i in range(rows)]
    pivots = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if mat[i][c] != 0), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        pv = mat[r][c]
        mat[r] = [x / pv for x in mat[r]]
        for i in range(rows):
            if i != r and mat[i][c] != 0:
                f = mat[i][c]
                mat[i] = [x - f * y for x, y in zip(mat[i], mat[r])]
        pivots.append(c)
        r += 1
    for i in range(r, rows):
        if mat[i][cols] != 0:
            return None
    sol = [Fraction(0)] * cols
    for i, c in enumerate(pivots):
        sol[c] = mat[i][cols]
    return sol


@lru_cache(maxsize=None)
def _galois_images(m, d):
    """Power-basis images of z^i under z -> z^d, i < phi(m)."""
    n = euler_phi(m)
    return tuple(CycNumber.zeta(m, i * d).coords for i in range(n))


def galois_apply(a, d):
    """Apply sigma_{M,d}: zeta_M -> zeta_M^d."""
    m = a.level
    if gcd(d, m) != 1:
        raise ValueError(f"d={d} is not coprime to level {m}")
    d %= m
    if d == 1 % m:
        return a
    images = _galois_images(m, d)
    n = len(a.coords)
    out = [0] * n
    for x, img in zip(a.coords, images):
        if x:
            for k in range(n):
                if img[k]:
                    out[k] += x * img[k]
    return CycNumber._raw(m, tuple(out), a.denom)


def is_p_divisible(a, p):
    """True iff ``a`` lies in p * Z[zeta_M]; ``a`` must be integral."""
    if a.denom != 1:
        raise ValueError("element is not an algebraic integer")
    return all(x % p == 0 for x in a.coords)


def p_adic_margin(a, p):
    """Largest e with a in p^e * Z_(p)[zeta_M]; None for zero.

    Unlike is_p_divisible this accepts denominators (they count negatively),
    so it measures divisibility in the localization at p.
    """
    if a.is_zero():
        return None
    e = min(_vp(x, p) for x in a.coords if x)
    return e - _vp(a.denom, p)


def _vp(x, p):
    x = abs(x)
    e = 0
    while x % p == 0:
        x //= p
        e += 1
    return e


def frobenius_residue_check(c, p):
    """Check c^p == sigma_{M,p}(c) modulo p*O_K for integral c with p coprime to M."""
    if c.level % p == 0:
        raise ValueError(f"p={p} divides the level {c.level}")
    if c.denom != 1:
        raise ValueError("element is not an algebraic integer")
    return is_p_divisible(c ** p - galois_apply(c, p), p)


# ---------------------------------------------------------------------------
# text format:  "(1 + 2*z^3)/5 @ level 12"

def _poly_str(coords, var):
    parts = []
    for i, c in enumerate(coords):
        if not c:
            continue
        if i == 0:
            mono = str(abs(c))
        else:
            mono = var if i == 1 else f"{var}^{i}"
            if abs(c) != 1:
                mono = f"{abs(c)}*{mono}"
        if not parts:
            parts.append(mono if c > 0 else f"-{mono}")
        else:
            parts.append(f"+ {mono}" if c > 0 else f"- {mono}")
    return " ".join(parts) if parts else "0"


def _coeff_str(a):
    """Coefficient rendering shared with the series format."""
    num = _poly_str(a.coords, "z")
    if a.denom == 1:
        return num if a.is_rational() else num
    if a.is_rational():
        return f"{a.coords[0]}/{a.denom}"
    return f"({num})/{a.denom}"


_TERM = re.compile(r"\s*([+-])?\s*(\d+)?\s*(\*)?\s*(z(?:\^(\d+))?)?\s*")


def parse_poly(text, var="z"):
    """Parse a polynomial in ``var`` with integer coefficients into a list."""
    text = text.strip()
    if var != "z":
        text = text.replace(var, "z")
    coeffs = {}
    pos = 0
    first = True
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse polynomial {text!r} at {pos}")
        sign, num, star, zpart, exp = m.groups()
        if not first and sign is None:
            raise ValueError(f"missing operator in {text!r}")
        if num is None and zpart is None:
            raise ValueError(f"empty term in {text!r}")
        if star and (num is None or zpart is None):
            raise ValueError(f"malformed term in {text!r}")
        c = int(num) if num is not None else 1
        if sign == "-":
            c = -c
        k = 0 if zpart is None else (int(exp) if exp is not None else 1)
        coeffs[k] = coeffs.get(k, 0) + c
        pos = m.end()
        first = False
    if not coeffs:
        raise ValueError("empty polynomial")
    out = [0] * (max(coeffs) + 1)
    for k, c in coeffs.items():
        out[k] = c
    return out


def parse_coeff(text, level):
    """Parse the coefficient part (no level suffix)."""
    text = text.strip()
    m = re.fullmatch(r"\((.*)\)\s*/\s*(\d+)", text)
    if m:
        return CycNumber(level, parse_poly(m.group(1)), int(m.group(2)))
    m = re.fullmatch(r"(-?\d+)\s*/\s*(\d+)", text)
    if m:
        return CycNumber.from_rational(level, Fraction(int(m.group(1)), int(m.group(2))))
    if text.startswith("(") and text.endswith(")"):
        text = text[1:-1]
    return CycNumber(level, parse_poly(text))


def parse_cyc(text):
    """Inverse of ``str(CycNumber)``."""
    m = re.fullmatch(r"(.*)@\s*level\s+(\d+)\s*", text)
    if not m:
        raise ValueError(f"missing level suffix in {text!r}")
    return parse_coeff(m.group(1), int(m.group(2)))
