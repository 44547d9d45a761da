"""Truncated Laurent series in q^(1/M) over Q(zeta_L).

A QSeries stores the coefficients of q^(n/M) for integer keys n in the
half-open window low <= n < prec.  Every coefficient in the window is known
exactly (absent keys are exact zeros), and nothing is claimed beyond it.
All operations compute the exact window on which their result is determined
by their inputs.
"""

from __future__ import annotations

import re
from fractions import Fraction
from math import gcd

from . import _kernel
from .cyclotomic import (CycNumber, embed_level, galois_apply, is_p_divisible,
                         parse_coeff, restrict_level, _coeff_str)

__all__ = ["QSeries", "series_arithmetic", "parse_series"]


def _lcm(a, b):
    return a // gcd(a, b) * b


class QSeries:
    __slots__ = ("exp_denom", "coeff_level", "terms", "low", "prec")

    def __init__(self, terms, prec, low=None, exp_denom=1, coeff_level=1):
        if exp_denom < 1 or coeff_level < 1:
            raise ValueError("exp_denom and coeff_level must be positive")
        clean = {}
        for n, c in terms.items():
            if not isinstance(c, CycNumber):
                c = CycNumber.from_rational(coeff_level, c)
            elif c.level != coeff_level:
                c = embed_level(c, coeff_level) if coeff_level % c.level == 0 else None
                if c is None:
                    raise ValueError("coefficient level does not divide coeff_level")
            if not c.is_zero():
                clean[int(n)] = c
        if low is None:
            low = min(clean) if clean else prec
        if low > prec:
            raise ValueError(f"empty window [{low}, {prec})")
        for n in clean:
            if not low <= n < prec:
                raise ValueError(f"term q^({n}/{exp_denom}) outside window [{low}, {prec})")
        self.exp_denom = exp_denom
        self.coeff_level = coeff_level
        self.terms = clean
        self.low = low
        self.prec = prec

    @classmethod
    def _raw(cls, terms, prec, low, exp_denom, coeff_level):
        obj = object.__new__(cls)
        obj.terms = terms
        obj.prec = prec
        obj.low = low
        obj.exp_denom = exp_denom
        obj.coeff_level = coeff_level
        return obj

    @classmethod
    def constant(cls, value, prec, exp_denom=1, coeff_level=1):
        return cls({0: value}, prec, low=min(0, prec), exp_denom=exp_denom,
                   coeff_level=coeff_level)

    @classmethod
    def monomial(cls, coeff, n, prec, exp_denom=1, coeff_level=1):
        return cls({n: coeff}, prec, low=n, exp_denom=exp_denom, coeff_level=coeff_level)

    # inspection ---------------------------------------------------------
    def valuation(self):
        """Smallest key with a nonzero coefficient, or None."""
        return min(self.terms) if self.terms else None

    def __getitem__(self, n):
        """Coefficient of q^(n/exp_denom), checked against the window."""
        if n >= self.prec:
            raise IndexError(f"q^({n}/{self.exp_denom}) is beyond the precision window")
        return self.terms.get(n, CycNumber.zero(self.coeff_level))

    def coefficient(self, exponent):
        """Coefficient of q^exponent for a rational exponent."""
        e = Fraction(exponent) * self.exp_denom
        if e.denominator != 1:
            return CycNumber.zero(self.coeff_level)
        return self[int(e)]

    def items(self):
        return sorted(self.terms.items())

    def is_integral(self):
        return all(c.denom == 1 for c in self.terms.values())

    def is_rational(self):
        return all(c.is_rational() for c in self.terms.values())

    def exponent_window(self):
        """The window as rational exponents [low/M, prec/M)."""
        return Fraction(self.low, self.exp_denom), Fraction(self.prec, self.exp_denom)

    # change of representation --------------------------------------------
    def promote(self, exp_denom=None, coeff_level=None):
        """Same series with exponent denominator/coefficient level enlarged."""
        exp_denom = exp_denom or self.exp_denom
        coeff_level = coeff_level or self.coeff_level
        if exp_denom % self.exp_denom or coeff_level % self.coeff_level:
            raise ValueError("promotion must go to a multiple")
        s = exp_denom // self.exp_denom
        if coeff_level != self.coeff_level:
            terms = {n * s: embed_level(c, coeff_level) for n, c in self.terms.items()}
        elif s != 1:
            terms = {n * s: c for n, c in self.terms.items()}
        else:
            return self
        return QSeries._raw(terms, self.prec * s, self.low * s, exp_denom, coeff_level)

    def normalized(self):
        """Canonical exponent denominator: divide keys, window and M by their gcd."""
        g = gcd(self.exp_denom, self.prec)
        for n in self.terms:
            if g == 1:
                break
            g = gcd(g, n)
        if g == 1:
            return self
        return QSeries._raw({n // g: c for n, c in self.terms.items()},
                            self.prec // g, self.low // g, self.exp_denom // g,
                            self.coeff_level)

    def minimize_level(self, level=1):
        """Restrict coefficients to Q(zeta_level); raises if they do not lie there."""
        return QSeries._raw({n: restrict_level(c, level) for n, c in self.terms.items()},
                            self.prec, self.low, self.exp_denom, level)

    def truncate(self, prec):
        """Forget coefficients at keys >= prec (keys in current units)."""
        if prec >= self.prec:
            return self
        low = min(self.low, prec)
        return QSeries._raw({n: c for n, c in self.terms.items() if n < prec},
                            prec, low, self.exp_denom, self.coeff_level)

    def tightened(self):
        """Raise the window start to the valuation.

        The keys between low and the first nonzero term are certified zeros,
        so this loses nothing and lets later products keep a wider window.
        """
        low = min(self.terms) if self.terms else self.prec
        if low == self.low:
            return self
        return QSeries._raw(self.terms, self.prec, low, self.exp_denom, self.coeff_level)

    def map_coeffs(self, fn, coeff_level=None):
        coeff_level = coeff_level or self.coeff_level
        out = {}
        for n, c in self.terms.items():
            v = fn(n, c)
            if not v.is_zero():
                out[n] = v
        return QSeries._raw(out, self.prec, self.low, self.exp_denom, coeff_level)

    # arithmetic --------------------------------------------------------
    def _align(self, other):
        m = _lcm(self.exp_denom, other.exp_denom)
        lv = _lcm(self.coeff_level, other.coeff_level)
        return self.promote(m, lv), other.promote(m, lv)

    def __add__(self, other):
        if isinstance(other, (int, Fraction, CycNumber)):
            return self._add_scalar(other)
        f, g = self._align(other)
        prec = min(f.prec, g.prec)
        terms = {n: c for n, c in f.terms.items() if n < prec}
        for n, c in g.terms.items():
            if n < prec:
                if n in terms:
                    s = terms[n] + c
                    if s.is_zero():
                        del terms[n]
                    else:
                        terms[n] = s
                else:
                    terms[n] = c
        return QSeries._raw(terms, prec, min(f.low, g.low, prec), f.exp_denom, f.coeff_level)

    __radd__ = __add__

    def _add_scalar(self, c):
        if isinstance(c, CycNumber) and c.level != self.coeff_level:
            return self + QSeries.constant(c, self.prec, self.exp_denom, c.level)
        if self.prec <= 0:
            # the constant term lies beyond the window
            return self
        terms = dict(self.terms)
        s = terms.get(0, CycNumber.zero(self.coeff_level)) + c
        if s.is_zero():
            terms.pop(0, None)
        else:
            terms[0] = s
        return QSeries._raw(terms, self.prec, min(self.low, 0), self.exp_denom,
                            self.coeff_level)

    def __neg__(self):
        return QSeries._raw({n: -c for n, c in self.terms.items()}, self.prec, self.low,
                            self.exp_denom, self.coeff_level)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return QSeries._raw({}, self.prec, self.low, self.exp_denom, self.coeff_level)
            return QSeries._raw({n: c * other for n, c in self.terms.items()}, self.prec,
                                self.low, self.exp_denom, self.coeff_level)
        if isinstance(other, CycNumber):
            level = _lcm(self.coeff_level, other.level)
            f = self.promote(coeff_level=level)
            c = embed_level(other, level)
            return f.map_coeffs(lambda n, a: a * c)
        f, g = self._align(other)
        return _mul_aligned(f, g)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        if isinstance(other, CycNumber):
            return self * other.inverse()
        return self * other.invert()

    def __pow__(self, e):
        if e < 0:
            return self.invert() ** (-e)
        if e == 0:
            rel = self.prec - self.low
            return QSeries.constant(1, rel, self.exp_denom, self.coeff_level)
        result = None
        base = self
        while e:
            if e & 1:
                result = base if result is None else result * base
            e >>= 1
            if e:
                base = _mul_aligned(base, base)
        return result

    def invert(self):
        return invert_unit(self)

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        f, g = self._align(other)
        f, g = f.normalized(), g.normalized()
        return f.exp_denom == g.exp_denom and f.prec == g.prec and f.terms == g.terms

    def agrees_with(self, other):
        """Equality on the common window (ignores differing precision)."""
        f, g = self._align(other)
        prec = min(f.prec, g.prec)
        return f.truncate(prec).terms == g.truncate(prec).terms

    __hash__ = None

    # operators on exponents --------------------------------------------
    def rescale_to_subtau(self, p):
        """tau -> tau/p: the same keys read in units of 1/(M p)."""
        return QSeries._raw(dict(self.terms), self.prec, self.low,
                            self.exp_denom * p, self.coeff_level)

    def substitute_up(self, m):
        """tau -> m tau: q^(n/M) -> q^(m n/M), returned in normalized form."""
        if m < 1:
            raise ValueError("m must be positive")
        out = QSeries._raw({n * m: c for n, c in self.terms.items()}, self.prec * m,
                           self.low * m, self.exp_denom, self.coeff_level)
        return out.normalized()

    def twist_shift(self, k, p):
        """tau -> (tau + k)/p: q^(n/M) -> zeta_(Mp)^(n k) q^(n/(Mp))."""
        mp = self.exp_denom * p
        level = _lcm(self.coeff_level, mp)
        step = level // mp
        terms = {}
        for n, c in self.terms.items():
            c = embed_level(c, level)
            r = (n * k) % mp
            if r:
                c = c * CycNumber.zeta(level, r * step)
            terms[n] = c
        return QSeries._raw(terms, self.prec, self.low, mp, level)

    def galois_on_coeffs(self, d):
        if gcd(d, self.coeff_level) != 1:
            raise ValueError(f"d={d} is not coprime to level {self.coeff_level}")
        return self.map_coeffs(lambda n, c: galois_apply(c, d))

    def coefficient_power(self, e):
        """The series sum a_n^e q^(n/M) (same keys)."""
        return self.map_coeffs(lambda n, c: c ** e)

    # rendering ---------------------------------------------------------
    def __str__(self):
        return format_series(self)

    def __repr__(self):
        return (f"QSeries(<{len(self.terms)} terms>, window=[{self.low}, {self.prec}), "
                f"exp_denom={self.exp_denom}, coeff_level={self.coeff_level})")


def _mul_aligned(f, g):
    low = f.low + g.low
    prec = min(f.low + g.prec, g.low + f.prec)
    if not f.terms or not g.terms:
        return QSeries._raw({}, prec, low, f.exp_denom, f.coeff_level)
    if len(f.terms) == 1 or len(g.terms) == 1:
        terms = {}
        for n, a in f.terms.items():
            for m, b in g.terms.items():
                if n + m < prec:
                    terms[n + m] = terms[n + m] + a * b if (n + m) in terms else a * b
        terms = {n: c for n, c in terms.items() if not c.is_zero()}
        return QSeries._raw(terms, prec, low, f.exp_denom, f.coeff_level)
    if f is g:
        terms = _kernel.dense_product(f.terms, f.low, f.prec, f.terms, f.low, f.prec,
                                      f.coeff_level, prec, step=_step(f.terms, f.low))
    else:
        step = gcd(_step(f.terms, f.low), _step(g.terms, g.low))
        terms = _kernel.dense_product(f.terms, f.low, f.prec, g.terms, g.low, g.prec,
                                      f.coeff_level, prec, step=step)
    return QSeries._raw(terms, prec, low, f.exp_denom, f.coeff_level)


def _step(terms, base):
    g = 0
    for n in terms:
        g = gcd(g, n - base)
        if g == 1:
            return 1
    return g or 1


def series_arithmetic(f, g, op):
    if op == "add":
        return f + g
    if op == "sub":
        return f - g
    if op == "mul":
        return f * g
    raise ValueError(f"unknown operation {op!r}")


def invert_unit(f):
    """Multiplicative inverse via Newton iteration g <- g (2 - h g)."""
    if f.prec <= f.low:
        raise ZeroDivisionError("cannot invert a series with an empty window")
    lead = f.terms.get(f.low)
    if lead is None:
        raise ZeroDivisionError(
            f"coefficient at the window start q^({f.low}/{f.exp_denom}) is zero")
    l = f.low
    rel = f.prec - l
    inv_lead = lead.inverse()
    h = QSeries._raw({n - l: c * inv_lead for n, c in f.terms.items()}, rel, 0,
                     f.exp_denom, f.coeff_level)
    g = QSeries.constant(1, 1, f.exp_denom, f.coeff_level)
    k = 1
    while k < rel:
        k = min(2 * k, rel)
        hk = h.truncate(k)
        # the current approximation is used as an exact polynomial
        g = QSeries._raw(g.terms, k, 0, g.exp_denom, g.coeff_level)
        e = _mul_aligned(hk, g)
        g = _mul_aligned(g, (2 - e).truncate(k)).truncate(k)
    return QSeries._raw({n - l: c * inv_lead for n, c in g.terms.items()}, rel - l, -l,
                        f.exp_denom, f.coeff_level)


def pth_power_frobenius_check(f, p):
    """f^p == sum a_n^p q^(p n/M) modulo p, on the window where both are known."""
    if not f.is_integral():
        raise ValueError("coefficients must be algebraic integers")
    lhs = f ** p
    rhs = f.coefficient_power(p).substitute_up(p)
    diff = lhs - rhs
    return all(is_p_divisible(c, p) for c in diff.terms.values())


# ---------------------------------------------------------------------------
# text format

def _qpart(n, m):
    e = Fraction(n, m)
    if e == 0:
        return ""
    if e.denominator == 1:
        return "q" if e == 1 else f"q^{e.numerator}"
    return f"q^({e.numerator}/{e.denominator})"


def format_series(f):
    parts = []
    for n, c in f.items():
        qp = _qpart(n, f.exp_denom)
        if c.is_rational():
            r = c.to_fraction()
            neg = r < 0
            a = abs(r)
            if not qp:
                body = str(a)
            elif a == 1:
                body = qp
            else:
                body = f"{a}*{qp}"
        else:
            neg = False
            cs = _coeff_str(c)
            if c.denom == 1:
                cs = f"({cs})"
            body = f"{cs}*{qp}" if qp else cs
        if not parts:
            parts.append(f"-{body}" if neg else body)
        else:
            parts.append(f"- {body}" if neg else f"+ {body}")
    tail = f"O({_qpart(f.prec, f.exp_denom) or '1'})"
    if f.prec == 0:
        tail = "O(1)"
    parts.append(f"+ {tail}" if parts else tail)
    text = " ".join(parts)
    if f.coeff_level > 1:
        text += f" @ level {f.coeff_level}"
    return text


def _split_terms(text):
    out = []
    depth = 0
    start = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch in "+-" and depth == 0 and i > start:
            prev = text[:i].rstrip()
            if prev and prev[-1] not in "^*/":
                out.append(text[start:i])
                start = i
    out.append(text[start:])
    return [t.strip() for t in out if t.strip()]


def _parse_exp(s):
    s = s.strip()
    if s.startswith("(") and s.endswith(")"):
        s = s[1:-1]
    return Fraction(s.replace(" ", ""))


def parse_series(text):
    """Parse the output of ``format_series``."""
    text = text.strip()
    level = 1
    m = re.fullmatch(r"(.*)@\s*level\s+(\d+)", text, re.S)
    if m:
        text, level = m.group(1).strip(), int(m.group(2))
    raw = []
    prec = None
    for term in _split_terms(text):
        sign = 1
        t = term
        if t[0] in "+-":
            sign = -1 if t[0] == "-" else 1
            t = t[1:].strip()
        om = re.fullmatch(r"O\((.*)\)", t)
        if om:
            inner = om.group(1).strip()
            if inner == "1":
                prec = Fraction(0)
            elif inner == "q":
                prec = Fraction(1)
            else:
                prec = _parse_exp(inner[2:])
            continue
        qm = re.search(r"(?:^|\*)\s*q(\^(\(.*\)|-?\d+))?$", t)
        if qm:
            exp = Fraction(1) if qm.group(1) is None else _parse_exp(qm.group(2))
            cpart = t[:qm.start()].strip()
        else:
            exp = Fraction(0)
            cpart = t
        coeff = parse_coeff(cpart, level) if cpart else CycNumber.one(level)
        raw.append((exp, coeff * sign))
    if prec is None:
        raise ValueError("missing O(...) precision term")
    den = prec.denominator
    for e, _ in raw:
        den = _lcm(den, e.denominator)
    terms = {}
    for e, c in raw:
        key = int(e * den)
        terms[key] = terms[key] + c if key in terms else c
    return QSeries(terms, int(prec * den), exp_denom=den, coeff_level=level).normalized()
