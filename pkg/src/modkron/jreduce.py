"""Reduction of level-one series to polynomials in j, and integrality certificates.

A weakly holomorphic level-one function is a polynomial in j.  The reduction
is the classical greedy elimination: cancel the highest pole with a multiple
of a power of j, repeat, then read off the constant.  Remainders are checked
exactly; nothing is rounded away.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

from .cyclotomic import CycNumber, embed_level, _coeff_str
from .modforms import j_expansion
from .qseries import QSeries

__all__ = [
    "JPolynomial",
    "IntegralityCertificate",
    "PrecisionError",
    "reduce_to_j_polynomial",
    "elementary_symmetric",
    "char_poly_coefficients",
    "orbit",
    "orbit_char_poly",
    "integrality_certificate",
    "certify_char_poly",
]


class PrecisionError(ArithmeticError):
    """The available window cannot certify the requested result."""


class ReductionError(ArithmeticError):
    """A series that should reduce exactly left a nonzero remainder."""


class JPolynomial:
    """Polynomial in j with cyclotomic coefficients, index = power of j."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs, level=1):
        cs = [c if isinstance(c, CycNumber) else CycNumber.from_rational(level, c)
              for c in coeffs]
        while cs and cs[-1].is_zero():
            cs.pop()
        self.coeffs = tuple(cs)

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def is_integral(self):
        return all(c.denom == 1 for c in self.coeffs)

    def is_rational(self):
        return all(c.is_rational() for c in self.coeffs)

    def integer_coefficients(self):
        """Coefficients as Python ints; raises unless all are rational integers."""
        out = []
        for c in self.coeffs:
            r = c.to_fraction()
            if r.denominator != 1:
                raise ValueError(f"coefficient {r} is not an integer")
            out.append(int(r))
        return out

    def evaluate(self, j_series):
        """Substitute a j-series (Horner's rule)."""
        level = j_series.coeff_level
        acc = None
        for c in reversed(self.coeffs):
            c = embed_level(c, _lcm(c.level, level)) if c.level != level else c
            acc = QSeries.constant(c, j_series.prec, coeff_level=c.level) if acc is None \
                else acc * j_series + c
        if acc is None:
            return QSeries({}, j_series.prec, low=min(0, j_series.prec))
        return acc

    def __eq__(self, other):
        if not isinstance(other, JPolynomial):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __str__(self):
        parts = []
        for k in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[k]
            if c.is_zero():
                continue
            mono = "" if k == 0 else ("j" if k == 1 else f"j^{k}")
            if c.is_rational():
                r = c.to_fraction()
                neg, a = r < 0, abs(r)
                body = str(a) if not mono else (mono if a == 1 else f"{a}*{mono}")
            else:
                neg = False
                cs = _coeff_str(c)
                cs = f"({cs})" if c.denom == 1 else cs
                body = f"{cs}*{mono}" if mono else cs
            if not parts:
                parts.append(f"-{body}" if neg else body)
            else:
                parts.append(f"- {body}" if neg else f"+ {body}")
        return " ".join(parts) if parts else "0"

    def __repr__(self):
        return f"JPolynomial({self})"


def _lcm(a, b):
    return a // gcd(a, b) * b


class _JPowers:
    """Cached powers of the j-series at a fixed precision."""

    def __init__(self, precision):
        self.j = j_expansion(precision)
        self.powers = [QSeries.constant(1, precision), self.j]

    def power(self, m):
        while len(self.powers) <= m:
            self.powers.append(self.powers[-1] * self.j)
        return self.powers[m]


def reduce_to_j_polynomial(f, j_ctx=None):
    """Greedy pole elimination of a level-one series.

    Returns (JPolynomial, remainder) with f = P(j) + remainder on f's window
    and remainder = O(q).  ``j_ctx`` may be an integer j-precision or a
    previously built context.
    """
    f = f.normalized()
    if f.exp_denom != 1:
        raise ValueError("series has fractional exponents; not a level-one function")
    v = f.valuation()
    m = max(0, -v) if v is not None else 0
    if f.low > -m:
        raise PrecisionError("window starts above the pole")
    if f.prec < 1:
        raise PrecisionError(
            f"window ends at q^{f.prec}; at least q^1 is needed to certify the remainder")
    need = f.prec + m
    if j_ctx is None or isinstance(j_ctx, int):
        j_ctx = _JPowers(max(need, j_ctx or 0))
    if j_ctx.j.prec < need:
        raise PrecisionError(f"j-context precision {j_ctx.j.prec} below required {need}")
    level = f.coeff_level
    coeffs = [CycNumber.zero(level) for _ in range(m + 1)]
    rem = f
    for k in range(m, 0, -1):
        c = rem.terms.get(-k)
        if c is None:
            continue
        coeffs[k] = c
        rem = (rem - j_ctx.power(k) * c).truncate(f.prec)
    c0 = rem.terms.get(0)
    if c0 is not None:
        coeffs[0] = c0
        rem = rem - c0
    bad = [n for n in rem.terms if n <= 0]
    if bad:
        raise ReductionError(f"pole at q^{min(bad)} survived the reduction")
    return JPolynomial(coeffs, level), rem


def elementary_symmetric(series):
    """Coefficient series of prod (x - s_i), highest power of x first.

    Entry i is (-1)^i e_i; entry 0 is None, standing for the constant 1.
    """
    e = [None]
    for s in series:
        new = [None]
        for i in range(1, len(e) + 1):
            term = s if e[i - 1] is None else e[i - 1] * s
            new.append(term if i == len(e) else e[i] + term)
        e = new
    return [None] + [e[i] if i % 2 == 0 else -e[i] for i in range(1, len(e))]


def char_poly_coefficients(series, precision_hint=None):
    """Reduce each coefficient of prod (x - s_i) to a JPolynomial.

    Returns the JPolynomials for x^t, ..., x^0 (the first is the constant 1)
    and the list of remainders.
    """
    coeffs = elementary_symmetric(series)
    polys = [JPolynomial([1])]
    rems = []
    for c in coeffs[1:]:
        c = _to_level_one(c)
        poly, rem = reduce_to_j_polynomial(c, precision_hint)
        if rem.terms:
            raise ReductionError(
                f"nonzero remainder {rem}: precision shortfall or normalization error")
        polys.append(poly)
        rems.append(rem)
    return polys, rems


def _to_level_one(s):
    s = s.normalized()
    if s.exp_denom != 1:
        # a window ending off the integer grid blocks the reduction; trim it
        m = s.exp_denom
        s = s.truncate(s.prec - s.prec % m).normalized()
    if s.exp_denom != 1:
        raise ReductionError("symmetric function is not invariant (fractional exponents)")
    if s.coeff_level != 1:
        try:
            s = s.minimize_level(1)
        except ValueError:
            raise ReductionError("symmetric function has irrational coefficients") from None
    return s


def orbit(v):
    """SL2(Z/N)-orbit of a Fricke index, generated by T and S."""
    gens = ((1, 1, 0, 1), (0, -1, 1, 0))
    seen = {v}
    todo = [v]
    while todo:
        u = todo.pop()
        for g in gens:
            w = u.act(g)
            if w not in seen:
                seen.add(w)
                todo.append(w)
    return sorted(seen, key=lambda u: (u.a, u.b))


def orbit_char_poly(v, precision=None):
    """prod over the orbit of (x - f_v') as a list of JPolynomials (monic first).

    ``precision`` is the number of q-powers beyond the constant term that each
    remainder is checked on; the default is the orbit size plus two.
    """
    members = orbit(v)
    t = len(members)
    w = precision if precision is not None else t + 2
    n = v.N
    keys = (w + t) * n
    series = [u.expand(keys) for u in members]
    polys, _ = char_poly_coefficients(series)
    return polys


@dataclass
class IntegralityCertificate:
    subject: str
    char_poly: list
    all_integral: bool
    witness: tuple | None = None
    remainders_zero: bool = True
    extras: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "subject": self.subject,
            "char_poly": [str(p) for p in self.char_poly],
            "monic": bool(self.char_poly) and self.char_poly[0] == JPolynomial([1]),
            "all_integral": self.all_integral,
            "witness": None if self.witness is None else
            {"x_power": self.witness[0], "j_power": self.witness[1],
             "coefficient": str(self.witness[2])},
            "remainders_zero": self.remainders_zero,
        }


def integrality_certificate(subject, orbit_expansions, precision=None):
    """Build G(x) = prod (x - g_i) over the given orbit expansions and certify it.

    The certificate is monic by construction; ``all_integral`` holds when every
    JPolynomial coefficient is an algebraic integer.  On failure ``witness`` is
    (power of x, power of j, coefficient) of the first non-integral entry.
    """
    polys, _ = char_poly_coefficients(orbit_expansions, precision)
    return certify_char_poly(subject, polys)


def certify_char_poly(subject, polys):
    """Wrap reduced coefficients (monic first) in an IntegralityCertificate."""
    t = len(polys) - 1
    witness = None
    for i, poly in enumerate(polys):
        for k, c in enumerate(poly.coeffs):
            if c.denom != 1:
                witness = (t - i, k, c)
                break
        if witness:
            break
    return IntegralityCertificate(str(subject), polys, witness is None, witness)
