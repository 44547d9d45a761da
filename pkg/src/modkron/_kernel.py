"""Dense product of truncated series with cyclotomic-integer coefficients.

A series sum_e sum_i c[e][i] z^i q^e is packed into one big integer by the
Kronecker substitution z -> 2^s, q -> 2^(s*W) with W = 2*phi - 1 slots per
exponent, so that a single big-integer product yields every z- and
q-convolution at once.  Slots use a balanced encoding: an offset of 2^(s-1)
is added to each slot before the product is split, which recovers signed
values exactly provided every result coefficient is below 2^(s-1) in
absolute value.  The slot width is chosen from a rigorous bound.
"""

from math import gcd

import numpy as np

try:
    import gmpy2
except ImportError:  # pragma: no cover
    gmpy2 = None

from .cyclotomic import CycNumber, cyclotomic_polynomial

_GMP_THRESHOLD = 1 << 16


def _lcm(a, b):
    return a // gcd(a, b) * b


def common_numerators(terms, lo, hi, step=1):
    """Integer rows for exponents lo <= e < hi and their common denominator.

    Rows are indexed by (e - lo) // step.
    """
    den = 1
    for e, c in terms.items():
        if lo <= e < hi and c.denom != 1:
            den = _lcm(den, c.denom)
    rows = {}
    for e, c in terms.items():
        if lo <= e < hi:
            if c.denom == den:
                rows[(e - lo) // step] = c.coords
            else:
                k = den // c.denom
                rows[(e - lo) // step] = tuple(x * k for x in c.coords)
    return rows, den


def _pack(rows, count, width, nbytes):
    """Pack rows (offset -> coords) into a signed integer."""
    size = count * width * nbytes
    pos = bytearray(size)
    neg = None
    for e, coords in rows.items():
        base = e * width
        for i, x in enumerate(coords):
            if x > 0:
                off = (base + i) * nbytes
                pos[off:off + nbytes] = x.to_bytes(nbytes, "little")
            elif x < 0:
                if neg is None:
                    neg = bytearray(size)
                off = (base + i) * nbytes
                neg[off:off + nbytes] = (-x).to_bytes(nbytes, "little")
    value = int.from_bytes(pos, "little")
    if neg is not None:
        value -= int.from_bytes(neg, "little")
    return value


def _offset(slots, nbytes):
    pattern = b"\x00" * (nbytes - 1) + b"\x80"
    return int.from_bytes(pattern * slots, "little")


def _big_mul(x, y):
    if gmpy2 is not None and max(x.bit_length(), y.bit_length()) > _GMP_THRESHOLD:
        return int(gmpy2.mpz(x) * gmpy2.mpz(y))
    return x * y


def _max_bits(rows):
    b = 0
    for coords in rows.values():
        for x in coords:
            bl = x.bit_length()
            if bl > b:
                b = bl
    return b


def _reduce_rows(mat, level):
    """Reduce each row (length 2*phi - 1) modulo Phi_level, in place."""
    phi_poly = cyclotomic_polynomial(level)
    n = len(phi_poly) - 1
    nz = [(k, c) for k, c in enumerate(phi_poly[:n]) if c]
    for i in range(mat.shape[1] - 1, n - 1, -1):
        col = mat[:, i]
        for k, c in nz:
            if c == 1:
                mat[:, i - n + k] -= col
            elif c == -1:
                mat[:, i - n + k] += col
            else:
                mat[:, i - n + k] -= col * c
    return mat[:, :n]


def dense_product(f_terms, f_lo, f_hi, g_terms, g_lo, g_hi, level, out_hi, step=1):
    """Exact product of two coefficient maps restricted to exponents < out_hi.

    ``f_terms`` covers exponents in [f_lo, f_hi) and likewise for g; every
    stored exponent must be congruent to its window start modulo ``step``.
    Returns a dict exponent -> CycNumber (zeros dropped).
    """
    f_hi = min(f_hi, out_hi - g_lo)
    g_hi = min(g_hi, out_hi - f_lo)
    if f_hi <= f_lo or g_hi <= g_lo:
        return {}
    square = f_terms is g_terms and f_lo == g_lo and f_hi == g_hi
    fr, fd = common_numerators(f_terms, f_lo, f_hi, step)
    gr, gd = (fr, fd) if square else common_numerators(g_terms, g_lo, g_hi, step)
    if not fr or not gr:
        return {}
    n = len(cyclotomic_polynomial(level)) - 1
    width = 2 * n - 1
    fc, gc = -(-(f_hi - f_lo) // step), -(-(g_hi - g_lo) // step)
    bits = _max_bits(fr) + _max_bits(gr) + (min(len(fr), len(gr)) * n).bit_length() + 2
    nbytes = (bits + 7) // 8
    x = _pack(fr, fc, width, nbytes)
    y = x if square else _pack(gr, gc, width, nbytes)
    out_count = min(fc + gc - 1, -(-(out_hi - f_lo - g_lo) // step))
    slots = out_count * width
    prod = _balanced_low(_big_mul(x, y), slots * nbytes * 8)
    data = (prod + _offset(slots, nbytes)).to_bytes(slots * nbytes, "little")
    half = 1 << (8 * nbytes - 1)
    vals = np.empty(slots, dtype=object)
    for s in range(slots):
        vals[s] = int.from_bytes(data[s * nbytes:(s + 1) * nbytes], "little") - half
    mat = _reduce_rows(vals.reshape(out_count, width), level)
    den = fd * gd
    out = {}
    base = f_lo + g_lo
    for e in range(out_count):
        row = mat[e]
        if any(row):
            out[base + e * step] = CycNumber(level, row.tolist(), den)
    return out


def _balanced_low(value, nbits):
    """The signed sum of the low slots: value mod 2^nbits in (-2^(nbits-1), 2^(nbits-1))."""
    low = value & ((1 << nbits) - 1)
    if low >> (nbits - 1):
        low -= 1 << nbits
    return low
