"""Kronecker-type congruences: the level-N function F, its cusp-by-cusp check,
and classical modular polynomials.

For f of level N and a prime p = +-1 (mod N), with f_p(tau) = f(tau/p) and
f^sigma the coefficient conjugate under zeta_N -> zeta_N^p,

    p F = (f_p^p - f^sigma) (f_p - (f^sigma)^p)

has every Fourier coefficient at every cusp divisible by p.  The expansions
of (p F) o alpha are computed exactly in q^(1/(N p)) and every coefficient in
the certified window is tested.
"""

from __future__ import annotations

import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from math import gcd

from .cyclotomic import is_p_divisible, p_adic_margin
from .jreduce import char_poly_coefficients, reduce_to_j_polynomial, PrecisionError
from .modforms import EtaQuotientSpec, j_expansion
from .transform import (
    IDENTITY,
    Matrix,
    check_hypothesis,
    coset_representatives,
    cusp_expansion_fp,
    cusp_expansion_galois_operand,
    decompose,
    sample_cosets,
    sl2_order,
)

__all__ = [
    "CongruenceReport",
    "CuspResult",
    "ModularPolynomial",
    "build_F_expansion",
    "build_G_expansion",
    "g_from_f",
    "check_cusp",
    "verify_congruence",
    "modular_polynomial",
    "kronecker_classical_check",
    "trace_reduction",
    "ALL_COSETS_LIMIT",
    "DEFAULT_CERTIFIED",
    "DEFAULT_SAMPLE",
    "leading_key",
]

DEFAULT_CERTIFIED = 50
ALL_COSETS_LIMIT = 5000
DEFAULT_SAMPLE = 64


# ---------------------------------------------------------------------------
# p F o alpha

def leading_key(expand):
    """Valuation of a series given as a precision -> QSeries function."""
    prec = 1
    while True:
        v = expand(prec).valuation()
        if v is not None:
            return v
        if prec > 1 << 20:
            raise ValueError("series looks identically zero")
        prec *= 2


def _grid_step(case, p):
    # case "up" puts every key of p F o alpha on p Z (units 1/(N p))
    return p if case == "up" else 1


def _product(a, b, p):
    x = (a ** p - b).tightened()
    y = (a - b ** p).tightened()
    return x * y


def build_F_expansion(subject, alpha, p, certified=DEFAULT_CERTIFIED, check=True):
    """(p F) o alpha in q^(1/(N p)) with at least ``certified`` exact coefficients.

    The count is taken on the support grid starting at the leading exponent:
    steps of p when p divides the top-left entry of alpha, steps of 1
    otherwise.  Input windows are derived from the valuations of the two
    operands and grown until the product window reaches the target.
    """
    alpha = Matrix(*alpha)
    if check:
        check_hypothesis(subject, p)
    case, _, _ = decompose(alpha, p)
    step = _grid_step(case, p)

    def fa(prec):
        return cusp_expansion_fp(subject, alpha, p, prec, check=False)

    def fb(prec):
        return cusp_expansion_galois_operand(subject, alpha, p, prec)

    va, vb = leading_key(fa), leading_key(fb)
    vx, vy = min(p * va, vb), min(va, p * vb)
    target = vx + vy + certified * step
    prec_a = max(target - vy - (p - 1) * va, target - vx)
    prec_b = max(target - vy, target - vx - (p - 1) * vb)
    while True:
        out = _product(fa(prec_a), fb(prec_b), p)
        lead = out.valuation()
        if lead is not None:
            need = lead + certified * step
            if out.prec >= need:
                return out
            grow = need - out.prec
        else:
            grow = max(out.prec - out.low, certified * step)
        prec_a += grow
        prec_b += grow


def build_G_expansion(subject, p, certified=DEFAULT_CERTIFIED, check=True):
    """p G(tau) = (f^p - f^sigma(p tau)) (f - f^sigma(p tau)^p) in q^(1/N).

    Built from the expansion of f at infinity and the exponent map tau -> p tau,
    without passing through p F.
    """
    if check:
        check_hypothesis(subject, p)
    n = subject.level
    sig = subject.galois(p)

    def fa(prec):
        return subject.expand(prec).promote(n)

    def fb(prec):
        return sig.expand(-(-prec // p)).substitute_up(p).promote(n)

    va, vb = leading_key(fa), leading_key(fb)
    vx, vy = min(p * va, vb), min(va, p * vb)
    target = vx + vy + certified
    prec_a = max(target - vy - (p - 1) * va, target - vx)
    prec_b = max(target - vy, target - vx - (p - 1) * vb)
    while True:
        out = _product(fa(prec_a), fb(prec_b), p)
        lead = out.valuation()
        need = (lead if lead is not None else out.low) + certified
        if lead is not None and out.prec >= need:
            return out
        grow = max(need - out.prec, 1)
        prec_a += grow
        prec_b += grow


def g_from_f(series_f, p):
    """Apply tau -> p tau to an expansion of p F o I (exponents scaled by p)."""
    return series_f.substitute_up(p)


# ---------------------------------------------------------------------------
# verification

@dataclass
class CuspResult:
    alpha: tuple
    case: str
    shift: int | None
    passed: bool
    window: tuple
    certified: int
    checked: int
    min_margin: int | None
    integral: bool
    denominators: list = field(default_factory=list)
    first_failure: tuple | None = None

    def to_dict(self):
        d = asdict(self)
        d["alpha"] = list(self.alpha)
        d["window"] = list(self.window)
        d["first_failure"] = None if self.first_failure is None else {
            "key": self.first_failure[0], "coefficient": self.first_failure[1]}
        return d


@dataclass
class CongruenceReport:
    N: int
    p: int
    subject: str
    mode: str
    per_cusp: list
    verdict: str
    precision: int
    seed: int | None = None
    negative_control: bool = False
    notes: list = field(default_factory=list)

    @property
    def passed(self):
        return self.verdict == "pass"

    def min_margin(self):
        ms = [c.min_margin for c in self.per_cusp if c.min_margin is not None]
        return min(ms) if ms else None

    def to_dict(self):
        return {
            "N": self.N,
            "p": self.p,
            "subject": self.subject,
            "mode": self.mode,
            "seed": self.seed,
            "negative_control": self.negative_control,
            "precision": self.precision,
            "verdict": self.verdict,
            "cusps": len(self.per_cusp),
            "min_margin": self.min_margin(),
            "all_integral": all(c.integral for c in self.per_cusp),
            "notes": list(self.notes),
            "per_cusp": [c.to_dict() for c in self.per_cusp],
        }

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    def to_text(self):
        lines = [
            f"subject {self.subject}  N={self.N}  p={self.p}  mode={self.mode}",
            f"certified coefficients per cusp: {self.precision} (exponent units 1/{self.N * self.p})",
            f"cusps checked: {len(self.per_cusp)}",
            f"min p-adic margin: {self.min_margin()}",
        ]
        if not all(c.integral for c in self.per_cusp):
            dens = sorted({d for c in self.per_cusp for d in c.denominators})
            lines.append(f"coefficient denominators (coprime to p, checked locally): {dens}")
        lines.extend(f"note: {n}" for n in self.notes)
        for c in self.per_cusp:
            if not c.passed:
                key, coeff = c.first_failure
                lines.append(f"FAIL at alpha={list(c.alpha)}: q^({key}/{self.N * self.p}) "
                             f"coefficient {coeff}")
        lines.append(f"verdict: {self.verdict}")
        return "\n".join(lines)


def _check_series(series, p):
    """Divisibility of every coefficient by p, locally at p when denominators appear."""
    margin, dens, failure, integral = None, set(), None, True
    for n, c in series.items():
        if c.denom != 1:
            integral = False
            dens.add(c.denom)
            ok = c.denom % p != 0 and p_adic_margin(c, p) >= 1
        else:
            ok = is_p_divisible(c, p)
        m = p_adic_margin(c, p)
        margin = m if margin is None else min(margin, m)
        if not ok and failure is None:
            failure = (n, str(c))
    return failure is None, margin, integral, sorted(dens), failure


def _cusp_key(subject, alpha, p):
    case, gamma, k = decompose(alpha, p)
    return case, subject.act(gamma), k, subject.galois(p).act(alpha)


def check_cusp(subject, alpha, p, certified=DEFAULT_CERTIFIED, check=True):
    alpha = Matrix(*alpha)
    case, _, k = decompose(alpha, p)
    series = build_F_expansion(subject, alpha, p, certified, check)
    ok, margin, integral, dens, failure = _check_series(series, p)
    lead = series.valuation()
    step = _grid_step(case, p)
    checked = -(-(series.prec - lead) // step) if lead is not None else 0
    return CuspResult(tuple(alpha), case, k, ok, (lead, series.prec), certified, checked,
                      margin, integral, dens, failure)


def _select_cosets(subject, n, p, mode, seed, sample):
    m = n * p
    notes = []
    if isinstance(subject, EtaQuotientSpec) and mode != "cusp-infinity":
        raise ValueError("eta quotients are only checked at the cusp infinity")
    if mode == "cusp-infinity":
        return [IDENTITY], "cusp-infinity", notes
    if mode == "all-cosets":
        order = sl2_order(m)
        if order <= ALL_COSETS_LIMIT:
            return coset_representatives(m), "all-cosets", notes
        notes.append(f"|SL2(Z/{m})| = {order} exceeds {ALL_COSETS_LIMIT}; "
                     f"sampling {sample} cosets besides the identity")
        mode = "sampled"
    if mode == "sampled":
        if seed is None:
            seed = 0
        return sample_cosets(m, sample, seed, p), f"sampled({sample}, seed={seed})", notes
    raise ValueError(f"unknown mode {mode!r}")


def verify_congruence(subject, N, p, mode="cusp-infinity", precision=DEFAULT_CERTIFIED,
                       seed=None, sample=DEFAULT_SAMPLE, negative_control=False, workers=1):
    """Check the congruence for p F o alpha over a set of cosets of Gamma(N p).

    ``mode`` is cusp-infinity, all-cosets or sampled; all-cosets falls back to
    the identity plus a seeded sample when |SL2(Z/Np)| exceeds
    ALL_COSETS_LIMIT.  Cusps sharing the same pair of operand expansions are
    computed once.
    """
    if subject.level != N:
        raise ValueError(f"subject {subject} has level {subject.level}, not N={N}")
    if negative_control:
        if gcd(N, p) != 1 and N > 1:
            raise ValueError(f"p={p} divides N={N}")
    else:
        check_hypothesis(subject, p)
    cosets, mode_name, notes = _select_cosets(subject, N, p, mode, seed, sample)
    if mode_name.startswith("sampled") and seed is None:
        seed = 0
    check = not negative_control

    keys = [_cusp_key(subject, a, p) for a in cosets]
    firsts = {}
    for a, key in zip(cosets, keys):
        firsts.setdefault(key, a)

    def run(key):
        return key, check_cusp(subject, firsts[key], p, precision, check)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            done = dict(pool.map(run, list(firsts)))
    else:
        done = dict(map(run, firsts))

    per_cusp = []
    for a, key in zip(cosets, keys):
        r = done[key]
        if r.alpha != tuple(a):
            r = CuspResult(tuple(a), r.case, r.shift, r.passed, r.window, r.certified,
                           r.checked, r.min_margin, r.integral, r.denominators,
                           r.first_failure)
        per_cusp.append(r)
    verdict = "pass" if all(c.passed for c in per_cusp) else "fail"
    if negative_control:
        notes.append("negative control: hypothesis p = +-1 (mod N) not assumed; "
                     "verdict is observational")
    return CongruenceReport(N, p, str(subject), mode_name, per_cusp, verdict, precision,
                            seed, negative_control, notes)


# ---------------------------------------------------------------------------
# classical modular polynomials

@dataclass
class ModularPolynomial:
    """Phi_p(x, y) as a map (i, k) -> coefficient of x^i y^k."""

    p: int
    coeffs: dict

    def triples(self):
        return [(i, k, c) for (i, k), c in sorted(self.coeffs.items()) if c]

    def nonzero_count(self, up_to_symmetry=False):
        keys = [ik for ik, c in self.coeffs.items() if c]
        if up_to_symmetry:
            keys = {tuple(sorted(ik)) for ik in keys}
        return len(keys)

    def is_symmetric(self):
        return all(self.coeffs.get((k, i), 0) == c for (i, k), c in self.coeffs.items())

    def is_monic(self):
        d = self.p + 1
        top = [(i, k) for (i, k), c in self.coeffs.items() if c and i == d]
        return top == [(d, 0)] and self.coeffs[(d, 0)] == 1 and \
            all(i <= d for (i, _), c in self.coeffs.items() if c)

    def degree(self):
        return max(i for (i, _), c in self.coeffs.items() if c)

    def __call__(self, x, y):
        return sum(c * x ** i * y ** k for (i, k), c in self.coeffs.items())

    def to_text(self):
        terms = []
        for i, k, c in sorted(self.triples(), key=lambda t: (-t[0], -t[1])):
            mono = "*".join(s for s in (_mono("x", i), _mono("y", k)) if s)
            terms.append(f"{c}*{mono}" if mono and c not in (1, -1) else
                         (mono if c == 1 and mono else
                          (f"-{mono}" if c == -1 and mono else str(c))))
        return " + ".join(terms).replace("+ -", "- ")


def _mono(v, e):
    return "" if e == 0 else (v if e == 1 else f"{v}^{e}")


def _classical_series(p, precision):
    j = j_expansion(precision)
    return [j.substitute_up(p)] + [j.twist_shift(k, p) for k in range(p)]


def modular_polynomial(p, precision=60):
    """Phi_p(x, y) from prod (x - j(p tau)) prod_k (x - j((tau + k)/p)).

    ``precision`` is the window of the j-series.  The elementary symmetric
    functions live over Q(zeta_p) and their zeta_p-parts must cancel; a
    failure raises ReductionError.
    """
    if p not in (2, 3, 5):
        raise ValueError(f"p={p} is not supported (2, 3 or 5)")
    if p == 5:
        warnings.warn("p=5 needs a long window and is slow", RuntimeWarning, stacklevel=2)
    polys, _ = char_poly_coefficients(_classical_series(p, precision))
    d = p + 1
    coeffs = {}
    for idx, poly in enumerate(polys):
        i = d - idx
        for k, c in enumerate(poly.integer_coefficients()):
            if c:
                coeffs[(i, k)] = c
    phi = ModularPolynomial(p, coeffs)
    if not phi.is_monic() or phi.degree() != d:
        raise AssertionError(f"Phi_{p} is not monic of degree {d}")
    if not phi.is_symmetric():
        raise AssertionError(f"Phi_{p} is not symmetric")
    return phi


def trace_reduction(p, precision=60):
    """j(p tau) + sum_k j((tau + k)/p) reduced directly to a polynomial in j."""
    series = _classical_series(p, precision)
    total = series[0]
    for s in series[1:]:
        total = total + s
    total = total.normalized()
    if total.exp_denom != 1:
        total = total.truncate(total.prec - total.prec % total.exp_denom).normalized()
    if total.exp_denom != 1:
        raise PrecisionError("trace did not collapse to integral exponents")
    poly, rem = reduce_to_j_polynomial(total.minimize_level(1))
    if rem.terms:
        raise AssertionError(f"nonzero remainder {rem}")
    return poly


def kronecker_classical_check(phi):
    """Phi_p(x, y) - (x^p - y)(x - y^p) has every coefficient divisible by p."""
    p = phi.p
    diff = dict(phi.coeffs)
    for ik, c in (((p + 1, 0), 1), ((p, p), -1), ((1, 1), -1), ((0, p + 1), 1)):
        diff[ik] = diff.get(ik, 0) - c
    return all(c % p == 0 for c in diff.values())

