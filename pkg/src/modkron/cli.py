"""Command line front end.

    modkron expand j --prec 4
    modkron verify --f "fricke(3,1,0)" --N 3 --p 2 --mode all-cosets
    modkron modpoly --p 2
    modkron valuation --p 11 --N 5 --element "1 + z"
    modkron integrality --f "fricke(2,0,1)"

Every command builds one result object and renders it either as text or as a
JSON document with ``command``, ``config``, ``result`` and ``timing_ms``.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass
from fractions import Fraction

from sympy import isprime

from .cyclotomic import embed_level, parse_coeff, parse_cyc
from .jreduce import certify_char_poly, integrality_certificate, orbit, orbit_char_poly
from .kronecker import (
    DEFAULT_CERTIFIED,
    DEFAULT_SAMPLE,
    kronecker_classical_check,
    modular_polynomial,
    verify_congruence,
    leading_key,
)
from .modforms import FrickeIndex, JInvariant, EtaQuotientSpec, j_expansion, parse_function
from .qseries import format_series
from .valuation import primes_above, vP_element, wP_series

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


@dataclass
class RunConfig:
    command: str
    function: str | None = None
    N: int | None = None
    p: int | None = None
    precision: int | None = None
    mode: str | None = None
    seed: int | None = None
    sample: int | None = None
    format: str = "text"
    out: str | None = None
    negative_control: bool = False
    element: str | None = None
    workers: int = 1

    def validate(self):
        if self.precision is not None and self.precision < 1:
            raise ValueError("--prec must be at least 1")
        if self.p is not None and not isprime(self.p):
            raise ValueError(f"p={self.p} is not prime")


class Outcome:
    """What a command produced: a JSON-ready result, its text, and the exit status."""

    def __init__(self, result, text, status=EXIT_PASS):
        self.result = result
        self.text = text
        self.status = status


# ---------------------------------------------------------------------------
# commands

def _subject(text, n=None):
    f = parse_function(text)
    if isinstance(f, EtaQuotientSpec) and n is not None and n != f.N:
        f = EtaQuotientSpec(f.factors, n)
    return f


def cmd_expand(cfg):
    f = _subject(cfg.function, cfg.N)
    prec = cfg.precision if cfg.precision is not None else 10
    lead = leading_key(f.expand)
    series = f.expand(min(lead, 0) + prec)
    lead_exp = str(Fraction(lead, f.level))
    text = f"{format_series(series)}\nleading exponent: {lead_exp}"
    result = {
        "function": str(f),
        "series": format_series(series),
        "leading_exponent": lead_exp,
        "exp_denom": series.exp_denom,
        "coeff_level": series.coeff_level,
        "window": [series.low, series.prec],
        "terms": [[n, str(c)] for n, c in series.items()],
    }
    return Outcome(result, text)


def cmd_verify(cfg):
    f = _subject(cfg.function, cfg.N)
    n = cfg.N if cfg.N is not None else f.level
    if cfg.p is None:
        raise ValueError("--p is required")
    if not cfg.negative_control and cfg.p % n not in (1 % n, (n - 1) % n):
        raise ValueError(f"p={cfg.p} is not +-1 modulo N={n}; "
                         "rerun with --negative-control to observe anyway")
    report = verify_congruence(
        f, n, cfg.p, cfg.mode or "cusp-infinity",
        cfg.precision or DEFAULT_CERTIFIED, seed=cfg.seed,
        sample=cfg.sample or DEFAULT_SAMPLE,
        negative_control=cfg.negative_control, workers=cfg.workers)
    if report.negative_control:
        status = EXIT_PASS
    else:
        status = EXIT_PASS if report.passed else EXIT_FAIL
    return Outcome(report.to_dict(), report.to_text(), status)


def cmd_modpoly(cfg):
    if cfg.p not in (2, 3, 5):
        raise ValueError(f"p={cfg.p} is not supported (2, 3 or 5)")
    phi = modular_polynomial(cfg.p, cfg.precision or 60)
    ok = kronecker_classical_check(phi)
    result = {
        "p": phi.p,
        "triples": [[i, k, str(c)] for i, k, c in phi.triples()],
        "nonzero": phi.nonzero_count(),
        "nonzero_up_to_symmetry": phi.nonzero_count(True),
        "symmetric": phi.is_symmetric(),
        "monic": phi.is_monic(),
        "kronecker_check": ok,
    }
    lines = [f"Phi_{phi.p}(x, y) = {phi.to_text()}"]
    lines += [f"  x^{i} y^{k}: {c}" for i, k, c in phi.triples()]
    lines.append(f"nonzero coefficients: {result['nonzero']} "
                 f"({result['nonzero_up_to_symmetry']} up to symmetry)")
    lines.append(f"symmetric: {str(result['symmetric']).lower()}")
    lines.append(f"Kronecker check: {str(ok).lower()}")
    return Outcome(result, "\n".join(lines), EXIT_PASS if ok else EXIT_FAIL)


def cmd_valuation(cfg):
    if cfg.p is None or cfg.N is None:
        raise ValueError("--p and --N are required")
    primes = primes_above(cfg.p, cfg.N)
    rows = []
    elem = None
    if cfg.element:
        elem = parse_cyc(cfg.element) if "@" in cfg.element else \
            parse_coeff(cfg.element, cfg.N)
    if elem is not None and elem.level != cfg.N:
        elem = embed_level(elem, cfg.N)
    series = None
    if cfg.function:
        f = _subject(cfg.function)
        lead = leading_key(f.expand)
        series = f.expand(min(lead, 0) + (cfg.precision or 20))
    for P in primes:
        row = {"prime": str(P), "residue_degree": P.residue_degree,
               "lifted_factor": list(P.factor), "lift_precision": P.lift_precision}
        if elem is not None:
            row["v_P"] = _inf(vP_element(elem, P))
        if series is not None:
            row["w_P"] = _inf(wP_series(series, P))
        rows.append(row)
    lines = [f"primes above {cfg.p} in Q(zeta_{cfg.N}): {len(primes)} "
             f"of residue degree {primes[0].residue_degree}"]
    for r in rows:
        extra = "".join(f"  {k}={r[k]}" for k in ("v_P", "w_P") if k in r)
        lines.append(f"  {r['prime']}{extra}")
    return Outcome({"primes": rows}, "\n".join(lines))


def _inf(v):
    return "inf" if v == float("inf") else v


def cmd_integrality(cfg):
    f = _subject(cfg.function)
    if isinstance(f, FrickeIndex):
        polys = orbit_char_poly(f, cfg.precision)
        cert = certify_char_poly(str(f), polys)
        cert.extras["orbit"] = [str(u) for u in orbit(f)]
    elif isinstance(f, JInvariant):
        if cfg.p is None:
            raise ValueError("--p is required for the j(p tau) orbit")
        window = cfg.precision or 40 * cfg.p
        j = j_expansion(window)
        series = [j.substitute_up(cfg.p)] + [j.twist_shift(k, cfg.p) for k in range(cfg.p)]
        cert = integrality_certificate(f"j({cfg.p}tau)", series)
    else:
        raise ValueError("integrality certificates are built for fricke(N,a,b) or j")
    result = cert.to_dict()
    result.update(cert.extras)
    t = len(cert.char_poly) - 1
    lines = [f"G(x) = prod over the orbit of {cert.subject}, degree {t}"]
    for i, poly in enumerate(cert.char_poly):
        lines.append(f"  x^{t - i}: {poly}")
    lines.append(f"monic: {str(result['monic']).lower()}")
    lines.append(f"integral coefficients: {str(cert.all_integral).lower()}")
    ok = cert.all_integral and cert.remainders_zero
    return Outcome(result, "\n".join(lines), EXIT_PASS if ok else EXIT_FAIL)


COMMANDS = {
    "expand": cmd_expand,
    "verify": cmd_verify,
    "modpoly": cmd_modpoly,
    "valuation": cmd_valuation,
    "integrality": cmd_integrality,
}


# ---------------------------------------------------------------------------
# argument parsing

def build_parser():
    parser = argparse.ArgumentParser(prog="modkron", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=("text", "structured"), default="text")
        sp.add_argument("--out", help="write the output to this file")
        sp.add_argument("--prec", type=int, dest="precision")

    sp = sub.add_parser("expand", help="print a q-expansion")
    sp.add_argument("function", nargs="?")
    sp.add_argument("--f", dest="f_opt")
    sp.add_argument("--N", type=int)
    common(sp)

    sp = sub.add_parser("verify", help="check the level-N Kronecker congruence")
    sp.add_argument("--f", dest="f_opt", required=True)
    sp.add_argument("--N", type=int)
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--mode", choices=("cusp-infinity", "all-cosets", "sampled"),
                    default="cusp-infinity")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--sample", type=int)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--negative-control", action="store_true")
    common(sp)

    sp = sub.add_parser("modpoly", help="classical modular polynomial and its congruence")
    sp.add_argument("--p", type=int, required=True)
    common(sp)

    sp = sub.add_parser("valuation", help="primes above p and valuations")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--element")
    sp.add_argument("--f", dest="f_opt")
    common(sp)

    sp = sub.add_parser("integrality", help="orbit characteristic polynomial over Z[j]")
    sp.add_argument("--f", dest="f_opt", required=True)
    sp.add_argument("--p", type=int)
    common(sp)
    return parser


def config_from_args(args):
    fn = getattr(args, "f_opt", None) or getattr(args, "function", None)
    return RunConfig(
        command=args.command,
        function=fn,
        N=getattr(args, "N", None),
        p=getattr(args, "p", None),
        precision=args.precision,
        mode=getattr(args, "mode", None),
        seed=getattr(args, "seed", None),
        sample=getattr(args, "sample", None),
        format=args.format,
        out=args.out,
        negative_control=getattr(args, "negative_control", False),
        element=getattr(args, "element", None),
        workers=getattr(args, "workers", 1),
    )


def run(cfg):
    """Execute a configuration; returns (rendered output, exit status)."""
    cfg.validate()
    if cfg.command == "expand" and not cfg.function:
        raise ValueError("expand needs a function")
    start = time.perf_counter()
    outcome = COMMANDS[cfg.command](cfg)
    ms = round((time.perf_counter() - start) * 1000, 3)
    if cfg.format == "structured":
        doc = {"command": cfg.command, "config": asdict(cfg), "result": outcome.result,
               "timing_ms": ms}
        return json.dumps(doc, indent=2), outcome.status
    return outcome.text, outcome.status


def main(argv=None):
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    try:
        text, status = run(cfg)
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
