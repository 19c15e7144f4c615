"""Command-line front end.

Exit codes: 0 success, 1 numerical failure, 2 invalid input.  Reports go
to ``--out`` (relative paths resolve against $DIRMOM_OUTPUT_DIR when set).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .arith import is_prime, primes_in_range
from .exceptions import DomainError, NumericalError, PoleError
from .lfunc import EvalSettings

OUTPUT_ENV = "DIRMOM_OUTPUT_DIR"
PARITIES = ("even", "odd", "all-primitive")
DEFAULT_C0_GRIDS = ((200, 400, 800, 1600), (225, 450, 900, 1800), (250, 500, 1000, 2000), (200, 600, 1800))


@dataclass
class CliConfig:
    subcommand: str
    q: str | None = None
    shifts: list = field(default_factory=list)
    parity: str = "even"
    D: float | None = None
    precision: str = "double"
    jobs: int = 1
    out: str | None = None
    fmt: str = "csv"
    seed: int = 0
    timings: bool = False
    extra: dict = field(default_factory=dict)

    def meta(self) -> dict:
        d = asdict(self)
        d["shifts"] = [[_shift_str(a), _shift_str(b)] for a, b in self.shifts]
        d.pop("out")
        d.pop("jobs")  # output must not depend on the worker count
        return {"config": d, "settings": asdict(EvalSettings(precision=self.precision))}


def _shift_str(z: complex) -> str:
    return f"{z.real!r},{z.imag!r}"


# ---- argument parsing helpers -------------------------------------------------


def parse_shift(text: str) -> complex:
    """'re,im' (or a bare real) -> complex."""
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise DomainError(f"shift must be 're,im', got {text!r}")


def _range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    if not sep:
        raise DomainError(f"expected a range 'a..b', got {text!r}")
    try:
        return int(lo), int(hi)
    except ValueError:
        raise DomainError(f"bad range {text!r}") from None


def balanced_semiprimes(lo: int, hi: int, ratio: float = 1.2) -> list[int]:
    """q = p1 p2 in [lo, hi] with primes p1 < p2 <= ratio * p1."""
    out = []
    primes = primes_in_range(2, max(2, hi // 2))
    for i, p1 in enumerate(primes):
        if p1 * p1 > hi:
            break
        for p2 in primes[i + 1 :]:
            if p2 > ratio * p1 or p1 * p2 > hi:
                break
            if p1 * p2 >= lo:
                out.append(p1 * p2)
    return sorted(out)


def parse_q_spec(text: str) -> list[int]:
    """'primes:a..b', 'semiprimes-balanced:a..b', 'a..b', 'a,b,c' or a single integer."""
    text = text.strip()
    if text.startswith("primes:"):
        qs = primes_in_range(*_range(text[len("primes:") :]))
    elif text.startswith("semiprimes-balanced:"):
        qs = balanced_semiprimes(*_range(text[len("semiprimes-balanced:") :]))
    elif ".." in text:
        lo, hi = _range(text)
        qs = list(range(lo, hi + 1))
    else:
        try:
            qs = [int(t) for t in text.split(",") if t.strip()]
        except ValueError:
            raise DomainError(f"bad modulus list {text!r}") from None
    if not qs:
        raise DomainError(f"{text!r} selects no moduli")
    return sorted(set(qs))


def resolve_out(path: str | None, default_name: str) -> Path:
    base = Path(os.environ.get(OUTPUT_ENV, "."))
    p = Path(path) if path else Path(default_name)
    return p if p.is_absolute() else base / p


def _settings(cfg: CliConfig) -> EvalSettings:
    return EvalSettings(precision=cfg.precision)


def _fmt_c(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.12g}" if z.imag == 0 else f"{z.real:.12g}{z.imag:+.12g}i"


# ---- subcommands ----------------------------------------------------------------


def cmd_moment(cfg: CliConfig) -> int:
    from .verify import residual_row, write_report

    qs = parse_q_spec(cfg.q)
    if len(qs) != 1:
        raise DomainError("moment takes a single modulus; use sweep for ranges")
    alpha, beta = cfg.shifts[0] if cfg.shifts else (0j, 0j)
    row = residual_row(qs[0], alpha, beta, cfg.parity, cfg.D, settings=_settings(cfg))
    print(f"q={row.q} parity={row.parity_class} alpha={_fmt_c(row.alpha)} beta={_fmt_c(row.beta)}")
    print(f"  lhs           {_fmt_c(row.lhs)}")
    print(f"  main          {_fmt_c(row.main)}")
    print(f"  secondary     {_fmt_c(row.secondary)}")
    print(f"  residual      {_fmt_c(row.residual)}")
    print(f"  residual_norm {row.residual_norm:.6g}  (|residual| / q^(1/4))")
    if cfg.out:
        rec = asdict(row)
        rec.pop("runtime_ms")
        write_report(resolve_out(cfg.out, ""), [rec], cfg.meta(), cfg.fmt)
    return 0


def cmd_sweep(cfg: CliConfig) -> int:
    from .verify import fit_error_exponent, run_sweep, write_report

    qs = parse_q_spec(cfg.q)
    shifts = cfg.shifts or [(0j, 0j)]
    report = run_sweep(qs, shifts, cfg.parity, cfg.D, cfg.jobs, cfg.timings, settings=_settings(cfg))
    path = write_report(resolve_out(cfg.out, f"sweep.{cfg.fmt}"), report.records(cfg.timings), cfg.meta(), cfg.fmt)
    worst = max(report.rows, key=lambda r: r.residual_norm)
    print(f"{len(report.rows)} rows -> {path}")
    print(f"max |residual|/q^(1/4) = {worst.residual_norm:.6g} at q={worst.q}")
    try:
        fit = fit_error_exponent(report)
        print(f"fitted exponent of |residual| in q: {fit.slope:.4f} (n={fit.n_points})")
    except DomainError:
        pass
    return 0


def cmd_hb(cfg: CliConfig) -> int:
    from .verify import hb_expansion_probe, write_report

    ks = parse_q_spec(cfg.extra["k"])
    series = [k for k in ks if k <= 50] if cfg.extra.get("series_check") else []
    probe = hb_expansion_probe(ks, DEFAULT_C0_GRIDS, series, cfg.jobs)
    path = resolve_out(cfg.out, f"hb.{cfg.fmt}")
    if cfg.fmt == "json":
        meta = {**cfg.meta(), "c0_estimates": probe["c0_estimates"], "c0": probe["c0"], "c0_spread": probe["c0_spread"], "power_law": probe["power_law"], "series_check": probe["series_check"]}
        write_report(path, probe["rows"], meta, "json")
    else:
        write_report(path, probe["rows"], cfg.meta(), "csv")
        if probe["series_check"]:
            write_report(path.with_name(path.stem + "_series.csv"), probe["series_check"], cfg.meta(), "csv")
    print(f"{len(probe['rows'])} rows -> {path}")
    print(f"c0 (Richardson) = {probe['c0']:.3e}, spread over grids = {probe['c0_spread']:.3e}")
    if probe["power_law"]:
        print(f"R(k) - c0 follows {probe['power_law']['best_law']}")
    for s in probe["series_check"]:
        print(f"k={s['k']}: series - divisor route = {s['delta']:.3e}")
    return 0


def cmd_twist(cfg: CliConfig) -> int:
    from .verify import reciprocity_probe, write_report

    hs = parse_q_spec(cfg.extra["h"])
    ps = parse_q_spec(cfg.extra["p"])
    bad = [n for n in hs + ps if not is_prime(n)]
    if bad:
        raise DomainError(f"h and p must be prime: {bad[:5]}")
    pairs = [(h, p) for p in ps for h in hs if h < p]
    rows = reciprocity_probe(pairs, cfg.jobs)
    path = write_report(resolve_out(cfg.out, f"twist.{cfg.fmt}"), rows, cfg.meta(), cfg.fmt)
    worst = max(rows, key=lambda r: r["ratio"])
    print(f"{len(rows)} rows -> {path}")
    print(f"max |residual| / (h + log p + sqrt(p/h) log p) = {worst['ratio']:.6g} at (h, p) = ({worst['h']}, {worst['p']})")
    return 0


def cmd_kernel(cfg: CliConfig) -> int:
    from .verify import kernel_probe, write_report

    rows = kernel_probe()
    path = write_report(resolve_out(cfg.out, f"kernel.{cfg.fmt}"), rows, cfg.meta(), cfg.fmt)
    for r in rows:
        print(f"{r['cell']:<24} alpha={_fmt_c(r['alpha']):<14} beta={_fmt_c(r['beta']):<14} |delta| = {r['delta_abs']:.3e}")
    print(f"-> {path}")
    return 0 if all(r["ok"] for r in rows) else 1


def cmd_identities(cfg: CliConfig) -> int:
    from .arith import phi_star, phi_star_via_c_sum
    from .characters import exp_sum_closed, exp_sum_direct, orthogonality_closed, orthogonality_direct
    from .verify import write_report

    rng = random.Random(cfg.seed)
    q_max = int(cfg.extra.get("q_max", 150))
    pairs = int(cfg.extra.get("pairs", 100))
    rows = []
    for q in range(1, q_max + 1):
        units = [a for a in range(1, q + 1) if math.gcd(a, q) == 1]
        worst = 0.0
        for _ in range(pairs):
            m, n = rng.choice(units), rng.choice(units)
            worst = max(worst, abs(orthogonality_direct(q, m, n) - orthogonality_closed(q, m, n)))
        rows.append({"check": "orthogonality", "q": q, "max_abs_delta": worst, "ok": worst < 1e-9})
    worst = 0.0
    for c in range(1, 31):
        for d in range(1, 31):
            for r in range(d):
                if math.gcd(r, d) == 1:
                    worst = max(worst, abs(exp_sum_direct(c, d, r) - exp_sum_closed(c, d, r)))
    rows.append({"check": "exp_sum", "q": 30, "max_abs_delta": worst, "ok": worst < 1e-12})
    bad = [q for q in range(1, 2001) if phi_star_via_c_sum(q) != phi_star(q)]
    rows.append({"check": "phi_star", "q": 2000, "max_abs_delta": float(len(bad)), "ok": not bad})
    path = write_report(resolve_out(cfg.out, f"identities.{cfg.fmt}"), rows, cfg.meta(), cfg.fmt)
    failures = [r for r in rows if not r["ok"]]
    print(f"{len(rows)} checks, {len(failures)} failures -> {path}")
    return 0 if not failures else 1


def cmd_pilot(cfg: CliConfig) -> int:
    from .verify import pilot_constants

    data = pilot_constants(jobs=cfg.jobs)
    path = resolve_out(cfg.out, "pilot_constants.json")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2) + "\n")
    for key, entry in data["constants"].items():
        print(f"{key}: observed {entry['observed_max']:.6g} -> frozen {entry['frozen']}")
    print(f"-> {path}")
    return 0


COMMANDS = {
    "moment": cmd_moment,
    "sweep": cmd_sweep,
    "hb": cmd_hb,
    "twist": cmd_twist,
    "kernel": cmd_kernel,
    "identities": cmd_identities,
    "pilot": cmd_pilot,
}


def _common(p: argparse.ArgumentParser, out_default: str | None = None):
    p.add_argument("--out", default=out_default, help="report path (relative to $%s if set)" % OUTPUT_ENV)
    p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv", help="report format (default csv)")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes (default: all cores); results do not depend on it")
    p.add_argument("--precision", choices=("double", "extended"), default="double", help="L-value arithmetic for the brute-force side (default double)")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized checks (default 0)")
    p.add_argument("--timings", action="store_true", help="add runtime_ms to report rows (breaks byte-identical reruns)")


def _moment_args(p: argparse.ArgumentParser):
    p.add_argument("--q", required=True, help="modulus, list 'a,b', range 'a..b', 'primes:a..b' or 'semiprimes-balanced:a..b'")
    p.add_argument("--alpha", default="0,0", help="shift alpha as 're,im' (default 0,0)")
    p.add_argument("--beta", default="0,0", help="shift beta as 're,im' (default 0,0)")
    p.add_argument("--shift", action="append", default=[], metavar="A_RE,A_IM/B_RE,B_IM", help="additional (alpha, beta) pair; repeatable")
    p.add_argument("--parity", choices=PARITIES, default="even", help="character class (default even); odd and all-primitive need zero shifts")
    p.add_argument("--D", type=float, default=None, help="error-budget parameter D (default sqrt(q))")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dirmom", description="Second moments of primitive Dirichlet L-functions at s = 1/2: brute force against closed forms.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("moment", help="one modulus: moment vs main + secondary terms",
                       description="Checks the asymptotic formula for the shifted second moment over even primitive characters "
                                   "(and its zero-shift form, plus the odd and all-primitive variants with the +-pi/2 terms). "
                                   "Prints lhs, main, secondary, residual and |residual|/q^(1/4).")
    _moment_args(p)
    _common(p)

    p = sub.add_parser("sweep", help="many moduli: residual report and exponent fit",
                       description="Checks the claim that the error in the second-moment formula is O(q^(1/4) d(q)), "
                                   "including moduli q = p1 p2 with both primes near sqrt(q). Writes one row per modulus and shift.")
    _moment_args(p)
    _common(p)

    p = sub.add_parser("hb", help="T(k) against k log k + A k + B sqrt(k)",
                       description="Checks Heath-Brown's asymptotic expansion of T(k) (mean square over all characters, "
                                   "A = gamma - log 8pi, B = 2 zeta(1/2)^2) and probes whether the remainder runs in powers of k^(-1/2) or k^(-1).")
    p.add_argument("--k", required=True, help="k values: 'a..b' or 'a,b,c'")
    p.add_argument("--series-check", action="store_true", help="also evaluate T(k) by its kernel series for k <= 50")
    _common(p)

    p = sub.add_parser("twist", help="reciprocity between S(p,h) and S(h,-p)",
                       description="Checks the reciprocity formula S(p,h) = sqrt(p/h) S(h,-p) + (p/sqrt h)(log(p/h) + A) + (B/2) sqrt(p) + error, "
                                   "with S(p,h) the twisted mean square sum |L(1/2,chi)|^2 chi(h) over primitive chi mod p.")
    p.add_argument("--h", required=True, help="primes h: list or 'primes:a..b'")
    p.add_argument("--p", required=True, help="primes p: list or 'primes:a..b'")
    _common(p)

    p = sub.add_parser("kernel", help="Mellin kernel identities on the fixed shift matrix",
                       description="Checks the combined kernel identity K_{a,b}(1+d) + K_{b,a}(1+d) at d = 0 (value pi) and d = -a-b "
                                   "by oscillatory quadrature, contour independence of K_{a,b}(x), and the residue e^(-i pi/4) Gamma(1/2) "
                                   "of Heath-Brown's kernel.")
    _common(p)

    p = sub.add_parser("identities", help="exact character identities with seeded random inputs",
                       description="Checks the orthogonality relation for primitive characters, the exponential sum over a residue class, "
                                   "and the primitive-character count identity.")
    p.add_argument("--q-max", type=int, default=150, help="largest modulus for the orthogonality check (default 150)")
    p.add_argument("--pairs", type=int, default=100, help="random (m, n) pairs per modulus (default 100)")
    _common(p)

    p = sub.add_parser("pilot", help="regenerate the frozen empirical constants",
                       description="Runs the pilot sweeps that fix the residual ceilings used by the acceptance tests and writes them as JSON.")
    _common(p)
    return parser


def config_from_args(args: argparse.Namespace) -> CliConfig:
    shifts = []
    if hasattr(args, "alpha"):
        shifts.append((parse_shift(args.alpha), parse_shift(args.beta)))
        for s in args.shift:
            a, sep, b = s.partition("/")
            if not sep:
                raise DomainError(f"--shift expects 'a_re,a_im/b_re,b_im', got {s!r}")
            shifts.append((parse_shift(a), parse_shift(b)))
    if args.jobs < 1:
        raise DomainError("--jobs must be positive")
    extra = {}
    for key in ("k", "series_check", "h", "p", "q_max", "pairs"):
        if hasattr(args, key):
            extra[key] = getattr(args, key)
    return CliConfig(
        subcommand=args.subcommand,
        q=getattr(args, "q", None),
        shifts=shifts,
        parity=getattr(args, "parity", "even"),
        D=getattr(args, "D", None),
        precision=args.precision,
        jobs=args.jobs,
        out=args.out,
        fmt=args.fmt,
        seed=args.seed,
        timings=args.timings,
        extra=extra,
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(args)
        return COMMANDS[cfg.subcommand](cfg)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, PoleError, ArithmeticError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
