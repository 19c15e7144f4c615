"""Experiment harness: residual rows, exponent fits, expansion and reciprocity probes.

Reports are plain lists of rows plus a ``meta`` block.  Row order is fixed
by the inputs (sorted by modulus), each row is computed independently, and
no wall-clock data is written unless asked for, so a report depends only on
its configuration.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from . import __version__
from .arith import divisor_count, is_prime
from .exceptions import DomainError, NumericalError
from .kernels import (
    hb_residue_closed,
    hb_residue_numeric,
    kernel_K,
    script_k_combined,
    script_k_half_quadrature,
)
from .mainterms import (
    breakdown,
    hb_main,
    reciprocity_bound_scale,
    refined_error_scale,
    thm10_rhs,
)
from .lfunc import DEFAULT_SETTINGS, EvalSettings
from .moments import moment, t_recover, t_series, twisted_moment

KERNEL_SHIFTS = ((0.0, 0.0), (0.02, 0.01), (0.01j, -0.005j))


# ---- moment residual rows ----------------------------------------------------


@dataclass(frozen=True)
class ReportRow:
    q: int
    parity_class: str
    alpha: complex
    beta: complex
    lhs: complex
    main: complex
    secondary: complex
    residual: complex
    residual_norm: float
    residual_norm_dq: float
    d_q: int
    error_budget: float
    refined_scale: float
    D: float
    runtime_ms: float | None = None


def residual_row(q: int, alpha=0.0, beta=0.0, parity_class: str = "even", D: float | None = None, timings: bool = False, settings: EvalSettings = DEFAULT_SETTINGS) -> ReportRow:
    """One comparison of a brute-force moment against main + secondary terms."""
    start = time.perf_counter()
    lhs = moment(q, alpha, beta, parity_class, settings).value
    bd = breakdown(q, alpha, beta, parity_class, D)
    residual = lhs - bd.leading - bd.secondary
    dq = divisor_count(q)
    elapsed = (time.perf_counter() - start) * 1e3 if timings else None
    return ReportRow(
        q=q,
        parity_class=parity_class,
        alpha=complex(alpha),
        beta=complex(beta),
        lhs=lhs,
        main=bd.leading,
        secondary=bd.secondary,
        residual=residual,
        residual_norm=abs(residual) / q**0.25,
        residual_norm_dq=abs(residual) / (q**0.25 * dq),
        d_q=dq,
        error_budget=bd.error_budget,
        refined_scale=refined_error_scale(q),
        D=bd.D,
        runtime_ms=elapsed,
    )


def residual_even(q: int, alpha=0.0, beta=0.0, D: float | None = None) -> ReportRow:
    return residual_row(q, alpha, beta, "even", D)


def _row_task(args):
    return residual_row(*args)


@dataclass
class MomentReport:
    rows: list[ReportRow]
    meta: dict = field(default_factory=dict)

    def sorted(self) -> MomentReport:
        key = lambda r: (r.q, r.alpha.real, r.alpha.imag, r.beta.real, r.beta.imag)
        return MomentReport(sorted(self.rows, key=key), dict(self.meta))

    def records(self, timings: bool = False) -> list[dict]:
        out = []
        for r in self.rows:
            rec = asdict(r)
            if not timings:
                rec.pop("runtime_ms")
            out.append(rec)
        return out


def run_sweep(qs, shifts=((0.0, 0.0),), parity_class: str = "even", D: float | None = None, jobs: int = 1, timings: bool = False, meta: dict | None = None, settings: EvalSettings = DEFAULT_SETTINGS) -> MomentReport:
    """Residual rows for every q and shift pair, in parallel over rows when jobs > 1."""
    qs = sorted(set(int(q) for q in qs))
    if not qs:
        raise DomainError("empty modulus list")
    tasks = [(q, complex(a), complex(b), parity_class, D, timings, settings) for q in qs for a, b in shifts]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            rows = list(ex.map(_row_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        rows = [_row_task(t) for t in tasks]
    return MomentReport(rows, dict(meta or {})).sorted()


# ---- serialization -----------------------------------------------------------


def _flatten(rec: dict) -> dict:
    out = {}
    for k, v in rec.items():
        if isinstance(v, complex):
            out[f"{k}_re"] = v.real
            out[f"{k}_im"] = v.imag
        else:
            out[k] = v
    return out


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    if v is None:
        return ""
    return str(v)


def _jsonable(v):
    if isinstance(v, complex):
        return {"re": v.real, "im": v.imag}
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def to_csv(records: list[dict]) -> str:
    """CSV with a header fixed by the first record; complex fields split into _re/_im."""
    flat = [_flatten(r) for r in records]
    if not flat:
        return ""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = list(flat[0])
    writer.writerow(header)
    for row in flat:
        writer.writerow([_fmt(row.get(k)) for k in header])
    return buf.getvalue()


def to_json(records: list[dict], meta: dict) -> str:
    doc = {"meta": _jsonable({"version": __version__, **meta}), "rows": _jsonable(records)}
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def write_report(path: str | Path, records: list[dict], meta: dict, fmt: str | None = None) -> Path:
    path = Path(path)
    fmt = fmt or ("json" if path.suffix == ".json" else "csv")
    if fmt not in ("csv", "json"):
        raise DomainError(f"unknown report format {fmt!r}")
    text = to_csv(records) if fmt == "csv" else to_json(records, meta)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


# ---- exponent fits -----------------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    n_points: int


class PowerLawRegressor(RegressorMixin, BaseEstimator):
    """Least-squares fit of y = C x^slope in log-log coordinates.

    X is a single column of positive abscissae and y positive values.
    """

    def __init__(self, min_points: int = 5):
        self.min_points = min_points

    def fit(self, X, y):
        X, y = check_X_y(X, y, ensure_min_samples=self.min_points)
        if X.shape[1] != 1:
            raise ValueError("PowerLawRegressor takes a single feature")
        if np.any(X <= 0) or np.any(y <= 0):
            raise ValueError("power-law fit needs positive x and y")
        lx, ly = np.log(X[:, 0]), np.log(y)
        A = np.column_stack([lx, np.ones_like(lx)])
        (self.slope_, self.intercept_), *_ = np.linalg.lstsq(A, ly, rcond=None)
        pred = A @ np.array([self.slope_, self.intercept_])
        ss_res = float(np.sum((ly - pred) ** 2))
        ss_tot = float(np.sum((ly - ly.mean()) ** 2))
        self.log_r2_ = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
        self.n_features_in_ = 1
        return self

    def predict(self, X):
        check_is_fitted(self, "slope_")
        X = check_array(X)
        return np.exp(self.intercept_) * X[:, 0] ** self.slope_


def fit_power_law(x, y, min_points: int = 5) -> FitResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < min_points:
        raise DomainError(f"need at least {min_points} points, got {x.size}")
    est = PowerLawRegressor(min_points).fit(x.reshape(-1, 1), y)
    return FitResult(float(est.slope_), float(est.intercept_), float(est.log_r2_), int(x.size))


def fit_error_exponent(report: MomentReport, q_min: int = 1) -> FitResult:
    """Slope of log |residual| against log q over rows with q >= q_min."""
    rows = [r for r in report.rows if r.q >= q_min and abs(r.residual) > 0]
    if len(rows) < 5:
        raise DomainError("need at least 5 rows with nonzero residual")
    return fit_power_law([r.q for r in rows], [abs(r.residual) for r in rows])


# ---- Heath-Brown expansion probe --------------------------------------------


def richardson_c0(ks, values, exponents=(0.5, 1.0)) -> float:
    """Extrapolate R(k) -> k = infinity on a geometric grid (ratio k[i+1]/k[i] constant).

    Each pass removes one power k^{-e} from the list ``exponents``.
    """
    ks = np.asarray(ks, dtype=float)
    vals = np.asarray(values, dtype=float)
    ratios = ks[1:] / ks[:-1]
    if not np.allclose(ratios, ratios[0], rtol=1e-9):
        raise DomainError("Richardson extrapolation needs a geometric k grid")
    r = ratios[0]
    for e in exponents:
        if vals.size < 2:
            break
        f = r**e
        vals = (f * vals[1:] - vals[:-1]) / (f - 1)
    return float(vals[-1])


def geometric_grid(k_lo: int, k_hi: int, points: int) -> list[int]:
    """Integers close to a geometric grid; exact ratio needs k_hi/k_lo a perfect power."""
    ratio = (k_hi / k_lo) ** (1 / (points - 1))
    return [int(round(k_lo * ratio**i)) for i in range(points)]


def _power_law_probe(ks, R, c0):
    """Compare R(k) - c0 against k^{-1/2} and k^{-1} leading behaviour."""
    ks = np.asarray(ks, dtype=float)
    d = np.asarray(R, dtype=float) - c0
    out = {}
    if np.all(d > 0) or np.all(d < 0):
        fit = fit_power_law(ks, np.abs(d))
        out["fitted_exponent"] = fit.slope
        out["fit_log_r2"] = fit.r_squared
    rms = {}
    for label, powers in (("k^-1/2", (0.5, 1.5)), ("k^-1", (1.0, 2.0))):
        A = np.column_stack([ks**-p for p in powers])
        coef, *_ = np.linalg.lstsq(A, d, rcond=None)
        rms[label] = float(np.sqrt(np.mean((A @ coef - d) ** 2)))
        out[f"coef_{label}"] = [float(c) for c in coef]
    out["rms"] = rms
    out["best_law"] = min(rms, key=rms.get)
    # all three half-integer powers at once: is the k^{-1} coefficient zero?
    A = np.column_stack([ks**-0.5, ks**-1.0, ks**-1.5])
    coef, *_ = np.linalg.lstsq(A, d, rcond=None)
    out["coef_k^-1/2,k^-1,k^-3/2"] = [float(c) for c in coef]
    return out


def hb_expansion_probe(k_list, c0_grids=None, series_check=(), jobs: int = 1) -> dict:
    """R(k) = T(k) - (k log k + A k + B sqrt k) over ``k_list`` and its structure.

    ``c0_grids`` are geometric k grids for Richardson estimates of c_0 (the
    constant term of R); the spread of those estimates measures stability.
    ``series_check`` lists k for which the series route is compared against
    the divisor-sum route.
    """
    k_list = sorted(set(int(k) for k in k_list))
    if any(k < 1 or k > 3000 for k in k_list):
        raise DomainError("k must lie in [1, 3000]")
    rows = [{"k": k, "t_recover": t_recover(k), "hb_main": hb_main(k)} for k in k_list]
    for r in rows:
        r["R"] = r["t_recover"] - r["hb_main"]
        r["R_sqrt_k"] = r["R"] * math.sqrt(r["k"])
    c0_estimates = []
    for grid in c0_grids or ():
        vals = [t_recover(k) - hb_main(k) for k in grid]
        c0_estimates.append({"grid": list(grid), "c0": richardson_c0(grid, vals)})
    c0 = c0_estimates[-1]["c0"] if c0_estimates else 0.0
    spread = (max(e["c0"] for e in c0_estimates) - min(e["c0"] for e in c0_estimates)) if c0_estimates else None
    big = [r for r in rows if r["k"] >= 50]
    law = _power_law_probe([r["k"] for r in big], [r["R"] for r in big], c0) if len(big) >= 5 else None
    series = []
    ks = sorted(set(int(k) for k in series_check))
    if jobs > 1 and len(ks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            values = list(ex.map(t_series, ks))
    else:
        values = [t_series(k) for k in ks]
    for k, sv in zip(ks, values):
        tr = t_recover(k)
        series.append({"k": k, "t_series": sv.value, "t_recover": tr, "delta": sv.value - tr, "cutoff": sv.cutoff, "terms": sv.terms, "tail_estimate": sv.tail_estimate})
    return {"rows": rows, "c0_estimates": c0_estimates, "c0": c0, "c0_spread": spread, "power_law": law, "series_check": series}


# ---- reciprocity probe -------------------------------------------------------


def reciprocity_row(h: int, p: int) -> dict:
    if not (is_prime(h) and is_prime(p)) or not h < p:
        raise DomainError("need primes h < p")
    s_ph = twisted_moment(p, h)
    s_hp = twisted_moment(h, -p)
    rhs = thm10_rhs(p, h, s_hp)
    scale = reciprocity_bound_scale(p, h)
    return {
        "h": h,
        "p": p,
        "S_p_h": s_ph,
        "S_h_minus_p": s_hp,
        "thm10_rhs": rhs,
        "residual": s_ph - rhs,
        "bound_scale": scale,
        "ratio": abs(s_ph - rhs) / scale,
        "minus_p_is_1_mod_h": (-p) % h == 1,
        "h_below_p_two_thirds": h < p ** (2 / 3),
    }


def reciprocity_probe(pairs, jobs: int = 1) -> list[dict]:
    pairs = sorted(set((int(h), int(p)) for h, p in pairs), key=lambda hp: (hp[1], hp[0]))
    if not pairs:
        raise DomainError("empty (h, p) list")
    if jobs > 1 and len(pairs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(reciprocity_row, *zip(*pairs)))
    return [reciprocity_row(h, p) for h, p in pairs]


# ---- kernel probe ------------------------------------------------------------


def kernel_probe() -> list[dict]:
    """Quadrature against closed forms on the fixed shift matrix, plus contour and residue cells."""
    rows = []
    for a, b in KERNEL_SHIFTS:
        a, b = complex(a), complex(b)
        for label, delta in (("delta=0", 0j), ("delta=-alpha-beta", -(a + b))):
            try:
                quad = 2 * (script_k_half_quadrature(delta, a, b) + script_k_half_quadrature(delta, b, a))
                closed = script_k_combined(delta, a, b)
                rows.append({"cell": label, "alpha": a, "beta": b, "quadrature": quad, "closed_form": closed, "delta_abs": abs(quad - closed), "ok": True})
            except (NumericalError, FloatingPointError) as exc:
                rows.append({"cell": label, "alpha": a, "beta": b, "quadrature": complex("nan"), "closed_form": script_k_combined(delta, a, b), "delta_abs": float("nan"), "ok": False, "error": str(exc)})
    for x in (0.7, 3.0):
        v1, v2 = kernel_K(x, 0.02, 0.01, line=1.0), kernel_K(x, 0.02, 0.01, line=2.0)
        rows.append({"cell": f"contour-shift x={x}", "alpha": 0.02 + 0j, "beta": 0.01 + 0j, "quadrature": v1, "closed_form": v2, "delta_abs": abs(v1 - v2), "ok": True})
    num, closed = hb_residue_numeric(), hb_residue_closed()
    rows.append({"cell": "hb-residue", "alpha": 0j, "beta": 0j, "quadrature": num, "closed_form": closed, "delta_abs": abs(num - closed), "ok": True})
    return rows


def moment_row_fields() -> list[str]:
    return [f.name for f in fields(ReportRow)]


# ---- pilot constants -----------------------------------------------------------

PILOT_PRIMES = (101, 211, 401, 601, 1009)
PILOT_SEMIPRIMES = (1517, 2021, 3127)
PILOT_PAIRS = tuple((h, p) for p in (211, 401, 601, 1009) for h in (3, 5, 7, 11, 13))
PILOT_MARGIN = 1.5


def _freeze(observed: float) -> float:
    """Margin times the observed maximum, rounded up to two significant figures."""
    v = PILOT_MARGIN * observed
    e = math.floor(math.log10(v)) - 1
    return math.ceil(v / 10**e) * 10**e


def pilot_constants(jobs: int = 1) -> dict:
    """Observed residual ceilings on fixed pilot sets, and the frozen constants derived from them."""
    primes = run_sweep(PILOT_PRIMES, jobs=jobs)
    semis = run_sweep(PILOT_SEMIPRIMES, jobs=jobs)
    recip = reciprocity_probe(PILOT_PAIRS, jobs=jobs)
    obs = {
        "C6": max(r.residual_norm for r in primes.rows),
        "C6_prime": max(r.residual_norm for r in semis.rows),
        "C10": max(r["ratio"] for r in recip),
    }
    sets = {
        "C6": {"quantity": "|residual| / q^(1/4), even, zero shifts", "moduli": list(PILOT_PRIMES)},
        "C6_prime": {"quantity": "|residual| / q^(1/4), even, zero shifts", "moduli": list(PILOT_SEMIPRIMES)},
        "C10": {"quantity": "|S(p,h) - rhs| / (h + log p + sqrt(p/h) log p)", "pairs": [list(hp) for hp in PILOT_PAIRS]},
    }
    constants = {}
    for key, v in obs.items():
        constants[key] = {
            "observed_max": v,
            "frozen": _freeze(v),
            "provenance": {**sets[key], "margin": PILOT_MARGIN, "rounding": "up, 2 significant figures"},
        }
    return {"version": __version__, "generated_by": "dirmom pilot", "constants": constants}
