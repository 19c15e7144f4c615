import csv
import io
import json
import math

import numpy as np
import pytest
from sklearn.base import clone

from dirichlet_moments.exceptions import DomainError
from dirichlet_moments.verify import (
    PowerLawRegressor,
    fit_power_law,
    geometric_grid,
    hb_expansion_probe,
    kernel_probe,
    moment_row_fields,
    reciprocity_probe,
    reciprocity_row,
    residual_row,
    richardson_c0,
    run_sweep,
    to_csv,
    to_json,
    write_report,
    _power_law_probe,
)


def test_residual_row_recomputes():
    for q, a, b in [(101, 0, 0), (211, 0.01, 0.02), (60, 0.01j, -0.005j)]:
        r = residual_row(q, a, b)
        assert abs(r.lhs - r.main - r.secondary - r.residual) < 1e-12
        assert r.residual_norm == pytest.approx(abs(r.residual) / q**0.25, rel=1e-15)
        assert r.runtime_ms is None


def test_residual_row_from_csv_columns(tmp_path):
    rep = run_sweep([101, 103], [(0.0, 0.0), (0.01, 0.02)])
    path = write_report(tmp_path / "r.csv", rep.records(), {})
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 4
    for row in rows:
        lhs = complex(float(row["lhs_re"]), float(row["lhs_im"]))
        main = complex(float(row["main_re"]), float(row["main_im"]))
        sec = complex(float(row["secondary_re"]), float(row["secondary_im"]))
        res = complex(float(row["residual_re"]), float(row["residual_im"]))
        assert abs(lhs - main - sec - res) < 1e-12
        # enough to rerun the row
        again = residual_row(int(row["q"]), complex(float(row["alpha_re"]), float(row["alpha_im"])),
                             complex(float(row["beta_re"]), float(row["beta_im"])), row["parity_class"], float(row["D"]))
        assert again.residual == res


def test_tiny_q_row_is_diagnostic():
    r = residual_row(5)
    assert math.isfinite(r.residual_norm)


def test_sweep_byte_identical_across_jobs(tmp_path):
    qs = [101, 103, 107, 109, 113, 120]
    shifts = [(0.0, 0.0), (0.01, 0.02)]
    texts = []
    for jobs in (1, 3):
        rep = run_sweep(qs, shifts, jobs=jobs)
        texts.append(to_csv(rep.records()))
        texts.append(to_json(rep.records(), {"k": 1}))
    assert texts[0] == texts[2]
    assert texts[1] == texts[3]


def test_sweep_rows_sorted_and_timings_optional():
    rep = run_sweep([113, 101, 107], timings=True)
    assert [r.q for r in rep.rows] == [101, 107, 113]
    assert all(r.runtime_ms is not None for r in rep.rows)
    assert "runtime_ms" not in rep.records()[0]
    assert "runtime_ms" in rep.records(timings=True)[0]
    with pytest.raises(DomainError):
        run_sweep([])


def test_csv_format():
    text = to_csv([{"a": 1, "b": 0.1, "c": 1 + 2j, "d": None, "e": True}])
    header, row = text.strip().split("\n")
    assert header == "a,b,c_re,c_im,d,e"
    assert row == "1,0.10000000000000001,1,2,,true"


def test_json_schema():
    doc = json.loads(to_json([{"z": 1j}], {"settings": {"x": 1}}))
    assert set(doc) == {"meta", "rows"}
    assert "version" in doc["meta"] and doc["meta"]["settings"] == {"x": 1}
    assert doc["rows"][0]["z"] == {"re": 0.0, "im": 1.0}


def test_write_report_rejects_unknown_format(tmp_path):
    with pytest.raises(DomainError):
        write_report(tmp_path / "x.txt", [], {}, "xml")


def test_row_fields():
    fields = moment_row_fields()
    for f in ("q", "parity_class", "alpha", "beta", "lhs", "main", "secondary", "residual", "residual_norm", "d_q", "error_budget", "runtime_ms"):
        assert f in fields


# ---- fits ----


def test_fit_exact_quarter_power():
    q = np.arange(100, 2000, 97, dtype=float)
    fit = fit_power_law(q, q**0.25)
    assert abs(fit.slope - 0.25) < 1e-9
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_constant():
    q = np.arange(100, 2000, 97, dtype=float)
    assert abs(fit_power_law(q, np.full(q.size, 3.0)).slope) < 1e-12


def test_fit_needs_five_points():
    with pytest.raises(DomainError):
        fit_power_law([1, 2, 3, 4], [1, 2, 3, 4])


def test_regressor_api():
    X = np.linspace(1, 10, 20).reshape(-1, 1)
    est = PowerLawRegressor().fit(X, 2 * X[:, 0] ** 1.5)
    assert est.slope_ == pytest.approx(1.5)
    assert np.allclose(est.predict(X), 2 * X[:, 0] ** 1.5)
    assert est.score(X, 2 * X[:, 0] ** 1.5) == pytest.approx(1.0)
    assert clone(est).get_params() == {"min_points": 5}
    with pytest.raises(ValueError):
        PowerLawRegressor().fit(X, -X[:, 0])


def test_richardson_removes_two_powers():
    ks = [200, 400, 800, 1600]
    vals = [0.7 + 2 / k**0.5 - 3 / k for k in ks]
    assert abs(richardson_c0(ks, vals) - 0.7) < 1e-12
    with pytest.raises(DomainError):
        richardson_c0([100, 200, 500], [1, 2, 3])


def test_geometric_grid():
    assert geometric_grid(200, 1600, 4) == [200, 400, 800, 1600]


def test_power_law_probe_detects_inverse_k():
    ks = np.arange(50, 2001, 50)
    out = _power_law_probe(ks, 3 + 5 / ks, 3.0)
    assert out["best_law"] == "k^-1"
    out = _power_law_probe(ks, 3 + 5 / np.sqrt(ks), 3.0)
    assert out["best_law"] == "k^-1/2"


def test_hb_probe_small():
    probe = hb_expansion_probe(range(1, 80), c0_grids=[(10, 20, 40), (15, 30, 60)], series_check=[3])
    assert len(probe["rows"]) == 79
    assert probe["c0_spread"] is not None
    assert abs(probe["series_check"][0]["delta"]) < 1e-4
    with pytest.raises(DomainError):
        hb_expansion_probe([0])


def test_reciprocity_rows():
    row = reciprocity_row(3, 101)
    assert math.isfinite(row["ratio"])
    assert row["minus_p_is_1_mod_h"] == ((-101) % 3 == 1)
    big = reciprocity_row(5, 19)
    assert big["minus_p_is_1_mod_h"]
    with pytest.raises(DomainError):
        reciprocity_row(4, 101)
    rows = reciprocity_probe([(5, 101), (3, 101), (3, 53)], jobs=2)
    assert [(r["h"], r["p"]) for r in rows] == [(3, 53), (3, 101), (5, 101)]


def test_kernel_probe():
    rows = kernel_probe()
    assert len(rows) == 9
    assert all(r["ok"] for r in rows)
    for r in rows:
        tol = 1e-8 if r["cell"] == "hb-residue" else 1e-6
        assert r["delta_abs"] < tol
