import time

import pytest
import yaml

from gvmspdc import database, table1


def _db_without(name):
    raw = yaml.safe_load(database.default_path().read_text())
    raw["crystals"] = [c for c in raw["crystals"] if c["name"] != name]
    return database.parse(yaml.safe_dump(raw))


def test_reference_shape():
    assert len(table1.REFERENCE) == 9
    assert all(len(r) == 1 + len(table1.COLUMNS) for r in table1.REFERENCE)
    assert set(table1.TOLERANCES) == set(table1.COLUMNS[1:])


def test_run_is_fast_and_complete(db):
    t0 = time.perf_counter()
    rows = table1.run(db)
    assert time.perf_counter() - t0 < 5.0
    assert [(r.crystal, r.lambda_i0) for r in rows] == [(r[0], r[1]) for r in table1.REFERENCE]
    assert all(not r.error and len(r.cells) == 9 for r in rows)


def test_mgoln_rows_pass(db):
    rows = [r for r in table1.run(db) if r.crystal == "MgO:LN"]
    assert all(r.passed for r in rows)


def test_missing_crystal_isolated():
    rows = table1.run(_db_without("SLT"))
    slt = [r for r in rows if r.crystal == "SLT"]
    assert all(r.error.startswith("crystal_not_found") and not r.passed for r in slt)
    assert all(r.cells for r in rows if r.crystal == "MgO:LN")


def test_longer_crystal_narrows_band(db):
    crystal = db.get("MgO:LN")
    short, _ = table1.compute_row(crystal, 3.8, 2.0)
    long, _ = table1.compute_row(crystal, 3.8, 4.0)
    assert long["lambda_s0"] == short["lambda_s0"]
    assert long["dl_i_fwhm"] < short["dl_i_fwhm"]


def test_cell_status():
    assert table1.Cell("x", 1.001, 1.0, ("abs", 0.002)).status == "PASS"
    assert table1.Cell("x", 1.003, 1.0, ("abs", 0.002)).status == "FAIL"
    assert table1.Cell("x", 1.04, 1.0, ("rel", 0.05)).status == "PASS"
    assert table1.Cell("x", 9.0, 1.0, None).status == "INFO"
