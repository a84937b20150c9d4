"""The closed-form family registry and its residual scans."""

import pytest

from dlwlab.solutions import (
    UnknownFamily,
    family_registry,
    profile_rows,
    scan_family,
    verify_family,
)


def test_registry_ids_complete():
    expected = {
        "eq19", "eq22", "eq82", "eq83",
        "eq86", "eq87", "eq88", "eq89", "eq90",
        "eq93", "eq96",
    }
    assert set(family_registry()) == expected


def test_kink_residuals_across_speeds(phys):
    for mu in (0.5, 1.0, 2.0):
        rep = verify_family("eq93", {"mu": mu}, n_samples=50, seed=1)
        assert rep.max_residual < 1e-10, mu
        assert rep.samples_used == 50


def test_rational_family_residual():
    rep = verify_family("eq22", {"c1": 2.0}, n_samples=50, seed=1)
    assert rep.max_residual < 1e-12


def test_exp_kink_residuals():
    for a0 in (0.0, 1.0):
        rep = verify_family("eq96", {"a0": a0}, n_samples=50, seed=1)
        assert rep.max_residual < 1e-10, a0


def test_linear_family_quantified_defect():
    rep = verify_family("eq19", {"c1": 1.0, "c2": 0.4}, n_samples=30, seed=2)
    assert rep.per_equation[0] < 1e-12
    assert rep.per_equation[1] == pytest.approx(1.0, rel=1e-9)


def test_line_soliton_scan_passes_off_pole():
    for fid in ("eq82", "eq83"):
        for rec in scan_family(fid, n_samples=50, seed=3):
            assert rec["samples_used"] > 0
            assert rec["passes"], rec


def test_underdetermined_families_recorded():
    for fid in ("eq86", "eq87", "eq88", "eq89", "eq90"):
        records = scan_family(fid, n_samples=30, seed=3)
        assert records, fid
        for rec in records:
            assert "max_residual" in rec and "passes" in rec


def test_unknown_family():
    with pytest.raises(UnknownFamily):
        verify_family("eq1234", {})


def test_missing_binding_rejected():
    with pytest.raises(Exception):
        verify_family("eq93", {})


def test_profile_rows_skip_poles():
    rows = profile_rows("eq82", {"mu": 1.0, "C1": 0.0}, xi_min=-2.0, xi_max=2.0, n=41)
    assert 0 < len(rows) <= 41
    xi, u, v = rows[0]
    assert all(abs(val) < 1e9 for val in (u, v))


def test_profile_rows_kink():
    rows = profile_rows("eq93", {"mu": 1.0}, n=101)
    assert len(rows) == 101
    # at t = 0 the profile is mu + (2/sqrt3) tanh(x): rising kink
    assert rows[0][1] == pytest.approx(1.0 - 2 / 3**0.5, abs=1e-6)
    assert rows[-1][1] == pytest.approx(1.0 + 2 / 3**0.5, abs=1e-6)
