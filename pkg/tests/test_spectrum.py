import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gvmspdc.dispersion import C0_UM_THZ, to_frequency
from gvmspdc.errors import GridError, OutOfRangeError
from gvmspdc.gvm import solve_triplet
from gvmspdc.phasematch import QpmGrating, delta_k, partner_wavelength
from gvmspdc.spectrum import (
    SpectrumSamples,
    default_idler_grid,
    dip_level,
    fwhm,
    intensity_at,
    optimize_detuning,
    sample_idler_spectrum,
    signal_spectrum_from_idler,
)

# Half-maximum crossings from mpmath root-finding on the raw formulas, L = 2 mm.
ORACLE_CROSSINGS = {
    ("MgO:LN", 3.8): (3.398009627, 4.216408197, 17.12451621),
    ("SLT", 3.8): (3.383729145, 4.242141785, 17.92817302),
    ("KTP", 3.85): (3.482337662, 4.226595497, 15.15941884),
}


@pytest.fixture(scope="module")
def ktp_385(ktp):
    return solve_triplet(ktp, 3.85)


def test_sinc_zeros():
    L = 2.0
    for n in range(1, 6):
        dk = 2 * n * np.pi / (L * 1e3)
        assert intensity_at(dk, L) < 1e-12
        assert intensity_at(-dk, L) < 1e-12


def test_sinc_values():
    assert intensity_at(0.0, 1.0) == 1.0
    dk = np.pi / 1e3  # dk L / 2 = pi / 2 at L = 1 mm
    assert intensity_at(dk, 1.0) == pytest.approx((2 / np.pi) ** 2, rel=1e-14)
    with pytest.raises(ValueError):
        intensity_at(0.0, 0.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-0.1, 0.1), st.floats(0.1, 20))
def test_sinc_bounded(dk, L):
    assert 0.0 <= intensity_at(dk, L) <= 1.0


def test_fwhm_triangle():
    x = np.linspace(0, 2, 2001)
    y = 1 - np.abs(x - 1)
    bw = fwhm(SpectrumSamples(x, y))
    assert bw.lo_crossing == pytest.approx(0.5, abs=1e-12)
    assert bw.hi_crossing == pytest.approx(1.5, abs=1e-12)
    assert bw.fwhm_wavelength == pytest.approx(1.0, abs=1e-12)
    assert bw.fwhm_frequency == pytest.approx(C0_UM_THZ * (2 - 2 / 3))
    assert bw.contiguous


def test_fwhm_frequency_axis():
    x = np.linspace(100, 120, 2001)
    y = np.exp(-0.5 * ((x - 110) / 2) ** 2)
    bw = fwhm(SpectrumSamples(x, y, axis_kind="frequency"))
    assert bw.fwhm_frequency == pytest.approx(2 * np.sqrt(2 * np.log(2)) * 2, rel=1e-5)


def test_fwhm_errors():
    x = np.linspace(0, 1, 101)
    with pytest.raises(GridError, match="grid too narrow"):
        fwhm(SpectrumSamples(x, np.ones_like(x)))
    with pytest.raises(GridError, match="normalized"):
        fwhm(SpectrumSamples(x, 0.5 * np.ones_like(x)))
    coarse = np.linspace(0, 2, 5)
    with pytest.raises(GridError, match="refine grid"):
        fwhm(SpectrumSamples(coarse, np.exp(-((coarse - 1) / 0.3) ** 2)))
    with pytest.raises(ValueError):
        SpectrumSamples([0.0, 0.0, 1.0], [0.0, 1.0, 0.0])


def test_fwhm_split_band_is_flagged():
    x = np.linspace(-3, 3, 6001)
    y = np.maximum(np.exp(-((x - 1) / 0.5) ** 2), np.exp(-((x + 1) / 0.5) ** 2))
    bw = fwhm(SpectrumSamples(x, y / y.max()))
    assert not bw.contiguous
    assert dip_level(y) < 0.5


def test_dip_level():
    assert dip_level([0, 0.5, 1, 0.5, 0]) == 1.0
    assert dip_level([0, 1, 0.7, 1, 0]) == pytest.approx(0.7)


@pytest.mark.parametrize("key", list(ORACLE_CROSSINGS))
def test_crossings_match_oracle(db, key):
    crystal = db.get(key[0])
    bw = fwhm(sample_idler_spectrum(crystal, solve_triplet(crystal, key[1]), 2.0))
    lo, hi, thz = ORACLE_CROSSINGS[key]
    assert bw.lo_crossing == pytest.approx(lo, abs=2e-5)
    assert bw.hi_crossing == pytest.approx(hi, abs=2e-5)
    assert bw.fwhm_frequency == pytest.approx(thz, rel=1e-4)


def test_grid_convergence(ktp, ktp_385):
    lo, hi, _ = default_idler_grid(ktp)
    coarse = fwhm(sample_idler_spectrum(ktp, ktp_385, 2.0, (lo, hi, 100_001)))
    fine = fwhm(sample_idler_spectrum(ktp, ktp_385, 2.0, (lo, hi, 1_000_001)))
    assert abs(coarse.fwhm_frequency / fine.fwhm_frequency - 1) < 1e-3


def test_length_scaling(mgoln):
    sol = solve_triplet(mgoln, 3.8)
    widths = [fwhm(sample_idler_spectrum(mgoln, sol, L)).fwhm_frequency
              for L in (1.0, 2.0, 4.0, 8.0)]
    assert all(a > b for a, b in zip(widths, widths[1:]))
    # GVM: dk is quadratic in detuning so the width scales as L^(-1/2)
    assert widths[1] / widths[2] == pytest.approx(np.sqrt(2), rel=0.05)


def test_center_inserted_and_peak(ktp, ktp_385):
    s = sample_idler_spectrum(ktp, ktp_385, 2.0, (3.0, 4.4, 1000))
    assert 3.85 in s.axis
    assert s.intensity[np.flatnonzero(s.axis == 3.85)[0]] == pytest.approx(1.0)
    assert s.meta["period_um"] == ktp_385.poling_period
    assert s.meta["detuned_period_um"] == pytest.approx(ktp_385.poling_period)


def test_inadmissible_points_reported(mgoln):
    sol = solve_triplet(mgoln, 3.8)
    s = sample_idler_spectrum(mgoln, sol, 2.0, (2.5, 5.0, 2001))
    assert s.axis.max() <= mgoln.idler_model.upper_limit
    assert any("dropped" in r for r in s.report)
    with pytest.raises(OutOfRangeError):
        sample_idler_spectrum(mgoln, sol, 2.0, (6.0, 7.0, 11))


def test_signal_mapping_band():
    lam_p = 0.660
    ls = partner_wavelength(lam_p, np.array([3.47, 4.20]))
    assert ls[0] * 1e3 == pytest.approx(815, abs=1)
    assert ls[1] * 1e3 == pytest.approx(783, abs=1)


def test_frequency_conversion_identity():
    assert to_frequency(3.25) - to_frequency(4.45) == pytest.approx(25, abs=0.5)


def test_signal_spectrum_shares_frequency_width(mgoln):
    idler = sample_idler_spectrum(mgoln, solve_triplet(mgoln, 3.8), 2.0)
    signal = signal_spectrum_from_idler(idler)
    assert signal.role == "signal"
    assert np.all(np.diff(signal.axis) > 0)
    bi, bs = fwhm(idler), fwhm(signal)
    assert bs.fwhm_frequency == pytest.approx(bi.fwhm_frequency, rel=1e-4)
    assert bs.fwhm_wavelength < bi.fwhm_wavelength / 10


def _zero_crossings(crystal, sol, samples):
    period = samples.meta["detuned_period_um"]
    li = samples.axis
    ls = partner_wavelength(sol.lambda_p, li)
    dk = delta_k(crystal, np.full_like(li, sol.lambda_p), ls, li,
                 QpmGrating(period, sol.grating.order))
    idx = np.flatnonzero(np.sign(dk[:-1]) * np.sign(dk[1:]) < 0)
    return li[idx]


def test_detuning_widens_with_two_crossings(ktp, ktp_385):
    res = optimize_detuning(ktp, ktp_385, 2.0, dip_floor=0.5)
    assert res.extremum == "minimum"
    assert res.detune_dk < 0
    assert res.bandwidth.fwhm_frequency >= res.undetuned.fwhm_frequency
    assert res.dip >= 0.5
    assert dip_level(res.samples.intensity) >= 0.5
    zeros = _zero_crossings(ktp, ktp_385, res.samples)
    assert len(zeros) == 2
    assert zeros[0] < 3.85 < zeros[1]
    assert res.detuned_period < ktp_385.poling_period


def test_detuning_monotone_in_floor(ktp, ktp_385):
    strict = optimize_detuning(ktp, ktp_385, 2.0, dip_floor=0.9)
    loose = optimize_detuning(ktp, ktp_385, 2.0, dip_floor=0.5)
    assert loose.bandwidth.fwhm_frequency >= strict.bandwidth.fwhm_frequency
    assert strict.bandwidth.fwhm_frequency >= strict.undetuned.fwhm_frequency
    assert strict.dip >= 0.9


def test_detuning_floor_one_keeps_undetuned(ktp, ktp_385):
    res = optimize_detuning(ktp, ktp_385, 2.0, dip_floor=1.0)
    assert res.detune_dk == 0.0
    assert res.bandwidth == res.undetuned
    with pytest.raises(ValueError):
        optimize_detuning(ktp, ktp_385, 2.0, dip_floor=0.0)


def test_detuned_period_formula(ktp, ktp_385):
    res = optimize_detuning(ktp, ktp_385, 2.0)
    k = 2 * np.pi / ktp_385.poling_period
    assert res.detuned_period == pytest.approx(2 * np.pi / (k - res.detune_dk), rel=1e-14)
