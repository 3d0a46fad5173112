"""Down-conversion spectra for a monochromatic pump, FWHM extraction and
poling-period detuning for extra bandwidth.

Crystal lengths are in mm, phase mismatch in rad/um, frequencies in THz.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import dispersion as disp
from .dispersion import C0_UM_THZ, RangePolicy
from .errors import GridError, OutOfRangeError
from .gvm import GvmSolution, branch_minimum
from .phasematch import CrystalSpec, partner_wavelength, phase_mismatch_material

DEFAULT_POINTS = 20001
#: Largest intensity step allowed between the grid points bracketing a
#: half-maximum crossing.
MAX_CROSSING_STEP = 0.05


@dataclass
class SpectrumSamples:
    axis: np.ndarray
    intensity: np.ndarray
    axis_kind: str = "wavelength"  # "wavelength" (um) or "frequency" (THz)
    role: str = "idler"
    meta: dict = field(default_factory=dict)
    report: list = field(default_factory=list)

    def __post_init__(self):
        self.axis = np.asarray(self.axis, dtype=float)
        self.intensity = np.asarray(self.intensity, dtype=float)
        if self.axis.shape != self.intensity.shape or self.axis.ndim != 1:
            raise ValueError("axis and intensity must be 1-D arrays of equal length")
        if self.axis.size > 1 and not np.all(np.diff(self.axis) > 0):
            raise ValueError("spectrum axis must be strictly increasing")


@dataclass(frozen=True)
class Bandwidth:
    fwhm_wavelength: float
    fwhm_frequency: float
    lo_crossing: float
    hi_crossing: float
    contiguous: bool
    axis_kind: str = "wavelength"


@dataclass
class DetuningResult:
    detune_dk: float
    bandwidth: Bandwidth
    undetuned: Bandwidth
    detuned_period: float
    extremum: str  # "minimum", "maximum" or "flat"
    dip: float
    samples: SpectrumSamples
    flags: tuple = ()


def intensity_at(delta_k, L):
    """sinc^2(dk * L / 2) with dk in rad/um and L in mm."""
    if not L > 0:
        raise ValueError(f"crystal length must be positive, got {L}")
    x = np.asarray(delta_k, dtype=float) * (L * 1e3) / 2.0
    return (np.sinc(x / np.pi) ** 2)[()]


def default_idler_grid(crystal: CrystalSpec, points: int = DEFAULT_POINTS):
    lo = branch_minimum(crystal.idler_model)
    hi = min(crystal.absorption_edge, crystal.idler_model.upper_limit)
    return lo, hi, points


def _grid(grid, center):
    if grid is None:
        raise ValueError("grid required")
    if isinstance(grid, tuple) and len(grid) == 3:
        lo, hi, n = grid
        axis = np.linspace(float(lo), float(hi), int(n))
    else:
        axis = np.asarray(grid, dtype=float)
    if axis[0] < center < axis[-1] and not np.any(axis == center):
        axis = np.insert(axis, np.searchsorted(axis, center), center)
    return axis


def _admissible(model, lam, policy):
    policy = RangePolicy(policy)
    if policy is RangePolicy.OFF:
        return np.ones(lam.shape, dtype=bool)
    hi = model.validity_max if policy is RangePolicy.STRICT else model.upper_limit
    return (lam >= model.validity_min) & (lam <= hi)


def _runs(axis, mask):
    """Contiguous [lo, hi] intervals of ``axis`` where ``mask`` is True."""
    out = []
    idx = np.flatnonzero(mask)
    if idx.size == 0:
        return out
    breaks = np.flatnonzero(np.diff(idx) > 1)
    starts = np.r_[idx[0], idx[breaks + 1]]
    ends = np.r_[idx[breaks], idx[-1]]
    return [(float(axis[a]), float(axis[b])) for a, b in zip(starts, ends)]


def _idler_mismatch(crystal, solution, grid, policy):
    """Material phase mismatch minus the grating term on the admissible part
    of the grid, plus a report of the points that were dropped."""
    lam_p = solution.lambda_p
    axis = _grid(grid, solution.lambda_i0)
    ok = axis > lam_p
    report = []
    lam_s = np.full_like(axis, np.nan)
    lam_s[ok] = partner_wavelength(lam_p, axis[ok])
    for role, lam in (("idler", axis), ("signal", lam_s)):
        model = crystal.model(role)
        bad = ok & ~_admissible(model, np.where(ok, lam, model.validity_min), policy)
        for lo, hi in _runs(axis, bad):
            report.append(
                f"idler {lo:.4f}-{hi:.4f} um dropped: {role} wavelength outside "
                f"admissible range of {model.label}"
            )
        ok &= ~bad
    if not np.any(ok):
        raise OutOfRangeError("no admissible point on the requested idler grid")
    axis, lam_s = axis[ok], lam_s[ok]
    lam_p_arr = np.full_like(axis, lam_p)
    dk = phase_mismatch_material(crystal, lam_p_arr, lam_s, axis, RangePolicy.OFF)
    return axis, np.asarray(dk) - solution.grating.grating_wavevector, report


def _normalized(dk, L, detune):
    raw = intensity_at(np.asarray(dk) + detune, L)
    raw = np.atleast_1d(raw)
    return raw / raw.max()


def sample_idler_spectrum(crystal: CrystalSpec, solution: GvmSolution, L: float,
                          grid=None, detune_dk: float = 0.0,
                          policy=RangePolicy.GRACE) -> SpectrumSamples:
    """Normalized idler spectrum at fixed pump wavelength.

    ``grid`` is ``(lo_um, hi_um, points)`` or an explicit increasing array;
    by default it spans the idler branch up to the absorption edge or the
    admissible limit of the idler model, whichever is shorter.  The central
    idler wavelength is inserted into the grid when it falls inside.
    """
    if grid is None:
        grid = default_idler_grid(crystal)
    axis, dk, report = _idler_mismatch(crystal, solution, grid, policy)
    return _samples(crystal, solution, L, axis, dk, detune_dk, report)


def _samples(crystal, solution, L, axis, dk, detune, report):
    m = solution.grating.order
    grating_k = solution.grating.grating_wavevector
    meta = {
        "crystal": crystal.name,
        "L_mm": float(L),
        "period_um": solution.grating.period,
        "order": m,
        "lambda_p_um": solution.lambda_p,
        "lambda_i0_um": solution.lambda_i0,
        "detune_dk_rad_per_um": float(detune),
        "detuned_period_um": 2 * np.pi * m / (grating_k - detune),
    }
    return SpectrumSamples(axis, _normalized(dk, L, detune), "wavelength", "idler",
                           meta, list(report))


def signal_spectrum_from_idler(samples: SpectrumSamples) -> SpectrumSamples:
    """Map an idler spectrum onto the signal axis via energy conservation."""
    if samples.axis_kind != "wavelength":
        raise ValueError("signal mapping needs a wavelength axis")
    lam_p = samples.meta["lambda_p_um"]
    lam_s = np.atleast_1d(partner_wavelength(lam_p, samples.axis))
    order = np.argsort(lam_s)
    meta = dict(samples.meta)
    return SpectrumSamples(lam_s[order], samples.intensity[order], "wavelength",
                           "signal", meta, list(samples.report))


def _crossing(x0, x1, y0, y1):
    if abs(y1 - y0) >= MAX_CROSSING_STEP:
        raise GridError(
            f"refine grid: intensity jumps {abs(y1 - y0):.3f} across the "
            f"half-maximum between {x0:.6g} and {x1:.6g}"
        )
    return x0 + (0.5 - y0) * (x1 - x0) / (y1 - y0)


def fwhm(samples: SpectrumSamples) -> Bandwidth:
    """Outermost half-maximum crossings by linear interpolation."""
    x, y = samples.axis, samples.intensity
    if y.size == 0 or not np.isclose(y.max(), 1.0, rtol=0, atol=1e-12):
        raise GridError("spectrum must be normalized to a peak of 1")
    above = np.flatnonzero(y >= 0.5)
    i0, i1 = above[0], above[-1]
    if i0 == 0 or i1 == y.size - 1:
        raise GridError("grid too narrow: intensity does not fall below half "
                        "maximum at the grid boundary")
    lo = _crossing(x[i0 - 1], x[i0], y[i0 - 1], y[i0])
    hi = _crossing(x[i1], x[i1 + 1], y[i1], y[i1 + 1])
    contiguous = bool(np.all(y[i0:i1 + 1] >= 0.5))
    if samples.axis_kind == "wavelength":
        width_lam = hi - lo
        width_nu = C0_UM_THZ * abs(1.0 / lo - 1.0 / hi)
    else:
        width_nu = hi - lo
        width_lam = abs(C0_UM_THZ / lo - C0_UM_THZ / hi)
    return Bandwidth(float(width_lam), float(width_nu), float(lo), float(hi),
                     contiguous, samples.axis_kind)


def dip_level(intensity) -> float:
    """Lowest intensity between the outermost local maxima of the main band,
    relative to the peak.  1.0 for a single-peaked spectrum."""
    y = np.asarray(intensity, dtype=float)
    peak = y.max()
    above = np.flatnonzero(y >= 0.5 * peak)
    band = y[above[0]:above[-1] + 1]
    if band.size < 3:
        return 1.0
    inner = band[1:-1]
    is_max = (inner >= band[:-2]) & (inner >= band[2:])
    maxima = np.flatnonzero(is_max) + 1
    if band[0] > band[1]:
        maxima = np.r_[0, maxima]
    if band[-1] > band[-2]:
        maxima = np.r_[maxima, band.size - 1]
    if maxima.size < 2:
        return 1.0
    return float(band[maxima[0]:maxima[-1] + 1].min() / peak)


def curvature_vs_idler_frequency(crystal: CrystalSpec, solution: GvmSolution,
                                 step_thz: float = 0.5) -> float:
    """d^2(dk)/d(nu_i)^2 at the central idler frequency (rad/um/THz^2),
    pump wavelength and poling period held fixed."""
    nu0 = disp.to_frequency(solution.lambda_i0)
    nu = nu0 + step_thz * np.array([-1.0, 0.0, 1.0])
    lam_i = C0_UM_THZ / nu
    lam_s = partner_wavelength(solution.lambda_p, lam_i)
    dk = phase_mismatch_material(crystal, np.full(3, solution.lambda_p), lam_s, lam_i,
                                 RangePolicy.OFF)
    return float((dk[2] - 2 * dk[1] + dk[0]) / step_thz**2)


def optimize_detuning(crystal: CrystalSpec, solution: GvmSolution, L: float,
                      dip_floor: float = 0.5, grid=None, policy=RangePolicy.GRACE,
                      scan_points: int = 256, flat_tol: float = 1e-12) -> DetuningResult:
    """Additive phase-mismatch offset that maximizes the frequency FWHM while
    keeping the dip between the two lobes at or above ``dip_floor`` (relative
    to the peak).

    The offset is pushed against the extremum of dk at the central idler:
    negative when dk has a minimum there, positive for a maximum.
    """
    if not 0 < dip_floor <= 1:
        raise ValueError(f"dip_floor must lie in (0, 1], got {dip_floor}")
    if grid is None:
        grid = default_idler_grid(crystal)
    axis, dk, report = _idler_mismatch(crystal, solution, grid, policy)

    def bandwidth(detune):
        y = _normalized(dk, L, detune)
        return fwhm(SpectrumSamples(axis, y)), dip_level(y)

    base, _ = bandwidth(0.0)
    curvature = curvature_vs_idler_frequency(crystal, solution)
    flags = []
    if abs(curvature) < flat_tol:
        flags.append("saddle/flat")
        return DetuningResult(0.0, base, base, solution.grating.period, "flat", 1.0,
                              _samples(crystal, solution, L, axis, dk, 0.0, report),
                              tuple(flags))
    extremum = "minimum" if curvature > 0 else "maximum"
    sign = -1.0 if curvature > 0 else 1.0

    # Beyond a centre phase of pi the two lobes separate completely.
    s_max = 2.0 * np.pi / (L * 1e3)
    mags = np.linspace(0.0, s_max, scan_points)
    best = (0.0, base, 1.0)
    last_ok, first_bad = 0.0, None
    for s in mags[1:]:
        try:
            bw, dip = bandwidth(sign * s)
        except GridError:
            first_bad = s if first_bad is None else first_bad
            continue
        if dip >= dip_floor:
            if first_bad is None:
                last_ok = s
            if bw.fwhm_frequency > best[1].fwhm_frequency:
                best = (s, bw, dip)
        elif first_bad is None:
            first_bad = s

    if first_bad is None:
        flags.append("detuning bracket exhausted")
    elif best[0] == last_ok and last_ok > 0:
        # Optimum sits on the feasibility boundary; pin it down.  A boundary
        # below the first scan step is not resolved and zero is kept.
        def margin(s):
            try:
                return bandwidth(sign * s)[1] - dip_floor
            except GridError:
                return -1.0
        lo, hi = last_ok, first_bad
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if margin(mid) >= 0:
                lo = mid
            else:
                hi = mid
        bw, dip = bandwidth(sign * lo)
        if dip >= dip_floor and bw.fwhm_frequency >= best[1].fwhm_frequency:
            best = (lo, bw, dip)

    detune = sign * best[0]
    samples = _samples(crystal, solution, L, axis, dk, detune, report)
    return DetuningResult(
        detune_dk=detune,
        bandwidth=best[1],
        undetuned=base,
        detuned_period=samples.meta["detuned_period_um"],
        extremum=extremum,
        dip=best[2],
        samples=samples,
        flags=tuple(flags),
    )
