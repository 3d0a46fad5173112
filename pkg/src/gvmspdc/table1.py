"""Regression of computed group-velocity-matched solutions against a
reference table of broadband phase-matching results (L = 2 mm).

Reference values are stored verbatim and never recomputed.  All pass/fail
tolerances live in ``TOLERANCES``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .dispersion import RangePolicy
from .errors import GvmSpdcError
from .gvm import solve_triplet
from .spectrum import fwhm, sample_idler_spectrum, signal_spectrum_from_idler

REFERENCE_LENGTH_MM = 2.0

COLUMNS = ("lambda_i0", "lambda_i_min", "lambda_i_max", "dl_i_fwhm", "lambda_s0",
           "lambda_s_min", "lambda_s_max", "dl_s_fwhm", "lambda_p", "period")

# crystal, then COLUMNS, all in um
REFERENCE = [
    ("SLT", 3.3, 2.87, 3.75, 0.872, 0.995, 0.961, 1.042, 0.081, 0.765, 22.04),
    ("SLT", 3.8, 3.38, 4.24, 0.858, 0.866, 0.846, 0.891, 0.045, 0.705, 19.80),
    ("SLT", 4.25, 3.83, 4.69, 0.860, 0.776, 0.763, 0.792, 0.029, 0.656, 17.99),
    ("MgO:LN", 3.3, 2.87, 3.74, 0.867, 1.094, 1.053, 1.151, 0.098, 0.822, 23.12),
    ("MgO:LN", 3.8, 3.40, 4.22, 0.818, 0.939, 0.916, 0.968, 0.052, 0.753, 20.52),
    ("MgO:LN", 4.25, 3.86, 4.65, 0.791, 0.829, 0.816, 0.846, 0.030, 0.694, 18.34),
    ("KTP", 3.25, 2.87, 3.64, 0.769, 0.986, 0.955, 1.028, 0.072, 0.757, 24.90),
    ("KTP", 3.55, 3.19, 3.91, 0.732, 0.882, 0.862, 0.908, 0.046, 0.707, 22.63),
    ("KTP", 3.85, 3.51, 4.20, 0.696, 0.795, 0.782, 0.812, 0.030, 0.659, 20.45),
]

# (kind, value): "abs" in um, "rel" as a fraction, None = reported only.
TOLERANCES = {
    "lambda_p": ("abs", 0.002),
    "lambda_s0": ("abs", 0.002),
    "period": ("abs", 0.05),
    "dl_i_fwhm": ("rel", 0.05),
    "dl_s_fwhm": ("rel", 0.05),
    "lambda_i_min": ("abs", 0.03),
    "lambda_i_max": ("abs", 0.03),
    "lambda_s_min": None,
    "lambda_s_max": None,
}


@dataclass
class Cell:
    name: str
    computed: float
    reference: float
    tolerance: tuple | None

    @property
    def abs_dev(self) -> float:
        return self.computed - self.reference

    @property
    def rel_dev(self) -> float:
        return self.abs_dev / self.reference

    @property
    def status(self) -> str:
        if self.tolerance is None:
            return "INFO"
        kind, tol = self.tolerance
        dev = abs(self.rel_dev) if kind == "rel" else abs(self.abs_dev)
        return "PASS" if dev <= tol else "FAIL"


@dataclass
class Row:
    crystal: str
    lambda_i0: float
    cells: list = field(default_factory=list)
    error: str = ""
    warnings: tuple = ()

    @property
    def passed(self) -> bool:
        return not self.error and all(c.status != "FAIL" for c in self.cells)


def compute_row(crystal, lambda_i0, L=REFERENCE_LENGTH_MM, policy=RangePolicy.GRACE):
    """Computed table quantities for one idler wavelength, keyed as COLUMNS."""
    sol = solve_triplet(crystal, lambda_i0, 1, policy)
    idler = sample_idler_spectrum(crystal, sol, L, policy=policy)
    bw_i = fwhm(idler)
    bw_s = fwhm(signal_spectrum_from_idler(idler))
    values = {
        "lambda_i0": sol.lambda_i0,
        "lambda_i_min": bw_i.lo_crossing,
        "lambda_i_max": bw_i.hi_crossing,
        "dl_i_fwhm": bw_i.fwhm_wavelength,
        "lambda_s0": sol.lambda_s0,
        "lambda_s_min": bw_s.lo_crossing,
        "lambda_s_max": bw_s.hi_crossing,
        "dl_s_fwhm": bw_s.fwhm_wavelength,
        "lambda_p": sol.lambda_p,
        "period": sol.grating.period,
    }
    warnings = tuple(sol.validity_warnings) + tuple(idler.report)
    return values, warnings


def run(db, L=REFERENCE_LENGTH_MM, policy=RangePolicy.GRACE, reference=REFERENCE):
    rows = []
    for crystal_name, *ref in reference:
        ref = dict(zip(COLUMNS, ref))
        row = Row(crystal_name, ref["lambda_i0"])
        try:
            crystal = db.get(crystal_name)
            values, row.warnings = compute_row(crystal, ref["lambda_i0"], L, policy)
        except GvmSpdcError as exc:
            row.error = f"{exc.kind}: {exc}"
        else:
            row.cells = [Cell(name, values[name], ref[name], TOLERANCES[name])
                         for name in COLUMNS[1:]]
        rows.append(row)
    return rows
