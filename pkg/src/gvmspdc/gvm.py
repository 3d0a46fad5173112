"""Signal-idler group-velocity matching.

The idler wavelength is the free parameter.  The signal wavelength is the
point on the short-wavelength side of the signal model's group-index minimum
where n_g equals the idler group index; pump wavelength and poling period then
follow from energy conservation and dk = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import dispersion as disp
from .dispersion import RangePolicy
from .errors import GvmSpdcError, NoGvmSolutionError
from .phasematch import (
    CrystalSpec,
    QpmGrating,
    delta_k,
    poling_period_for,
    pump_wavelength,
)

GVM_TOL = 1e-10
#: Closer than this to the group-index minimum a solution is flagged.
NEAR_DEGENERATE_UM = 0.05
#: Default search interval for the group-index minimum.
MINIMUM_BRACKET = (1.0, 3.0)


@dataclass(frozen=True)
class GvmSolution:
    lambda_p: float
    lambda_s0: float
    lambda_i0: float
    grating: QpmGrating
    matched_group_index: float
    residual_gvm: float
    residual_dk: float
    validity_warnings: tuple = field(default_factory=tuple)

    @property
    def poling_period(self) -> float:
        return self.grating.period


@dataclass
class TuningCurve:
    """Matched (signal, idler) pairs in grid order plus the points that failed."""

    pairs: list
    failures: list

    @property
    def signal(self):
        return np.array([s for s, _ in self.pairs])

    @property
    def idler(self):
        return np.array([i for _, i in self.pairs])


def branch_minimum(model) -> float:
    """Group-index minimum wavelength of ``model`` inside its admissible range."""
    lo = max(MINIMUM_BRACKET[0], model.validity_min)
    hi = min(MINIMUM_BRACKET[1], model.upper_limit)
    return disp.group_index_minimum(model, (lo, hi))[0]


def solve_signal_for_idler(crystal: CrystalSpec, lambda_i0: float,
                           policy=RangePolicy.GRACE) -> float:
    """Signal wavelength whose group index equals that of the idler at
    ``lambda_i0``."""
    lambda_i0 = float(lambda_i0)
    idler_min = branch_minimum(crystal.idler_model)
    if not lambda_i0 > idler_min:
        raise NoGvmSolutionError(
            f"idler below group-index minimum: {lambda_i0} um <= {idler_min:.4f} um"
        )
    disp.check_range(crystal.idler_model, lambda_i0, policy)
    target = float(disp.group_index(crystal.idler_model, lambda_i0, policy))

    sig = crystal.signal_model
    lo = sig.validity_min + 0.01
    hi = branch_minimum(sig) - 1e-6

    def mismatch(lam):
        return float(disp.group_index(sig, lam, RangePolicy.OFF)) - target

    f_lo, f_hi = mismatch(lo), mismatch(hi)
    if f_hi > 0:
        raise NoGvmSolutionError(
            "no GVM solution: idler too close to group-index minimum "
            f"(target n_g {target:.6f} below signal-branch minimum {f_hi + target:.6f})"
        )
    if f_lo < 0:
        raise NoGvmSolutionError(
            "no GVM solution: idler too far into IR for this crystal's transparency "
            f"(target n_g {target:.6f} above {f_lo + target:.6f} at {lo:.3f} um)"
        )
    lam_s = brentq(mismatch, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps,
                   maxiter=200)
    if abs(mismatch(lam_s)) >= GVM_TOL:
        raise NoGvmSolutionError(
            f"GVM root did not converge (residual {mismatch(lam_s):.3g})"
        )
    return lam_s


def _warnings(crystal, lambda_p, lambda_s, lambda_i):
    out = []
    for role, lam in (("pump", lambda_p), ("signal", lambda_s), ("idler", lambda_i)):
        model = crystal.model(role)
        if model.in_grace(lam):
            how = "grace margin" if lam <= model.upper_limit else "unchecked"
            out.append(
                f"{role} {lam:.4f} um beyond validity_max {model.validity_max} um "
                f"of {model.label} ({how})"
            )
    if lambda_i > crystal.absorption_edge:
        out.append(
            f"idler {lambda_i:.4f} um beyond {crystal.name} absorption edge "
            f"{crystal.absorption_edge} um"
        )
    gap = lambda_i - branch_minimum(crystal.idler_model)
    if gap < NEAR_DEGENERATE_UM:
        out.append(
            f"near-degenerate: idler only {gap:.3g} um above the group-index minimum"
        )
    return tuple(out)


def solve_triplet(crystal: CrystalSpec, lambda_i0: float, order: int = 1,
                  policy=RangePolicy.GRACE) -> GvmSolution:
    """Complete group-velocity-matched QPM solution for a chosen idler."""
    lambda_i0 = float(lambda_i0)
    lambda_s0 = solve_signal_for_idler(crystal, lambda_i0, policy)
    lambda_p = float(pump_wavelength(lambda_s0, lambda_i0))
    period = poling_period_for(crystal, lambda_p, lambda_s0, lambda_i0, order, policy)
    grating = QpmGrating(period, order)
    ng_s = float(disp.group_index(crystal.signal_model, lambda_s0, policy))
    ng_i = float(disp.group_index(crystal.idler_model, lambda_i0, policy))
    dk = float(delta_k(crystal, lambda_p, lambda_s0, lambda_i0, grating, policy))
    return GvmSolution(
        lambda_p=lambda_p,
        lambda_s0=lambda_s0,
        lambda_i0=lambda_i0,
        grating=grating,
        matched_group_index=ng_i,
        residual_gvm=abs(ng_s - ng_i),
        residual_dk=abs(dk),
        validity_warnings=_warnings(crystal, lambda_p, lambda_s0, lambda_i0),
    )


def tuning_curve(crystal: CrystalSpec, idler_grid, policy=RangePolicy.GRACE) -> TuningCurve:
    pairs, failures = [], []
    for lam_i in idler_grid:
        lam_i = float(lam_i)
        try:
            pairs.append((solve_signal_for_idler(crystal, lam_i, policy), lam_i))
        except GvmSpdcError as exc:
            failures.append((lam_i, exc.kind, str(exc)))
    return TuningCurve(pairs, failures)
