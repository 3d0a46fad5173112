"""Sellmeier dispersion models and their analytic derivatives.

All wavelengths are vacuum wavelengths in micrometres; wavevectors are in
rad/um.  Every evaluator accepts a scalar or an array and returns the same
shape.

Supported functional forms (``lam2`` is the squared wavelength):

``one_pole``           n^2 = A + B/(lam2 - C) - D*lam2
``two_pole``           n^2 = A + B/(lam2 - C) + D/(lam2 - E) - F*lam2
``three_pole``         n^2 = A + B/(lam2 - C) + D/(lam2 - E) + G/(lam2 - H) - F*lam2
``one_pole_lambda2``   n^2 = A + B*lam2/(lam2 - C) - D*lam2
``two_pole_lambda2``   n^2 = A + B*lam2/(lam2 - C) + D*lam2/(lam2 - E) - F*lam2

Coefficients are always ordered as the constant term, then (strength,
resonance) pairs, then the infrared lambda^2 coefficient.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import (
    DispersionDomainError,
    NoMinimumError,
    NotUnimodalError,
    OutOfRangeError,
)

#: Speed of light in um * THz (c0 = 299792458 m/s exactly).
C0_UM_THZ = 299.792458

#: How far past ``validity_max`` a model may be evaluated (um).
GRACE_MARGIN_UM = 0.65
#: Half a unit in the last digit of the 0.65 um figure; wavelengths quoted at
#: two decimals that round to validity_max + 0.65 are admitted.
GRACE_ROUNDING_UM = 0.005

_N_POLES = {
    "one_pole": 1,
    "two_pole": 2,
    "three_pole": 3,
    "one_pole_lambda2": 1,
    "two_pole_lambda2": 2,
}


class RangePolicy(str, enum.Enum):
    """What to do with wavelengths outside a model's validity range.

    ``GRACE`` admits up to ``GRACE_MARGIN_UM`` beyond ``validity_max`` (the
    caller is expected to record a warning), ``STRICT`` admits only the
    validity range itself and ``OFF`` performs no check.
    """

    STRICT = "strict"
    GRACE = "grace"
    OFF = "off"


@dataclass(frozen=True)
class SellmeierModel:
    form_id: str
    coefficients: tuple
    validity_min: float
    validity_max: float
    source: str = ""
    label: str = ""

    def __post_init__(self):
        if self.form_id not in _N_POLES:
            raise ValueError(
                f"unknown Sellmeier form {self.form_id!r}; "
                f"expected one of {sorted(_N_POLES)}"
            )
        coefficients = tuple(float(c) for c in self.coefficients)
        object.__setattr__(self, "coefficients", coefficients)
        arity = 2 + 2 * _N_POLES[self.form_id]
        if len(coefficients) != arity:
            raise ValueError(
                f"form {self.form_id!r} takes {arity} coefficients, "
                f"got {len(coefficients)}"
            )
        if not 0 < self.validity_min < self.validity_max:
            raise ValueError(
                f"invalid validity range [{self.validity_min}, {self.validity_max}]"
            )

    @functools.cached_property
    def _canonical(self):
        # Reduce every form to A + sum(B_j / (lam2 - C_j)) - D*lam2.
        c = self.coefficients
        a, d = c[0], c[-1]
        poles = []
        for b, r in zip(c[1:-1:2], c[2:-1:2]):
            if self.form_id.endswith("_lambda2"):
                # B*lam2/(lam2 - C) == B + B*C/(lam2 - C)
                a += b
                b = b * r
            poles.append((b, r))
        return a, tuple(poles), d

    @property
    def upper_limit(self) -> float:
        """Longest wavelength admitted under the grace policy."""
        return self.validity_max + GRACE_MARGIN_UM + GRACE_ROUNDING_UM

    def in_grace(self, lam) -> bool:
        """True if any of ``lam`` lies past validity_max (inside the grace band)."""
        return bool(np.any(np.asarray(lam) > self.validity_max))


def to_frequency(lam):
    """Vacuum wavelength (um) to frequency (THz)."""
    return (C0_UM_THZ / np.asarray(lam, dtype=float))[()]


def constant_model(n: float, validity=(0.1, 20.0)) -> SellmeierModel:
    """Dispersionless medium with index ``n``."""
    return SellmeierModel("one_pole", (n * n, 0.0, 0.0, 0.0), *validity,
                          source="constant index", label=f"const:{n}")


def check_range(model: SellmeierModel, lam, policy=RangePolicy.GRACE) -> None:
    policy = RangePolicy(policy)
    if policy is RangePolicy.OFF:
        return
    lam = np.asarray(lam, dtype=float)
    if np.any(~np.isfinite(lam)) or np.any(lam <= 0):
        raise OutOfRangeError("wavelength must be finite and positive")
    lo, hi = float(lam.min()), float(lam.max())
    limit = model.validity_max if policy is RangePolicy.STRICT else model.upper_limit
    name = model.label or model.source or model.form_id
    if lo < model.validity_min:
        raise OutOfRangeError(
            f"{lo:.4f} um is below validity_min={model.validity_min} um of {name}"
        )
    if hi > limit:
        what = "validity_max" if policy is RangePolicy.STRICT else "validity_max + grace"
        raise OutOfRangeError(f"{hi:.4f} um exceeds {what}={limit:.4f} um of {name}")


def _index_squared(model, lam2, order=0):
    """n^2 or its derivatives with respect to lam2 (not lam)."""
    a, poles, d = model._canonical
    if order == 0:
        out = a - d * lam2
        for b, c in poles:
            out = out + b / (lam2 - c)
    elif order == 1:
        out = -d + 0.0 * lam2
        for b, c in poles:
            out = out - b / (lam2 - c) ** 2
    else:
        out = 0.0 * lam2
        for b, c in poles:
            out = out + 2.0 * b / (lam2 - c) ** 3
    return out


def _evaluate(model, lam, policy):
    check_range(model, lam, policy)
    lam = np.asarray(lam, dtype=float)
    lam2 = lam * lam
    with np.errstate(divide="ignore", invalid="ignore"):
        s = _index_squared(model, lam2)
    bad = ~np.isfinite(s) | (s <= 0.0)
    if np.any(bad):
        at = float(np.atleast_1d(lam)[np.atleast_1d(bad)][0])
        _, poles, _ = model._canonical
        if poles:
            j = int(np.argmin([abs(at * at - c) for _, c in poles]))
            term = f"pole term {j + 1} (resonance {poles[j][1]:.6g} um^2)"
        else:
            term = "constant term"
        raise DispersionDomainError(
            f"n^2 is non-physical ({float(np.atleast_1d(s)[np.atleast_1d(bad)][0]):.6g}) "
            f"at {at:.6g} um; offending {term}"
        )
    return lam, lam2, s


def refractive_index(model: SellmeierModel, lam, policy=RangePolicy.GRACE):
    _, _, s = _evaluate(model, lam, policy)
    return np.sqrt(s)[()]


def dn_dlambda(model: SellmeierModel, lam, policy=RangePolicy.GRACE):
    """Analytic dn/dlambda in 1/um."""
    lam, lam2, s = _evaluate(model, lam, policy)
    n = np.sqrt(s)
    # dn/dlam = (dS/dlam2) * 2 lam / (2 n)
    return (_index_squared(model, lam2, 1) * lam / n)[()]


def d2n_dlambda2(model: SellmeierModel, lam, policy=RangePolicy.GRACE):
    lam, lam2, s = _evaluate(model, lam, policy)
    n = np.sqrt(s)
    s1 = _index_squared(model, lam2, 1) * 2.0 * lam
    s2 = _index_squared(model, lam2, 2) * 4.0 * lam2 + 2.0 * _index_squared(model, lam2, 1)
    return (s2 / (2.0 * n) - s1 * s1 / (4.0 * n**3))[()]


def group_index(model: SellmeierModel, lam, policy=RangePolicy.GRACE):
    """n_g = n - lambda * dn/dlambda."""
    lam_arr = np.asarray(lam, dtype=float)
    return (refractive_index(model, lam, policy)
            - lam_arr * dn_dlambda(model, lam, policy))[()]


def group_index_slope(model: SellmeierModel, lam, policy=RangePolicy.GRACE):
    """d n_g / d lambda = -lambda * d2n/dlambda2."""
    return (-np.asarray(lam, dtype=float) * d2n_dlambda2(model, lam, policy))[()]


def wavevector(model: SellmeierModel, lam, policy=RangePolicy.GRACE):
    """k = 2 pi n / lambda in rad/um."""
    return (2.0 * np.pi * refractive_index(model, lam, policy)
            / np.asarray(lam, dtype=float))[()]


def group_index_minimum(model: SellmeierModel, bracket=(1.0, 3.0),
                        policy=RangePolicy.GRACE, samples: int = 400):
    """Locate the interior minimum of the group index on ``bracket``.

    Returns ``(lambda_min, n_g(lambda_min))``.  The slope of n_g is scanned on
    ``samples`` points first; exactly one minus-to-plus sign change is
    required.
    """
    lo, hi = (float(b) for b in bracket)
    return _group_index_minimum(model, lo, hi, RangePolicy(policy), samples)


@functools.lru_cache(maxsize=256)
def _group_index_minimum(model, lo, hi, policy, samples):
    if not lo < hi:
        raise ValueError(f"empty bracket [{lo}, {hi}]")
    check_range(model, [lo, hi], policy)
    grid = np.linspace(lo, hi, samples)
    slope = group_index_slope(model, grid, RangePolicy.OFF)
    sign = np.sign(slope)
    changes = np.flatnonzero(sign[:-1] * sign[1:] < 0)
    rising = [i for i in changes if sign[i] < 0]
    if not rising:
        raise NoMinimumError(
            f"no interior group-index minimum on [{lo}, {hi}] um"
        )
    if len(changes) > 1:
        raise NotUnimodalError(
            f"group-index slope changes sign {len(changes)} times on [{lo}, {hi}] um"
        )
    i = rising[0]
    lam = brentq(lambda x: float(group_index_slope(model, x, RangePolicy.OFF)),
                 grid[i], grid[i + 1], xtol=1e-13, rtol=4 * np.finfo(float).eps)
    return lam, float(group_index(model, lam, RangePolicy.OFF))
