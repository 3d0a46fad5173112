"""Collinear quasi-phase matching: energy conservation, phase mismatch and
poling periods.

The phase mismatch is ``dk = k_p - k_s - k_i - 2 pi m / period`` with
``k = 2 pi n(lambda) / lambda`` taken from the role-specific dispersion model
of the crystal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dispersion as disp
from .dispersion import RangePolicy, SellmeierModel
from .errors import BackwardQpmError, EnergyConservationError

ENERGY_RTOL = 1e-9

ROLES = ("pump", "signal", "idler")


@dataclass(frozen=True)
class QpmGrating:
    period: float
    order: int = 1

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError(f"poling period must be positive, got {self.period}")
        _check_order(self.order)

    @property
    def grating_wavevector(self) -> float:
        """2 pi m / period in rad/um."""
        return 2.0 * np.pi * self.order / self.period


@dataclass(frozen=True)
class CrystalSpec:
    """A crystal with one dispersion model per interacting field."""

    name: str
    pump_model: SellmeierModel
    signal_model: SellmeierModel
    idler_model: SellmeierModel
    absorption_edge: float

    def __post_init__(self):
        for role in ROLES:
            label = self.model(role).label
            if label and not label.startswith(self.name + ":"):
                raise ValueError(
                    f"{role} model {label!r} does not belong to crystal {self.name!r}"
                )

    def model(self, role: str) -> SellmeierModel:
        try:
            return getattr(self, f"{role}_model")
        except AttributeError:
            raise KeyError(f"unknown role {role!r}; expected one of {ROLES}") from None


def _check_order(order):
    if int(order) != order or order < 1 or order % 2 == 0:
        raise ValueError(f"QPM order must be an odd positive integer, got {order}")


def pump_wavelength(lambda_s, lambda_i):
    """Pump wavelength from 1/lambda_p = 1/lambda_s + 1/lambda_i."""
    lambda_s = np.asarray(lambda_s, dtype=float)
    lambda_i = np.asarray(lambda_i, dtype=float)
    if np.any(lambda_s <= 0) or np.any(lambda_i <= 0):
        raise ValueError("wavelengths must be positive")
    return (1.0 / (1.0 / lambda_s + 1.0 / lambda_i))[()]


def partner_wavelength(lambda_p, lambda_x):
    """Wavelength of the partner photon at fixed pump: 1/l = 1/l_p - 1/l_x."""
    lambda_p = np.asarray(lambda_p, dtype=float)
    lambda_x = np.asarray(lambda_x, dtype=float)
    inv = 1.0 / lambda_p - 1.0 / lambda_x
    if np.any(inv <= 0):
        raise ValueError("partner wavelength undefined: lambda_x <= lambda_p")
    return (1.0 / inv)[()]


def check_energy_conservation(lambda_p, lambda_s, lambda_i, rtol=ENERGY_RTOL):
    lp = np.asarray(lambda_p, dtype=float)
    inv_p = 1.0 / lp
    resid = np.abs(inv_p - 1.0 / np.asarray(lambda_s) - 1.0 / np.asarray(lambda_i))
    worst = float(np.max(resid / inv_p))
    if not worst <= rtol:
        raise EnergyConservationError(
            f"1/lambda_p != 1/lambda_s + 1/lambda_i (relative error {worst:.3g})"
        )


def phase_mismatch_material(crystal: CrystalSpec, lambda_p, lambda_s, lambda_i,
                            policy=RangePolicy.GRACE):
    """k_p - k_s - k_i without the grating term (rad/um)."""
    check_energy_conservation(lambda_p, lambda_s, lambda_i)
    kp = disp.wavevector(crystal.pump_model, lambda_p, policy)
    ks = disp.wavevector(crystal.signal_model, lambda_s, policy)
    ki = disp.wavevector(crystal.idler_model, lambda_i, policy)
    return (kp - ks - ki)[()]


def delta_k(crystal: CrystalSpec, lambda_p, lambda_s, lambda_i,
            grating: QpmGrating, policy=RangePolicy.GRACE):
    """Phase mismatch in rad/um; accepts arrays for the three wavelengths."""
    material = phase_mismatch_material(crystal, lambda_p, lambda_s, lambda_i, policy)
    return (np.asarray(material) - grating.grating_wavevector)[()]


def poling_period_for(crystal: CrystalSpec, lambda_p, lambda_s, lambda_i,
                      order: int = 1, policy=RangePolicy.GRACE) -> float:
    """Poling period (um) that makes delta_k vanish for the given triple."""
    _check_order(order)
    material = float(phase_mismatch_material(crystal, lambda_p, lambda_s, lambda_i,
                                             policy))
    if material <= 0:
        raise BackwardQpmError(
            f"k_p - k_s - k_i = {material:.6g} rad/um <= 0: "
            "QPM not required / backward geometry"
        )
    return 2.0 * np.pi * order / material
