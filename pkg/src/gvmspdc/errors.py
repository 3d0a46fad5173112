"""Exception hierarchy.

Every error carries a short machine-readable ``kind`` so the command line
can report it and map it onto an exit code.
"""


class GvmSpdcError(Exception):
    kind = "error"


class DispersionDomainError(GvmSpdcError, ValueError):
    """Sellmeier expression is non-physical at the requested wavelength."""

    kind = "dispersion_domain"


class OutOfRangeError(GvmSpdcError, ValueError):
    """Wavelength outside the admissible range of a dispersion model."""

    kind = "out_of_range"


class EnergyConservationError(GvmSpdcError, ValueError):
    kind = "energy_conservation"


class BackwardQpmError(GvmSpdcError, ValueError):
    """k_p - k_s - k_i <= 0: no forward quasi-phase-matching period exists."""

    kind = "backward_qpm"


class NoMinimumError(GvmSpdcError, ValueError):
    kind = "no_interior_minimum"


class NotUnimodalError(GvmSpdcError, ValueError):
    kind = "bracket_not_unimodal"


class NoGvmSolutionError(GvmSpdcError, ValueError):
    kind = "no_gvm_solution"


class GridError(GvmSpdcError, ValueError):
    """Sampling grid cannot resolve the requested quantity."""

    kind = "grid"


class DatabaseError(GvmSpdcError, ValueError):
    kind = "database"


class CrystalNotFoundError(GvmSpdcError, KeyError):
    kind = "crystal_not_found"

    def __str__(self):
        return str(self.args[0]) if self.args else ""
