"""Group-velocity-matched, widely non-degenerate SPDC in QPM crystals."""

__version__ = "0.1.0"
