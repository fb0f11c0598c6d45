"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Operand shapes are incompatible or produce non-integral extents."""


class FormatError(ValueError):
    """Malformed on-disk data (PPM/PGM, WFDT, checkpoint, config)."""


class SymmetryError(ValueError):
    """Inverse Fourier transform of a spectrum left a non-negligible imaginary part."""


class GraphError(RuntimeError):
    """Backward was requested on a value detached from any recorded graph."""
