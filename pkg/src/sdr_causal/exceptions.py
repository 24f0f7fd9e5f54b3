"""Exception hierarchy shared by every module."""


class SDRError(ValueError):
    """Base class for all errors raised by sdr_causal."""


class GridMismatch(SDRError):
    """Two spectra (or a spectrum and a whitener) live on different grids."""


class DegenerateSpectrum(SDRError):
    """A spectrum has zero mean or zero maximum where a positive one is needed."""


class SeriesTooShort(SDRError):
    pass


class LagTooLarge(SDRError):
    pass


class DegenerateDraw(SDRError):
    """Random coefficient draw collapsed to the zero vector repeatedly."""


class UnstableProcess(SDRError):
    """AR coefficients outside the stationarity region."""


class EmptyCollection(SDRError):
    pass


class ConfigError(SDRError):
    """Invalid experiment or CLI configuration."""
