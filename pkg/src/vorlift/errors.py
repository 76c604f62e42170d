"""Exception hierarchy shared across the toolkit."""


class VorliftError(Exception):
    """Base class for all toolkit errors."""


class DataError(VorliftError):
    """Input arrays contain non-finite or malformed data."""


class GeometryError(VorliftError):
    """A geometric precondition is violated (circle exits the mask,
    packing failure, inadmissible radius, uncovered nodes)."""


class ToleranceError(VorliftError):
    """A quadrature or iteration failed to reach the requested tolerance."""


class QuantizationError(VorliftError):
    """A boundary flux that should lie in 2*pi*Z has a residual above
    tolerance at the current resolution."""


class AliasingError(VorliftError):
    """Angle samples vary too fast for wrapped differences to be trusted;
    refine the sampling."""


class DegenerateSliceError(VorliftError):
    """A polyline runs tangentially along the slicing level set; the caller
    should perturb the level."""


class LiftError(VorliftError):
    """The field is not liftable at this resolution: loop residuals are not
    quantized, or the declared charge list is inconsistent with the field."""
