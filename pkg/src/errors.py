"""
Errors
======
Exception hierarchy shared by every module. The CLI maps
``QuasiComplexError`` subclasses to exit code 2 (input errors) and
``CertificateFailure`` to exit code 3.
"""


class QuasiComplexError(Exception):
    """Base class for all workbench errors."""


class ShapeMismatch(QuasiComplexError):
    """Operator shapes do not chain, or a matrix does not match its spaces."""


class StepOutOfRange(QuasiComplexError):
    """A step index outside 0..N was requested."""


class NotAComplex(QuasiComplexError):
    """Curvature exceeds the exactness tolerance where a complex is required."""


class NotAnEndomorphism(QuasiComplexError):
    """Endomorphism maps fail to commute with the differentials."""


class ZeroCovector(QuasiComplexError):
    """A symbol sample sits on the zero section (|xi| <= 0)."""


class UnsupportedDimension(QuasiComplexError):
    """Requested generator dimension is not supported."""


class ParseError(QuasiComplexError):
    """Malformed mesh, complex or sample file."""


class NotClosedSurface(QuasiComplexError):
    """Some edge is not shared by exactly two faces."""


class NotOrientable(QuasiComplexError):
    """Face orientations cannot be made globally consistent."""


class CertificateFailure(QuasiComplexError):
    """A numerical certificate did not meet its threshold."""


class InvalidMetric(QuasiComplexError):
    """Gram matrix is not Hermitian positive-definite."""
