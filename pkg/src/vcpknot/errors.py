"""Exception types raised by vcpknot."""


class VcpKnotError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(VcpKnotError, ValueError):
    """An argument has the wrong ambient dimension or array shape."""

    def __init__(self, argument, expected, got):
        self.argument = argument
        self.expected = expected
        self.got = got
        super().__init__(f"argument {argument!r}: expected {expected}, got {got}")


class FrameError(VcpKnotError, ValueError):
    """A frame is not orthonormal within tolerance."""


class NormalityError(VcpKnotError, ValueError):
    """A vector or field is not normal to the tangent plane within tolerance."""

    def __init__(self, message, violation):
        self.violation = violation
        super().__init__(f"{message} (violation {violation:.3e})")


class ImmersionError(VcpKnotError, ValueError):
    """The immersion condition fails at some grid sample."""

    def __init__(self, message, index=None):
        self.index = index
        if index is not None:
            message = f"{message} at sample {index}"
        super().__init__(message)


class ConfigError(VcpKnotError, ValueError):
    """An experiment configuration does not match the schema."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"config field {field!r}: {message}")
