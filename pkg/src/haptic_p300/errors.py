"""Exception hierarchy shared by the pipeline modules."""


class HapticBCIError(Exception):
    """Base class for every error raised by this package."""


class InvalidParameterError(HapticBCIError, ValueError):
    pass


class OutOfRangeError(HapticBCIError, IndexError):
    pass


class InvalidStateError(HapticBCIError, ValueError):
    pass


class EmptySelectionError(HapticBCIError, ValueError):
    pass


class EmptyModelError(HapticBCIError):
    """No feature passed the stepwise entry threshold."""


class NumericalError(HapticBCIError, ArithmeticError):
    pass


# wire protocol errors; each decode failure has its own type
class WireError(HapticBCIError):
    pass


class FrameLengthError(WireError):
    pass


class ProtocolError(WireError):
    """Bad magic, version, start byte or reserved bytes."""


class CorruptionError(WireError):
    """Checksum mismatch."""


class CodeRangeError(WireError):
    pass


class IntegrityError(HapticBCIError):
    """Delivery chain lost, reordered or rejected a stimulus."""
