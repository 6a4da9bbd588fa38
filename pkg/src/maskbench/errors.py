"""Exception hierarchy shared by every maskbench module."""


class MaskingError(Exception):
    """Base class for domain errors (CLI exit code 2)."""


class DimensionError(MaskingError, ValueError):
    pass


class NonPhysicalStateError(MaskingError, ValueError):
    """A matrix or vector that does not describe a physical quantum state."""


class NotInRangeError(MaskingError, ValueError):
    """The bipartite state has no support on the masker's range."""


class PostSelectionEmpty(MaskingError, ValueError):
    """Coincidence post-selection discarded every term."""


class TamperDetected(MaskingError):
    """Shares reconstruct to a point outside the Bloch ball.

    ``pixels`` holds ``(row, col)`` coordinates when raised by image
    reconstruction; it is empty for a single pixel.
    """

    def __init__(self, message, pixels=()):
        super().__init__(message)
        self.pixels = list(pixels)


class ShareFormatError(MaskingError, ValueError):
    pass
