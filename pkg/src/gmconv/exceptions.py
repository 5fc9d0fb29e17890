"""Custom exceptions for gmconv."""


class GMConvError(Exception):
    """Base exception class for all gmconv errors."""

    pass


class ConfigError(GMConvError):
    """Raised when settings or an experiment configuration are invalid or incomplete."""

    pass


class InvalidOrderError(GMConvError):
    """Raised when a group is requested with a non-positive order."""

    pass


class CapacityError(GMConvError):
    """Raised when a construction would exceed the configured maximum group order."""

    pass


class InvalidGroupError(GMConvError):
    """Raised when multiplication/inverse tables or generators violate the group axioms."""

    pass


class InvalidActionError(GMConvError):
    """Raised when a semidirect-product action is not a homomorphism into Aut(G)."""

    pass


class InvalidSubgroupError(GMConvError):
    """Raised when a set of elements is not closed under multiplication and inverse."""

    pass


class InvalidRestrictionError(GMConvError):
    """Raised when restricting a group diagonal whose element lies outside the subgroup."""

    pass


class RepresentativeError(GMConvError):
    """Raised when coset representatives are inconsistent with the stabilizer."""

    pass


class ElementError(GMConvError):
    """Raised when an element id is outside 0..|G|-1."""

    pass


class GroupMismatchError(GMConvError):
    """Raised when operands are defined over different groups."""

    pass


class ShapeError(GMConvError):
    """Raised when array shapes do not conform."""

    def __init__(self, message: str, layer_index: int | None = None):
        self.layer_index = layer_index
        if layer_index is not None:
            message = f"layer {layer_index}: {message}"
        super().__init__(message)


class NoInverseError(GMConvError):
    """Raised when a group matrix is singular or too ill-conditioned to invert."""

    pass


class AccuracyError(GMConvError):
    """Raised when a numerical identity that must hold exactly is violated."""

    pass


class InvalidFamilyError(GMConvError):
    """Raised when a permutation family contains a permutation that is not a full cycle."""

    pass


class DuplicatePositionError(GMConvError):
    """Raised when LDR column positions repeat."""

    pass


class InvalidKernelError(GMConvError):
    """Raised when kernel parameters have the wrong size or rank budget."""

    pass


class KernelSupportError(GMConvError):
    """Raised when a kernel has support outside the window's neighborhood."""

    pass


class SpecParseError(GMConvError):
    """Raised when a group specification string cannot be parsed."""

    def __init__(self, message: str, spec: str, position: int):
        self.spec = spec
        self.position = position
        super().__init__(f"{message} at position {position} in {spec!r}")


class FormatError(GMConvError):
    """Raised when a matrix or parameter file is malformed."""

    pass
