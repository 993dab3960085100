"""Custom exceptions for the two-way relay density-evolution toolkit."""


class RelayCodingError(Exception):
    """Base exception for all toolkit errors."""
    def __init__(self, message: str = "Relay coding error occurred"):
        self.message = message
        super().__init__(self.message)


class QuadratureError(RelayCodingError):
    """Raised when the quadrature normalization self-check fails."""
    def __init__(self, mass: float = None, z: int = None, message: str = None):
        if message is None:
            if mass is not None:
                message = f"Quadrature normalization failed for z={z}: integral is {mass:.12f}"
            else:
                message = "Quadrature normalization failed"
        super().__init__(message)
        self.mass = mass
        self.z = z


class BracketError(RelayCodingError):
    """Raised when a root or threshold bracket does not straddle the target."""
    def __init__(self, message: str = "Bracket does not straddle the target"):
        super().__init__(message)


class InvalidDegreeError(RelayCodingError):
    """Raised when ensemble degrees violate the construction constraints."""
    def __init__(self, d_l: int = None, d_r: int = None, message: str = None):
        if message is None:
            message = f"Invalid degree pair (d_l={d_l}, d_r={d_r})"
        super().__init__(message)
        self.d_l = d_l
        self.d_r = d_r


class InvalidChainError(RelayCodingError):
    """Raised when a spatially coupled chain length is invalid."""
    def __init__(self, length: int = None, message: str = None):
        if message is None:
            message = f"Invalid chain length L={length}; L must be at least 1"
        super().__init__(message)
        self.length = length


class DegenerateFitError(RelayCodingError):
    """Raised when threshold extrapolation has too few distinct chain lengths."""
    def __init__(self, message: str = "Extrapolation needs at least 3 points with distinct L"):
        super().__init__(message)


class SizeMismatchError(RelayCodingError):
    """Raised when block length and degrees do not give an integral check count."""
    def __init__(self, n: int = None, d_l: int = None, d_r: int = None, message: str = None):
        if message is None:
            message = f"n*d_l = {n}*{d_l} is not divisible by d_r = {d_r}"
        super().__init__(message)
        self.n = n


class DimensionTooLargeError(RelayCodingError):
    """Raised when exhaustive ML decoding would enumerate too many codewords."""
    def __init__(self, dimension: int = None, limit: int = None, message: str = None):
        if message is None:
            message = f"Code dimension {dimension} exceeds the enumeration limit {limit}"
        super().__init__(message)
        self.dimension = dimension
