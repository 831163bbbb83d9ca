"""Exception hierarchy shared by all loophaf modules."""


class LoopHafError(Exception):
    """Base class for every error raised by loophaf."""


class ShapeError(LoopHafError, ValueError):
    """An argument has the wrong dimension or length."""


class NonSquareError(ShapeError):
    pass


class LengthMismatchError(ShapeError):
    pass


class DimensionMismatchError(ShapeError):
    pass


class OddDimensionError(ShapeError):
    pass


class EvenDimensionError(ShapeError):
    pass


class AsymmetryError(LoopHafError, ValueError):
    """Raised when ``raw[i, j]`` and ``raw[j, i]`` differ by more than the tolerance."""

    def __init__(self, i, j, deviation, tol):
        self.i, self.j, self.deviation, self.tol = i, j, deviation, tol
        super().__init__(
            f"entries ({i}, {j}) and ({j}, {i}) differ by {deviation:.3e} > tol={tol:.3e}"
        )


class NonFiniteError(LoopHafError, ValueError):
    pass


class CapExceededError(LoopHafError):
    """A brute-force enumeration or series degree is beyond the configured cap."""


class SeriesError(LoopHafError, ValueError):
    """Truncated power-series precondition violated."""


class SeriesShapeMismatchError(SeriesError):
    pass


class NonzeroConstantTermError(SeriesError):
    pass


class ConstantTermNotOneError(SeriesError):
    pass


class NonUnitConstantTermError(SeriesError):
    pass


class DegreeOutOfRangeError(SeriesError):
    pass


class NotPositiveSemidefiniteError(LoopHafError, ValueError):
    pass


class SingularMatrixError(LoopHafError, ValueError):
    pass


class NonContractiveError(LoopHafError, ValueError):
    pass
