"""Exception types shared across the package."""


class DimensionMismatch(ValueError):
    """Operands do not conform (contract violation)."""


class SingularFactor(ArithmeticError):
    """A triangular factor has a zero (or numerically zero) diagonal entry.

    ``index`` is the offending diagonal position.
    """

    def __init__(self, msg, index):
        super().__init__(msg)
        self.index = index


class SingularMatrix(ArithmeticError):
    """Elimination hit an exactly zero pivot column.

    ``column`` is the column where no nonzero pivot was found.
    """

    def __init__(self, msg, column):
        super().__init__(msg)
        self.column = column


class RankDeficient(ArithmeticError):
    """Strong RRQR selected fewer than b independent rows.

    ``index`` is the diagonal position of R that fell below tolerance.
    """

    def __init__(self, msg, index):
        super().__init__(msg)
        self.index = index


class NonConvergence(ArithmeticError):
    """The strong-RRQR swap loop exceeded its iteration cap.

    ``worst`` carries the largest multiplier magnitude still above the
    threshold when the cap was hit.
    """

    def __init__(self, msg, worst):
        super().__init__(msg)
        self.worst = worst


class UnsupportedFamily(ValueError):
    """A gallery family that is listed but not generated by this package."""
