"""Exception hierarchy.

``InvalidArgument`` covers bad inputs and maps to CLI exit code 1. Everything
derived from ``NumericalError`` is a numerical failure and maps to exit code 2.
"""


class WvaError(Exception):
    pass


class InvalidArgument(WvaError, ValueError):
    pass


class NumericalError(WvaError, ArithmeticError):
    pass


class NumericalDegeneracy(NumericalError):
    pass


class CutoffTooSmall(NumericalError):
    def __init__(self, message, required_cutoff=None):
        super().__init__(message)
        self.required_cutoff = required_cutoff


class DegeneratePostSelection(NumericalError):
    pass


class NoLight(NumericalError):
    pass


class EmptyRun(NumericalError):
    pass
