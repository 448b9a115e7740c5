"""
Exception hierarchy for arum-consideration.

Every error raised on purpose by the library derives from ArumError. The
exit_code attribute is what the CLI returns when the error ends a run.
"""

from typing import Any, Optional


class ArumError(Exception):
    """Base error for the library and CLI."""

    exit_code = 1


class ParseError(ArumError):
    """A model, field or scenario file could not be parsed."""

    exit_code = 2


class ValidationError(ArumError):
    """Input parsed but violates an invariant or precondition."""

    exit_code = 3


class ArgmaxTieError(ArumError):
    """Some atom has two alternatives tied at the maximum utility."""

    exit_code = 4

    def __init__(self, atom_index: Optional[int], u: Any, message: str = ""):
        self.atom_index = atom_index
        self.u = u
        detail = message or f"atom {atom_index} has a utility tie at u={u}"
        super().__init__(detail)


class InfeasibleError(ArumError):
    """The atom family cannot reproduce the observed field."""

    exit_code = 5


class NoKMaximalPointError(ArumError):
    """The grid has no k-maximal point for the requested alternative."""

    exit_code = 6

    def __init__(self, k: int, message: str = ""):
        self.k = k
        super().__init__(message or f"grid has no {k}-maximal point")


class FullConsiderationError(ArumError):
    """Every atom already considers the alternative (gamma = 0)."""

    exit_code = 7


class NotCartesianProductError(ArumError):
    """A covariate or rectangle grid is not a product of coordinate sets."""

    exit_code = 8


class UnsupportedAnalysisError(ArumError):
    """The analysis result has no plot data, or the analysis type is unknown."""

    exit_code = 9


EXIT_CODES = {
    cls.__name__: cls.exit_code
    for cls in (
        ParseError,
        ValidationError,
        ArgmaxTieError,
        InfeasibleError,
        NoKMaximalPointError,
        FullConsiderationError,
        NotCartesianProductError,
        UnsupportedAnalysisError,
    )
}
