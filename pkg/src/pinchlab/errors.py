"""Exception hierarchy.  The three base classes map onto CLI exit codes."""

from __future__ import annotations


class PinchlabError(Exception):
    exit_code = 1


class InputError(PinchlabError):
    exit_code = 2


class SymbolicError(PinchlabError):
    exit_code = 3


class NumericError(PinchlabError):
    exit_code = 4


# input / parsing
class SchemaError(InputError):
    pass


class ShapeError(InputError):
    pass


class SymbolError(InputError):
    pass


class ExpressionSyntaxError(InputError):
    pass


# symbolic stage
class InconsistentSystem(SymbolicError):
    pass


class DegenerateInput(SymbolicError):
    pass


class ReductionError(SymbolicError):
    pass


class UnsupportedPinch(SymbolicError):
    pass


class NotFinite(SymbolicError):
    pass


class NotOneLoopSubset(SymbolicError):
    pass


class ShapeMismatch(SymbolicError):
    pass


class SingularLinearPart(SymbolicError):
    pass


class NormalFormFailure(SymbolicError):
    pass


# numeric stage
class PoleAtPoint(NumericError):
    pass


class ContourAmbiguous(NumericError):
    pass


class NotPositiveDefinite(NumericError):
    pass


class NonConvergent(NumericError):
    pass


class InsufficientSamples(NumericError):
    pass


class DegenerateSamples(NumericError):
    pass
