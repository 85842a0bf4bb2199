"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class SwanError(Exception):
    """Base class for all errors raised by :mod:`swan`."""


class InvalidArgument(SwanError, ValueError):
    """An argument violates the documented preconditions."""


class OutOfRange(InvalidArgument):
    """A coordinate lies outside the span covered by the waveguide."""


class InfeasibleLayout(SwanError):
    """No placement satisfies the segment-bound and spacing constraints."""


class NumericDomainError(SwanError, ArithmeticError):
    """A closed-form solution left its real domain (negative discriminant)."""


class UnsupportedGeometry(InvalidArgument):
    """A closed-form approximation was requested outside its derivation geometry."""


class UndefinedDerivative(InvalidArgument):
    """The requested derivative does not exist for the given parameters."""
