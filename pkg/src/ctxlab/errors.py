"""Exception hierarchy shared by the library and the CLI."""

from __future__ import annotations


class CtxlabError(Exception):
    """Base class for all errors raised by ctxlab."""


class InputError(CtxlabError, ValueError):
    """Malformed input: unknown ids, invalid pairs, mismatched spaces."""


class DomainMismatch(InputError):
    """A model, coupling or partition does not fit the system it is checked against."""


class IncompleteModel(InputError):
    """An outcome map is missing entries required by an operation."""


class CapacityError(CtxlabError):
    """A feasibility problem would exceed the configured variable budget."""


class TheoremViolation(CtxlabError, AssertionError):
    """Two routes that must agree by theorem disagreed. Always a defect."""
