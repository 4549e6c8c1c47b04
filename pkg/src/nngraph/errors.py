"""Exception types raised across the package."""

from __future__ import annotations


class NNGraphError(Exception):
    """Base class for all package errors."""


class DomainError(NNGraphError, ValueError):
    """An argument lies outside the domain of a formula."""


class TieError(NNGraphError):
    """Two or more points attain a row minimum exactly.

    ``point`` is the row index and ``tied`` the set of minimizers.
    """

    def __init__(self, point: int, tied):
        self.point = int(point)
        self.tied = sorted(int(t) for t in tied)
        super().__init__(f"point {self.point} has tied nearest neighbors {self.tied}")


class GenerationError(NNGraphError):
    """A dataset generator could not satisfy its constraints."""


class EmptyActiveSet(NNGraphError):
    """Every candidate was eliminated, which means some bound was violated."""

    def __init__(self, point: int, round_index: int | None = None):
        self.point = int(point)
        self.round_index = round_index
        where = "" if round_index is None else f" (round {round_index})"
        super().__init__(f"active set for point {self.point} became empty{where}")


class SingularAnchorError(NNGraphError):
    """The anchor block of the squared-distance matrix is numerically singular."""


class ConfigError(NNGraphError, ValueError):
    """An experiment configuration is malformed."""
