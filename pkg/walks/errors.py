class LabError(Exception):
    """Base class for every error raised by the lab."""


class DomainError(LabError, ValueError):
    """An argument lies outside the domain of the operation."""


class CertificationError(LabError):
    """A numerical certificate (step halving, drift limit, neighbourhood) failed."""
