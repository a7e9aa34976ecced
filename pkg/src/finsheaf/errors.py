"""Shared exception base so the CLI can map failures to exit codes."""


class FinsheafError(Exception):
    """Base class for all domain errors raised by this package."""


class ValidationFailure(FinsheafError):
    """A structure failed its axioms; carries the full violation list."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)

    def __str__(self):
        base = super().__str__()
        if not self.violations:
            return base
        lines = [base] + ["  - %s" % (v,) for v in self.violations]
        return "\n".join(lines)
