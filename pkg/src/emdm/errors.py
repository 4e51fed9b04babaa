"""Exception hierarchy shared by every emdm module."""

from __future__ import annotations


class EmdmError(Exception):
    """Base class for all engine errors."""


class EmptyName(EmdmError):
    pass


class DuplicateName(EmdmError):
    pass


class UnknownReference(EmdmError):
    pass


class KindMismatch(EmdmError):
    pass


class DependentsExist(EmdmError):
    def __init__(self, name: str, dependents: list[str]):
        self.name = name
        self.dependents = list(dependents)
        super().__init__(f"{name!r} is referenced by: {', '.join(self.dependents)}")


class ParseFailure(EmdmError):
    """Raised by parse_schema; carries every ParseError found."""

    def __init__(self, errors):
        self.errors = list(errors)
        first = self.errors[0] if self.errors else None
        super().__init__(str(first) if first else "parse failed")


class InstanceError(EmdmError):
    """Raised by parse_instance; carries every InstanceDefect found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(str(e) for e in self.errors[:5]))


class IllFormedCatalog(EmdmError):
    def __init__(self, defects):
        self.defects = list(defects)
        super().__init__("; ".join(str(d) for d in self.defects[:5]))


class UnknownConstraint(EmdmError):
    pass


class TooManyMappings(EmdmError):
    pass


class IncoherentInput(EmdmError):
    def __init__(self, incoherences):
        self.incoherences = list(incoherences)
        super().__init__(f"{len(self.incoherences)} incoherence(s) in constraint set")


class NotStratified(EmdmError):
    pass


class UnsupportedPattern(EmdmError):
    pass


class UnsupportedVersion(EmdmError):
    pass


class Corrupt(EmdmError):
    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        where = f" at byte {offset}" if offset is not None else ""
        super().__init__(f"{message}{where}")


class CertificationFailure(EmdmError):
    pass


class IllFormedProgram(EmdmError):
    """A Datalog program failed its safety/arity checks."""

    def __init__(self, defects):
        self.defects = list(defects)
        super().__init__("; ".join(str(d) for d in self.defects))
