"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line can map failures to
distinct process exit statuses.
"""

from __future__ import annotations


class ProtInferError(Exception):
    exit_code = 1

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)


# input validation
class MalformedRow(ProtInferError):
    exit_code = 10


class InvalidProbability(ProtInferError):
    exit_code = 11


class MalformedFasta(ProtInferError):
    exit_code = 12


class EmptyReference(ProtInferError):
    exit_code = 13


# graph construction
class OrphanPeptide(ProtInferError):
    exit_code = 20


class DuplicateSpectrum(ProtInferError):
    exit_code = 21


class EmptyGraph(ProtInferError):
    exit_code = 22


# solvers
class IterationLimit(ProtInferError):
    exit_code = 30


class Degenerate(ProtInferError):
    exit_code = 31


class ZeroMaximum(ProtInferError):
    exit_code = 32


# orchestration
class ConfigError(ProtInferError):
    exit_code = 40


class MismatchedReference(ProtInferError):
    exit_code = 41


class InvalidSpec(ProtInferError):
    exit_code = 42
