"""Diagnostics raised by the analysis pipeline.

Every error carries a stable ``code`` (reported in JSON output) and the CLI
exit status it maps to.
"""

from __future__ import annotations


class AnalysisError(Exception):
    code = "AnalysisError"
    exit_code = 2

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def as_diagnostic(self) -> dict:
        return {"code": self.code, "message": self.message}


class LoopSyntaxError(AnalysisError):
    code = "SyntaxError"
    exit_code = 1

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{message} (line {line}, column {col})", line=line, col=col)
        self.line = line
        self.col = col


class ReservedIdentifier(LoopSyntaxError):
    code = "ReservedIdentifier"


class UnsupportedConstruct(AnalysisError):
    """Well-formed input outside the supported loop class."""

    def __init__(self, code: str, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{message} (line {line}, column {col})", line=line, col=col)
        self.code = code


class UnsupportedUpdate(AnalysisError):
    code = "UnsupportedUpdate"

    def __init__(self, variable: str, message: str):
        super().__init__(f"{variable}: {message}", variable=variable)
        self.variable = variable


class IrrationalRoots(AnalysisError):
    code = "IrrationalRoots"

    def __init__(self, variable: str, message: str):
        super().__init__(f"{variable}: {message}", variable=variable)
        self.variable = variable


class NonTelescoping(AnalysisError):
    code = "NonTelescoping"

    def __init__(self, variable: str, message: str):
        super().__init__(f"{variable}: {message}", variable=variable)
        self.variable = variable


class AnalysisTimeout(AnalysisError):
    code = "Timeout"
    exit_code = 3


class NonTermination(AnalysisError):
    code = "NonTermination"
    exit_code = 4
