"""Exception types shared by the library and the CLI."""

from __future__ import annotations


class DaugavetError(Exception):
    """Base error. ``code`` is a stable machine-readable identifier."""

    code = "ERROR"

    def __init__(self, code: str | None = None, message: str = "", **details):
        if code is not None:
            self.code = code
        self.details = details
        super().__init__(message or self.code)

    def to_dict(self) -> dict:
        out = {"error": self.code, "message": str(self)}
        for key, value in self.details.items():
            out[key] = _jsonable(value)
        return out


def _jsonable(value):
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (int, float, str, bool)) or value is None:
        return value
    return str(value)


class InvalidMetric(DaugavetError):
    """Raised by ``validate_metric``; ``violations`` lists every failed axiom."""

    code = "INVALID_METRIC"

    def __init__(self, violations: list[tuple]):
        self.violations = violations
        head = ", ".join(f"{v[0]}{tuple(v[1:])}" for v in violations[:5])
        more = "" if len(violations) <= 5 else f" (+{len(violations) - 5} more)"
        super().__init__(None, head + more, violations=[list(v) for v in violations])


class BadSpec(DaugavetError):
    code = "BAD_SPEC"


class ConstantTooSmall(DaugavetError):
    code = "CONSTANT_TOO_SMALL"


class PreconditionFailed(DaugavetError):
    code = "PRECONDITION_FAILED"


class SetupViolation(DaugavetError):
    code = "SETUP_VIOLATION"

    def __init__(self, hypothesis: str, message: str = "", **details):
        self.hypothesis = hypothesis
        super().__init__(None, message or hypothesis, hypothesis=hypothesis, **details)


class NumericBreakdown(DaugavetError):
    code = "NUMERIC_BREAKDOWN"
