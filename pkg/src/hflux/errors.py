"""Exception hierarchy.

Every error raised by the engine derives from :class:`FluxError`. The CLI maps
:class:`ConfigInvalid` to exit status 2, :class:`ExampleAssertionFailed` to 3
and :class:`NumericFailure` subclasses to 4.
"""

from __future__ import annotations


class FluxError(Exception):
    pass


class ConfigInvalid(FluxError):
    """Schema or consistency violation in user input.

    ``path`` is the location of the offending field, e.g. ``"beta[3]"``.
    """

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class LengthMismatch(ConfigInvalid):
    pass


class HypothesisViolation(FluxError):
    """An operation was called outside the regime where its verdict is defined."""


class Unclassified(FluxError):
    pass


class ExampleAssertionFailed(FluxError):
    def __init__(self, example_id: str, diff: dict):
        self.example_id = example_id
        self.diff = diff
        lines = [f"  {k}: expected {v[0]!r}, computed {v[1]!r}" for k, v in sorted(diff.items())]
        super().__init__(f"example {example_id} disagrees:\n" + "\n".join(lines))


class NumericFailure(FluxError):
    pass


class NotConstant(NumericFailure):
    pass


class DegenerateFiber(NumericFailure):
    pass


class ObstructionNonzero(NumericFailure):
    pass


class BoundaryTooClose(NumericFailure):
    pass


class StepTooLarge(NumericFailure):
    pass


class HolonomyBoundViolation(NumericFailure):
    pass
