"""Exception types shared across the pipeline."""


class AuditError(Exception):
    """Base class for all pipeline errors."""


class EmptyInputError(AuditError):
    """An input source yielded zero usable records."""


class DuplicateRankError(AuditError):
    """A rank appears more than once in a rank,domain list."""


class ChainLoopError(AuditError):
    """A CNAME chain repeats a name or exceeds the hop cap."""


class InsufficientResolversError(AuditError):
    """Cross-checking needs at least two successful resolutions."""


class FixtureMissError(AuditError):
    """The DNS fixture has no recorded answer for a queried name."""


class BadMagicError(AuditError):
    """The input stream is not an MRT file at all."""


class EmptyPathError(AuditError):
    """An AS path with no segments has no origin."""


class UsageError(AuditError):
    """Bad command line or config usage (exit code 1)."""


class MissingInputError(AuditError):
    """A required input file does not exist (exit code 2)."""

    def __init__(self, path: str, what: str = "input"):
        super().__init__(f"missing {what}: {path}")
        self.path = path


class StageDependencyMissingError(AuditError):
    """A required earlier stage has not produced its artifacts (exit code 2)."""

    def __init__(self, stage: str, artifact: str):
        super().__init__(
            f"artifact {artifact!r} not found; run the {stage!r} stage first"
        )
        self.stage = stage
        self.artifact = artifact


class DataError(AuditError):
    """Inputs parsed but contained no usable data (exit code 3)."""
