"""Exception types shared across the pipeline."""


class FlowscapeError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(FlowscapeError):
    """Invalid configuration value or file."""


class OutOfGrid(FlowscapeError):
    """A point or cell id falls outside the grid bounding box."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class SelfVisit(FlowscapeError):
    """Zero home-to-destination distance; the self cell carries no ring."""


class FrequencyOutOfRange(FlowscapeError):
    """Visit frequency outside the 1..30 monthly span."""


class NoData(FlowscapeError):
    """A spectrum with no non-empty bins cannot be fitted."""


class SampleTooLarge(FlowscapeError):
    """Requested more playback agents than there are distinct users."""


class DegenerateFlow(FlowscapeError):
    """Origin and destination coincide; no curve can be built."""


class MissingStats(FlowscapeError):
    """A flow references a destination cell without fitted stats."""


class ParseError(FlowscapeError):
    """Malformed input line; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.reason = message


class ParseFailure(FlowscapeError):
    """One or more malformed input lines; keeps the first few for reporting."""

    def __init__(self, errors: list, keep: int = 10):
        self.errors = errors[:keep]
        self.total = len(errors)
        lines = "\n".join(str(e) for e in self.errors)
        more = f"\n... and {self.total - keep} more" if self.total > keep else ""
        super().__init__(f"{self.total} malformed line(s):\n{lines}{more}")


class BundleError(FlowscapeError):
    """A geometry bundle on disk is missing pieces or inconsistent."""
