"""Exception types shared across the toolkit."""


class SscanonError(Exception):
    """Base class for all toolkit errors."""


class GeometryDomainError(SscanonError, ValueError):
    """Inputs outside the physical domain (e.g. slant range above the seafloor)."""


class StageError(SscanonError, ValueError):
    """A ping was passed to a correction step in the wrong processing stage."""


class PipelineError(SscanonError, ValueError):
    """Whole-waterfall orchestration failure (e.g. empty common ground grid)."""


class FormatError(SscanonError, ValueError):
    """Malformed or inconsistent file content."""
