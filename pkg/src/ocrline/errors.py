"""Exception types shared across the toolkit."""


class OcrlineError(Exception):
    """Base class for all toolkit errors."""


class DataError(OcrlineError):
    """A problem with input data (bad file, broken invariant, empty input)."""


class ManifestError(DataError):
    """Malformed or inconsistent dataset manifest."""


class AltoError(DataError):
    """Malformed ALTO-XML input."""


class MatchError(DataError):
    """Ground-truth / hypothesis matching could not be performed."""


class MetricError(DataError):
    """A metric is undefined for the given input (e.g. empty reference)."""


class RenderError(OcrlineError):
    """Text-line rendering failed (missing glyphs, bad font, ...)."""
