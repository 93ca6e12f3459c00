class ConvertError(Exception):
    """Base class for converter failures."""


class MissingFileError(ConvertError):
    pass


class FormatError(ConvertError):
    pass


class StatMismatchError(ConvertError):
    """Converted statistics disagree with the published reference numbers."""
