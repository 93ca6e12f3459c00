from .convert import (
    DATASET_NAMES,
    REFERENCE_STATS,
    UpstreamBundle,
    check_stats,
    convert,
    read_bundle,
)
from .errors import ConvertError, FormatError, MissingFileError, StatMismatchError

__all__ = [
    "DATASET_NAMES",
    "REFERENCE_STATS",
    "UpstreamBundle",
    "check_stats",
    "convert",
    "read_bundle",
    "ConvertError",
    "FormatError",
    "MissingFileError",
    "StatMismatchError",
]

__version__ = "0.1.0"
