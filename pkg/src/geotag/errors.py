"""Exception hierarchy shared by every module."""


class GeotagError(Exception):
    """Base class for data and format errors (CLI exit status 1)."""


class CorpusFormatError(GeotagError):
    pass


class EmbeddingFormatError(GeotagError):
    pass


class ConfigError(GeotagError):
    pass


class TrainingError(GeotagError):
    pass


class ModelFileError(GeotagError):
    pass


class MagicError(ModelFileError):
    """File does not start with the model magic bytes."""


class VersionError(ModelFileError):
    """File was written by an unsupported format version."""


class ChecksumError(ModelFileError):
    """Parameter body does not match the stored CRC32."""


class TruncatedError(ModelFileError):
    """File ended before all declared content was read."""
