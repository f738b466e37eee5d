"""Exception types raised by the analyzers.

Every error carries a stable ``code`` (the class name) so the CLI can emit
structured error records without string matching.
"""


class AnalysisError(Exception):
    """Base class for all parse/analysis failures."""

    @property
    def code(self) -> str:
        return type(self).__name__


# archive / apk
class NotAZip(AnalysisError):
    pass


class TruncatedArchive(AnalysisError):
    pass


class EntryNotFound(AnalysisError, KeyError):
    pass


class UnsupportedCompression(AnalysisError):
    pass


class CorruptEntry(AnalysisError):
    pass


# manifest
class MalformedXml(AnalysisError):
    pass


class UnsupportedChunkVersion(AnalysisError):
    pass


class MissingManifestElement(AnalysisError):
    pass


# unity
class EmptyInput(AnalysisError):
    pass


class TruncatedHeader(AnalysisError):
    pass


class NotPe(AnalysisError):
    pass


class NoCliHeader(AnalysisError):
    pass


class CorruptMetadata(AnalysisError):
    pass


class NotElf(AnalysisError):
    pass


class NoTextSection(AnalysisError):
    pass


class WrongClassOrEndianness(AnalysisError):
    pass


# unreal
class NoPakEntry(AnalysisError):
    pass


class MultiplePakEntries(AnalysisError):
    pass


class BadFooterMagic(AnalysisError):
    pass


class EncryptedIndexUnsupported(AnalysisError):
    pass


class IndexOutOfBounds(AnalysisError):
    pass


class UnsupportedPakVersion(AnalysisError):
    pass


class CompressedEntryUnsupported(AnalysisError):
    pass


class MalformedIni(AnalysisError):
    pass


class MalformedPluginJson(AnalysisError):
    pass


# catalog / records
class SchemaViolation(AnalysisError):
    pass


class DuplicateRule(AnalysisError):
    pass


class UnknownDataType(AnalysisError):
    pass


class UnknownStore(AnalysisError):
    pass


# policy / probe / report
class EmptyDocument(AnalysisError):
    pass


class InvalidUrl(AnalysisError, ValueError):
    pass


class EmptyRunSet(AnalysisError):
    pass


class ConfigError(AnalysisError):
    pass


# pak decoding failures that map to the "lacks files" analysis status
UNREAL_UNSUPPORTED = (
    NotAZip,
    TruncatedArchive,
    NoPakEntry,
    MultiplePakEntries,
    BadFooterMagic,
    EncryptedIndexUnsupported,
    IndexOutOfBounds,
    UnsupportedPakVersion,
    CompressedEntryUnsupported,
)
