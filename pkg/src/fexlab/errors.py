"""Exception types shared across the pipeline."""


class FexlabError(Exception):
    """Base class for all pipeline errors."""


class MissingArtifact(FexlabError):
    """A defect directory lacks a required file."""

    def __init__(self, defect_id, filename):
        super().__init__(f"defect {defect_id!r}: missing artifact {filename!r}")
        self.defect_id = defect_id
        self.filename = filename


class ParseFailure(FexlabError):
    """Source text could not be parsed."""


class ToolchainUnavailable(FexlabError):
    """The subject-language toolchain cannot run."""


class TraceFailure(FexlabError):
    """The tracing hook could not attach or produced no usable trace."""


class EmptyTrace(FexlabError):
    """An execution trace recorded no lines."""


class SeedOutsideModule(FexlabError):
    """A slice seed line is not covered by the module."""


class ModuleMismatch(FexlabError):
    """Two line sets were computed over different modules."""


class LineOutOfRange(FexlabError):
    """A requested line number does not exist in the source."""


class MissingSlice(FexlabError):
    """A slice-backed context module was requested before slices were computed."""


class GatewayExhausted(FexlabError):
    """All completion retries failed."""


class SchemaViolation(FexlabError):
    """A model response did not validate against its declared schema."""


class CacheMiss(FexlabError):
    """Replay mode was asked for a request absent from the cache."""

    def __init__(self, key):
        super().__init__(f"replay cache has no entry for key {key}")
        self.key = key


class MalformedModelOutput(FexlabError):
    """A model response could not be coerced into the trial record."""


class SnippetNotAFunction(FexlabError):
    """A fix response is not a single parseable function."""


class SpliceParseFailure(FexlabError):
    """Splicing produced source that does not parse."""


class EmptyText(FexlabError):
    """An operation requiring text received an empty string."""


class IncompleteVector(FexlabError):
    """A score vector is missing criterion outcomes."""


class IncompleteScores(FexlabError):
    """A configuration has trials without complete score vectors."""


class EmptyInput(FexlabError):
    """An aggregate operation received no data."""


class DegenerateSample(FexlabError):
    """A statistical test received a sample it cannot handle."""


class SampleTooSmall(FexlabError):
    """Sample size below the supported range."""


class TooFewDefects(FexlabError):
    """Bootstrap resampling needs at least two defects."""


class MisalignedLabels(FexlabError):
    """Human and judge label sets do not align on (item, criterion)."""


class SingleRater(FexlabError):
    """Consistency analysis needs at least two raters per item."""


class MissingDifficulty(FexlabError):
    """Difficulty ratings are absent from the label set."""
