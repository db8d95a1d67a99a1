"""Exception types shared across the pipeline."""


class KeyactorError(Exception):
    """Base class for all library errors."""


class CorpusParseError(KeyactorError):
    """A corpus file line could not be parsed."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class IntegrityError(KeyactorError):
    """Referential integrity violated at ingestion time."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class DimensionError(KeyactorError):
    """Requested dimensionality is incompatible with the input."""


class TopicModelError(KeyactorError):
    """Topic weights cannot be computed (e.g. no non-noise cluster)."""


class ClusterNotFoundError(KeyactorError):
    """Lookup of a cluster id that does not exist in the model."""


class SequenceFormatError(KeyactorError):
    """A sequence format referenced topic text that was not supplied."""


class PoolingError(KeyactorError):
    """Segment pooling received no segments."""


class EncodeError(KeyactorError):
    """Embedding was requested for an empty token list."""


class ShapeError(KeyactorError):
    """Tensor shapes do not chain for the requested operation."""

    def __init__(self, message, *shapes):
        if shapes:
            message = f"{message}: " + " vs ".join(str(s) for s in shapes)
        super().__init__(message)


class DegenerateLabelsError(KeyactorError):
    """Training labels contain a single class."""


class NeighborhoodError(KeyactorError):
    """An attention layer saw a node with no incident edge."""


class TrainingError(KeyactorError):
    """Training preconditions violated (e.g. empty train mask)."""


class UnknownUserError(KeyactorError):
    """A label override references a user that is not in the corpus."""


class StageDependencyError(KeyactorError):
    """A pipeline stage is missing an upstream artifact."""

    def __init__(self, path):
        super().__init__(f"missing upstream artifact: {path}")
        self.path = str(path)


class ArtifactSchemaError(KeyactorError):
    """An artifact file does not match its expected schema/version."""
