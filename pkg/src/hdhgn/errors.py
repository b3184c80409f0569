"""Exception types shared across the toolkit.

The CLI maps these onto its documented exit codes; library code raises them
directly.
"""


class HdhgnError(Exception):
    """Base class for all toolkit errors."""


class SchemaError(HdhgnError):
    """Input record violates the canonical-AST interchange schema."""


class MalformedAst(HdhgnError):
    """Canonical AST breaks a structural invariant (dangling index, bad leaf)."""


class EmptyCorpus(HdhgnError):
    """Vocabulary requested over zero graphs."""


class EncodingError(HdhgnError):
    """Value cannot be mapped through the vocabulary (non-identifier OOV)."""


class EmptyBatch(HdhgnError):
    """batch_graphs called with no graphs."""


class ShapeMismatch(HdhgnError):
    """Tensor operands have incompatible shapes."""


class NonFiniteValue(HdhgnError):
    """NaN/Inf detected in debug mode."""


class IdOutOfRange(HdhgnError):
    """Integer id exceeds the embedding table it indexes."""


class LabelOutOfRange(HdhgnError):
    """Class label outside [0, num_classes)."""


class EmptyDataset(HdhgnError):
    """Split requested over zero records."""


class VocabMismatch(HdhgnError):
    """Vocabulary digest disagrees between artifacts."""


class TrainingAborted(HdhgnError):
    """Training stopped on a non-finite loss; carries diagnostics."""


class ConfigError(HdhgnError):
    """Run configuration is invalid (unknown key, bad value, missing path)."""
