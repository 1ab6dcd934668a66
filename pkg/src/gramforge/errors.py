"""Exception types shared across the package.

Every error raised on purpose derives from GramforgeError and carries a
stable ``code`` string so the CLI and the HTTP service can map failures
to exit codes and JSON error bodies without string matching.
"""


class GramforgeError(Exception):
    """Base class for all errors raised by this package."""

    code = "internal_error"


class InvalidArgumentError(GramforgeError):
    code = "invalid_argument"


class InvalidOrderError(InvalidArgumentError):
    code = "invalid_order"


class EmptyDocumentError(GramforgeError):
    code = "empty_document"


class DocumentNotFoundError(GramforgeError):
    code = "document_not_found"


class CorpusEmptyError(GramforgeError):
    code = "corpus_empty"


class ModelEmptyError(GramforgeError):
    code = "model_empty"


class ModelNotBuiltError(GramforgeError):
    code = "model_not_built"


class InsufficientContextError(GramforgeError):
    code = "insufficient_context"


class NoScoreableTokensError(GramforgeError):
    code = "no_scoreable_tokens"


class MeasurementError(GramforgeError):
    code = "measurement_unreliable"


class ModelFormatError(GramforgeError):
    """Base for problems found while parsing a saved model file.

    ``line_number`` is 1-based and refers to the offending line when one
    can be named, otherwise None (for example a file that simply ends
    too early).
    """

    code = "model_format"

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class ModelVersionError(ModelFormatError):
    code = "model_version"


class MalformedLineError(ModelFormatError):
    code = "malformed_line"


class TruncatedModelError(ModelFormatError):
    code = "truncated_model"
