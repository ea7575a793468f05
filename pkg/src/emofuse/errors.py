"""Exception hierarchy.

Everything derives from :class:`EmofuseError` (a ``ValueError``). The CLI maps
:class:`ArgumentError` subclasses to exit code 2 and :class:`DataError`
subclasses to exit code 3.
"""


class EmofuseError(ValueError):
    pass


class ArgumentError(EmofuseError):
    pass


class DataError(EmofuseError):
    pass


class InvalidSpec(ArgumentError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"invalid {field}: {message}")


class InvalidOverlap(ArgumentError):
    pass


class InvalidScores(DataError):
    pass


class MissingSample(DataError):
    def __init__(self, model_id, sample_id):
        self.model_id = model_id
        self.sample_id = sample_id
        super().__init__(f"model {model_id!r} has no scores for sample {sample_id!r}")


class DuplicateModelId(DataError):
    pass


class DuplicateSampleId(DataError):
    pass


class LengthMismatch(DataError):
    pass


class EmptyInput(DataError):
    pass


class UnknownModelId(DataError):
    pass


class EmptySubset(DataError):
    pass


class WeightMismatch(DataError):
    pass


class AllZeroWeights(DataError):
    pass


class EmptyBank(DataError):
    pass


class TooManyModels(DataError):
    def __init__(self, n, guard):
        self.n = n
        self.guard = guard
        super().__init__(f"exhaustive search over {n} models exceeds guard {guard}")


class NonFiniteInput(DataError):
    pass


class ShapeMismatch(DataError):
    pass


class EmptyDataset(DataError):
    pass


class EmptyCorpus(DataError):
    pass


class NoKnownTokens(DataError):
    pass


class AllMasked(DataError):
    pass


class WindowTooLarge(DataError):
    pass


class FormatError(DataError):
    """A file does not follow its documented layout."""
