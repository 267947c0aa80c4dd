"""Exception hierarchy shared across the package."""


class VibrodiagError(Exception):
    """Base class for all package errors."""


class UsageError(VibrodiagError):
    """Bad configuration or command-line arguments (CLI exit code 1)."""


class MissingArtifact(VibrodiagError):
    """A required input artifact does not exist (CLI exit code 2)."""


class NumericFailure(VibrodiagError):
    """NaN/Inf detected in a numeric pipeline (CLI exit code 3)."""


# dsp
class RecordTooShort(VibrodiagError):
    pass


class ConfigInvalid(UsageError):
    pass


class EmptyTrainingSet(VibrodiagError):
    pass


class ShapeMismatch(VibrodiagError):
    pass


# tensor engine
class NoCachedForward(VibrodiagError):
    pass


# cae
class TooFewSamples(VibrodiagError):
    pass


class EmptyList(VibrodiagError):
    pass


# clustering
class KTooLarge(VibrodiagError):
    pass


class EmptyInput(VibrodiagError):
    pass


# metrics
class LengthMismatch(VibrodiagError):
    pass


class DegenerateInput(VibrodiagError):
    pass


# xai
class SingleCluster(VibrodiagError):
    pass


class LabelMismatch(VibrodiagError):
    pass


class ShapeNotDivisible(VibrodiagError):
    pass


class FractionOutOfRange(VibrodiagError):
    pass


class UntrainedHead(VibrodiagError):
    pass
