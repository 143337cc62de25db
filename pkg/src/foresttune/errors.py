"""Exception hierarchy; the ``module`` tag prefixes CLI error lines."""


class ForestTuneError(Exception):
    """Base class for all foresttune errors."""

    module = "foresttune"


class DataError(ForestTuneError, ValueError):
    module = "data"


class DataFileNotFoundError(DataError, FileNotFoundError):
    pass


class MissingTargetError(DataError):
    pass


class MissingValueError(DataError):
    pass


class RaggedRowError(DataError):
    pass


class EmptyDatasetError(DataError):
    pass


class ForestError(ForestTuneError, ValueError):
    module = "forest"


class InvalidParamsError(ForestError):
    pass


class TaskMismatchError(ForestError):
    pass


class SchemaMismatchError(ForestError):
    pass


class ModelVersionError(ForestError):
    pass


class CorruptModelError(ForestError):
    pass


class MetricError(ForestTuneError, ValueError):
    module = "metrics"


class IncompatibleMeasureError(MetricError):
    pass


class OobError(ForestTuneError, ValueError):
    module = "oob"


class NoOobObservationsError(OobError):
    pass


class SpaceError(ForestTuneError, ValueError):
    module = "space"


class SmboError(ForestTuneError, ValueError):
    module = "smbo"


class TunerError(ForestTuneError, ValueError):
    module = "tuner"


class BenchError(ForestTuneError, ValueError):
    module = "bench"
