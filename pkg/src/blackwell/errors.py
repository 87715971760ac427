"""Exception hierarchy.

Every error raised on bad input derives from :class:`ExperimentError`, itself a
``ValueError``; the CLI maps those to exit code 2.
"""


class ExperimentError(ValueError):
    pass


class ZeroEntry(ExperimentError):
    pass


class RowSumMismatch(ExperimentError):
    pass


class DuplicateLabel(ExperimentError):
    pass


class DimensionMismatch(ExperimentError):
    pass


class SizeOverflow(ExperimentError):
    pass


class DomainError(ExperimentError):
    pass


class OutOfSupport(DomainError):
    pass


class TrivialExperiment(ExperimentError):
    pass


class InvalidLLR(ExperimentError):
    pass


class MeanMismatch(ExperimentError):
    pass


class NonConvexUtility(ExperimentError):
    pass


class PreconditionFailed(ExperimentError):
    pass


class NonGeneric(PreconditionFailed):
    pass


class NoEtaFound(ExperimentError):
    pass


class SupportMismatch(ExperimentError):
    pass


class StateMismatch(ExperimentError):
    pass


class UnknownFixture(ExperimentError):
    pass


class OracleDisagreement(RuntimeError):
    """The two Blackwell deciders disagreed; indicates a numerical bug."""
