"""Exception hierarchy. Everything raised on bad input derives from SigverError
so callers (and the CLI) can distinguish data problems from bugs."""


class SigverError(Exception):
    """Base class for all data and usage errors raised by this package."""


# raster / file formats
class MalformedHeader(SigverError):
    pass


class UnsupportedFormat(SigverError):
    pass


class TruncatedData(SigverError):
    pass


# preprocessing
class DegenerateHistogram(SigverError):
    pass


class EmptySignature(SigverError):
    pass


# features
class WrongDimensions(SigverError):
    pass


class EmptyRegion(SigverError):
    pass


class TooFewSamples(SigverError):
    pass


# classifier
class NonFiniteInput(SigverError):
    pass


class EmptyBatch(SigverError):
    pass


class SingleClassData(SigverError):
    pass


class BadMagic(SigverError):
    pass


class DimensionMismatch(SigverError):
    pass


class VersionUnsupported(SigverError):
    pass


# evaluation
class UnknownWriter(SigverError):
    pass


class OneSidedTrials(SigverError):
    pass


# datasets
class EmptyCorpus(SigverError):
    pass


class WriterWithoutGenuine(SigverError):
    pass


class MalformedCsv(SigverError):
    pass


class WrongColumnCount(SigverError):
    pass


class IOFailure(SigverError):
    pass
