"""Exception hierarchy. Every error carries a module-qualified code."""


class MosaicError(Exception):
    module = "mosaic"

    @property
    def code(self):
        return f"{self.module}.{type(self).__name__}"


class CannotSplit(MosaicError):
    module = "geometry"


class DimMismatch(MosaicError, ValueError):
    module = "geometry"


class ParseError(MosaicError):
    module = "network"


class ShapeMismatch(MosaicError, ValueError):
    module = "network"


class BadActionIndex(MosaicError, IndexError):
    module = "network"


class BadPrecision(MosaicError, ValueError):
    module = "extraction"


class BadProbability(MosaicError, ValueError):
    module = "faults"


class BadDistribution(MosaicError, ValueError):
    module = "mdp"


class ChoiceOnFailState(MosaicError):
    module = "mdp"


class NotLayered(MosaicError):
    module = "model_check"


class NoInitialStates(MosaicError, ValueError):
    module = "abstraction"


class MemoryGuardExceeded(MosaicError):
    module = "abstraction"


class Uncovered(MosaicError):
    module = "results"


class BadBins(MosaicError, ValueError):
    module = "results"


class ConfigError(MosaicError):
    module = "cli"
