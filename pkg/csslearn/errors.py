"""
Exception types raised by csslearn
"""


class CsslearnError(Exception):
    """Base class for all csslearn errors"""


class ConfigurationError(CsslearnError):
    """Invalid scenario configuration or algorithm/parameter combination"""


class OutputError(CsslearnError):
    """Failure writing or reading a result file"""

    def __init__(self, path, reason):
        self.path = str(path)
        self.reason = str(reason)
        super().__init__(f"{self.path}: {self.reason}")


class DimensionError(CsslearnError, ValueError):
    """Matrix or vector shapes do not agree"""


class NoActiveDetectorsError(CsslearnError, ValueError):
    """A channel row has no active detector to normalise over"""

    def __init__(self, channel=None):
        self.channel = channel
        message = "no active detectors for channel"
        if channel is not None:
            message = f"{message} {channel}"
        super().__init__(message)


class DegenerateThresholdError(CsslearnError, ValueError):
    """Perceptron threshold requested for an all-zero weight row"""

    def __init__(self):
        super().__init__("degenerate threshold")


class UpdateOnCorrectDecisionError(CsslearnError, ValueError):
    """Perceptron update requested although the FC decision was correct"""

    def __init__(self):
        super().__init__("update on correct decision")
