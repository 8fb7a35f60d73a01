"""Exceptions."""

import logging
from typing import Any, Optional

log = logging.getLogger(__name__)


class SocdynError(Exception):
    """This is the base exception class in this module.

    This exception is not raised directly. All other exception classes in this module hierarchically derive from it.

    :param msg: exception error message.
    """
    def __init__(self, msg: str):
        log.error(msg)
        super().__init__(msg)


class ContractError(SocdynError):
    """Raised when an argument violates a precondition such as a shape or a sign."""


class ModelError(SocdynError):
    pass


class InvalidModel(ModelError):
    pass


class DomainError(SocdynError):
    """Raised for a point or box outside the domain where the rescaled generator is defined."""


class QuadratureError(SocdynError):
    pass


class SimulationError(SocdynError):
    pass


class BlowUpError(SimulationError):
    """Raised when a coordinate of an integrated state becomes non-finite.

    :param msg: exception error message.
    :param step: index of the step which produced the non-finite value.
    :param path: last finite path prefix, if one was recorded.
    """
    def __init__(self, msg: str, *, step: Optional[int] = None, path: Optional[Any] = None):
        self.step = step
        self.path = path
        super().__init__(msg)


class SamplerError(SocdynError):
    pass


class StepSizeError(SamplerError):
    """Raised when the acceptance rate of a chain stays below the minimum after tuning."""


class ExperimentError(SocdynError):
    pass


class ConfigError(ExperimentError):
    """Raised for an invalid experiment configuration.

    :param msg: exception error message.
    :param key: offending configuration key.
    """
    def __init__(self, msg: str, *, key: str):
        self.key = key
        super().__init__(msg)


class OutputError(ExperimentError):
    """Raised when the output directory cannot be created or written."""
