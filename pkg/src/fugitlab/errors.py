"""Exception hierarchy shared by every fugitlab module."""

from __future__ import annotations


class FugitlabError(Exception):
    """Base class for all library errors."""


class InputError(FugitlabError, ValueError):
    """Invalid or non-finite contract / model inputs."""


class LatticeError(FugitlabError):
    """The binomial lattice cannot be built for the given inputs (e.g. q outside [0, 1])."""


class CalibrationError(FugitlabError):
    """Target moments cannot be matched by the requested rate model."""


class NoExerciseSupportError(FugitlabError):
    """The stopping distribution carries no exercise mass, so tau* is undefined."""


class QuadratureError(FugitlabError):
    """Integration failed at a node or the rule is malformed."""


class ConfigError(FugitlabError):
    """Scenario configuration is malformed."""


class StageError(FugitlabError):
    """Wraps an error raised inside one stage of the optionality pipeline."""

    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {cause}")
