"""Exception taxonomy shared across the lab."""


class NormlabError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(NormlabError):
    """Operands have incompatible lengths or shapes."""


class DegenerateWeightError(NormlabError):
    """A normalized group has zero norm (or zero spread) where the transform
    needs a positive one."""

    def __init__(self, group_id, detail):
        self.group_id = group_id
        super().__init__(f"group '{group_id}': {detail}")


class UnsupportedVariantError(NormlabError):
    """Requested backward variant is not defined for the group's transform."""


class ConfigurationError(NormlabError):
    """Invalid or inconsistent run configuration."""


class InvalidHyperparameterError(NormlabError):
    """Hyperparameters outside the admissible range."""


class GradientOverflowError(NormlabError):
    """A gradient, weight, or optimizer buffer entry became non-finite.

    Carries the offending group id and the step index so harnesses can
    report exactly where a run blew up.
    """

    def __init__(self, group_id, step, detail="non-finite value"):
        self.group_id = group_id
        self.step = step
        super().__init__(f"overflow at step {step} in group '{group_id}': {detail}")


class DataFormatError(NormlabError):
    """Malformed input file (bad CSV cell, wrong IDX magic, ...)."""


class GroupSizeWarning(UserWarning):
    """Normalizing a group with very few parameters removes most of its
    degrees of freedom; training proceeds but results may be degenerate."""
