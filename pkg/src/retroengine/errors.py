"""Exception hierarchy shared across the engine."""


class RetroEngineError(Exception):
    """Base class for all engine errors."""


class SmilesSyntaxError(RetroEngineError):
    """Malformed SMILES input. Carries the character offset of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class ValenceError(RetroEngineError):
    """No allowed valence fits the atom's bonds and hydrogens."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (offset {offset})"
        super().__init__(message)
        self.offset = offset


class FormatError(RetroEngineError):
    """Malformed corpus row."""


class MappingError(RetroEngineError):
    """Product atoms lack atom-map numbers."""


class LabelError(RetroEngineError):
    """Reaction record not expressible in the edit formalism."""


class GateError(RetroEngineError):
    """Leaving-group fragment without a wildcard gate atom."""


class SurgeryError(RetroEngineError):
    """Graph surgery referenced a missing atom/gate or produced negative hydrogens."""


class ConfigError(RetroEngineError):
    """Inconsistent model or training configuration."""


class NumericsError(RetroEngineError):
    """A non-finite value appeared in a forward/backward pass."""


class GradCheckFailure(RetroEngineError):
    """Analytic and finite-difference gradients disagree beyond tolerance."""


class VersionError(RetroEngineError):
    """Checkpoint format version mismatch."""


class ChecksumError(RetroEngineError):
    """Checkpoint corruption detected."""


class EmptyBeamError(RetroEngineError):
    """No legal candidate survived the beam."""


class NoRouteFound(RetroEngineError):
    """Search limits exhausted before a route was solved."""

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats or {}


class AlreadyExpanded(RetroEngineError):
    """Molecule node was expanded twice."""


class ModeError(RetroEngineError):
    """Operation requires a reaction-type-aware model."""


class DegenerateLoss(RetroEngineError):
    """Baseline loss too small for relative perturbation scores."""
