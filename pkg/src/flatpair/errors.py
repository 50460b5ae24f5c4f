"""Exception hierarchy shared by all modules."""


class FlatPairError(Exception):
    """Base class; the CLI maps subclasses to exit codes."""

    exit_code = 3


class InputError(FlatPairError):
    exit_code = 2


class ParseError(InputError):
    """Malformed JSON; the message carries line and column."""


class EdgeMismatch(InputError):
    pass


class Disconnected(InputError):
    pass


class NonSimplePolygon(InputError):
    pass


class AlreadyTranslation(InputError):
    pass


class HalfTranslationInput(InputError):
    pass


class HTooLarge(InputError):
    pass


class NumericalError(FlatPairError):
    exit_code = 3


class SolverFailure(NumericalError):
    pass


class RankDeficient(NumericalError):
    pass


class NonEquivariantMesh(NumericalError):
    pass


class NotClosed(InputError):
    pass


class NotHarmonic(InputError):
    pass


class NotPrincipal(InputError):
    pass


class RadiusTooLarge(InputError):
    pass


class DiskNotEmbedded(InputError):
    pass


class NonConvergence(NumericalError):
    pass
