"""Exception hierarchy shared by the library and the command line."""


class InvalidInputError(ValueError):
    """Caller supplied arguments that violate an operation's preconditions."""


class ParseError(InvalidInputError):
    """An embedding table, graph or categories file could not be parsed."""


class GuardRefusal(RuntimeError):
    """An exhaustive computation was refused because it exceeds a size guard."""


class ConstructionError(InvalidInputError):
    """An embedding could not be built (singular or indefinite matrix)."""


class NotFoundError(InvalidInputError):
    """A search over candidates produced no acceptable value."""
