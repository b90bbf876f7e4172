"""Exception taxonomy.

Three families, mirroring the CLI exit codes: bad input (1), a mathematically
well-posed request that the geometry rejects (2), and violations of identities
that must hold for any correct input (3).
"""


class ToolkitError(Exception):
    pass


class InputError(ToolkitError):
    """Malformed user input: syntax, unknown names, schema violations."""


class ExprSyntaxError(InputError):
    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownIdentifierError(InputError):
    pass


class SchemaError(InputError):
    def __init__(self, message, path="/"):
        super().__init__(f"{path}: {message}")
        self.path = path


class MathRejection(ToolkitError):
    """The input parses but the requested structure does not exist on it."""


class PoleError(MathRejection):
    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class ZeroDenominatorError(MathRejection):
    pass


class NotContactError(MathRejection):
    pass


class NotHamiltonianError(MathRejection):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SingularFrameError(MathRejection):
    def __init__(self, message, degeneracy=None):
        super().__init__(message)
        self.degeneracy = degeneracy


class ClosureBoundExceeded(MathRejection):
    pass


class NotProjectableError(MathRejection):
    pass


class ReductionPatternError(MathRejection):
    pass


class InternalIdentityError(ToolkitError):
    """An identity that holds for all valid inputs failed: toolkit bug."""
