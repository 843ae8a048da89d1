"""Exception types shared across the package."""


class StructselError(Exception):
    """Base class for all package errors."""


class CapExceeded(StructselError, ValueError):
    """An enumeration would materialize more subsets than allowed."""


class RegistryMismatch(StructselError, ValueError):
    """Operands are indexed against different variable registries."""


class UnknownVariable(StructselError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "unknown variable"


class RuleSyntaxError(StructselError, SyntaxError):
    def __init__(self, msg, line=1, col=1, text=None):
        super().__init__(f"{msg} (line {line}, column {col})")
        self.msg = msg
        self.lineno = line
        self.offset = col
        self.text = text


class CountOutOfRange(StructselError, ValueError):
    """A unit rule asks for more variables than its scope holds."""


class UnsupportedRuleShape(StructselError, ValueError):
    """The set-operation derivation only handles unit and if-then rules."""


class OverlapError(StructselError, ValueError):
    pass


class InvalidGamma(StructselError, ValueError):
    pass


class DimensionMismatch(StructselError, ValueError):
    pass


class DegenerateFold(StructselError, ValueError):
    """A training fold lacks one of the two outcome classes."""


class InfeasibleSpec(StructselError, ValueError):
    """The requested true support is not in the target dictionary."""


class NotConverged(UserWarning):
    """Emitted when a fit stops at the iteration limit."""
