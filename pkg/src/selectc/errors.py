"""Exception hierarchy shared across the toolkit.

Everything raised on bad input derives from SelectcError so the command
line layer can map domain failures to a single exit code.
"""

from __future__ import annotations


class SelectcError(Exception):
    """Base class for all domain errors."""

    kind = "error"

    def __str__(self) -> str:
        return super().__str__()


class ParseError(SelectcError):
    """Source text violates the surface grammar."""

    kind = "parse"

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col


class FormatError(SelectcError):
    """A serialized program, key, table, or config file is malformed."""

    kind = "format"


class LowerError(SelectcError):
    """Surface construct cannot be lowered to three-address statements."""

    kind = "lower"


class UnboundVariableError(SelectcError):
    """Evaluation reached a variable with no binding."""

    kind = "unbound"


class ForeignCiphertextError(SelectcError):
    """A ciphertext handle was presented to a key that did not mint it."""

    kind = "foreign-ciphertext"


class KeyMismatchError(SelectcError):
    """Selector key does not line up with the combining statements."""

    kind = "key-mismatch"


class PoolExhaustedError(SelectcError):
    """The misleading-statement generator ran out of distinct candidates."""

    kind = "pool-exhausted"


class EnumerationCapError(SelectcError):
    """Program class is too large to enumerate under the configured cap."""

    kind = "cap-exceeded"

    def __init__(self, class_size: int, cap: int):
        super().__init__(
            f"program class has {class_size} members, enumeration cap is {cap}"
        )
        self.class_size = class_size
        self.cap = cap


class ConfigError(SelectcError):
    """Obfuscation or attack configuration is invalid."""

    kind = "config"
