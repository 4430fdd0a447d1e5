"""Exception hierarchy shared by every stage of a campaign."""


class ScfuzzError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ScfuzzError):
    """Bad lattice, unknown type name, or invalid campaign configuration."""


class ParseError(ScfuzzError):
    """Syntax or static error in a target program or input listing."""

    def __init__(self, message, line=None, column=None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class TraceParseError(ScfuzzError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        prefix = f"trace line {lineno}: " if lineno is not None else ""
        super().__init__(prefix + message)


class BuildError(ScfuzzError):
    """Trace violates an identity invariant (one id bound to two paths)."""


class UnsatisfiableSC(ScfuzzError):
    """No value in the modeled type universe satisfies the constraint."""
