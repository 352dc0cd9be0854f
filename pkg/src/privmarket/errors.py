"""Exception types shared across the package."""


class DomainError(ValueError):
    """Raised when an input lies outside a function's mathematical domain."""


class ScenarioError(ValueError):
    """Raised on malformed scenario files; carries section/key/line context."""

    def __init__(self, message, section=None, key=None, line=None):
        self.section = section
        self.key = key
        self.line = line
        parts = []
        if section is not None:
            parts.append(f"section [{section}]")
        if key is not None:
            parts.append(f"key '{key}'")
        if line is not None:
            parts.append(f"line {line}")
        ctx = ", ".join(parts)
        super().__init__(f"{message} ({ctx})" if ctx else message)
