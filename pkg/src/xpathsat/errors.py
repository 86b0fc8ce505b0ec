"""Exception types shared across the package."""


class ParseError(ValueError):
    """Raised when a content model, DTD, XPath, or tree term fails to parse."""


class DtdError(ValueError):
    """Raised for semantically broken DTDs (undeclared labels, useless symbols, ...)."""


class NotMRW(DtdError):
    """Raised when an algorithm that needs an MRW DTD gets a rule outside the class."""

    def __init__(self, label: str, reason: str = ""):
        self.label = label
        msg = f"content model of {label!r} is not MRW"
        if reason:
            msg += f": {reason}"
        super().__init__(msg)


class UnsupportedFragment(ValueError):
    """Raised when a query falls outside both decidable fragments."""
