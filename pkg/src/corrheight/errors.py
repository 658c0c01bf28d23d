"""Exception types shared across the package."""


class CorrHeightError(Exception):
    """Base class for all errors raised by corrheight."""


class ParseError(CorrHeightError, ValueError):
    """Malformed polynomial or point text.

    ``position`` is the 0-based column where parsing failed.
    """

    def __init__(self, message, text="", position=0):
        self.message = message
        self.text = text
        self.position = position
        super().__init__(self.annotated())

    def annotated(self):
        if not self.text:
            return self.message
        caret = " " * self.position + "^"
        return f"{self.message} at column {self.position + 1}\n  {self.text}\n  {caret}"


class ValidationError(CorrHeightError, ValueError):
    """A polynomial was rejected as a correspondence."""

    def __init__(self, reason, suggestion=None):
        self.reason = reason
        self.suggestion = suggestion
        msg = reason if suggestion is None else f"{reason} (try: {suggestion})"
        super().__init__(msg)


class PrecisionExhausted(CorrHeightError, ArithmeticError):
    """Certified separation was not reached within the bit budget."""


class BudgetExceeded(CorrHeightError):
    """A combinatorial or depth budget ran out.

    ``partial`` carries whatever results were obtained before the cutoff.
    """

    def __init__(self, message, partial=None):
        self.partial = partial
        super().__init__(message)
