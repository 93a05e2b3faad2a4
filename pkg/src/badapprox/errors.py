class PrecisionError(ArithmeticError):
    """An approximate input cannot certify the requested decision.

    ``prefix`` carries whatever was certified before precision ran out
    (for example the continued-fraction terms already determined).
    """

    def __init__(self, message: str, prefix=None):
        super().__init__(message)
        self.prefix = prefix


class InvariantViolation(RuntimeError):
    """A guaranteed mathematical fact failed to hold: an implementation fault."""
