"""Exception types shared across the simulation modules."""


class StepSizeError(RuntimeError):
    """An integration step produced an invalid state; dt is too large."""

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (at t = {t:.6g})")
        self.t = t


class ContrastCollapseError(RuntimeError):
    """The Bloch-vector contrast vanished; squeezing is undefined."""
