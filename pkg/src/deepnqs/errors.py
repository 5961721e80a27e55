"""Exception types shared across the package."""


class ConvergenceError(RuntimeError):
    """A fixed-point iteration hit ``max_iters`` without meeting its tolerance."""

    def __init__(self, message, last_iterate, residual, iterations):
        super().__init__(f"{message} (last={last_iterate!r}, residual={residual:.3e}, iters={iterations})")
        self.last_iterate = last_iterate
        self.residual = residual
        self.iterations = iterations


class AmplitudeCancellation(ArithmeticError):
    """The exponential sum of a log-amplitude cancelled to exactly zero."""


class NormUnderflowError(ArithmeticError):
    """A wavefunction norm vanished or became non-finite."""


class NumericalIntegrityError(ArithmeticError):
    """A quantity that must be real came out with a non-negligible imaginary part."""


class SweepAborted(RuntimeError):
    """Too many realizations failed at a grid point."""
