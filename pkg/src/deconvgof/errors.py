"""Exception hierarchy shared by all modules."""


class DeconvError(Exception):
    """Base class for errors raised by deconvgof."""


class ConfigError(DeconvError, ValueError):
    """Invalid model, setup or experiment configuration."""


class NumericalError(DeconvError, ArithmeticError):
    """A numerical routine could not produce a trustworthy value."""


class WeightOverflowError(NumericalError):
    """The noise characteristic function is too small to be inverted."""

    def __init__(self, u, value):
        self.u = float(u)
        self.value = value
        super().__init__(
            f"|cf of noise| = {abs(value):.3g} at u = {self.u:.6g} cannot be inverted; "
            "the bandwidth is too small for this noise"
        )


class UnsupportedRegimeError(DeconvError, ValueError):
    """The requested quantity is not defined for this smoothness pairing."""


class OracleCapError(DeconvError, ValueError):
    """Sample too large for an O(n^2) reference computation."""


class DegeneratePerturbationError(NumericalError):
    """Rejection sampling of a perturbed density became too inefficient."""


class NegativeDensityError(ConfigError):
    """A perturbed density takes negative values; ``x`` holds the worst point."""

    def __init__(self, x, value):
        self.x = float(x)
        self.value = float(value)
        super().__init__(f"perturbed density is negative ({self.value:.3g}) at x = {self.x:.6g}; "
                         "decrease h or the amplitude")
