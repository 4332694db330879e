class HypothesisError(ValueError):
    """Arguments fall outside the hypotheses under which a result is claimed."""


class InfeasibleDesign(ValueError):
    """No critical value satisfies both the admissibility range and the level."""

    def __init__(self, message, best_level=None):
        super().__init__(message)
        self.best_level = best_level


class CertificationError(AssertionError):
    """A predicted strict inequality was not observed beyond the margin."""
