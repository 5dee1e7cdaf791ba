import numpy as np


class DomainError(ValueError):
    """Observation or argument outside the admissible domain."""


class SingularCovarianceError(np.linalg.LinAlgError):
    """Covariance matrix is not symmetric positive definite."""


class FamilyMismatchError(ValueError):
    """Operands belong to different component families or dimensions."""


class UnsupportedFamilyError(NotImplementedError):
    """Operation not defined for the given component family."""


class NoRootError(RuntimeError):
    """A bracketing interval could not be established."""


class MissingDistributionError(ValueError):
    """Context model lacks a table required by the requested label."""


class ZeroPriorError(ValueError):
    """Observed context value has zero prior probability."""


class DegenerateComponentError(RuntimeError):
    """A mixture component lost (almost) all of its responsibility mass.

    Attributes
    ----------
    component : int
        Index of the degenerate component.
    iteration : int or None
        EM iteration at which the component collapsed.
    """

    def __init__(self, component, iteration=None):
        self.component = component
        self.iteration = iteration
        super().__init__(component, iteration)

    def __str__(self):
        msg = f"Component {self.component} has vanishing responsibility mass"
        if self.iteration is not None:
            msg += f" (iteration {self.iteration})"
        return msg + "."


__all__ = ['DomainError', 'SingularCovarianceError', 'FamilyMismatchError', 'UnsupportedFamilyError', 'NoRootError',
           'MissingDistributionError', 'ZeroPriorError', 'DegenerateComponentError']
