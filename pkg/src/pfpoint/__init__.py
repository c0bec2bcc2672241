"""Point-limit radiating oscillator: resonances and amplitudes."""

from .amplitudes import (
    fit_closed_form,
    fock_amplitude,
    permanent,
    survival,
    survival_terms,
    transition_eps,
    transition_limit,
)
from .errors import (
    AccuracyError,
    ConditioningError,
    ConfigError,
    ConstructionError,
    CutError,
    DomainError,
    PFPointError,
    PoleError,
    SingularConfigurationError,
    SizeError,
)
from .kernels import BACKEND
from .model import PhysicalParams, SpectralData, spectrum
from .resolvent import BranchedPoint, PhotonSpec

__version__ = "0.1.0"
