"""Bosonic canonical transformations acting in closed form on ultracoherent vectors."""

from canonfock.errors import CanonFockError, NumericalError, ValidationError
from canonfock.fockrep import UltracoherentVector, WeylDisplacement
from canonfock.symplectic import RotationGenerator, SqueezeGenerator, SymplecticPair

__version__ = "0.1.0"

__all__ = [
    "CanonFockError",
    "NumericalError",
    "RotationGenerator",
    "SqueezeGenerator",
    "SymplecticPair",
    "UltracoherentVector",
    "ValidationError",
    "WeylDisplacement",
    "__version__",
]
