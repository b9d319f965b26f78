"""Constructive scattering for Jacobi operators built from Verblunsky coefficients.

Bernstein–Szegő models, the Szegő mapping to Jacobi matrices, free and
perturbed evolutions, the explicit wave operator and numerical witnesses
for the weighted OPUC sums used in the convergence argument.
"""
from .errors import (ConfigError, DomainError, OracleMismatch,
                     PreconditionError, SzegoscatError, TruncationWarning)
from .opuc import *  # noqa: F401,F403
from .bridge import *  # noqa: F401,F403
from .dynamics import *  # noqa: F401,F403
from .wavepackets import *  # noqa: F401,F403
from .scattering import *  # noqa: F401,F403
from .lab import *  # noqa: F401,F403
from .families import *  # noqa: F401,F403
from .config import ExperimentConfig, RunManifest
from .runner import run

from . import (bridge, dynamics, families, lab, opuc, scattering,  # noqa: E402
               wavepackets)

__version__ = "0.1.0"

__all__ = (["ConfigError", "DomainError", "OracleMismatch", "PreconditionError",
            "SzegoscatError", "TruncationWarning", "ExperimentConfig",
            "RunManifest", "run", "__version__"]
           + opuc.__all__ + bridge.__all__ + dynamics.__all__
           + wavepackets.__all__ + scattering.__all__ + lab.__all__
           + families.__all__)
