"""Sharp principal-eigenvalue estimates for 1-D diffusion and p-operators.

Subpackages:
    ptrig            generalized p-trigonometric functions
    gamma_calculus   carre du champ, curvature, Bakry-Emery constants
    model_ode        the 1-D comparison model equation
    eigensolve       discrete p-operator eigenpairs and a posteriori checks
    nonsym           complex spectra of drift operators and the model bound
    heat_drift       drift heat flow and the modulus-of-continuity comparison
    cli              command-line front end
"""

from . import errors
from .eigensolve import (
    EigenResult,
    Mesh1D,
    MeshKind,
    principal_eigenpair,
    rayleigh,
    sharpness_tube,
)
from .heat_drift import (
    HeatState,
    ModulusCandidate,
    decay_rate,
    modulus_comparison,
    modulus_defect_series,
)
from .model_ode import Branch, ModelProblem, ModelSolution
from .nonsym import (
    Spectrum,
    model_eigenvalue,
    random_trig_drift,
    spectrum,
    verify_bound,
)
from .ptrig import PExponent, arcsin_p, pi_p, sin_p, sin_p_prime

__version__ = "0.1.0"

__all__ = [
    "errors",
    "Branch",
    "EigenResult",
    "HeatState",
    "Mesh1D",
    "MeshKind",
    "ModelProblem",
    "ModulusCandidate",
    "decay_rate",
    "modulus_comparison",
    "modulus_defect_series",
    "random_trig_drift",
    "ModelSolution",
    "PExponent",
    "Spectrum",
    "arcsin_p",
    "model_eigenvalue",
    "pi_p",
    "principal_eigenpair",
    "rayleigh",
    "sharpness_tube",
    "sin_p",
    "sin_p_prime",
    "spectrum",
    "verify_bound",
]
