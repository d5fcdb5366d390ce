"""Dressed-vacuum-form eigenvalues for U_q(sl(r+1|s+1)) transfer matrices.

Tableau sums and Jacobi-Trudi determinants of box functions, the
continuous-parameter deformation, Bethe ansatz equations with pole scans,
and randomized verification suites.
"""

from .analytic import BetheState, EvalContext
from .diagrams import SkewShape, count_admissible, enumerate_admissible
from .dvf import DvfSpec, build, dump_formula, t_tableau_sum, t_tilde
from .model import ModelConfig, ModelError, Rank, Site

__all__ = [
    "BetheState",
    "DvfSpec",
    "EvalContext",
    "ModelConfig",
    "ModelError",
    "Rank",
    "Site",
    "SkewShape",
    "build",
    "count_admissible",
    "dump_formula",
    "enumerate_admissible",
    "t_tableau_sum",
    "t_tilde",
]

__version__ = "0.1.0"
