"""Bregman divergences on vectors and Hermitian matrices, their projections,
pulled-back divergences through embeddings, and the induced dually flat
geometry."""

from .bregman import (ConstraintSet, ProjectionResult, PythagorasResult, bregman_div,
                      left_project, project, project_many, pythagoras_check, right_project)
from .config import DEFAULTS, Tolerances
from .embeddings import (EmbeddingSpec, GeneralizedGeometry, OrliczFunction,
                         SpinFactorElement, d_jordan, d_mazur, d_orlicz_discrete,
                         generalized_project, pullback_div, spin_factor_div)
from .errors import (BregmanError, ConvergenceError, DegeneracyError, DimensionError,
                     DomainError, InfeasibleError, ValidationError)
from .geometry import (DivergenceField, GeometryReport, bregman_field, connections_from_divergence,
                       dual_coordinates, flatness_check, metric_from_divergence,
                       norden_sen_check, orthogonality_check)
from .potentials import (FAMILIES, PhiFunction, PotentialSpec, check_euler_legendre,
                         eval_potential, fenchel_conjugate, grad_conjugate, grad_potential,
                         hess_potential)
from .spectral import (HermitianMatrix, eigen_nonincreasing, matrix_div, matrix_div_generic,
                       spectral_grad, spectral_potential_eval)

__version__ = "0.1.0"
