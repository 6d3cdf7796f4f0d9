"""Bethe vectors and dual Bethe vectors of the super-Yangians Y(2|1) and Y(1|2).

Exact rational arithmetic (gmpy2) or complex floats, dense graded tensors, four independent
constructions of the same vector, and the morphisms relating them.
"""

from .bethe import (
    BetheData, bv_explicit, bv_recursive, bv_supertrace, bv_tv, draw_bethe_data, dual_explicit,
    dual_recursive, dual_supertrace, morphism_residuals, tv_relation_residual,
)
from .errors import (
    BackendMismatch, ConfigError, DimensionMismatch, NoConvergence, PoleError, SizeGuard, SuperBetheError,
    TagMismatch, TwistedModelError,
)
from .expr import Expr, T, evaluate, gr_expr, phi_expr, psi_expr
from .graded import GradedMatrix, GradedSpace, GradedVector, Grading, graded_kron, supertrace, supertranspose
from .kernels import EXACT, FLOAT, f, g, h, izergin_kernel
from .lattice import ModelSpec, MonodromyFamily, PhiImageFamily, build_R, transfer
from .onshell import bethe_residuals, solve_bethe, tau_eigenvalue, verify_onshell
from .suites import SuiteConfig, run_suites

__version__ = "0.1.0"
