from .estimator import ExtensionNorm
from .gram import (CapExceeded, DenseGramOperator, EigenResult, LatticeGramOperator, grid_structure,
                   lanczos, power_iteration)
from .kernels import QuadratureBudgetExceeded, SurfaceKernel, kernel_eval, parabola_arclength
from ._bessel import j0
from .norms import (Mollifier, NormEstimate, gram_norm, poisson_upper_bound, surface_quadrature,
                    svd_discretized_norm)

__all__ = [
    "CapExceeded", "DenseGramOperator", "EigenResult", "ExtensionNorm", "LatticeGramOperator",
    "Mollifier", "NormEstimate", "QuadratureBudgetExceeded", "SurfaceKernel", "gram_norm",
    "grid_structure", "j0", "kernel_eval", "lanczos", "parabola_arclength", "poisson_upper_bound",
    "power_iteration", "surface_quadrature", "svd_discretized_norm",
]
