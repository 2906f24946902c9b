"""scikit-learn wrapper so a norm computation composes with pipelines and grid search."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .kernels import SurfaceKernel
from .norms import gram_norm, svd_discretized_norm


class ExtensionNorm(BaseEstimator):
    """Estimate ``||E_S||_{L^2 -> l^2(X)}`` for the point set passed to ``fit``.

    Parameters
    ----------
    surface : {"circle", "parabola2d", "sphere3d"}
    method : {"gram", "svd"}
    solver : {"power", "lanczos"}
    tol : float
    max_iter : int
    seed : int
    n_nodes : int or None
        Quadrature size for ``method="svd"``; None doubles until stable.

    Attributes
    ----------
    norm_ : float
    estimate_ : NormEstimate
    """

    def __init__(self, surface="circle", method="gram", solver="power", tol=1e-9,
                 max_iter=20000, seed=0, n_nodes=None):
        self.surface = surface
        self.method = method
        self.solver = solver
        self.tol = tol
        self.max_iter = max_iter
        self.seed = seed
        self.n_nodes = n_nodes

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        if self.method == "gram":
            est = gram_norm(X, SurfaceKernel(self.surface), tol=self.tol, max_iter=self.max_iter,
                            solver=self.solver, seed=self.seed)
        elif self.method == "svd":
            est = svd_discretized_norm(X, self.surface, n_nodes=self.n_nodes, tol=self.tol,
                                       max_iter=self.max_iter, solver=self.solver, seed=self.seed)
        else:
            raise ValueError(f"method must be 'gram' or 'svd', got {self.method!r}")
        self.estimate_ = est
        self.norm_ = est.value
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X=None):
        """The fitted norm as a 1x1 array (handy at the end of a pipeline)."""
        check_is_fitted(self, "norm_")
        return np.array([[self.norm_]])

    def score(self, X=None, y=None):
        check_is_fitted(self, "norm_")
        return self.norm_
