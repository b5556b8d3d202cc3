"""Independence-preserving dimensionality reduction for unions of linear subspaces."""

from .baselines import fit_pca, fit_random_projection
from .dataset import LabeledDataset, normalize_columns
from .evaluation import (
    EvalReport,
    MethodConfig,
    SeparationMatrix,
    SplitSpec,
    classify_nearest_subspace,
    classify_ridge_residual,
    run_experiment,
    separation_matrix,
    split,
)
from .ispp import (
    FitConfig,
    ProjectionModel,
    fit_algorithm1,
    oracle_projection,
    stationarity_residual,
    transform,
)
from .linalg import numerical_rank, orthonormalize, ridge_solve_cg, thin_svd
from .subspace import (
    PrincipalPair,
    Subspace,
    is_independent,
    margin,
    principal_pairs,
    sum_subspace,
    synth_union,
)

__version__ = "0.1.0"
