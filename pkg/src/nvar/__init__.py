"""Neighborhood vector autoregression for multivariate time series.

Estimates sparse VAR models whose coefficient matrices are restricted to
each series' neighborhood under a known distance matrix, with BIC
selection of the neighborhood radius, banded-VAR and lasso baselines,
and a Monte Carlo benchmark harness.
"""

from .baselines import LassoConfig, fit_bvar, fit_lasso, lasso_row, order_series
from .errors import (
    HistoryTooShortError,
    InsufficientDataError,
    InsufficientTestSpanError,
    MissingCoordinatesError,
    NoCompleteCellError,
    NoFeasibleRadiusError,
    NonConvergenceWarning,
    NonStationaryModelError,
    NvarError,
    RankDeficientError,
    ShapeMismatchError,
    TooShortError,
    UnparseableRecordError,
)
from .estimation import (
    FitReport,
    RowFit,
    bic,
    build_design,
    fit_nvar,
    fit_row,
    predict_one_step,
    select_neighborhood,
)
from .evaluation import (
    SummaryTable,
    TrialResult,
    coefficient_errors,
    mspe_one_step,
    run_monte_carlo,
)
from .geometry import (
    DistanceMatrix,
    NeighborhoodIndex,
    SensorLayout,
    candidate_radii,
    euclidean_distances,
    graph_shortest_path_distances,
    lattice1d_distances,
    lattice2d_distances,
    neighborhood,
)
from .ingest import (
    ObservationRecord,
    RaggedMonthlyGrid,
    center_series,
    monthly_max_aggregate,
    select_complete_submatrix,
    split_train_test,
)
from .linalg import (
    frobenius_norm,
    least_squares_solve,
    spectral_norm,
    stationarity_margin,
)
from .model import (
    NoiseSpec,
    NvarModel,
    SeriesPanel,
    companion_form,
    generate_case1,
    generate_case2,
    generate_case3,
    simulate,
)

__version__ = "0.1.0"
