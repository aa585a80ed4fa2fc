"""Meshfree collocation solver for stationary and time-dependent linear PDEs.

A single random tanh feature layer is hard-constrained at collocation,
boundary and initial points and fitted in one minimum-norm least-squares
solve; a cell-decomposed variant stitches many small local networks with
value/derivative continuity rows for sharp or discontinuous solutions.
"""

from ._accel import NUMBA_ENABLED
from .cases import TestCase, all_cases, build_case, default_architecture
from .dpielm import (
    CellGrid,
    DpielmConfig,
    DpielmModel,
    InterfaceConstraint,
    assemble_global,
    evaluate_dpielm,
    partition,
    plan_interfaces,
    train_dpielm,
)
from .features import FeatureLayer, eval_feature_partial, eval_features, init_layer
from .geometry import (
    Interval,
    PointSet,
    Polygon,
    Rectangle,
    TimeExtruded,
    load_polygon,
    point_in_polygon,
    sample_boundary,
    sample_interior,
    star_polygon,
)
from .linalg import (
    BlockSparseSystem,
    LeastSquaresSolution,
    hadamard_scale_columns,
    matmul,
    solve_block_sparse,
    solve_least_squares,
)
from .operators import (
    Dirichlet,
    LinearPde,
    Periodic,
    Problem,
    dirichlet_rows,
    initial_rows,
    periodic_rows,
    residual_rows,
)
from .pielm import (
    ErrorReport,
    PielmConfig,
    PielmModel,
    assemble,
    error_report,
    evaluate,
    evaluation_grid,
    train,
)

__version__ = "0.1.0"
