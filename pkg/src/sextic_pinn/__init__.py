"""Neural-network solver for sixth-order two-point boundary value problems."""

from .loss import (
    CombineMode,
    LossBreakdown,
    boundary_loss,
    collocation_grid,
    interior_loss,
    loss_and_gradient,
    loss_gradient,
    total_loss,
)
from .network import (
    InitScheme,
    MlpParams,
    NetworkConfig,
    derivative_param_jacobian,
    derivatives,
    forward,
    init,
    load_checkpoint,
    save_checkpoint,
)
from .optim import OptimizerConfig, OptimizerKind, OptimizerState
from .problem import BoundaryCondition, BvpProblem, builtin, exact_solution, make_problem
from .report import ErrorTable, build_table, fd_check_derivatives, fd_check_gradient
from .taylor import ActivationKind, TaylorJet, jet_variable
from .trainer import TrainConfig, TrainRecord, TrainingDiverged, evaluate, train

__version__ = "0.1.0"
