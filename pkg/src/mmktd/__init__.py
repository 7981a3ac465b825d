"""Multiple-model Kalman temporal-difference learning over RBF features."""
from .errors import InvalidArgumentError, NumericDegeneracyError
from .features import BranchRule, Rbf, RbfSet, RgdConfig, build_features, eval_rbf, rgd_update
from .ktd import (MeasurementRow, StateModel, build_measurement, kalman_update, predict,
                  q_value, state_value)
from .kernels import BACKEND
from .mmae import FilterBank, LikelihoodForm, WeightingMode, compute_weights, fuse, mmktd_step, mode_updates
from .policy import PolicyKind, active_action, greedy_action, information_gain
from .types import Transition, WeightBelief

__version__ = "0.1.0"
