# Core module
from .errors import (
    NetRobustError, ParameterError, UndefinedValueError, DomainError,
    ConvergenceError, DegenerateRiskError, TruncationDegenerateError,
)
from .graph_models import Graph, SparseErParams, LabelledSbmParams, StepGraphon, DegreeModel
from .posteriors import WeightedSample, TwoPointPosterior
from .robustify import kl_tilt_solve, two_point_robust_error, mirror_descent_adversary, sensitivity_curve
