"""Single-coefficient tests and confidence intervals for high-dimensional logistic regression."""

from .inference import (ConfidenceInterval, InferenceConfig, PipelineError, TestOutcome,
                        confidence_interval, normal_quantile, prepare, run_test, test_statistic)
from .lasso import LassoConfig, LassoFit, default_lambda, fit_logistic_lasso, soft_threshold
from .linearize import LinearizedData, linearize, rebuild_v
from .lp import LpProblem, LpSolution, LpStatus, check_solution, solve_lp
from .mds import MdsConfig, MdsFit, MdsStatus, fit_pi, fit_theta, solve_mds
from .model import (Dataset, DataError, SplitDataset, dsigmoid, neg_log_likelihood, nll_gradient,
                    sigmoid, split_samples)

__version__ = "0.1.0"
