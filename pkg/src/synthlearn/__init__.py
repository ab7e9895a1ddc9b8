"""Ensemble counterfactual prediction and block-bootstrap inference for a single treated unit."""

from .aggregation import (
    WeightScheme,
    ensemble_predict,
    exp_weights,
    fit_weights,
    ftl_weights,
    loss_matrix,
    ls_weights,
    online_weight_path,
    poly_weights,
    quadratic_loss,
    regret_report,
)
from .effects import (
    AteReport,
    CateModel,
    cate_mse,
    estimate_ate,
    fit_t_learner,
    fit_x_learner,
    rate_diagnostic,
)
from .inference import (
    TestReport,
    TestSpec,
    bootstrap_test,
    circular_block_indices,
    placebo_panels,
    placebo_suite,
    stat_average,
    stat_sharp,
)
from .learners import (
    FittedLearner,
    LearnerSpec,
    fit_ar,
    fit_honest_forest,
    fit_knn,
    fit_learner,
    fit_pool,
    fit_ridge,
    fit_sc,
    make_noninformative,
    predict,
    prediction_matrix,
)
from .panel import NullSpec, PanelError, PanelSeries, SplitPlan, apply_null, load_panel, make_splits

__version__ = "0.1.0"

__all__ = [
    "PanelSeries", "NullSpec", "SplitPlan", "PanelError", "apply_null", "load_panel",
    "make_splits",
    "LearnerSpec", "FittedLearner", "fit_sc", "fit_ridge", "fit_knn", "fit_ar",
    "fit_honest_forest", "make_noninformative", "predict", "fit_learner", "fit_pool",
    "prediction_matrix",
    "WeightScheme", "quadratic_loss", "exp_weights", "poly_weights", "ftl_weights", "ls_weights",
    "ensemble_predict", "online_weight_path", "fit_weights", "loss_matrix", "regret_report",
    "TestSpec", "TestReport", "stat_sharp", "stat_average", "circular_block_indices",
    "bootstrap_test", "placebo_panels", "placebo_suite",
    "AteReport", "CateModel", "estimate_ate", "fit_t_learner", "fit_x_learner", "cate_mse",
    "rate_diagnostic",
]
