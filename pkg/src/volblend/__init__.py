"""volblend: volatility forecasting by blending ARCH-family model predictions.

Fits a bank of conditional-heteroscedasticity models by maximum likelihood,
combines their variance forecasts with OLS or a small neural network, applies
an efficiency-ratio trend adjustment, and scores everything against a
realized-volatility proxy with RMSE/MAE and Diebold-Mariano tests.
"""

from .arch import (
    FittedModel,
    ModelParams,
    ModelSpec,
    default_order_grid,
    fit_mle,
    forecast_path,
    information_criteria,
    log_likelihood,
    select_order,
    simulate,
    variance_recursion,
)
from .augmentation import AugmentConfig, augment, effective_ratio, tune_augment
from .blending import (
    BlendWeights,
    MlpBlender,
    OlsBlender,
    linear_blend,
    mlp_fit,
    mlp_predict,
    ols_fit,
    uniform_blend,
)
from .evaluation import DmResult, EvalReport, dm_test, mae, realized_vol_proxy, rmse
from .exceptions import (
    ConfigError,
    ConvergenceError,
    DataError,
    NumericalError,
    ParameterError,
    PipelineStageError,
    VolblendError,
)
from .feature_bank import (
    CorrelationMatrix,
    FeatureMatrix,
    build_feature_bank,
    correlation_matrix,
    cosine,
    default_bank,
    random_feature_subset,
    select_features,
)
from .innovations import InnovationDist, log_density, sample
from .market_data import (
    DescriptiveStats,
    PriceSeries,
    ReturnSeries,
    SplitSpec,
    describe,
    load_prices,
    log_returns,
    split,
)
from .pipeline import PipelineConfig, load_config, run_pipeline, validate_config
from .svr import KernelSvr, rbf_kernel, svr_fit
from .svr_garch import SvrGarchConfig, SvrGarchResult, eavesdrop, svr_garch_forecast

__version__ = "0.1.0"

__all__ = [
    "AugmentConfig",
    "BlendWeights",
    "ConfigError",
    "ConvergenceError",
    "CorrelationMatrix",
    "DataError",
    "DescriptiveStats",
    "DmResult",
    "EvalReport",
    "FeatureMatrix",
    "FittedModel",
    "InnovationDist",
    "KernelSvr",
    "MlpBlender",
    "ModelParams",
    "ModelSpec",
    "NumericalError",
    "OlsBlender",
    "ParameterError",
    "PipelineConfig",
    "PipelineStageError",
    "PriceSeries",
    "ReturnSeries",
    "SplitSpec",
    "SvrGarchConfig",
    "SvrGarchResult",
    "VolblendError",
    "augment",
    "build_feature_bank",
    "correlation_matrix",
    "cosine",
    "default_bank",
    "default_order_grid",
    "describe",
    "dm_test",
    "eavesdrop",
    "effective_ratio",
    "fit_mle",
    "forecast_path",
    "information_criteria",
    "linear_blend",
    "load_config",
    "load_prices",
    "log_density",
    "log_likelihood",
    "log_returns",
    "mae",
    "mlp_fit",
    "mlp_predict",
    "ols_fit",
    "random_feature_subset",
    "realized_vol_proxy",
    "rmse",
    "run_pipeline",
    "sample",
    "select_features",
    "select_order",
    "simulate",
    "split",
    "svr_fit",
    "svr_garch_forecast",
    "tune_augment",
    "uniform_blend",
    "validate_config",
    "variance_recursion",
]
