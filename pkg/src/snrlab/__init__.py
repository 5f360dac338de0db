"""snrlab: sparse-regression estimators and SNR-aware risk experiments.

The package has five parts:

* :mod:`snrlab.datamodel` -- Gaussian random-design data generation and
  SNR-regime metadata, all driven by splittable :class:`snrlab.rng.RngStream`
  values;
* :mod:`snrlab.estimators` -- ridge, lasso, elastic-net shrinkage, best
  subset selection and the zero baseline, as scikit-learn style
  estimators with verifiable solver metadata;
* :mod:`snrlab.tuning` -- closed-form default hyperparameters and
  oracle grid tuning;
* :mod:`snrlab.theory` -- closed-form risk formulas, the exact
  soft-thresholding risk, and Gaussian-tail utilities;
* :mod:`snrlab.bayes` -- spike/block prior samplers and posterior
  diagnostics for the minimax lower-bound machinery;
* :mod:`snrlab.harness` / :mod:`snrlab.plotting` / :mod:`snrlab.cli` --
  the reproducible Monte-Carlo sweep harness, CSV/SVG artifacts and the
  command line.
"""

__version__ = "0.1.0"

from .rng import RngStream
from .datamodel import (CapacityError, Dataset, ParamSpace, RegimeLabel,
                        SignalVector, SnrRegime, classify_regime, gen_design,
                        gen_response, gen_signal)
from .estimators import (BestSubsetEstimator, BudgetExceededError, Certificate,
                         ElasticNetEstimator, Estimate, LassoEstimator,
                         RidgeEstimator, SingularDesignError, ZeroEstimator,
                         bss_fit, enet_fit, lasso_fit, ridge_fit,
                         soft_threshold, zero_fit)
from .tuning import (Family, Provenance, RegimeMismatchError, Tuning,
                     default_grid, enet_default_tuning, lasso_default_lambda,
                     oracle_tune, ridge_default_lambda)
from .theory import (AsymptoticValidityWarning, RiskCurve, SoftRiskParams,
                     enet_second_order_bounds, gaussian_tail_bounds,
                     minimax_first_order, mixture_soft_risk,
                     ridge_second_order_risk, soft_risk, worst_pair_risk,
                     zero_estimator_risk)
from .bayes import (PosteriorDiagnostics, SpikePriorConfig, ab_diagnostics,
                    bayes_risk_mc, block_prior_sample, spike_posterior)
from .harness import (ConfigError, CsvSchemaError, SweepConfig, SweepResult,
                      TrialRecord, compare_theory, run_sweep, run_trial,
                      write_csv)
from .plotting import emit_plot

__all__ = [name for name in dir() if not name.startswith("_")]
