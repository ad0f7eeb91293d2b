"""roccut: ROC curve models and optimal biomarker cutoff estimation.

Estimators follow the scikit-learn fit surface; see the README for the CLI.
"""

__version__ = "0.1.0"

from .bayes import (
    Chains,
    McmcConfig,
    Summary,
    gelman_rubin,
    gibbs_dpm_location,
    gibbs_dpm_regression,
    gibbs_normal_regression,
    summarize,
)
from .cutoffs import (
    Criterion,
    CutoffResult,
    bootstrap_analysis,
    cutoff_bootstrap,
    cutoff_posterior,
    cutoff_posterior_multi,
    objective,
    optimize_cutoff,
)
from .distributions import (
    Dist,
    EmpiricalCdf,
    GammaDist,
    KernelCdf,
    LogNormalDist,
    NormalDist,
    NormalMixture,
    ProbitNormalDist,
    ProbitNormalMixture,
    SquaredNormalDist,
    bvn_cdf,
    f_cdf,
    gamma_cdf,
    invert_cdf,
    noncentral_chisq_cdf,
    normal_cdf,
    normal_quantile,
    rng_stream,
    silverman_bandwidth,
)
from .estimators import (
    MODEL_REGISTRY,
    BichisqParams,
    BigammaRoc,
    BinormalRoc,
    EmpiricalRoc,
    KernelRoc,
    ParametricPvRoc,
    Sample,
    SemiparametricPvRoc,
    auc_at_x,
    bichisq_auc,
    bichisq_roc,
    roc_at_x,
)
from .roc_core import (
    HIGHER_IS_DISEASED,
    LOWER_IS_DISEASED,
    RocPair,
    SeSp,
    auc,
    delong_auc,
    empirical_roc_points,
    roc_eval,
    se_sp_at,
)
from .simharness import (
    COVARIATE_MECHANISMS,
    LEVELS,
    NO_COVARIATE_MECHANISMS,
    Mechanism,
    SimStudyResult,
    SimStudySpec,
    TrueValues,
    aggregate_bias,
    generate,
    oracle_pair,
    run_study,
    true_values,
)

__all__ = [name for name in dir() if not name.startswith("_")]
