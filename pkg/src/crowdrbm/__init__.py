"""Unsupervised ensemble learning over binary classifier predictions.

A single-hidden-node RBM is parameter-equivalent to the conditional
independence (Dawid-Skene) model; stacked RBMs with SVD-chosen widths handle
ensembles whose errors are dependent. This package provides the core RBM
machinery, the parameter bijection, classical baselines, benchmark data
generators, and a reproducible experiment harness.
"""

__version__ = "0.1.0"

from .baselines import ds_em, majority_vote, sml_predict
from .datagen import (
    GaussianMixtureModel,
    LayeredGraphModel,
    PosteriorOracle,
    TreeModel,
    bayes_optimal_accuracy,
    gen_condind,
    gen_layered_graph,
    gen_tree,
    gen_truncated_gaussian,
    make_paper_condind,
    make_paper_layered_graph,
    make_paper_tree,
    make_paper_truncated_gaussian,
    posterior_oracle,
    sample_dataset,
    verify_lemma3,
)
from .dnn import (
    DEFAULT_PROBE_CONFIG,
    DnnModel,
    HyperSpace,
    choose_hidden_width,
    model_from_json,
    model_to_json,
    predict_proba,
    propagate_predict,
    random_hyperparameter_search,
    resolve_label_flip,
    train_stack,
)
from .experiments import ExperimentConfig, run_experiment
from .mapping import (
    CondIndParams,
    condind_posterior,
    condind_to_rbm,
    joint_table,
    rbm_posterior,
    rbm_to_condind,
)
from .metrics import (
    RecoveryReport,
    balanced_accuracy,
    conditional_correlation,
    parameter_recovery_report,
)
from .rbm import (
    CdGradient,
    RbmParams,
    TrainConfig,
    cd_step,
    energy,
    enumerate_states,
    exact_log_likelihood,
    free_energy,
    hidden_activation,
    sample_layer,
    train_rbm,
    visible_activation,
)

__all__ = [
    "CdGradient",
    "CondIndParams",
    "DEFAULT_PROBE_CONFIG",
    "DnnModel",
    "ExperimentConfig",
    "GaussianMixtureModel",
    "HyperSpace",
    "LayeredGraphModel",
    "PosteriorOracle",
    "RbmParams",
    "RecoveryReport",
    "TrainConfig",
    "TreeModel",
    "balanced_accuracy",
    "bayes_optimal_accuracy",
    "cd_step",
    "choose_hidden_width",
    "conditional_correlation",
    "condind_posterior",
    "condind_to_rbm",
    "ds_em",
    "energy",
    "enumerate_states",
    "exact_log_likelihood",
    "free_energy",
    "gen_condind",
    "gen_layered_graph",
    "gen_tree",
    "gen_truncated_gaussian",
    "hidden_activation",
    "joint_table",
    "majority_vote",
    "make_paper_condind",
    "make_paper_layered_graph",
    "make_paper_tree",
    "make_paper_truncated_gaussian",
    "model_from_json",
    "model_to_json",
    "parameter_recovery_report",
    "posterior_oracle",
    "predict_proba",
    "propagate_predict",
    "random_hyperparameter_search",
    "rbm_posterior",
    "rbm_to_condind",
    "resolve_label_flip",
    "run_experiment",
    "sample_dataset",
    "sample_layer",
    "sml_predict",
    "train_rbm",
    "train_stack",
    "verify_lemma3",
    "visible_activation",
]
