"""From-scratch learners: RBF SVM (pairwise dual solver), random forest,
prototype KDE scoring, Platt scaling, and model serialization."""

from .forest import DecisionTree, ForestModel, forest_decision, forest_train, grow_tree
from .kde import PrototypeSet, kde_score, summarize_prototypes
from .platt import PlattParams, platt_apply, platt_fit
from .serialize import load_model, save_model
from .svm import SvmModel, rbf_kernel, svm_decision, svm_dual_objective, svm_train

__all__ = [
    "DecisionTree",
    "ForestModel",
    "forest_decision",
    "forest_train",
    "grow_tree",
    "PrototypeSet",
    "kde_score",
    "summarize_prototypes",
    "PlattParams",
    "platt_apply",
    "platt_fit",
    "load_model",
    "save_model",
    "SvmModel",
    "rbf_kernel",
    "svm_decision",
    "svm_dual_objective",
    "svm_train",
]
