from .logistic import LogisticHyper, LogisticModel, loss_and_grad, train_logistic
from .metrics import auc_roc, micro_macro_f1
from .pipelines import (
    EvalReport,
    LinkPredConfig,
    NodeClassConfig,
    run_link_prediction,
    run_node_classification,
)
from .split import LinkPredSplit, SplitError, sample_negative_edges, split_link_prediction
from ..labels import LabelSet, load_labels
