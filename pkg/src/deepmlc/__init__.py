"""deepmlc: multi-label classification with RBM/DBN feature learning,
problem-transformation ensembles, and a reproducible evaluation harness."""

from .data import (Dataset, DatasetStats, ScalingParams, SplitSpec, load_arff,
                   load_csv, scale_features, split, stats, write_arff, write_csv)
from .dbn import (BpHyper, DbnStack, attach_and_finetune, bpmll_baseline, forward,
                  greedy_pretrain, load_stack, predict_labels, save_stack)
from .harness import (GridSpec, MethodConfig, TrainedPipeline, fit_method,
                      grid_search, load_bundle, run_experiment, save_bundle,
                      sweep_hidden_units, train_pipeline)
from .linear import (LogisticModel, SoftmaxModel, fit_logistic, fit_softmax,
                     predict_dist, predict_prob)
from .metrics import MetricSet, accuracy, evaluate_predictions, exact_match, hamming_loss
from .rbm import (Rbm, RbmHyper, TrainTrace, cd_train, energy, exact_log_likelihood,
                  hidden_probs, load_rbm, save_rbm, transform, visible_probs)
from .transforms import (BaseConfig, VoteMatrix, fit_br, fit_cc, fit_ecc, fit_fw,
                         fit_lp, fit_rakel, predict, wrap_with_features)

__version__ = "0.1.0"
