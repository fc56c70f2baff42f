"""Sample-level noisy-label detection by standardized loss aggregation.

Scores every sample of a binary-labeled corpus by how consistently its
validation fold underperforms across repeated stratified K-fold
cross-validation with a lightweight discriminant classifier.  Ships the
continuous standardized-loss estimator, the discrete worst-fold-counting
baseline, and a synthetic-noise benchmark harness.
"""

from .backend import HAVE_COMPILED, get_backend
from .dataset import Dataset, NoiseMask, inject_noise, load_dataset, make_gaussian_mixture
from .engine import (
    EngineConfig,
    RepetitionResult,
    SampleRecord,
    ScoreBoard,
    apply_repetition,
    finalize,
    fold_loss,
    restore_checkpoint,
    run,
    run_repetition,
    save_checkpoint,
    standardize,
)
from .folds import FoldPlan, fold_members, make_fold_plan
from .lda import LdaModel, fit_lda, predict_proba
from .metrics import (
    AurocTrace,
    ScoreDistributionSummary,
    StoppingPolicy,
    compute_auroc,
    convergence_check,
    summarize_distributions,
)
from .pca import PcaModel, fit_pca, transform

__version__ = "0.1.0"
