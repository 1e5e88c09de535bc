"""Robust mean estimation and outlier scoring with matrix-exponential weights."""
import os as _os

# QUE_THREADS caps BLAS threading; it must be set before numpy loads
if _os.environ.get("QUE_THREADS"):
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _os.environ["QUE_THREADS"])

from .downweight import FilterOutcome, one_d_filter, random_filter
from .errors import *  # noqa: F401,F403
from .formats import load_dataset, load_labels, load_scores, save_dataset, save_labels, save_scores
from .matexp import (
    ScoreReport,
    SketchParams,
    WeightHistory,
    build_sketched_oracle,
    exact_density,
    exact_scores,
    sketched_scores,
    taylor_exp_matvec,
)
from .moments import (
    Dataset,
    WeightVector,
    bucket_reduce,
    estimate_spectral_norm,
    weighted_cov_dense,
    weighted_cov_matvec,
    weighted_mean,
)
from .outliers import (
    LabeledScores,
    WhiteningTransform,
    apply_whitening,
    baseline_l2,
    baseline_spectral,
    fit_whitening,
    que_scores,
    rocauc,
)
from .robust_mean import (
    EstimatorConfig,
    PipelineResult,
    estimate_mean_pipeline,
    naive_prune,
    que_score_filter,
    sg_que_score_filter,
)
from .synthetic import CorruptionSpec, gen_eps_corrupted, gen_synthetic

__version__ = "0.1.0"
