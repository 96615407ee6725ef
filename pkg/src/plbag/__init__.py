"""Learning from bags of candidate labels.

Submodules: :mod:`plbag.core` (domain types and probability arithmetic),
:mod:`plbag.knn_index` (exact neighbor retrieval), :mod:`plbag.plaknn`
(the adaptive label-elimination classifier), :mod:`plbag.baselines`
(fixed-k and threshold-qualification classifiers), :mod:`plbag.synth`
(scenario generators), :mod:`plbag.theory` (learnability diagnostics),
:mod:`plbag.preprocess` (neighbor-friendly feature pipelines), and
:mod:`plbag.bench_cli` (experiment harness and CLI).
"""

from . import baselines, bench_cli, core, knn_index, plaknn, preprocess, synth, theory
from .core import (
    Bag,
    BagGenMatrix,
    DiscreteDistribution,
    LabelDistribution,
    LabelSpace,
    PartialDataset,
    PartialExample,
)
from .plaknn import PlaknnConfig

__version__ = "0.1.0"

__all__ = [
    "Bag",
    "BagGenMatrix",
    "DiscreteDistribution",
    "LabelDistribution",
    "LabelSpace",
    "PartialDataset",
    "PartialExample",
    "PlaknnConfig",
    "baselines",
    "bench_cli",
    "core",
    "knn_index",
    "plaknn",
    "preprocess",
    "synth",
    "theory",
]
