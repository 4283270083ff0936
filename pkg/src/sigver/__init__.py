"""Offline signature verification with block-geometric features and a
one-hidden-layer softmax classifier trained by scaled conjugate gradient.

Submodules: raster (PGM I/O), preprocess (denoise/binarize/morphology),
features (130-value block vectors), ann (MLP + SCG trainer), evaluate
(FAR/FRR, EER, ROC, PCA), dataset (corpora, splits, synthetic generator),
cli (command line).
"""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
