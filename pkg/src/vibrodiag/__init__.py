"""Unsupervised vibro-acoustic fault detection, segmentation, and
attribution-guided diagnostics for switching-operation recordings.
"""

from . import cae, clustering, dsp, io, metrics, nn, synthgen, xai

__version__ = "0.1.0"

__all__ = [
    "cae",
    "clustering",
    "dsp",
    "io",
    "metrics",
    "nn",
    "synthgen",
    "xai",
]
