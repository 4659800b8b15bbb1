"""Physics-informed synthetic appliance signatures for energy disaggregation.

High-rate waveforms (:mod:`appsig.hf`), low-rate RMS envelopes
(:mod:`appsig.lf`) and a PCA/KL-divergence comparison against real data
(:mod:`appsig.validation`).
"""

from .core import (
    Dataset,
    DatasetError,
    DegenerateSpectrumError,
    GenConfig,
    HfCentroid,
    InvalidParameterError,
    LfCentroid,
    ParseError,
    Signature,
    SignatureError,
    UndefinedSimilarityError,
    derive_stream,
    sample_folded_normal,
)
from .generate import generate_hf_dataset, generate_lf_dataset, regenerate, sample_centroids
from .hf import sample_hf_centroids, synth_hf_signature
from .lf import sample_lf_centroids, synth_lf_signature
from .validation import ValidationReport, match_appliances, validate

__version__ = "0.1.0"
