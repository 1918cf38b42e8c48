"""Bit-exact digital FP compute-in-memory crossbar simulator."""

from .codec import BF16, FP8_E4M3, INT8, PRECISIONS, PrecisionSpec
from .config import CrossbarConfig, named_design, resolve_design
from .datapath import (PipelineTrace, ProgrammedCrossbar, crossbar_matvec,
                       int8_matvec, matvec_batch, multiply, normalize,
                       program_weights, reduce_column, tiled_matvec)
from .faults import FaultCampaign, FaultSpec, ber, flip, sample_sites
from .harness import (AccuracyResult, LayerGraph, evaluate, load_dataset,
                      load_model, save_model)

__version__ = "0.1.0"

__all__ = [
    "BF16", "FP8_E4M3", "INT8", "PRECISIONS", "PrecisionSpec",
    "CrossbarConfig", "named_design", "resolve_design",
    "PipelineTrace", "ProgrammedCrossbar", "crossbar_matvec", "int8_matvec",
    "matvec_batch", "multiply", "normalize", "program_weights",
    "reduce_column", "tiled_matvec",
    "FaultCampaign", "FaultSpec", "ber", "flip", "sample_sites",
    "AccuracyResult", "LayerGraph", "evaluate", "load_dataset", "load_model",
    "save_model",
    "__version__",
]
