"""dppselect: query-conditioned keyframe selection for synchronized ego/exo
video streams via per-view relevance scoring, relevance-proportional budget
allocation, and per-view k-DPP sampling."""

from .allocation import BudgetSplit, hard_select, soft_allocate
from .core import (
    FrameRecord,
    FrameStream,
    Manifest,
    Query,
    QueryEmbedding,
    Selection,
    SelectionEntry,
    StreamPair,
    View,
    load_manifest,
    normalize,
    write_manifest,
)
from .dpp import (
    CholeskyKdppSampler,
    EspTable,
    ExactKdppSampler,
    OracleTable,
    SamplerMode,
    SubsetSample,
    enumerate_oracle,
    esp,
    greedy_map,
    sample_kdpp_cholesky,
    sample_kdpp_exact,
    sample_with_fallback,
)
from .errors import DppSelectError
from .kernel import QualityDiversityKernel, build_kernel, certify_psd
from .pipeline import Mode, SelectConfig, merge_by_timestamp, select
from .scoring import RelevanceVector, clamp_scores, score_view
from .synth import Structure, SynthSpec, generate, generate_manifest

__version__ = "0.1.0"

__all__ = [
    "BudgetSplit",
    "CholeskyKdppSampler",
    "DppSelectError",
    "EspTable",
    "ExactKdppSampler",
    "FrameRecord",
    "FrameStream",
    "Manifest",
    "Mode",
    "OracleTable",
    "QualityDiversityKernel",
    "Query",
    "QueryEmbedding",
    "RelevanceVector",
    "SamplerMode",
    "SelectConfig",
    "Selection",
    "SelectionEntry",
    "StreamPair",
    "Structure",
    "SubsetSample",
    "SynthSpec",
    "View",
    "build_kernel",
    "certify_psd",
    "clamp_scores",
    "enumerate_oracle",
    "esp",
    "generate",
    "generate_manifest",
    "greedy_map",
    "hard_select",
    "load_manifest",
    "merge_by_timestamp",
    "normalize",
    "sample_kdpp_cholesky",
    "sample_kdpp_exact",
    "sample_with_fallback",
    "score_view",
    "select",
    "soft_allocate",
    "write_manifest",
]
