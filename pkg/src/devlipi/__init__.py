"""Devanagari page recognition with IAST transliteration.

Modules, in pipeline order: ``raster`` (thresholding, projections,
components, rotation), ``morphology``, ``skew``, ``segmentation``,
``features``, ``recognition``, ``translit`` and ``pipeline``.  ``synth`` and
``font`` provide generated test pages with exact ground truth.
"""
from .errors import DevlipiError, StageError
from .pipeline import PipelineConfig, process_page, run
from .recognition import TemplateLibrary, default_library
from .synth import SynthSpec, gen_synthetic
from .translit import default_table, transliterate

__version__ = "0.1.0"

__all__ = [
    "DevlipiError",
    "PipelineConfig",
    "StageError",
    "SynthSpec",
    "TemplateLibrary",
    "default_library",
    "default_table",
    "gen_synthetic",
    "process_page",
    "run",
    "transliterate",
]
