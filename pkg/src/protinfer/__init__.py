"""Protein inference through protein quantification.

Protein abundances are estimated from peptide-spectrum matches by multiple
counting, equal division or a zero-shrinking linear program, calibrated into
presence probabilities and evaluated with q-value curves.
"""

from .graph import Psm, TripartiteGraph, build_graph, connected_components
from .quantify import (AbundanceVector, equal_division, multiple_counting,
                       peptide_abundance)
from .lp import build_lp, recover_abundance, solve_lp, solve_per_component
from .calibrate import CalibrationModel, em_fit, normalized_score, sigmoid_probability
from .evaluate import group_proteins, label, q_value_curve
from .pipeline import RunConfig, compare_runs, run_pipeline

__version__ = "0.1.0"

__all__ = [
    "AbundanceVector", "CalibrationModel", "Psm", "RunConfig", "TripartiteGraph",
    "build_graph", "build_lp", "compare_runs", "connected_components", "em_fit",
    "equal_division", "group_proteins", "label", "multiple_counting", "normalized_score",
    "peptide_abundance", "q_value_curve", "recover_abundance", "run_pipeline",
    "sigmoid_probability", "solve_lp", "solve_per_component",
]
