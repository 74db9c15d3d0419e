"""Organizational chart inference from enterprise social networks."""
from .esn import EsnNetwork, OrgChart, parse_chart, parse_network, validate_chart
from .pipeline import METHODS, InferenceResult, run_method
from .stratification import ClassAssignment, StratificationConfig, stratify, stratify_agony

__all__ = [
    "EsnNetwork",
    "OrgChart",
    "parse_chart",
    "parse_network",
    "validate_chart",
    "METHODS",
    "InferenceResult",
    "run_method",
    "ClassAssignment",
    "StratificationConfig",
    "stratify",
    "stratify_agony",
]
