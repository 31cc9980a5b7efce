"""Configuration, verification campaign and report output."""

from .campaign import run_campaign
from .config import CampaignConfig, default_config, parse_coeff
from .report import ANCHORS, Record, VerificationReport, emit_outputs

__all__ = [
    "ANCHORS",
    "CampaignConfig",
    "Record",
    "VerificationReport",
    "default_config",
    "emit_outputs",
    "parse_coeff",
    "run_campaign",
]
