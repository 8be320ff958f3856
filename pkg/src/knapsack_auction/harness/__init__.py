"""Message bus, scripted adversaries, auction runner and transcript replay."""

from .bus import AdversaryScript, Bus, Rule
from .runner import run_auction
from .verify import CheckResult, VerificationReport, verify_transcript

__all__ = ["AdversaryScript", "Bus", "CheckResult", "Rule", "VerificationReport", "run_auction",
           "verify_transcript"]
