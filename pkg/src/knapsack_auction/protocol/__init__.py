"""Seller and bidder state machines and the phase drivers."""

from .parties import (
    Aborted,
    AuctionAborted,
    AuctionConfig,
    Bidder,
    Detection,
    Seller,
    Winner,
    WinnerClaim,
    detect_tie,
    verify_winner_claim,
)
from .session import MAX_TIE_ROUNDS, AuctionSession

__all__ = [
    "Aborted", "AuctionAborted", "AuctionConfig", "AuctionSession", "Bidder", "Detection",
    "MAX_TIE_ROUNDS", "Seller", "Winner", "WinnerClaim", "detect_tie", "verify_winner_claim",
]
