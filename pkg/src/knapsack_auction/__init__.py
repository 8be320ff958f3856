"""Sealed-bid knapsack auction: seller and bidders agree on a price without an auctioneer."""

from .group import GroupParams, generate_group_params, toy_group_params
from .harness import AdversaryScript, run_auction
from .knapsack import CodeBook, PriceTable, encode, solve, winning_prices
from .protocol import Aborted, AuctionConfig, Winner

__version__ = "0.1.0"

__all__ = [
    "Aborted", "AdversaryScript", "AuctionConfig", "CodeBook", "GroupParams", "PriceTable", "Winner",
    "encode", "generate_group_params", "run_auction", "solve", "toy_group_params", "winning_prices",
]
