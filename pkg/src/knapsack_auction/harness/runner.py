"""End-to-end orchestration of one auction over the in-process bus."""

from __future__ import annotations

from typing import Mapping, Sequence

from ..messages import Record
from ..protocol.parties import Aborted, AuctionAborted, AuctionConfig, Winner
from ..protocol.session import AuctionSession
from .bus import AdversaryScript, Bus


def _outcome_body(outcome) -> dict:
    if isinstance(outcome, Winner):
        body = {"status": "winner", "highest": outcome.highest, "winner": outcome.winner, "paid": outcome.paid}
        if outcome.second is not None:
            body["second"] = outcome.second
        return body
    body = {"status": "aborted", "reason": outcome.reason}
    if outcome.culprit:
        body["culprit"] = outcome.culprit
    return body


def run_auction(config: AuctionConfig, bids: Sequence[int], script: AdversaryScript | dict | None = None,
                rebids: Sequence[Mapping[int, int]] = ()) -> tuple[Winner | Aborted, list[Record]]:
    """Run a full auction and return its outcome together with the transcript.

    ``bids`` are 1-based price indices, one per bidder. ``rebids`` lists, per
    tie round, replacement indices for tied bidders; unlisted bidders keep
    their bid.
    """
    if len(bids) != config.n:
        raise ValueError(f"config declares {config.n} bidders but {len(bids)} bids were given")
    if not isinstance(script, AdversaryScript):
        script = AdversaryScript.from_dict(script)
    bus = Bus(config.n, config.params.q, script)
    session = AuctionSession(config, bus, corrupt=script.corrupt, rebids=rebids, dropouts=script.dropouts)
    try:
        outcome = session.run(list(bids))
    except AuctionAborted as exc:
        outcome = Aborted(exc.reason, exc.culprit, exc.detail, tuple(session.detections))
    bus.event("outcome", "outcome", _outcome_body(outcome))
    return outcome, bus.records
