import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from knapsack_auction.errors import TranscriptParseError
from knapsack_auction.messages import (
    BIDDER_ONLY_KINDS,
    KINDS,
    Channel,
    Record,
    bidder_id,
    bidder_index,
    decode_record,
    dump_transcript,
    encode_record,
    load_transcript,
)


def test_line_format_is_fixed():
    rec = Record(7, "ot", Channel.PRIVATE, "S", "B2", "ot_response", {"v": [b"\x02\xc6"], "u": [4000]})
    line = encode_record(rec)
    assert line == ('{"seq":"7","phase":"ot","channel":"private","from":"S","to":"B2",'
                    '"kind":"ot_response","body":{"u":["4000"],"v":["02c6"]}}')
    assert list(json.loads(line)) == ["seq", "phase", "channel", "from", "to", "kind", "body"]


def test_round_trip():
    rec = Record(1, "init", Channel.PUBLIC, "S", "*", "announce", {"prices": [10, 20], "eta": [1, 2], "xi": [3]})
    assert decode_record(encode_record(rec)) == rec


@settings(max_examples=100, deadline=None)
@given(d=st.integers(0, 2**256), seq=st.integers(1, 10**6))
def test_round_trip_property(d, seq):
    rec = Record(seq, "sharing", Channel.PRIVATE, "B1", "B2", "share", {"d": d})
    assert decode_record(encode_record(rec)) == rec


@pytest.mark.parametrize("line", [
    "not json",
    "[]",
    '{"seq":"1","phase":"init","channel":"public","from":"S","to":"*","kind":"nope","body":{}}',
    '{"seq":"1","phase":"later","channel":"public","from":"S","to":"*","kind":"announce","body":{}}',
    '{"seq":1,"phase":"init","channel":"public","from":"S","to":"*","kind":"announce","body":{}}',
    '{"seq":"1","phase":"init","channel":"public","from":"S","to":"*","kind":"announce","body":{"x":"1"}}',
    '{"seq":"1","phase":"init","channel":"public","from":"S","to":"*","kind":"announce","body":{"prices":"10"}}',
    '{"seq":"1","phase":"ot","channel":"private","from":"S","to":"B1","kind":"ot_response",'
    '"body":{"u":["1"],"v":["0A"]}}',
    '{"seq":"1","phase":"init","channel":"public","from":"S","to":"*","kind":"announce","body":{},"x":1}',
])
def test_malformed_records(line):
    with pytest.raises(TranscriptParseError):
        decode_record(line)


def test_parse_error_names_the_sequence_number():
    line = '{"seq":"12","phase":"init","channel":"public","from":"S","to":"*","kind":"announce","body":{"x":"1"}}'
    with pytest.raises(TranscriptParseError) as info:
        decode_record(line, 3)
    assert info.value.seq == 12
    assert info.value.line == 3


def test_transcript_needs_trailing_newline():
    rec = Record(1, "init", Channel.PUBLIC, "S", "*", "announce", {"prices": [10]})
    text = dump_transcript([rec])
    assert load_transcript(text) == [rec]
    with pytest.raises(TranscriptParseError):
        load_transcript(text[:-1])
    assert load_transcript("") == []


def test_bidder_ids():
    assert bidder_id(4) == "B4"
    assert bidder_index("B12") == 12
    assert bidder_index("S") is None
    assert bidder_index("B") is None


def test_bidder_only_kinds():
    assert BIDDER_ONLY_KINDS == {"zeta", "proof1_verdict", "share_commits", "share_ack"}
    assert all(KINDS[k][0] is Channel.BIDDERS for k in BIDDER_ONLY_KINDS)
