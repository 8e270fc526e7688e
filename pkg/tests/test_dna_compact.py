from __future__ import annotations

import random
import struct

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artdna.dna import (
    DecodeError, Dna, DnaLine, EncodeError, LinkTarget, decode_compact, encode_compact, parse_text,
)
from artdna.dna.compact import HEADER_SIZE, MAGIC, VERSION
from artdna.dna.synth import random_dna
from conftest import CORPUS, SAMPLES, corpus_dna


def header(count: int) -> bytes:
    return MAGIC + bytes([VERSION]) + struct.pack("<I", count)


def word(*fields_and_shifts) -> int:
    w = 0
    for value, shift in fields_and_shifts:
        w |= value << shift
    return w


def test_single_line_direct_param_is_one_record():
    dna = parse_text("45 (1:2.1) 0.5\n600 () 30")
    enc = encode_compact(dna)
    half = struct.unpack("<I", struct.pack("<f", 0.5))[0]
    expected = header(2) + struct.pack(
        "<QQ",
        word((45, 0), (1, 12), (1, 28), (half, 32)),
        word((600, 0), (30, 32)),
    )
    assert enc.to_bytes() == expected
    assert len(enc.records) == 16


def test_three_targets_on_one_channel_use_a_multiplier_chain():
    dna = parse_text("500 (1:2.1 1:3.1 1:4.1) 1 100\n" + "600 () 20\n" * 3)
    enc = encode_compact(dna)
    # element record + one full multiplier + one extension, after the 3 sink lines
    assert enc.record_count == 6
    first = enc.record(0)
    assert first & 0xFFF == 500 and (first >> 28) & 0xF == 0 and (first >> 12) & 0xFFFF == 4
    assert enc.record(4) == word((1, 12), (1, 28), (2, 32), (1, 48), (1, 52))
    assert enc.record(5) == word((3, 12), (1, 28))
    # the three sink lines take one record each, the fan-out line the remaining 24 bytes
    assert len(enc.records) - 3 * 8 == 24
    assert decode_compact(enc) == dna


def test_channel_boundaries_set_s_bits():
    dna = parse_text("41 (1:2.1 2:3.1 2:4.1) \n" + "600 () 20\n" * 3)
    enc = encode_compact(dna)
    # S1: second entry starts channel 2; E clear
    assert enc.record(4) == word((1, 12), (1, 28), (2, 32), (1, 48), (1, 52), (1, 53))
    assert decode_compact(enc) == dna


def test_indirect_params_live_in_the_parameter_region():
    dna = parse_text("10 () 1.0 0.5 0.25 15")
    enc = encode_compact(dna)
    assert enc.param_region == struct.pack("<fffi", 1.0, 0.5, 0.25, 15)
    assert enc.record(0) >> 32 == 0


def test_empty_dna_is_header_only():
    enc = encode_compact(Dna())
    assert enc.to_bytes() == header(0)
    assert len(enc) == HEADER_SIZE
    assert decode_compact(enc.to_bytes()) == Dna()


@pytest.mark.parametrize("name", SAMPLES + ("brake",))
def test_golden_binaries(name):
    dna = corpus_dna(name)
    golden = (CORPUS / f"{name}.adnb").read_bytes()
    assert encode_compact(dna).to_bytes() == golden
    assert decode_compact(golden) == dna


def test_encoding_is_deterministic(balancer):
    assert encode_compact(balancer).to_bytes() == encode_compact(balancer).to_bytes()


def test_every_record_is_64_bits(balancer):
    enc = encode_compact(balancer)
    assert len(enc.records) % 8 == 0


@pytest.mark.parametrize("line", [
    DnaLine(4096, (), ()),
    DnaLine(70, (LinkTarget(1, 70000, 1),), (1.0, 10)),
    DnaLine(70, (LinkTarget(1, 0, 16),), (1.0, 10)),
    DnaLine(70, (LinkTarget(2, 0, 1),), (1.0, 10)),
])
def test_capacity_errors(line):
    with pytest.raises(EncodeError):
        encode_compact(Dna((line,)))


def test_integer_overflow_rejected():
    with pytest.raises(EncodeError):
        encode_compact(Dna((DnaLine(500, (), (2**31, 10)),)))


def test_truncated_streams():
    data = encode_compact(parse_text("500 (1:2.1 1:3.1 1:4.1) 1 100\n" + "600 () 20\n" * 3)).to_bytes()
    with pytest.raises(DecodeError):
        decode_compact(data[:5])
    with pytest.raises(DecodeError):
        decode_compact(data[:HEADER_SIZE + 8 * 5])  # header still says 6 records
    # drop the extension record: the chain now ends on a record with E set
    count = struct.pack("<I", 5)
    cut = data[:9] + count + data[HEADER_SIZE:HEADER_SIZE + 8 * 5]
    with pytest.raises(DecodeError, match="unterminated"):
        decode_compact(cut)


def test_bad_magic_and_param_offset():
    data = bytearray(encode_compact(parse_text("10 () 1 0 0 15")).to_bytes())
    with pytest.raises(DecodeError):
        decode_compact(b"XXXXXXXX" + bytes(data[8:]))
    with pytest.raises(DecodeError, match="offset"):
        decode_compact(bytes(data[:-4]))


def test_reserved_prop_bits_rejected():
    data = bytearray(encode_compact(parse_text("500 (1:2.1 1:3.1) 1 100\n600 () 20\n600 () 20")).to_bytes())
    off = HEADER_SIZE + 3 * 8 + 7
    data[off] |= 0x80
    with pytest.raises(DecodeError, match="reserved"):
        decode_compact(bytes(data))


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_random_dna_round_trip(seed):
    dna = random_dna(random.Random(seed))
    assert decode_compact(encode_compact(dna).to_bytes()) == dna


@pytest.mark.parametrize("name", SAMPLES)
def test_samples_fit_in_a_kilobyte(name):
    assert len(encode_compact(corpus_dna(name))) < 1024
