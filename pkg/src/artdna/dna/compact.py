"""Compact 64-bit-per-line storage format (``.adnb``).

See docs/FORMAT.md for the byte layout. Summary, bit 0 = LSB of a
little-endian u64:

element record      Id[0:12] Dest[12:28] Ch[28:32] Param[32:64]
multiplier record   Id=0[0:12] Dest1[12:28] Ch1[28:32] Dest2[32:48] Ch2[48:52]
                    E[52] S1[53] S2[54], bits 55..63 zero

Element ``i`` of the DNA is record ``i``; multiplier records follow the last
element record. An element with a single link target stores it directly
(Ch != 0, destination channel 1); an element with several targets stores
Ch = 0 and Dest = index of its first multiplier record; no targets is
Dest = Ch = 0.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

from ..elements.registry import FLOAT, MAX_ELEMENT_ID, UnknownElementError, schema_of
from .model import MAX_LINES, MAX_SRC_CHANNEL, INT32_MAX, INT32_MIN, Dna, DnaLine, LinkTarget

MAGIC = b"\x7fADNA\r\n\x1a"
VERSION = 1
_HEADER = struct.Struct("<8sBI")
HEADER_SIZE = _HEADER.size  # 13
RECORD_SIZE = 8

E_BIT = 1 << 52
S1_BIT = 1 << 53
S2_BIT = 1 << 54
_PROP_MASK = (1 << 64) - (1 << 52)
_KNOWN_PROP = E_BIT | S1_BIT | S2_BIT

_U64 = struct.Struct("<Q")
_F = struct.Struct("<f")
_I = struct.Struct("<i")
_U = struct.Struct("<I")


class EncodeError(ValueError):
    pass


class DecodeError(ValueError):
    pass


@dataclass(frozen=True)
class EncodedDna:
    records: bytes = b""
    param_region: bytes = b""

    @property
    def record_count(self) -> int:
        return len(self.records) // RECORD_SIZE

    def record(self, i: int) -> int:
        return _U64.unpack_from(self.records, i * RECORD_SIZE)[0]

    def to_bytes(self) -> bytes:
        return _HEADER.pack(MAGIC, VERSION, self.record_count) + self.records + self.param_region

    def __len__(self) -> int:
        return HEADER_SIZE + len(self.records) + len(self.param_region)

    @classmethod
    def from_bytes(cls, data: bytes) -> "EncodedDna":
        if len(data) < HEADER_SIZE:
            raise DecodeError("truncated stream: missing header")
        magic, version, count = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise DecodeError("bad magic")
        if version != VERSION:
            raise DecodeError(f"unsupported version {version}")
        end = HEADER_SIZE + count * RECORD_SIZE
        if len(data) < end:
            raise DecodeError("truncated stream: record region shorter than header count")
        return cls(bytes(data[HEADER_SIZE:end]), bytes(data[end:]))


def element_record(element_id: int, dest: int, ch: int, param: int) -> int:
    return element_id | dest << 12 | ch << 28 | param << 32


def multiplier_record(dest1: int, ch1: int, dest2: int = 0, ch2: int = 0,
                      e: bool = False, s1: bool = False, s2: bool = False) -> int:
    word = dest1 << 12 | ch1 << 28 | dest2 << 32 | ch2 << 48
    return word | (E_BIT if e else 0) | (S1_BIT if s1 else 0) | (S2_BIT if s2 else 0)


def _pack_slot(value, kind: str) -> bytes:
    if kind == FLOAT:
        return _F.pack(float(value))
    value = int(value)
    if not INT32_MIN <= value <= INT32_MAX:
        raise EncodeError(f"capacity exceeded: integer parameter {value} does not fit 32 bits")
    return _I.pack(value)


def _unpack_slot(raw: bytes, kind: str):
    if kind == FLOAT:
        return _F.unpack(raw)[0]
    return _I.unpack(raw)[0]


def _check_target(lk: LinkTarget, where: int) -> None:
    if not 0 <= lk.line < MAX_LINES:
        raise EncodeError(f"capacity exceeded: line {where + 1} links to line {lk.line + 1}")
    if not 1 <= lk.src_channel <= MAX_SRC_CHANNEL:
        raise EncodeError(f"capacity exceeded: line {where + 1} uses source channel {lk.src_channel}")


def _multiplier_chain(links: tuple[LinkTarget, ...]) -> list[int]:
    out = []
    for k in range(0, len(links), 2):
        first = links[k]
        second = links[k + 1] if k + 1 < len(links) else None
        last = second or first
        extend = k + 2 < len(links)
        s2 = extend and links[k + 2].dst_channel != last.dst_channel
        if second is None:
            out.append(multiplier_record(first.line, first.src_channel, e=extend, s2=s2))
        else:
            out.append(multiplier_record(
                first.line, first.src_channel, second.line, second.src_channel,
                e=extend, s1=second.dst_channel != first.dst_channel, s2=s2,
            ))
    return out


def encode_compact(dna: Dna) -> EncodedDna:
    n = len(dna.lines)
    if n > MAX_LINES:
        raise EncodeError(f"capacity exceeded: {n} lines > {MAX_LINES}")
    elements: list[int] = []
    multipliers: list[int] = []
    params = bytearray()
    for i, line in enumerate(dna.lines):
        if not 0 < line.id <= MAX_ELEMENT_ID:
            raise EncodeError(f"capacity exceeded: line {i + 1} has element id {line.id}")
        try:
            schema = schema_of(line.id)
        except UnknownElementError as exc:
            raise EncodeError(f"line {i + 1}: {exc}") from None
        channels = sorted({lk.dst_channel for lk in line.links})
        if channels != list(range(1, len(channels) + 1)):
            raise EncodeError(f"line {i + 1}: destination channels {channels} are not contiguous from 1")
        for lk in line.links:
            _check_target(lk, i)

        if not line.links:
            dest, ch = 0, 0
        elif len(line.links) == 1:
            dest, ch = line.links[0].line, line.links[0].src_channel
        else:
            dest, ch = n + len(multipliers), 0
            if dest >= MAX_LINES:
                raise EncodeError("capacity exceeded: multiplier records beyond 16-bit line space")
            multipliers.extend(_multiplier_chain(line.links))

        if len(line.params) != schema.arity:
            raise EncodeError(f"line {i + 1}: {schema.name} takes {schema.arity} parameters, got {len(line.params)}")
        packed = b"".join(_pack_slot(v, s.kind) for v, s in zip(line.params, schema.param_schema))
        if schema.indirect:
            param = len(params)
            params += packed
        elif packed:
            param = _U.unpack(packed)[0]
        else:
            param = 0
        elements.append(element_record(line.id, dest, ch, param))

    if n + len(multipliers) > MAX_LINES:
        raise EncodeError("capacity exceeded: too many records")
    records = b"".join(_U64.pack(r) for r in elements + multipliers)
    return EncodedDna(records, bytes(params))


def _fields(word: int) -> tuple[int, int, int, int]:
    return word & 0xFFF, (word >> 12) & 0xFFFF, (word >> 28) & 0xF, word >> 32


def _decode_chain(enc: EncodedDna, start: int, n: int, where: int) -> list[LinkTarget]:
    total = enc.record_count
    if not n <= start < total:
        raise DecodeError(f"line {where + 1}: multiplier pointer {start} outside multiplier region")
    links = []
    channel = 1
    idx = start
    while True:
        if idx >= total:
            raise DecodeError(f"line {where + 1}: unterminated multiplier chain")
        word = enc.record(idx)
        if word & 0xFFF != 0:
            raise DecodeError(f"record {idx} is not a link multiplier")
        if word & _PROP_MASK & ~_KNOWN_PROP:
            raise DecodeError(f"record {idx}: reserved Prop bits set")
        dest1, ch1 = (word >> 12) & 0xFFFF, (word >> 28) & 0xF
        dest2, ch2 = (word >> 32) & 0xFFFF, (word >> 48) & 0xF
        extend = bool(word & E_BIT)
        if ch1 == 0:
            raise DecodeError(f"record {idx}: empty first multiplier entry")
        links.append(LinkTarget(channel, dest1, ch1))
        if ch2:
            if word & S1_BIT:
                channel += 1
            links.append(LinkTarget(channel, dest2, ch2))
        elif extend:
            raise DecodeError(f"record {idx}: extended multiplier with empty second entry")
        if not extend:
            return links
        if word & S2_BIT:
            channel += 1
        idx += 1


def decode_compact(encoded: EncodedDna | bytes) -> Dna:
    enc = EncodedDna.from_bytes(encoded) if isinstance(encoded, (bytes, bytearray)) else encoded
    if len(enc.records) % RECORD_SIZE:
        raise DecodeError("truncated stream: partial record")
    total = enc.record_count
    n = 0
    while n < total and enc.record(n) & 0xFFF:
        n += 1
    for j in range(n, total):
        if enc.record(j) & 0xFFF:
            raise DecodeError(f"record {j}: element record inside multiplier region")
    lines = []
    region = enc.param_region
    for i in range(n):
        element_id, dest, ch, param = _fields(enc.record(i))
        try:
            schema = schema_of(element_id)
        except UnknownElementError as exc:
            raise DecodeError(f"line {i + 1}: {exc}") from None
        if ch:
            links = [LinkTarget(1, dest, ch)]
        elif dest:
            links = _decode_chain(enc, dest, n, i)
        else:
            links = []
        kinds = [s.kind for s in schema.param_schema]
        if schema.indirect:
            end = param + 4 * len(kinds)
            if end > len(region):
                raise DecodeError(f"line {i + 1}: parameter offset {param} out of range")
            values = tuple(_unpack_slot(region[param + 4 * k: param + 4 * k + 4], kind)
                           for k, kind in enumerate(kinds))
        elif kinds:
            values = (_unpack_slot(_U.pack(param), kinds[0]),)
        else:
            values = ()
        lines.append(DnaLine(element_id, tuple(links), values))
    return Dna(tuple(lines))


def write_adnb(path, dna: Dna) -> int:
    data = encode_compact(dna).to_bytes()
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


def read_adnb(path) -> Dna:
    with open(path, "rb") as fh:
        return decode_compact(fh.read())
