"""Bit-packed codec for postings blocks.

A document-ordered block holds up to 128 postings as two halves, docid deltas
then impacts.  Each half is one header byte giving the bit width (the width of
the half's largest value), followed by the values packed at that fixed width,
least-significant bit first, padded to a byte boundary:

    [delta width][packed deltas][impact width][packed impacts]

Impact-ordered segments reuse the delta half alone, since every posting in a
segment shares one impact.  Deltas are gaps between consecutive docids with an
implicit predecessor of -1, so they are always at least 1.
"""

from __future__ import annotations

BLOCK_SIZE = 128
MAX_IMPACT = (1 << 16) - 1


class CodecError(ValueError):
    pass


def _width_for(values) -> int:
    return max(v.bit_length() for v in values)


def _pack(values, width: int) -> bytes:
    buf = bytearray((len(values) * width + 7) // 8)
    bit = 0
    for value in values:
        if value >> width:
            raise CodecError(f"value {value} does not fit in {width} bits")
        byte, offset = divmod(bit, 8)
        chunk = value << offset
        while chunk:
            buf[byte] |= chunk & 0xFF
            chunk >>= 8
            byte += 1
        bit += width
    return bytes(buf)


def _unpack(data: bytes, count: int, width: int, start: int) -> list[int]:
    end = start + (count * width + 7) // 8
    if end > len(data):
        raise CodecError("buffer too short")
    mask = (1 << width) - 1
    values = []
    bit = start * 8
    for _ in range(count):
        byte, offset = divmod(bit, 8)
        chunk = 0
        shift = 0
        need = offset + width
        while shift < need:
            chunk |= data[byte] << shift
            byte += 1
            shift += 8
        values.append((chunk >> offset) & mask)
        bit += width
    return values


def _check_block(deltas, impacts) -> None:
    if len(deltas) != len(impacts):
        raise CodecError("deltas and impacts must have equal length")
    if not 1 <= len(deltas) <= BLOCK_SIZE:
        raise CodecError(f"block must hold 1..{BLOCK_SIZE} postings")
    for delta in deltas:
        if delta < 1:
            raise CodecError("docid deltas must be positive")
    for impact in impacts:
        if not 1 <= impact <= MAX_IMPACT:
            raise CodecError(f"impacts must lie in [1, {MAX_IMPACT}]")


def encode_block(deltas, impacts) -> bytes:
    _check_block(deltas, impacts)
    wd = _width_for(deltas)
    wi = _width_for(impacts)
    return bytes([wd]) + _pack(deltas, wd) + bytes([wi]) + _pack(impacts, wi)


def decode_block(data: bytes, count: int) -> tuple[list[int], list[int]]:
    if count < 1:
        raise CodecError("count must be positive")
    if len(data) < 1:
        raise CodecError("buffer too short")
    wd = data[0]
    deltas = _unpack(data, count, wd, 1)
    impact_header = 1 + (count * wd + 7) // 8
    if impact_header >= len(data):
        raise CodecError("buffer too short")
    wi = data[impact_header]
    impacts = _unpack(data, count, wi, impact_header + 1)
    return deltas, impacts


def encoded_block_size(deltas, impacts) -> int:
    """Byte size encode_block would produce, without packing anything."""
    _check_block(deltas, impacts)
    wd = _width_for(deltas)
    wi = _width_for(impacts)
    return 2 + (len(deltas) * wd + 7) // 8 + (len(impacts) * wi + 7) // 8


def encode_deltas(deltas) -> bytes:
    """Encode one segment half: header byte plus packed docid deltas."""
    if not deltas:
        raise CodecError("segment must hold at least one posting")
    for delta in deltas:
        if delta < 1:
            raise CodecError("docid deltas must be positive")
    wd = _width_for(deltas)
    return bytes([wd]) + _pack(deltas, wd)


def decode_deltas(data: bytes, count: int) -> list[int]:
    if count < 1:
        raise CodecError("count must be positive")
    if len(data) < 1:
        raise CodecError("buffer too short")
    return _unpack(data, count, data[0], 1)


def encoded_deltas_size(deltas) -> int:
    if not deltas:
        raise CodecError("segment must hold at least one posting")
    wd = _width_for(deltas)
    return 1 + (len(deltas) * wd + 7) // 8
