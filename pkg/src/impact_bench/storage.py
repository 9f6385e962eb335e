"""On-disk index format.

One file per index, little-endian throughout, layout:

    header    magic "IBX1" | layout byte (0 doc-ordered, 1 impact-ordered)
              | 3 pad bytes | n_docs u64 | n_terms u64 | total_postings u64
              | lexicon offset u64 | postings offset u64 | doc table offset u64
    lexicon   per term, in term-id order:
              name_len u16 | name utf-8 | df u32 | blob_off u64 | blob_len u64
              then doc-ordered:   max_impact u32 | n_blocks u32
                                  | (last_docid u32, block_max u32, offset u64) per block
              or impact-ordered:  n_segments u32
                                  | (impact u32, count u32, offset u64) per segment
    postings  term blobs back to back; doc-ordered blobs are codec blocks,
              impact-ordered blobs are one delta half per segment
    doc table per doc: name_len u16 | name utf-8 | doclen u64
    trailer   crc32 u32 over every preceding byte

Docid deltas run with an implicit predecessor of -1, chained across the blocks
of a term and restarted per segment.
"""

from __future__ import annotations

import os
import struct
import zlib

from .codec import BLOCK_SIZE, decode_block, decode_deltas, encode_block, encode_deltas
from .index import (
    BlockMeta,
    DocumentOrderedIndex,
    ImpactOrderedIndex,
    ImpactSegment,
    PostingsList,
)
from .ioutil import atomic_write

MAGIC = b"IBX1"
LAYOUT_DOC = 0
LAYOUT_IMPACT = 1
_HEADER = struct.Struct("<4sB3xQQQQQQ")


class IndexFormatError(ValueError):
    pass


def _require(condition, message):
    if not condition:
        raise IndexFormatError(message)


def _u16(value, what):
    _require(0 <= value < (1 << 16), f"{what} {value} does not fit in 16 bits")
    return struct.pack("<H", value)


def _u32(value, what):
    _require(0 <= value < (1 << 32), f"{what} {value} does not fit in 32 bits")
    return struct.pack("<I", value)


def _u64(value, what):
    _require(0 <= value < (1 << 64), f"{what} {value} does not fit in 64 bits")
    return struct.pack("<Q", value)


def _name_bytes(name, what):
    raw = name.encode("utf-8")
    return _u16(len(raw), f"{what} length") + raw


def _term_deltas(docids, start_prev=-1):
    deltas = []
    prev = start_prev
    for docid in docids:
        deltas.append(docid - prev)
        prev = docid
    return deltas


def _doc_blob(plist: PostingsList) -> bytes:
    parts = []
    prev = -1
    for start in range(0, plist.df, BLOCK_SIZE):
        docids = plist.docids[start:start + BLOCK_SIZE]
        impacts = plist.impacts[start:start + BLOCK_SIZE]
        parts.append(encode_block(_term_deltas(docids, prev), impacts))
        prev = docids[-1]
    return b"".join(parts)


def _impact_blob(segments) -> bytes:
    return b"".join(encode_deltas(_term_deltas(seg.docids)) for seg in segments)


def write_index(index, path) -> int:
    """Serialize an index atomically.  Returns the byte count written, which
    equals the resulting file size."""
    if isinstance(index, DocumentOrderedIndex):
        layout = LAYOUT_DOC
    elif isinstance(index, ImpactOrderedIndex):
        layout = LAYOUT_IMPACT
    else:
        raise IndexFormatError(f"cannot serialize {type(index).__name__}")

    n_terms = len(index.term_names)
    blobs = []
    lex_parts = []
    blob_off = 0
    for term_id in range(n_terms):
        name = index.term_names[term_id]
        entry = index.lexicon.get(term_id)
        if layout == LAYOUT_DOC:
            blob = _doc_blob(entry) if entry is not None else b""
            df = entry.df if entry is not None else 0
            part = [
                _name_bytes(name, "term name"),
                _u32(df, "df"),
                _u64(blob_off, "blob offset"),
                _u64(len(blob), "blob length"),
                _u32(entry.max_impact if entry is not None else 0, "max impact"),
                _u32(len(entry.blocks) if entry is not None else 0, "block count"),
            ]
            if entry is not None:
                for block in entry.blocks:
                    part.append(_u32(block.last_docid, "last docid"))
                    part.append(_u32(block.block_max_impact, "block max"))
                    part.append(_u64(block.offset, "block offset"))
        else:
            segments = entry if entry is not None else []
            blob = _impact_blob(segments)
            df = sum(len(seg) for seg in segments)
            part = [
                _name_bytes(name, "term name"),
                _u32(df, "df"),
                _u64(blob_off, "blob offset"),
                _u64(len(blob), "blob length"),
                _u32(len(segments), "segment count"),
            ]
            seg_off = 0
            for seg in segments:
                part.append(_u32(seg.impact, "impact"))
                part.append(_u32(len(seg), "segment length"))
                part.append(_u64(seg_off, "segment offset"))
                seg_off += len(encode_deltas(_term_deltas(seg.docids)))
        blobs.append(blob)
        blob_off += len(blob)
        lex_parts.append(b"".join(part))

    lexicon_bytes = b"".join(lex_parts)
    postings_bytes = b"".join(blobs)
    doc_parts = []
    for name, doclen in index.doc_table:
        doc_parts.append(_name_bytes(name, "doc name") + _u64(doclen, "doclen"))
    doc_bytes = b"".join(doc_parts)

    lex_off = _HEADER.size
    post_off = lex_off + len(lexicon_bytes)
    doc_off = post_off + len(postings_bytes)
    total_postings = (
        index.total_postings
        if isinstance(index, ImpactOrderedIndex)
        else sum(p.df for p in index.lexicon.values())
    )
    header = _HEADER.pack(MAGIC, layout, index.n_docs, n_terms, total_postings, lex_off, post_off, doc_off)
    body = header + lexicon_bytes + postings_bytes + doc_bytes
    trailer = struct.pack("<I", zlib.crc32(body))
    with atomic_write(path, binary=True) as handle:
        handle.write(body)
        handle.write(trailer)
    return len(body) + len(trailer)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, size: int) -> bytes:
        end = self.pos + size
        _require(end <= len(self.data), "truncated file")
        chunk = self.data[self.pos:end]
        self.pos = end
        return chunk

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def name(self) -> str:
        length = self.u16()
        return self.take(length).decode("utf-8")


def _docids_from_deltas(deltas, prev=-1):
    docids = []
    for delta in deltas:
        prev += delta
        docids.append(prev)
    return docids


def read_index(path):
    """Read an index file back into its in-memory form, verifying the magic
    tag and trailing checksum."""
    with open(path, "rb") as handle:
        data = handle.read()
    _require(len(data) >= _HEADER.size + 4, "truncated file")
    magic, layout, n_docs, n_terms, total_postings, lex_off, post_off, doc_off = _HEADER.unpack_from(data)
    _require(magic == MAGIC, "bad magic")
    _require(layout in (LAYOUT_DOC, LAYOUT_IMPACT), f"unknown layout tag {layout}")
    body, trailer = data[:-4], data[-4:]
    _require(struct.unpack("<I", trailer)[0] == zlib.crc32(body), "checksum mismatch")
    _require(lex_off == _HEADER.size and lex_off <= post_off <= doc_off <= len(body), "section offsets out of order")

    reader = _Reader(body)
    reader.pos = lex_off
    postings = body[post_off:doc_off]

    term_names = []
    lexicon = {}
    for term_id in range(n_terms):
        name = reader.name()
        term_names.append(name)
        df = reader.u32()
        blob_off = reader.u64()
        blob_len = reader.u64()
        _require(blob_off + blob_len <= len(postings), "postings blob out of range")
        blob = postings[blob_off:blob_off + blob_len]
        if layout == LAYOUT_DOC:
            max_impact = reader.u32()
            n_blocks = reader.u32()
            blocks = []
            for _ in range(n_blocks):
                last_docid = reader.u32()
                block_max = reader.u32()
                offset = reader.u64()
                blocks.append(BlockMeta(last_docid=last_docid, block_max_impact=block_max, offset=offset))
            if df == 0:
                continue
            docids: list[int] = []
            impacts: list[int] = []
            prev = -1
            for i, block in enumerate(blocks):
                count = min(BLOCK_SIZE, df - i * BLOCK_SIZE)
                deltas, block_impacts = decode_block(blob[block.offset:], count)
                block_docids = _docids_from_deltas(deltas, prev)
                prev = block_docids[-1]
                docids.extend(block_docids)
                impacts.extend(block_impacts)
            _require(len(docids) == df, "postings count mismatch")
            lexicon[term_id] = PostingsList(
                term=term_id, docids=docids, impacts=impacts, max_impact=max_impact, blocks=blocks,
            )
        else:
            n_segments = reader.u32()
            segments = []
            for _ in range(n_segments):
                impact = reader.u32()
                count = reader.u32()
                offset = reader.u64()
                docids = _docids_from_deltas(decode_deltas(blob[offset:], count))
                segments.append(ImpactSegment(impact=impact, docids=tuple(docids)))
            if segments:
                lexicon[term_id] = segments
    _require(reader.pos == post_off, "lexicon does not end at postings section")

    reader.pos = doc_off
    doc_table = []
    for _ in range(n_docs):
        name = reader.name()
        doclen = reader.u64()
        doc_table.append((name, doclen))
    _require(reader.pos == len(body), "doc table does not end at trailer")

    if layout == LAYOUT_DOC:
        return DocumentOrderedIndex(term_names=term_names, lexicon=lexicon, doc_table=doc_table, n_docs=n_docs)
    return ImpactOrderedIndex(
        term_names=term_names, lexicon=lexicon, doc_table=doc_table, n_docs=n_docs, total_postings=total_postings,
    )


def index_size_bytes(path) -> int:
    return os.path.getsize(path)
