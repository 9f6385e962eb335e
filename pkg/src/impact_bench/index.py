"""Inverted index construction: document-ordered and impact-ordered layouts.

Both layouts are built from the same quantized corpus in a single inversion
pass.  Document-ordered postings are chunked into 128-posting blocks with
per-block maxima for block-max traversal; impact-ordered postings are grouped
into one segment per distinct impact value, segments sorted by impact
descending, docids ascending within a segment.

`BlockMeta.offset` is the byte position of the block inside the term's encoded
postings region, computed from the codec's sizing rule, so the in-memory
metadata agrees with what `storage.write_index` lays out on disk.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .codec import BLOCK_SIZE, encoded_block_size, encoded_deltas_size
from .corpus import SparseVector


@dataclass(frozen=True)
class BlockMeta:
    last_docid: int
    block_max_impact: int
    offset: int


@dataclass
class PostingsList:
    """One term's postings in docid order, with block metadata.

    `docids` is strictly ascending; `impacts` is parallel to it.  `max_impact`
    bounds every impact in the list, `blocks[i].block_max_impact` bounds the
    impacts of postings 128*i .. 128*(i+1)-1.
    """

    term: int
    docids: list[int]
    impacts: list[int]
    max_impact: int
    blocks: list[BlockMeta]

    @property
    def df(self) -> int:
        return len(self.docids)


@dataclass(frozen=True)
class ImpactSegment:
    """All docids (ascending) sharing one impact value for one term."""

    impact: int
    docids: tuple[int, ...]

    def __len__(self):
        return len(self.docids)


@dataclass
class DocumentOrderedIndex:
    term_names: list[str]
    lexicon: dict[int, PostingsList]
    doc_table: list[tuple[str, int]]
    n_docs: int

    @property
    def total_postings(self) -> int:
        return sum(plist.df for plist in self.lexicon.values())


@dataclass
class ImpactOrderedIndex:
    term_names: list[str]
    lexicon: dict[int, list[ImpactSegment]]
    doc_table: list[tuple[str, int]]
    n_docs: int
    total_postings: int


def _invert(corpus: Sequence[SparseVector]):
    postings: dict[int, tuple[list[int], list[int]]] = {}
    for doc_id, vector in enumerate(corpus):
        for term, impact in vector:
            slot = postings.get(term)
            if slot is None:
                slot = ([], [])
                postings[term] = slot
            slot[0].append(doc_id)
            slot[1].append(impact)
    return postings


def _doc_table(corpus: Sequence[SparseVector], doc_names: Sequence[str]) -> list[tuple[str, int]]:
    if len(doc_names) != len(corpus):
        raise ValueError("doc_names and corpus lengths differ")
    return [(name, vector.total_impact()) for name, vector in zip(doc_names, corpus)]


def _build_blocks(docids: list[int], impacts: list[int]) -> list[BlockMeta]:
    blocks = []
    offset = 0
    prev = -1
    for start in range(0, len(docids), BLOCK_SIZE):
        chunk_docs = docids[start:start + BLOCK_SIZE]
        chunk_imps = impacts[start:start + BLOCK_SIZE]
        deltas = []
        for docid in chunk_docs:
            deltas.append(docid - prev)
            prev = docid
        blocks.append(BlockMeta(
            last_docid=chunk_docs[-1],
            block_max_impact=max(chunk_imps),
            offset=offset,
        ))
        offset += encoded_block_size(deltas, chunk_imps)
    return blocks


def build_document_ordered(corpus: Sequence[SparseVector], doc_names: Sequence[str], term_names: Sequence[str]) -> DocumentOrderedIndex:
    """Invert a quantized corpus into docid-ordered postings with block-max
    metadata.  Terms never occurring in the corpus get no postings list."""
    if len(corpus) == 0:
        raise ValueError("corpus is empty")
    lexicon = {}
    for term, (docids, impacts) in _invert(corpus).items():
        lexicon[term] = PostingsList(
            term=term,
            docids=docids,
            impacts=impacts,
            max_impact=max(impacts),
            blocks=_build_blocks(docids, impacts),
        )
    return DocumentOrderedIndex(
        term_names=list(term_names),
        lexicon=lexicon,
        doc_table=_doc_table(corpus, doc_names),
        n_docs=len(corpus),
    )


def build_impact_ordered(corpus: Sequence[SparseVector], doc_names: Sequence[str], term_names: Sequence[str]) -> ImpactOrderedIndex:
    """Invert a quantized corpus into impact-ordered segments, one segment per
    distinct (term, impact) pair."""
    if len(corpus) == 0:
        raise ValueError("corpus is empty")
    lexicon: dict[int, list[ImpactSegment]] = {}
    total = 0
    for term, (docids, impacts) in _invert(corpus).items():
        by_impact: dict[int, list[int]] = {}
        for docid, impact in zip(docids, impacts):
            by_impact.setdefault(impact, []).append(docid)
        segments = [
            ImpactSegment(impact=impact, docids=tuple(by_impact[impact]))
            for impact in sorted(by_impact, reverse=True)
        ]
        lexicon[term] = segments
        total += len(docids)
    return ImpactOrderedIndex(
        term_names=list(term_names),
        lexicon=lexicon,
        doc_table=_doc_table(corpus, doc_names),
        n_docs=len(corpus),
        total_postings=total,
    )


def segment_encoded_size(segment: ImpactSegment) -> int:
    """Byte size of a segment's encoded docid half, for layout planning."""
    deltas = []
    prev = -1
    for docid in segment.docids:
        deltas.append(docid - prev)
        prev = docid
    return encoded_deltas_size(deltas)
