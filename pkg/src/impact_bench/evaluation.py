"""Reciprocal rank at cutoff 10 and six-column run files.

Run lines follow the usual ``qid Q0 doc rank score tag`` shape; reading
validates that ranks count up from 1 per query and scores never increase.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .corpus import Qrels
from .ioutil import atomic_write

RR_CUTOFF = 10


class RunFormatError(ValueError):
    pass


@dataclass(frozen=True)
class RunEntry:
    query_id: str
    doc_name: str
    rank: int
    score: float
    tag: str


def rr_at_10(ranking: Sequence[str], qrels: Qrels, query_id: str) -> float:
    """Reciprocal of the first relevant document's rank within the top 10,
    0 when none of the first 10 is relevant.  `ranking` lists doc names best
    first and must not contain duplicates."""
    relevant = qrels.by_query.get(query_id, {})
    for rank, doc_name in enumerate(ranking[:RR_CUTOFF], start=1):
        if relevant.get(doc_name, 0) >= 1:
            return 1.0 / rank
    return 0.0


def mean_rr_at_10(run: Mapping[str, Sequence[str]], qrels: Qrels, query_ids: Iterable[str]) -> float:
    """Mean over `query_ids`; a query missing from the run scores 0 rather
    than shrinking the denominator."""
    ids = list(query_ids)
    if not ids:
        raise ValueError("query set is empty")
    total = sum(rr_at_10(run.get(qid, ()), qrels, qid) for qid in ids)
    return total / len(ids)


def write_run(rankings: Iterable[tuple[str, Sequence[tuple[str, float]]]], tag: str, path) -> None:
    """Write (qid, [(doc name, score), ...]) rankings as a run file, ranks
    numbered from 1 in the given order."""
    with atomic_write(path) as handle:
        for qid, ranked in rankings:
            for rank, (doc_name, score) in enumerate(ranked, start=1):
                handle.write(f"{qid} Q0 {doc_name} {rank} {score} {tag}\n")


def read_run(lines: Iterable[str]) -> dict[str, list[RunEntry]]:
    """Parse and validate a run file.  Ranks must be contiguous from 1 per
    query and scores non-increasing in rank order."""
    by_query: dict[str, list[RunEntry]] = {}
    for line_no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 6:
            raise RunFormatError(f"line {line_no}: expected 6 fields, got {len(parts)}")
        qid, _, doc_name, rank_text, score_text, tag = parts
        try:
            rank = int(rank_text)
        except ValueError as exc:
            raise RunFormatError(f"line {line_no}: rank {rank_text!r} is not an integer") from exc
        try:
            score = float(score_text)
        except ValueError as exc:
            raise RunFormatError(f"line {line_no}: score {score_text!r} is not a number") from exc
        entries = by_query.setdefault(qid, [])
        if rank != len(entries) + 1:
            raise RunFormatError(f"line {line_no}: rank {rank} breaks the 1..n sequence for query {qid}")
        if entries and score > entries[-1].score:
            raise RunFormatError(f"line {line_no}: score increases within query {qid}")
        entries.append(RunEntry(query_id=qid, doc_name=doc_name, rank=rank, score=score, tag=tag))
    return by_query
