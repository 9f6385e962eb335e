"""Corpora, queries, and relevance judgments.

The canonical in-memory representation of both documents and queries is
`SparseVector`: a tuple of (term id, integer impact) pairs sorted by term id.
Raw inputs arrive as string-keyed weight maps (`RawSparseVector`); a `Lexicon`
maps term strings to dense integer ids, and the quantizer in `weighting`
converts raw weights to integer impacts.

Input formats
-------------
Corpus: line-delimited JSON, one document per line::

    {"id": "<doc name>", "vector": {"<term>": <weight>, ...}}

Queries: either the same JSON records, or TSV lines::

    <qid>\\t<term>:<weight> <term>:<weight> ...

Qrels: whitespace-separated ``<qid> 0 <doc name> <grade>`` lines.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

logger = logging.getLogger(__name__)


class ParseError(ValueError):
    """Malformed input record; the message carries the 1-based line number."""

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


@dataclass(frozen=True)
class SparseVector:
    """Quantized bag of words: (term id, impact) pairs, term ids strictly
    ascending, impacts positive integers."""

    entries: tuple[tuple[int, int], ...]

    def __post_init__(self):
        prev = -1
        for term, impact in self.entries:
            if term <= prev:
                raise ValueError("term ids must be strictly ascending")
            if impact < 1 or impact != int(impact):
                raise ValueError(f"impact for term {term} must be a positive integer, got {impact!r}")
            prev = term

    def __len__(self):
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.entries)

    def total_impact(self) -> int:
        return sum(impact for _, impact in self.entries)


@dataclass(frozen=True)
class RawSparseVector:
    """Pre-quantization vector: (term string, weight) pairs in sorted term
    order, weights finite and non-negative, no duplicate terms."""

    entries: tuple[tuple[str, float], ...]

    def __post_init__(self):
        seen = set()
        for term, weight in self.entries:
            if term in seen:
                raise ValueError(f"duplicate term {term!r}")
            seen.add(term)
            if not math.isfinite(weight):
                raise ValueError(f"weight for {term!r} is not finite")
            if weight < 0:
                raise ValueError(f"weight for {term!r} is negative")

    def __len__(self):
        return len(self.entries)

    def __iter__(self) -> Iterator[tuple[str, float]]:
        return iter(self.entries)


@dataclass
class DocTable:
    """Bijection between external document names and dense doc ids (0..N-1,
    assigned in corpus order)."""

    names: list[str] = field(default_factory=list)
    _ids: dict[str, int] = field(default_factory=dict, repr=False)

    def add(self, name: str) -> int:
        if name in self._ids:
            raise ValueError(f"duplicate document id {name!r}")
        doc_id = len(self.names)
        self.names.append(name)
        self._ids[name] = doc_id
        return doc_id

    def id_of(self, name: str) -> int:
        return self._ids[name]

    def name_of(self, doc_id: int) -> str:
        return self.names[doc_id]

    def __contains__(self, name: str) -> bool:
        return name in self._ids

    def __len__(self):
        return len(self.names)


@dataclass
class Lexicon:
    """Term string to dense term id map, ids assigned in order of first
    appearance in the corpus."""

    terms: list[str] = field(default_factory=list)
    _ids: dict[str, int] = field(default_factory=dict, repr=False)

    @classmethod
    def from_terms(cls, terms: Sequence[str]) -> "Lexicon":
        lex = cls()
        for term in terms:
            lex.add(term)
        return lex

    def add(self, term: str) -> int:
        existing = self._ids.get(term)
        if existing is not None:
            return existing
        term_id = len(self.terms)
        self.terms.append(term)
        self._ids[term] = term_id
        return term_id

    def term_id(self, term: str):
        return self._ids.get(term)

    def __contains__(self, term: str) -> bool:
        return term in self._ids

    def __len__(self):
        return len(self.terms)


def build_lexicon(raw_corpus: Iterable[RawSparseVector]) -> Lexicon:
    """Assign dense term ids by first appearance, scanning documents in corpus
    order and each document's terms in its (sorted) stored order."""
    lex = Lexicon()
    for vector in raw_corpus:
        for term, _ in vector:
            lex.add(term)
    return lex


@dataclass
class Qrels:
    """Graded judgments keyed by (query id, document name).

    Grades are non-negative integers; a document is relevant when its grade
    is at least 1.
    """

    by_query: dict[str, dict[str, int]] = field(default_factory=dict)

    def set_grade(self, query_id: str, doc_name: str, grade: int) -> bool:
        """Record a judgment.  Returns True when it replaced an earlier one."""
        if grade < 0:
            raise ValueError("grades must be non-negative")
        docs = self.by_query.setdefault(query_id, {})
        replaced = doc_name in docs
        docs[doc_name] = grade
        return replaced

    def grade(self, query_id: str, doc_name: str):
        return self.by_query.get(query_id, {}).get(doc_name)

    def relevant_docs(self, query_id: str) -> set[str]:
        docs = self.by_query.get(query_id, {})
        return {name for name, grade in docs.items() if grade >= 1}

    def query_ids(self) -> list[str]:
        return list(self.by_query)

    def num_judgments(self) -> int:
        return sum(len(docs) for docs in self.by_query.values())


@dataclass(frozen=True)
class CollectionStats:
    vocab_size: int
    docs: int
    mean_total_terms_doc: float
    mean_unique_terms_doc: float
    mean_total_terms_query: float
    mean_unique_terms_query: float


def _check_weight(term, value, line_no):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"weight for {term!r} is not a number", line_no)
    weight = float(value)
    if not math.isfinite(weight):
        raise ParseError(f"weight for {term!r} is not finite", line_no)
    if weight < 0:
        raise ParseError(f"weight for {term!r} is negative", line_no)
    return weight


def _parse_json_record(line: str, line_no: int) -> tuple[str, RawSparseVector]:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc.msg})", line_no) from exc
    if not isinstance(record, dict):
        raise ParseError("record is not a JSON object", line_no)
    if "id" not in record or "vector" not in record:
        raise ParseError('record needs "id" and "vector" fields', line_no)
    name = record["id"]
    if not isinstance(name, str) or not name:
        raise ParseError('"id" must be a non-empty string', line_no)
    vector = record["vector"]
    if not isinstance(vector, dict):
        raise ParseError('"vector" must be an object', line_no)
    entries = []
    for term, value in vector.items():
        weight = _check_weight(term, value, line_no)
        if weight != 0:
            entries.append((term, weight))
    entries.sort()
    return name, RawSparseVector(tuple(entries))


def parse_corpus(lines: Iterable[str]) -> tuple[DocTable, list[RawSparseVector]]:
    """Parse line-delimited JSON documents.

    Document order is preserved, per-document term order is normalized to
    sorted term strings, and zero weights are dropped.  Malformed lines and
    duplicate document ids raise ParseError.
    """
    table = DocTable()
    vectors: list[RawSparseVector] = []
    for line_no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        name, vector = _parse_json_record(line, line_no)
        if name in table:
            raise ParseError(f"duplicate document id {name!r}", line_no)
        table.add(name)
        vectors.append(vector)
    return table, vectors


def _parse_tsv_query(line: str, line_no: int) -> tuple[str, RawSparseVector]:
    parts = line.split("\t")
    if len(parts) != 2:
        raise ParseError("expected <qid><TAB><term>:<weight> ...", line_no)
    qid, body = parts[0].strip(), parts[1].strip()
    if not qid:
        raise ParseError("empty query id", line_no)
    entries = []
    seen = set()
    for token in body.split():
        term, sep, weight_text = token.rpartition(":")
        if not sep or not term:
            raise ParseError(f"bad term:weight token {token!r}", line_no)
        try:
            weight = float(weight_text)
        except ValueError as exc:
            raise ParseError(f"bad weight in token {token!r}", line_no) from exc
        weight = _check_weight(term, weight, line_no)
        if term in seen:
            raise ParseError(f"duplicate term {term!r}", line_no)
        seen.add(term)
        if weight != 0:
            entries.append((term, weight))
    entries.sort()
    return qid, RawSparseVector(tuple(entries))


def parse_queries(lines: Iterable[str]) -> list[tuple[str, RawSparseVector]]:
    """Parse queries from JSON records or TSV lines (format detected from the
    first non-blank line).  Duplicate query ids are an error; a query whose
    weights are all zero is kept as an empty vector with a warning.
    """
    queries: list[tuple[str, RawSparseVector]] = []
    seen_ids: set[str] = set()
    json_format = None
    for line_no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        if json_format is None:
            json_format = line.startswith("{")
        if json_format:
            qid, vector = _parse_json_record(line, line_no)
        else:
            qid, vector = _parse_tsv_query(line, line_no)
        if qid in seen_ids:
            raise ParseError(f"duplicate query id {qid!r}", line_no)
        seen_ids.add(qid)
        if len(vector) == 0:
            logger.warning("query %s has no nonzero weights", qid)
        queries.append((qid, vector))
    return queries


def parse_qrels(lines: Iterable[str]) -> Qrels:
    """Parse ``<qid> 0 <doc name> <grade>`` judgment lines.

    A later duplicate (qid, doc) pair overwrites the earlier grade with a
    warning, matching the usual trec_eval behaviour.
    """
    qrels = Qrels()
    for line_no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 4:
            raise ParseError("expected <qid> 0 <doc> <grade>", line_no)
        qid, _, doc_name, grade_text = parts
        try:
            grade = int(grade_text)
        except ValueError as exc:
            raise ParseError(f"grade {grade_text!r} is not an integer", line_no) from exc
        if grade < 0:
            raise ParseError("grades must be non-negative", line_no)
        if qrels.set_grade(qid, doc_name, grade):
            logger.warning("line %d: duplicate judgment for (%s, %s), keeping the later grade", line_no, qid, doc_name)
    return qrels


def collection_stats(corpus: Sequence[SparseVector], queries: Sequence[SparseVector]) -> CollectionStats:
    """Post-quantization shape statistics: vocabulary size plus mean total
    (sum of impacts) and unique term counts per document and per query."""
    vocab: set[int] = set()
    doc_total = doc_unique = 0
    for vector in corpus:
        doc_total += vector.total_impact()
        doc_unique += len(vector)
        for term, _ in vector:
            vocab.add(term)
    query_total = query_unique = 0
    for vector in queries:
        query_total += vector.total_impact()
        query_unique += len(vector)
    n_docs = len(corpus)
    n_queries = len(queries)
    return CollectionStats(
        vocab_size=len(vocab),
        docs=n_docs,
        mean_total_terms_doc=doc_total / n_docs if n_docs else 0.0,
        mean_unique_terms_doc=doc_unique / n_docs if n_docs else 0.0,
        mean_total_terms_query=query_total / n_queries if n_queries else 0.0,
        mean_unique_terms_query=query_unique / n_queries if n_queries else 0.0,
    )


def _format_weight(weight: float) -> str:
    if float(weight).is_integer():
        return str(int(weight))
    return str(float(weight))


def corpus_record_line(name: str, vector: RawSparseVector) -> str:
    """Serialize one document as a corpus JSON line (no trailing newline)."""
    payload = {"id": name, "vector": {term: (int(w) if float(w).is_integer() else w) for term, w in vector}}
    return json.dumps(payload, separators=(",", ":"))


def query_tsv_line(qid: str, vector: RawSparseVector) -> str:
    """Serialize one query as a TSV line (no trailing newline)."""
    body = " ".join(f"{term}:{_format_weight(w)}" for term, w in vector)
    return f"{qid}\t{body}"
