"""Document-at-a-time top-k evaluation over document-ordered indexes.

Four engines share one contract: given a quantized query and index they return
the same top-k entries as an exhaustive ranked disjunction, scores computed in
integer arithmetic as the dot product of query weights and stored impacts.
`exhaustive_or` visits every posting of every query term; `wand`, `bmw`, and
`maxscore` prune using upper bounds (term maxima, block maxima, and essential
list partitioning respectively) without changing the result set.

Ties are broken identically everywhere: higher score first, then smaller
docid.  Because traversal visits docids in ascending order, a later candidate
that merely equals the current heap threshold can never displace an incumbent,
so every engine admits a document only when its score strictly exceeds the
threshold.  Cursor and pivot orderings break remaining ties by term id so runs
are reproducible.
"""

from __future__ import annotations

import heapq
from bisect import bisect_left
from dataclasses import dataclass, field

from .corpus import SparseVector
from .index import DocumentOrderedIndex, PostingsList

END = 1 << 62


@dataclass
class WorkCounters:
    """Traversal effort, independent of wall-clock time."""

    docs_scored: int = 0
    postings_visited: int = 0
    blocks_skipped: int = 0
    pivot_selections: int = 0


@dataclass(frozen=True)
class TopK:
    """Final ranked entries: (docid, score) sorted by score descending, docid
    ascending.  `threshold` is the k-th score, 0 while fewer than k entries."""

    k: int
    entries: tuple[tuple[int, int], ...]

    @property
    def threshold(self) -> int:
        if len(self.entries) < self.k:
            return 0
        return self.entries[-1][1]


class TopKHeap:
    """Bounded min-heap enforcing the shared tie rule.

    Heap items are (score, -docid) so the weakest entry (lowest score, then
    largest docid) sits at the root and is the one displaced.
    """

    __slots__ = ("k", "_heap")

    def __init__(self, k: int):
        if k < 1:
            raise ValueError("k must be positive")
        self.k = k
        self._heap: list[tuple[int, int]] = []

    @property
    def threshold(self) -> int:
        if len(self._heap) < self.k:
            return 0
        return self._heap[0][0]

    def offer(self, docid: int, score: int) -> None:
        if len(self._heap) < self.k:
            heapq.heappush(self._heap, (score, -docid))
        elif score > self._heap[0][0]:
            heapq.heapreplace(self._heap, (score, -docid))

    def result(self) -> TopK:
        entries = sorted(((-neg, score) for score, neg in self._heap), key=lambda e: (-e[1], e[0]))
        return TopK(k=self.k, entries=tuple(entries))


class Cursor:
    """Positioned read pointer over one term's postings.

    Tracks the current docid (END once exhausted) and counts each posting it
    lands on against the shared WorkCounters.  `next_geq` seeks by binary
    search, touching only the landing posting; block metadata is consulted
    without moving the posting position.
    """

    __slots__ = ("plist", "term", "query_weight", "max_score", "pos", "docid", "_counters", "_block_lasts")

    def __init__(self, plist: PostingsList, query_weight: int, counters: WorkCounters):
        self.plist = plist
        self.term = plist.term
        self.query_weight = query_weight
        self.max_score = query_weight * plist.max_impact
        self.pos = 0
        self.docid = plist.docids[0]
        self._counters = counters
        self._block_lasts = [b.last_docid for b in plist.blocks]
        counters.postings_visited += 1

    @property
    def impact(self) -> int:
        return self.plist.impacts[self.pos]

    @property
    def contribution(self) -> int:
        return self.query_weight * self.plist.impacts[self.pos]

    def advance(self) -> None:
        self.pos += 1
        if self.pos < self.plist.df:
            self.docid = self.plist.docids[self.pos]
            self._counters.postings_visited += 1
        else:
            self.docid = END

    def seek(self, target: int) -> None:
        if self.docid >= target:
            return
        idx = bisect_left(self.plist.docids, target, self.pos + 1)
        self.pos = idx
        if idx < self.plist.df:
            self.docid = self.plist.docids[idx]
            self._counters.postings_visited += 1
        else:
            self.docid = END

    def block_bound(self, target: int) -> tuple[int, int]:
        """(score bound, last docid) of the block covering the first posting at
        or after `target`, found from metadata alone.  A term with no postings
        at or after `target` bounds to (0, END)."""
        idx = bisect_left(self._block_lasts, target)
        if idx == len(self._block_lasts):
            return 0, END
        block = self.plist.blocks[idx]
        return self.query_weight * block.block_max_impact, block.last_docid


def score_document(cursors) -> int:
    """Sum of query-weight times impact over cursors positioned on one doc."""
    return sum(c.contribution for c in cursors)


def make_cursors(query: SparseVector, index: DocumentOrderedIndex, counters: WorkCounters) -> list[Cursor]:
    cursors = []
    for term, weight in query:
        plist = index.lexicon.get(term)
        if plist is not None:
            cursors.append(Cursor(plist, weight, counters))
    return cursors


def exhaustive_or(query: SparseVector, index: DocumentOrderedIndex, k: int) -> tuple[TopK, WorkCounters]:
    """Rank every matching document: the safety baseline the pruning engines
    are measured against."""
    counters = WorkCounters()
    heap = TopKHeap(k)
    cursors = make_cursors(query, index, counters)
    merge = [(c.docid, c.term, i) for i, c in enumerate(cursors)]
    heapq.heapify(merge)
    while merge:
        docid = merge[0][0]
        at_doc = []
        while merge and merge[0][0] == docid:
            at_doc.append(heapq.heappop(merge)[2])
        heap.offer(docid, score_document(cursors[i] for i in at_doc))
        counters.docs_scored += 1
        for i in at_doc:
            cursor = cursors[i]
            cursor.advance()
            if cursor.docid != END:
                heapq.heappush(merge, (cursor.docid, cursor.term, i))
    return heap.result(), counters


def _sort_cursors(cursors) -> None:
    cursors.sort(key=lambda c: (c.docid, c.term))


def _find_pivot(cursors, threshold: int):
    """First cursor position where the prefix sum of term upper bounds exceeds
    the threshold; None when even the full sum cannot."""
    bound = 0
    for idx, cursor in enumerate(cursors):
        bound += cursor.max_score
        if bound > threshold:
            return idx
    return None


def _advance_choice(cursors, pivot: int):
    """Pick the cursor to move when the pivot is not aligned: the largest
    upper bound among those before the pivot doc, term id breaking ties."""
    best = None
    for cursor in cursors[:pivot + 1]:
        if cursor.docid < cursors[pivot].docid:
            if best is None or (cursor.max_score, -cursor.term) > (best.max_score, -best.term):
                best = cursor
    return best


def wand(query: SparseVector, index: DocumentOrderedIndex, k: int) -> tuple[TopK, WorkCounters]:
    """WAND: skip documents whose summed term upper bounds cannot beat the
    current threshold."""
    counters = WorkCounters()
    heap = TopKHeap(k)
    cursors = make_cursors(query, index, counters)
    _sort_cursors(cursors)
    while cursors:
        pivot = _find_pivot(cursors, heap.threshold)
        if pivot is None:
            break
        pivot_doc = cursors[pivot].docid
        if pivot_doc == END:
            break
        counters.pivot_selections += 1
        while pivot + 1 < len(cursors) and cursors[pivot + 1].docid == pivot_doc:
            pivot += 1
        if cursors[0].docid == pivot_doc:
            at_doc = cursors[:pivot + 1]
            heap.offer(pivot_doc, score_document(at_doc))
            counters.docs_scored += 1
            for cursor in at_doc:
                cursor.advance()
        else:
            _advance_choice(cursors, pivot).seek(pivot_doc)
        cursors = [c for c in cursors if c.docid != END]
        _sort_cursors(cursors)
    return heap.result(), counters


def bmw(query: SparseVector, index: DocumentOrderedIndex, k: int) -> tuple[TopK, WorkCounters]:
    """Block-max WAND: after pivot selection, re-check the bound using block
    maxima and skip to the nearest block boundary when the block-level bound
    cannot beat the threshold."""
    counters = WorkCounters()
    heap = TopKHeap(k)
    cursors = make_cursors(query, index, counters)
    _sort_cursors(cursors)
    while cursors:
        threshold = heap.threshold
        pivot = _find_pivot(cursors, threshold)
        if pivot is None:
            break
        pivot_doc = cursors[pivot].docid
        if pivot_doc == END:
            break
        counters.pivot_selections += 1
        while pivot + 1 < len(cursors) and cursors[pivot + 1].docid == pivot_doc:
            pivot += 1

        block_bound = 0
        boundary = END
        for cursor in cursors[:pivot + 1]:
            bound, last = cursor.block_bound(pivot_doc)
            block_bound += bound
            if last < boundary:
                boundary = last
        if block_bound > threshold:
            if cursors[0].docid == pivot_doc:
                at_doc = cursors[:pivot + 1]
                heap.offer(pivot_doc, score_document(at_doc))
                counters.docs_scored += 1
                for cursor in at_doc:
                    cursor.advance()
            else:
                _advance_choice(cursors, pivot).seek(pivot_doc)
        else:
            counters.blocks_skipped += 1
            target = boundary + 1
            if pivot + 1 < len(cursors) and cursors[pivot + 1].docid < target:
                target = cursors[pivot + 1].docid
            choice = _advance_choice(cursors, pivot)
            if choice is None:
                choice = cursors[pivot]
            choice.seek(target)
        cursors = [c for c in cursors if c.docid != END]
        _sort_cursors(cursors)
    return heap.result(), counters


def maxscore(query: SparseVector, index: DocumentOrderedIndex, k: int) -> tuple[TopK, WorkCounters]:
    """MaxScore: split terms into essential and non-essential by cumulative
    upper bound.  Candidates are drawn from essential lists only; non-essential
    lists are probed per candidate in descending bound order with an early exit
    once the remaining bound cannot lift the score past the threshold.
    """
    counters = WorkCounters()
    heap = TopKHeap(k)
    cursors = make_cursors(query, index, counters)
    if not cursors:
        return heap.result(), counters
    cursors.sort(key=lambda c: (c.max_score, c.term))
    prefix = []
    running = 0
    for cursor in cursors:
        running += cursor.max_score
        prefix.append(running)

    m = len(cursors)
    first_essential = 0
    while True:
        threshold = heap.threshold
        while first_essential < m and prefix[first_essential] <= threshold:
            first_essential += 1
        if first_essential >= m:
            break

        candidate = END
        for cursor in cursors[first_essential:]:
            if cursor.docid < candidate:
                candidate = cursor.docid
        if candidate == END:
            break

        score = 0
        for cursor in cursors[first_essential:]:
            if cursor.docid == candidate:
                score += cursor.contribution
                cursor.advance()
        counters.docs_scored += 1
        for j in range(first_essential - 1, -1, -1):
            if score + prefix[j] <= threshold:
                break
            cursor = cursors[j]
            cursor.seek(candidate)
            if cursor.docid == candidate:
                score += cursor.contribution
        heap.offer(candidate, score)
    return heap.result(), counters
