"""Benchmark harness: per-query timing, latency summaries, tradeoff sweeps.

A sweep runs each engine configuration over a query set against prebuilt
indexes, pairing mean effectiveness (RR@10) with latency statistics and mean
traversal work, then flags the Pareto frontier over (mean latency,
effectiveness).  Timing covers evaluation only; query parsing, quantization,
and doc-name resolution happen outside the clock.  Per-query latency is the
minimum over repeats, warmup runs are discarded, and the reported ranking
comes from the final repeat.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .corpus import Qrels, SparseVector, collection_stats
from .daat import TopK, WorkCounters, bmw, exhaustive_or, maxscore, wand
from .evaluation import mean_rr_at_10
from .index import DocumentOrderedIndex, ImpactOrderedIndex
from .ioutil import atomic_write
from .saat import AccumulatorTable, saat_search

DAAT_ENGINES: dict[str, Callable] = {
    "or": exhaustive_or,
    "wand": wand,
    "bmw": bmw,
    "maxscore": maxscore,
}
ENGINE_NAMES = (*DAAT_ENGINES, "saat")

TRADEOFF_HEADER = "engine,rho,k,mean_rr10,mean_ms,median_ms,p95_ms,p99_ms,mean_postings,on_frontier"
COUNTERS_HEADER = "qid,engine,rho,docs_scored,postings_visited,blocks_skipped,consumed,elapsed_ns"


class ConfigError(ValueError):
    pass


class EngineError(RuntimeError):
    """Engine failure annotated with the query that triggered it."""

    def __init__(self, query_id: str, cause: BaseException):
        super().__init__(f"query {query_id}: {cause}")
        self.query_id = query_id


@dataclass(frozen=True)
class QueryOutcome:
    topk: TopK
    docs_scored: int
    postings_visited: int
    blocks_skipped: int
    consumed: int

    @property
    def postings_processed(self) -> int:
        """Work in postings: budget consumption for score-at-a-time engines,
        postings visited for document-at-a-time ones."""
        return self.consumed if self.consumed else self.postings_visited


class Engine:
    """One runnable configuration: algorithm, parameters, and a bound index."""

    def __init__(self, name: str, k: int, daat_index: DocumentOrderedIndex | None = None,
                 impact_index: ImpactOrderedIndex | None = None,
                 rho: int | None = None, acc_width: int = 32):
        if name not in ENGINE_NAMES:
            raise ConfigError(f"unknown engine {name!r}")
        if k < 1:
            raise ConfigError("k must be positive")
        self.name = name
        self.k = k
        self.rho = rho
        self.acc_width = acc_width
        if name == "saat":
            if impact_index is None:
                raise ConfigError("engine 'saat' requires an impact-ordered index")
            self.index = impact_index
            self._table = AccumulatorTable(impact_index.n_docs, acc_width)
        else:
            if daat_index is None:
                raise ConfigError(f"engine {name!r} requires a document-ordered index")
            if rho is not None:
                raise ConfigError(f"engine {name!r} does not take a postings budget")
            self.index = daat_index
            self._fn = DAAT_ENGINES[name]

    def evaluate(self, query: SparseVector) -> QueryOutcome:
        if self.name == "saat":
            result = saat_search(query, self.index, self.k, rho=self.rho,
                                 width=self.acc_width, accumulators=self._table)
            return QueryOutcome(
                topk=result.topk,
                docs_scored=len(self._table.touched()),
                postings_visited=result.consumed,
                blocks_skipped=0,
                consumed=result.consumed,
            )
        topk, counters = self._fn(query, self.index, self.k)
        return QueryOutcome(
            topk=topk,
            docs_scored=counters.docs_scored,
            postings_visited=counters.postings_visited,
            blocks_skipped=counters.blocks_skipped,
            consumed=0,
        )

    def doc_name(self, docid: int) -> str:
        return self.index.doc_table[docid][0]


@dataclass(frozen=True)
class QueryTiming:
    query_id: str
    latency_ns: int
    mean_ns: float
    outcome: QueryOutcome
    ranking: tuple[tuple[str, int], ...]


def time_queries(engine: Engine, queries: Sequence[tuple[str, SparseVector]],
                 warmup: int = 0, repeats: int = 1) -> list[QueryTiming]:
    """Time each query: `warmup` throwaway runs, then `repeats` timed runs.
    Latency is the minimum over repeats (mean kept for reporting); the
    returned ranking comes from the final repeat."""
    if warmup < 0:
        raise ValueError("warmup must be non-negative")
    if repeats < 1:
        raise ValueError("repeats must be positive")
    timings = []
    for qid, query in queries:
        try:
            for _ in range(warmup):
                engine.evaluate(query)
            samples = []
            outcome = None
            for _ in range(repeats):
                start = time.perf_counter_ns()
                outcome = engine.evaluate(query)
                samples.append(time.perf_counter_ns() - start)
        except Exception as exc:
            raise EngineError(qid, exc) from exc
        ranking = tuple((engine.doc_name(docid), score) for docid, score in outcome.topk.entries)
        timings.append(QueryTiming(
            query_id=qid,
            latency_ns=min(samples),
            mean_ns=sum(samples) / len(samples),
            outcome=outcome,
            ranking=ranking,
        ))
    return timings


@dataclass(frozen=True)
class LatencyStats:
    """Summary of per-query latencies in nanoseconds.  Quantiles use the
    nearest-rank rule (ceil(p/100 * n), 1-based) on sorted samples."""

    n: int
    mean: float
    median: int
    p95: int
    p99: int
    min: int
    max: int


def _nearest_rank(ordered: Sequence[int], percentile: float) -> int:
    rank = math.ceil(percentile / 100.0 * len(ordered))
    return ordered[max(rank, 1) - 1]


def latency_stats(samples_ns: Sequence[int]) -> LatencyStats:
    if not samples_ns:
        raise ValueError("no latency samples")
    ordered = sorted(samples_ns)
    return LatencyStats(
        n=len(ordered),
        mean=sum(ordered) / len(ordered),
        median=_nearest_rank(ordered, 50),
        p95=_nearest_rank(ordered, 95),
        p99=_nearest_rank(ordered, 99),
        min=ordered[0],
        max=ordered[-1],
    )


@dataclass
class TradeoffPoint:
    """One (engine, budget) configuration's position in the
    effectiveness/efficiency plane."""

    engine: str
    rho: int | None
    k: int
    index_id: str
    effectiveness: float
    latency: LatencyStats
    mean_postings: float
    on_frontier: bool = False

    @property
    def mean_latency(self) -> float:
        return self.latency.mean


def pareto_frontier(points: Sequence[TradeoffPoint]) -> list[TradeoffPoint]:
    """Points not dominated on (mean latency, effectiveness).

    q dominates p when q is no slower and no less effective, and strictly
    better on at least one axis; exact duplicates therefore survive together.
    Returned in the input order.
    """
    order = sorted(range(len(points)), key=lambda i: (points[i].mean_latency, -points[i].effectiveness))
    dominated = [False] * len(points)
    best_before = -math.inf
    i = 0
    while i < len(order):
        j = i
        latency = points[order[i]].mean_latency
        while j < len(order) and points[order[j]].mean_latency == latency:
            j += 1
        group = order[i:j]
        group_best = max(points[g].effectiveness for g in group)
        for g in group:
            eff = points[g].effectiveness
            if best_before >= eff or group_best > eff:
                dominated[g] = True
        best_before = max(best_before, group_best)
        i = j
    return [p for p, d in zip(points, dominated) if not d]


def _format_rho(rho: int | None) -> str:
    return "inf" if rho is None else str(rho)


def sweep_configs(engines: Sequence[str], rho_list: Sequence[int | None]) -> list[tuple[str, int | None]]:
    """Expand engine names into (engine, rho) rows: budgets apply to the
    score-at-a-time engine only."""
    configs = []
    for name in engines:
        if name not in ENGINE_NAMES:
            raise ConfigError(f"unknown engine {name!r}")
        if name == "saat":
            if not rho_list:
                raise ConfigError("engine 'saat' needs at least one rho value")
            configs.extend((name, rho) for rho in rho_list)
        else:
            configs.append((name, None))
    return configs


def tradeoff_sweep(queries: Sequence[tuple[str, SparseVector]], qrels: Qrels,
                   daat_index: DocumentOrderedIndex | None,
                   impact_index: ImpactOrderedIndex | None,
                   engines: Sequence[str], rho_list: Sequence[int | None],
                   k: int = 1000, warmup: int = 0, repeats: int = 1,
                   acc_width: int = 32, index_id: str = "index") -> tuple[list[TradeoffPoint], list[dict]]:
    """Run every configuration over the query set.  Returns the tradeoff
    points (frontier flags set) and per-query counter rows."""
    if not queries:
        raise ConfigError("query set is empty")
    points = []
    counter_rows = []
    query_ids = [qid for qid, _ in queries]
    for name, rho in sweep_configs(engines, rho_list):
        engine = Engine(name, k, daat_index=daat_index, impact_index=impact_index,
                        rho=rho, acc_width=acc_width)
        timings = time_queries(engine, queries, warmup=warmup, repeats=repeats)
        run = {t.query_id: [doc for doc, _ in t.ranking] for t in timings}
        effectiveness = mean_rr_at_10(run, qrels, query_ids)
        stats = latency_stats([t.latency_ns for t in timings])
        mean_postings = sum(t.outcome.postings_processed for t in timings) / len(timings)
        points.append(TradeoffPoint(
            engine=name, rho=rho, k=k, index_id=index_id,
            effectiveness=effectiveness, latency=stats, mean_postings=mean_postings,
        ))
        for t in timings:
            counter_rows.append({
                "qid": t.query_id,
                "engine": name,
                "rho": _format_rho(rho),
                "docs_scored": t.outcome.docs_scored,
                "postings_visited": t.outcome.postings_visited,
                "blocks_skipped": t.outcome.blocks_skipped,
                "consumed": t.outcome.consumed,
                "elapsed_ns": t.latency_ns,
            })
    for point in pareto_frontier(points):
        point.on_frontier = True
    return points, counter_rows


def _ms(ns: float) -> str:
    return f"{ns / 1e6:.4f}"


def write_tradeoff_csv(points: Sequence[TradeoffPoint], path) -> None:
    with atomic_write(path) as handle:
        handle.write(TRADEOFF_HEADER + "\n")
        for p in points:
            handle.write(",".join([
                p.engine,
                _format_rho(p.rho),
                str(p.k),
                f"{p.effectiveness:.4f}",
                _ms(p.latency.mean),
                _ms(p.latency.median),
                _ms(p.latency.p95),
                _ms(p.latency.p99),
                f"{p.mean_postings:.1f}",
                "true" if p.on_frontier else "false",
            ]) + "\n")


def write_counters_csv(rows: Iterable[dict], path) -> None:
    columns = COUNTERS_HEADER.split(",")
    with atomic_write(path) as handle:
        handle.write(COUNTERS_HEADER + "\n")
        for row in rows:
            handle.write(",".join(str(row[c]) for c in columns) + "\n")


def format_sweep_summary(points: Sequence[TradeoffPoint]) -> str:
    lines = ["engine        rho         rr@10   mean ms   frontier"]
    for p in points:
        lines.append(
            f"{p.engine:<12}  {_format_rho(p.rho):>10}  {p.effectiveness:6.4f}  {p.latency.mean / 1e6:8.3f}   {'*' if p.on_frontier else ''}"
        )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class WackinessReport:
    """How skewed a workload is: shape statistics plus the impact
    distribution of one index."""

    stats: object
    total_postings: int
    max_impact: int
    mean_impact: float
    histogram: tuple[int, ...]
    top_decile_fraction: float

    def format_text(self) -> str:
        s = self.stats
        lines = [
            f"docs {s.docs}  vocab {s.vocab_size}",
            f"doc terms: total {s.mean_total_terms_doc:.1f}  unique {s.mean_unique_terms_doc:.1f} (mean)",
            f"query terms: total {s.mean_total_terms_query:.1f}  unique {s.mean_unique_terms_query:.1f} (mean)",
            f"postings {self.total_postings}  max impact {self.max_impact}  mean impact {self.mean_impact:.2f}",
            f"impact histogram (10 equal-width buckets): {list(self.histogram)}",
            f"fraction of postings in top impact decile: {self.top_decile_fraction:.3f}",
        ]
        return "\n".join(lines) + "\n"


def _iter_impacts(index):
    if isinstance(index, DocumentOrderedIndex):
        for plist in index.lexicon.values():
            yield from plist.impacts
    elif isinstance(index, ImpactOrderedIndex):
        for segments in index.lexicon.values():
            for segment in segments:
                for _ in range(len(segment)):
                    yield segment.impact
    else:
        raise ConfigError(f"cannot read impacts from {type(index).__name__}")


def wackiness_report(corpus: Sequence[SparseVector], queries: Sequence[SparseVector], index) -> WackinessReport:
    stats = collection_stats(corpus, queries)
    total = 0
    max_impact = 0
    impact_sum = 0
    counts = [0] * 10
    impacts = list(_iter_impacts(index))
    for impact in impacts:
        total += 1
        impact_sum += impact
        if impact > max_impact:
            max_impact = impact
    top_decile = 0
    for impact in impacts:
        counts[min(9, (impact - 1) * 10 // max_impact)] += 1
        if impact * 10 > 9 * max_impact:
            top_decile += 1
    return WackinessReport(
        stats=stats,
        total_postings=total,
        max_impact=max_impact,
        mean_impact=impact_sum / total if total else 0.0,
        histogram=tuple(counts),
        top_decile_fraction=top_decile / total if total else 0.0,
    )
