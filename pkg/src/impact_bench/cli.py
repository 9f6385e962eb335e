"""Command line front end: gen, build, search, sweep, stats, eval.

All outputs are written atomically.  The IMPACT_BENCH_THREADS environment
variable caps parallelism for untimed work; timed evaluation always runs on a
single thread so latencies stay comparable, and the current implementation
keeps untimed work sequential as well, which satisfies any cap.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import synthetic
from .bench import (
    ConfigError,
    Engine,
    EngineError,
    format_sweep_summary,
    time_queries,
    tradeoff_sweep,
    wackiness_report,
    write_counters_csv,
    write_tradeoff_csv,
)
from .corpus import Lexicon, build_lexicon, parse_corpus, parse_qrels, parse_queries
from .evaluation import mean_rr_at_10, read_run, write_run
from .index import DocumentOrderedIndex, build_document_ordered, build_impact_ordered
from .ioutil import atomic_write
from .storage import read_index, write_index
from .weighting import Bm25Params, apply_bm25, quantize_corpus, quantize_queries

logger = logging.getLogger(__name__)

THREADS_ENV = "IMPACT_BENCH_THREADS"


def thread_cap() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV}={raw!r} is not an integer") from None
    if cap < 1:
        raise ConfigError(f"{THREADS_ENV} must be at least 1")
    return cap


def _parse_rho(text: str):
    if text == "inf":
        return None
    try:
        value = int(text)
    except ValueError:
        raise ConfigError(f"bad rho value {text!r} (want an integer or 'inf')") from None
    if value < 0:
        raise ConfigError("rho must be non-negative")
    return value


def _read_lines(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc


def _load_weighted_corpus(args):
    doc_table, raws = parse_corpus(_read_lines(args.corpus))
    if getattr(args, "weighting", "none") == "bm25":
        raws = apply_bm25(raws, Bm25Params(k1=args.k1, b=args.b))
    return doc_table, raws


def _quantized_corpus(args):
    doc_table, raws = _load_weighted_corpus(args)
    lexicon = build_lexicon(raws)
    vectors, config = quantize_corpus(raws, lexicon, bits=args.bits)
    return doc_table, lexicon, vectors, config


def _load_queries(path, lexicon, bits):
    raw_queries = parse_queries(_read_lines(path))
    quantized, _ = quantize_queries(raw_queries, lexicon, bits=bits)
    return quantized


def cmd_gen(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    workload = synthetic.generate_workload(
        seed=args.seed, n_docs=args.docs, vocab_size=args.vocab, mean_doc_len=args.doc_len,
        n_queries=args.queries, impact_mode=args.impact_mode, zipf_s=args.zipf_s,
        max_impact=args.max_impact, uniform_impact=args.uniform_impact,
        min_terms=args.min_terms, max_terms=args.max_terms, max_weight=args.max_weight,
    )
    corpus_path = os.path.join(args.out, "corpus.jsonl")
    queries_path = os.path.join(args.out, "queries.tsv")
    qrels_path = os.path.join(args.out, "qrels.txt")
    synthetic.write_workload(workload, corpus_path, queries_path, qrels_path)
    print(f"wrote {len(workload.docs)} docs to {corpus_path}")
    print(f"wrote {len(workload.queries)} queries to {queries_path}")
    print(f"wrote {len(workload.qrels_rows)} judgments to {qrels_path}")
    return 0


def cmd_build(args) -> int:
    doc_table, lexicon, vectors, _ = _quantized_corpus(args)
    os.makedirs(args.out, exist_ok=True)
    if args.layout in ("doc", "both"):
        index = build_document_ordered(vectors, doc_table.names, lexicon.terms)
        path = os.path.join(args.out, "doc.idx")
        size = write_index(index, path)
        print(f"doc-ordered index: {path} ({size} bytes, {index.total_postings} postings)")
    if args.layout in ("impact", "both"):
        index = build_impact_ordered(vectors, doc_table.names, lexicon.terms)
        path = os.path.join(args.out, "impact.idx")
        size = write_index(index, path)
        print(f"impact-ordered index: {path} ({size} bytes, {index.total_postings} postings)")
    return 0


def cmd_search(args) -> int:
    index = read_index(args.index)
    doc_ordered = isinstance(index, DocumentOrderedIndex)
    if args.engine == "saat" and doc_ordered:
        raise ConfigError("engine 'saat' requires an impact-ordered index")
    if args.engine != "saat" and not doc_ordered:
        raise ConfigError(f"engine {args.engine!r} requires a document-ordered index")
    if args.engine != "saat" and args.rho is not None:
        raise ConfigError("--rho only applies to the saat engine")
    rho = _parse_rho(args.rho) if args.rho is not None else 1_000_000
    lexicon = Lexicon.from_terms(index.term_names)
    queries = _load_queries(args.queries, lexicon, args.bits)
    engine = Engine(
        args.engine, args.k,
        daat_index=index if doc_ordered else None,
        impact_index=None if doc_ordered else index,
        rho=rho if args.engine == "saat" else None,
        acc_width=args.acc_width,
    )
    timings = time_queries(engine, queries, warmup=args.warmup, repeats=args.repeats)
    tag = args.tag or args.engine
    write_run(((t.query_id, t.ranking) for t in timings), tag, args.run)
    print(f"wrote {sum(len(t.ranking) for t in timings)} result lines for {len(timings)} queries to {args.run}")
    if args.counters:
        rows = [{
            "qid": t.query_id,
            "engine": args.engine,
            "rho": "inf" if args.engine != "saat" or rho is None else str(rho),
            "docs_scored": t.outcome.docs_scored,
            "postings_visited": t.outcome.postings_visited,
            "blocks_skipped": t.outcome.blocks_skipped,
            "consumed": t.outcome.consumed,
            "elapsed_ns": t.latency_ns,
        } for t in timings]
        write_counters_csv(rows, args.counters)
        print(f"wrote counters to {args.counters}")
    return 0


def cmd_sweep(args) -> int:
    thread_cap()
    doc_table, lexicon, vectors, _ = _quantized_corpus(args)
    qrels = parse_qrels(_read_lines(args.qrels))
    queries = _load_queries(args.queries, lexicon, args.bits)
    engines = [name.strip() for name in args.engines.split(",") if name.strip()]
    rho_list = [_parse_rho(text.strip()) for text in args.rho.split(",") if text.strip()]
    daat_index = build_document_ordered(vectors, doc_table.names, lexicon.terms)
    impact_index = build_impact_ordered(vectors, doc_table.names, lexicon.terms)
    points, counter_rows = tradeoff_sweep(
        queries, qrels, daat_index, impact_index, engines, rho_list,
        k=args.k, warmup=args.warmup, repeats=args.repeats, acc_width=args.acc_width,
        index_id=os.path.basename(args.corpus),
    )
    os.makedirs(args.out, exist_ok=True)
    tradeoff_path = os.path.join(args.out, "tradeoff.csv")
    counters_path = os.path.join(args.out, "counters.csv")
    summary_path = os.path.join(args.out, "summary.txt")
    write_tradeoff_csv(points, tradeoff_path)
    write_counters_csv(counter_rows, counters_path)
    summary = format_sweep_summary(points)
    with atomic_write(summary_path) as handle:
        handle.write(summary)
    print(summary, end="")
    print(f"wrote {tradeoff_path}, {counters_path}, {summary_path}")
    return 0


def cmd_stats(args) -> int:
    doc_table, lexicon, vectors, _ = _quantized_corpus(args)
    if args.queries:
        queries = [vector for _, vector in _load_queries(args.queries, lexicon, args.bits)]
    else:
        queries = []
    index = build_document_ordered(vectors, doc_table.names, lexicon.terms)
    report = wackiness_report(vectors, queries, index)
    text = report.format_text()
    if args.out:
        with atomic_write(args.out) as handle:
            handle.write(text)
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def cmd_eval(args) -> int:
    run_entries = read_run(_read_lines(args.run))
    qrels = parse_qrels(_read_lines(args.qrels))
    run = {qid: [entry.doc_name for entry in entries] for qid, entries in run_entries.items()}
    if args.queries:
        query_ids = [qid for qid, _ in parse_queries(_read_lines(args.queries))]
    else:
        query_ids = list(run)
    score = mean_rr_at_10(run, qrels, query_ids)
    print(f"mean RR@10 over {len(query_ids)} queries: {score:.4f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="impact-bench",
                                     description="quantized sparse retrieval engines and benchmarks")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a seeded synthetic workload")
    p.add_argument("--out", required=True)
    p.add_argument("--docs", type=int, default=1000)
    p.add_argument("--vocab", type=int, default=500)
    p.add_argument("--doc-len", type=int, default=12)
    p.add_argument("--queries", type=int, default=50)
    p.add_argument("--impact-mode", choices=synthetic.IMPACT_MODES, default="zipf")
    p.add_argument("--zipf-s", type=float, default=1.2)
    p.add_argument("--max-impact", type=int, default=255)
    p.add_argument("--uniform-impact", type=int, default=1)
    p.add_argument("--min-terms", type=int, default=2)
    p.add_argument("--max-terms", type=int, default=8)
    p.add_argument("--max-weight", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=cmd_gen)

    p = sub.add_parser("build", help="build indexes from a corpus file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--layout", choices=("doc", "impact", "both"), default="both")
    p.add_argument("--bits", type=int, default=8)
    p.add_argument("--weighting", choices=("none", "bm25"), default="none")
    p.add_argument("--k1", type=float, default=0.82)
    p.add_argument("--b", type=float, default=0.68)
    p.set_defaults(handler=cmd_build)

    p = sub.add_parser("search", help="run one engine over a query file")
    p.add_argument("--index", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--engine", required=True, choices=("or", "wand", "bmw", "maxscore", "saat"))
    p.add_argument("--k", type=int, default=1000)
    p.add_argument("--rho", default=None, help="postings budget for saat: integer or 'inf' (default 1000000)")
    p.add_argument("--acc-width", type=int, choices=(16, 32), default=32)
    p.add_argument("--bits", type=int, default=8)
    p.add_argument("--run", default="run.txt")
    p.add_argument("--counters", default=None)
    p.add_argument("--tag", default=None)
    p.add_argument("--warmup", type=int, default=0)
    p.add_argument("--repeats", type=int, default=1)
    p.set_defaults(handler=cmd_search)

    p = sub.add_parser("sweep", help="effectiveness/efficiency sweep over engines and budgets")
    p.add_argument("--corpus", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--engines", default="or,wand,bmw,maxscore,saat")
    p.add_argument("--rho", default="1000000", help="comma list of budgets for saat; 'inf' allowed")
    p.add_argument("--k", type=int, default=1000)
    p.add_argument("--bits", type=int, default=8)
    p.add_argument("--weighting", choices=("none", "bm25"), default="none")
    p.add_argument("--k1", type=float, default=0.82)
    p.add_argument("--b", type=float, default=0.68)
    p.add_argument("--acc-width", type=int, choices=(16, 32), default=32)
    p.add_argument("--warmup", type=int, default=0)
    p.add_argument("--repeats", type=int, default=1)
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("stats", help="corpus and impact distribution report")
    p.add_argument("--corpus", required=True)
    p.add_argument("--queries", default=None)
    p.add_argument("--bits", type=int, default=8)
    p.add_argument("--weighting", choices=("none", "bm25"), default="none")
    p.add_argument("--k1", type=float, default=0.82)
    p.add_argument("--b", type=float, default=0.68)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_stats)

    p = sub.add_parser("eval", help="mean RR@10 of a run file against qrels")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--queries", default=None, help="query file fixing the query id universe")
    p.set_defaults(handler=cmd_eval)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except (ValueError, EngineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
