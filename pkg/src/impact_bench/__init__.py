"""Quantized sparse retrieval at desk scale.

Two families of top-k engines over the same quantized index substrate:
document-at-a-time traversal (exhaustive disjunction, WAND, block-max WAND,
MaxScore) and score-at-a-time traversal over impact-ordered segments with an
optional postings budget.  The `bench` module ties them together into
effectiveness/efficiency sweeps; the `cli` module exposes everything as the
`impact-bench` command.
"""

__version__ = "0.1.0"
