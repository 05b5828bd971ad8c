"""Deterministic clustered-embedding benchmark with a class-correlated corpus.

Class centres are drawn from ``N(0, inter_spread^2 I)`` and members from
``N(centre, intra_spread^2 I)``.  Each member gets a few short documents
mostly made of tokens from its own class, so context windows carry class
signal the weak labeler can pick up.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .embeddings import EmbeddingStore
from .expander import GroundTruthSet


class SyntheticBenchmark(NamedTuple):
    store: EmbeddingStore
    classes: list
    corpus: list
    centers: np.ndarray


def member_name(cls: int, member: int) -> str:
    return f"k{cls:02d}t{member:03d}"


def gen_synthetic(num_classes: int = 8, per_class: int = 30, d: int = 32,
                  intra_spread: float = 0.1, inter_spread: float = 1.0,
                  rng_seed: int = 0, docs_per_member: int = 4, doc_len: int = 8,
                  noise: float = 0.05) -> SyntheticBenchmark:
    if num_classes < 2:
        raise ValueError("need at least two classes")
    if per_class < 4:
        raise ValueError("per_class must be >= 4 (3 seeds + 1 target)")
    if d < 1 or docs_per_member < 1 or doc_len < 2:
        raise ValueError("d, docs_per_member must be >= 1 and doc_len >= 2")
    if not 0 < intra_spread < inter_spread:
        raise ValueError("need 0 < intra_spread < inter_spread")
    if not 0.0 <= noise < 1.0:
        raise ValueError("noise must be in [0, 1)")

    rng = np.random.default_rng(rng_seed)
    centers = rng.normal(0.0, inter_spread, size=(num_classes, d))
    labels = np.repeat(np.arange(num_classes), per_class)
    vectors = centers[labels] + rng.normal(0.0, intra_spread, size=(labels.size, d))
    names = [member_name(c, m) for c in range(num_classes) for m in range(per_class)]

    # vocabulary order must not line up with classes, or tie-breaking would leak labels
    order = rng.permutation(labels.size)
    store = EmbeddingStore.from_arrays([names[i] for i in order], vectors[order])

    classes = [GroundTruthSet(f"class{c:02d}", frozenset(names[c * per_class:(c + 1) * per_class]))
               for c in range(num_classes)]

    corpus = []
    for idx, name in enumerate(names):
        c = labels[idx]
        mates = [j for j in range(c * per_class, (c + 1) * per_class) if j != idx]
        for _ in range(docs_per_member):
            tokens = [name]
            for _ in range(doc_len - 1):
                if rng.random() < noise:
                    other = rng.integers(0, num_classes - 1)
                    other += other >= c
                    tokens.append(names[other * per_class + rng.integers(0, per_class)])
                else:
                    tokens.append(names[mates[rng.integers(0, len(mates))]])
            rng.shuffle(tokens)
            corpus.append(" ".join(tokens))

    return SyntheticBenchmark(store, classes, corpus, centers)


def nearest_center_accuracy(bench: SyntheticBenchmark) -> float:
    """Fraction of members whose closest class centre is their own (brute force)."""
    correct = total = 0
    for ci, gt in enumerate(bench.classes):
        for term in gt.members:
            v = bench.store.vector(term)
            dists = ((bench.centers - v) ** 2).sum(axis=1)
            correct += int(np.argmin(dists) == ci)
            total += 1
    return correct / total
