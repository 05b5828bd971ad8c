"""Weak supervision: candidate contexts from a corpus and cosine-induced pair labels."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .embeddings import EmbeddingStore, SeedSet, centroid, unit_rows

LABELERS = ("max", "centroid")


@dataclass(frozen=True)
class ContextOccurrence:
    term: str
    context: tuple[str, ...]
    doc_id: int
    position: int


@dataclass(frozen=True)
class TrainingPair:
    term_i: str
    term_j: str
    ctx_i: ContextOccurrence
    ctx_j: ContextOccurrence
    label: int  # +1: i preferred, -1: j preferred


def extract_contexts(corpus: Iterable[str], store: EmbeddingStore,
                     window: int = 5) -> Iterator[ContextOccurrence]:
    """Yield one occurrence per in-vocabulary token of each document.

    Each document is one line of whitespace-separated tokens.  Out-of-vocabulary
    tokens are dropped before windowing, so a context holds up to ``window``
    in-vocabulary tokens on either side; windows never cross lines and never
    contain the target term itself.
    """
    if window < 1:
        raise ValueError("window must be positive")
    for doc_id, line in enumerate(corpus):
        kept = [(pos, tok) for pos, tok in enumerate(line.split()) if tok in store.index]
        if len(kept) < 2:
            continue
        for k, (pos, term) in enumerate(kept):
            left = kept[max(0, k - window):k]
            right = kept[k + 1:k + 1 + window]
            ctx = tuple(t for _, t in left + right if t != term)
            if ctx:
                yield ContextOccurrence(term, ctx, doc_id, pos)


def _context_matrix(context: Sequence[str], store: EmbeddingStore) -> np.ndarray:
    return store.vectors[[store.index[t] for t in context]]


def token_seed_similarity(token_vectors, seed: SeedSet) -> np.ndarray:
    """Per token, the max cosine to any seed vector.

    Row-wise arithmetic only, so a token's value does not depend on which
    other tokens share the batch.
    """
    u = unit_rows(np.atleast_2d(token_vectors))
    s = unit_rows(seed.vectors)
    return np.minimum(1.0, (u[:, None, :] * s[None, :, :]).sum(axis=-1).max(axis=1))


def relevance(context: ContextOccurrence, seed: SeedSet, store: EmbeddingStore) -> float:
    """Max cosine between any context token and any seed vector."""
    if not context.context:
        raise ValueError("empty context")
    return float(token_seed_similarity(_context_matrix(context.context, store), seed).max())


def centroid_relevance(context: ContextOccurrence, seed: SeedSet,
                       store: EmbeddingStore) -> float:
    """Cosine between the seed centroid and the context centroid (ablation labeler)."""
    u = unit_rows(centroid(_context_matrix(context.context, store))[None, :])[0]
    v = unit_rows(centroid(seed.vectors)[None, :])[0]
    return float(min(1.0, max(-1.0, u @ v)))


def _relevance_fn(labeler: str):
    if labeler == "max":
        return relevance
    if labeler == "centroid":
        return centroid_relevance
    raise ValueError(f"unknown labeler {labeler!r}; expected one of {LABELERS}")


def label_from_relevance(r_i: float, r_j: float) -> Optional[int]:
    if r_i > r_j:
        return 1
    if r_i < r_j:
        return -1
    return None


def weak_label(seed: SeedSet, ctx_i: ContextOccurrence, ctx_j: ContextOccurrence,
               store: EmbeddingStore, labeler: str = "max") -> Optional[int]:
    """+1 if ``ctx_i`` is more relevant to the seed, -1 if less, None on a tie."""
    fn = _relevance_fn(labeler)
    return label_from_relevance(fn(ctx_i, seed, store), fn(ctx_j, seed, store))


class PairSampler:
    """Uniform sampler of labelled occurrence pairs.

    Relevance is precomputed once per occurrence; sampling draws index pairs
    in fixed-size chunks from a seeded generator, so the stream depends only
    on ``rng_seed``.
    """

    chunk = 4096
    max_empty_chunks = 64

    def __init__(self, occurrences: Sequence[ContextOccurrence], seed: SeedSet,
                 store: EmbeddingStore, labeler: str = "max"):
        fn = _relevance_fn(labeler)
        seed_terms = set(seed.terms)
        self.occurrences = [o for o in occurrences if o.term not in seed_terms]
        if len({o.term for o in self.occurrences}) < 2:
            raise ValueError("need at least two distinct non-seed candidate terms")
        self.store = store
        self.term_rows = np.array([store.index[o.term] for o in self.occurrences])
        if labeler == "max":
            self.relevance = self._max_relevance(seed)
        else:
            self.relevance = np.array([fn(o, seed, store) for o in self.occurrences])

    def _max_relevance(self, seed: SeedSet, block: int = 4096) -> np.ndarray:
        index = self.store.index
        rows = sorted({index[t] for o in self.occurrences for t in o.context})
        tok_sim = {}
        for start in range(0, len(rows), block):
            chunk = rows[start:start + block]
            sims = token_seed_similarity(self.store.vectors[chunk], seed)
            tok_sim.update(zip(chunk, sims.tolist()))
        return np.array([max(tok_sim[index[t]] for t in o.context) for o in self.occurrences])

    def sample_indices(self, rng_seed: int, count: int):
        """Yield ``(i, j, label)`` index arrays, one chunk at a time, totalling ``count``."""
        rng = np.random.default_rng(rng_seed)
        n = len(self.occurrences)
        remaining = count
        empty = 0
        while remaining > 0:
            i = rng.integers(0, n, size=self.chunk)
            j = rng.integers(0, n, size=self.chunk)
            ri, rj = self.relevance[i], self.relevance[j]
            keep = (self.term_rows[i] != self.term_rows[j]) & (ri != rj)
            i, j = i[keep], j[keep]
            if len(i) == 0:
                empty += 1
                if empty >= self.max_empty_chunks:
                    raise RuntimeError("no untied candidate pairs could be sampled")
                continue
            empty = 0
            labels = np.where(ri[keep] > rj[keep], 1, -1)
            take = min(remaining, len(i))
            remaining -= take
            yield i[:take], j[:take], labels[:take]

    def pairs(self, rng_seed: int, count: int) -> Iterator[TrainingPair]:
        for ii, jj, ll in self.sample_indices(rng_seed, count):
            for i, j, lab in zip(ii, jj, ll):
                oi, oj = self.occurrences[i], self.occurrences[j]
                yield TrainingPair(oi.term, oj.term, oi, oj, int(lab))


def sample_pairs(occurrences: Sequence[ContextOccurrence], seed: SeedSet, rng_seed: int,
                 count: int, store: EmbeddingStore, labeler: str = "max"
                 ) -> Iterator[TrainingPair]:
    """Deterministic stream of ``count`` weakly labelled pairs.

    Pairs have distinct, non-seed terms; tied relevances are dropped and
    resampled.
    """
    return PairSampler(occurrences, seed, store, labeler).pairs(rng_seed, count)
