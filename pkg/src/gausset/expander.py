"""Rank vocabulary terms against a seed set."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional, TextIO

import numpy as np

from .embeddings import EmbeddingStore, SeedSet
from .encoder import EncoderParams
from .scoring import expanded_centroids, score_candidates

SCORERS = ("gauss", "centroid")


@dataclass(frozen=True)
class Ranking:
    """Ascending ``(term, score)`` list, lowest score first."""

    entries: tuple[tuple[str, float], ...]
    k: int

    def __post_init__(self):
        if len(self.entries) > self.k:
            raise ValueError("ranking longer than its cutoff")
        terms = [t for t, _ in self.entries]
        if len(set(terms)) != len(terms):
            raise ValueError("duplicate terms in ranking")
        scores = [s for _, s in self.entries]
        if any(b < a for a, b in zip(scores, scores[1:])):
            raise ValueError("ranking scores must be non-decreasing")

    @property
    def terms(self) -> list[str]:
        return [t for t, _ in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class GroundTruthSet:
    name: str
    members: frozenset

    def __post_init__(self):
        if not self.members:
            raise ValueError(f"ground-truth class {self.name!r} is empty")


def default_k(gt_size: int) -> int:
    """Expanded-set size: 200, or 350 for classes with more than 100 members."""
    return 350 if gt_size > 100 else 200


def rank_by_scores(store: EmbeddingStore, scores, exclude: Iterable[str], k: int) -> Ranking:
    """Sort ``store.terms`` by ``scores``; ties keep vocabulary order."""
    if k < 1:
        raise ValueError("k must be positive")
    scores = np.asarray(scores, dtype=np.float64)
    exclude = set(exclude)
    order = np.argsort(scores, kind="stable")
    entries = []
    for i in order:
        term = store.terms[i]
        if term in exclude:
            continue
        entries.append((term, float(scores[i])))
        if len(entries) == k:
            break
    return Ranking(tuple(entries), k)


def _score_all(fn, store: EmbeddingStore, block: int = 8192) -> np.ndarray:
    out = np.empty(len(store))
    for start in range(0, len(store), block):
        out[start:start + block] = fn(store.vectors[start:start + block])
    return out


def expand(params: EncoderParams, store: EmbeddingStore, seed: SeedSet, k: int = 200) -> Ranking:
    """Rank every non-seed vocabulary term by its Gaussian dispersion score."""
    scores = _score_all(lambda v: score_candidates(params, seed, v), store)
    return rank_by_scores(store, scores, seed.terms, k)


def centroid_scores(store: EmbeddingStore, seed: SeedSet) -> np.ndarray:
    c0 = seed.vectors.sum(axis=0) / len(seed)

    def fn(v):
        diff = expanded_centroids(seed.vectors, v) - c0
        return (diff * diff).sum(axis=1)

    return _score_all(fn, store)


def expand_centroid(store: EmbeddingStore, seed: SeedSet, k: int = 200) -> Ranking:
    """Baseline ranking by squared centroid displacement; nothing learned."""
    return rank_by_scores(store, centroid_scores(store, seed), seed.terms, k)


def write_ranking(ranking: Ranking, f: TextIO) -> None:
    for term, score in ranking.entries:
        f.write(f"{term}\t{score!r}\n")


def format_ranking(ranking: Ranking) -> str:
    return "".join(f"{term}\t{score!r}\n" for term, score in ranking.entries)


def read_ranking(lines: Iterable[str], k: Optional[int] = None) -> Ranking:
    entries = []
    for lineno, line in enumerate(lines, start=1):
        line = line.rstrip("\r\n")
        if not line:
            continue
        try:
            term, score = line.split("\t")
            entries.append((term, float(score)))
        except ValueError:
            raise ValueError(f"line {lineno}: expected 'term<TAB>score'") from None
    return Ranking(tuple(entries), k if k is not None else max(1, len(entries)))


def normalize_term(term: str) -> str:
    return "_".join(term.split())


def load_ground_truth(f: TextIO) -> list[GroundTruthSet]:
    """Read ``{class_name: [member, ...]}``; spaces in members become underscores."""
    data = json.load(f)
    if not isinstance(data, dict):
        raise ValueError("ground truth must be a JSON object of class -> member list")
    out = []
    for name, members in data.items():
        if not isinstance(members, list):
            raise ValueError(f"class {name!r}: members must be a list")
        out.append(GroundTruthSet(name, frozenset(normalize_term(m) for m in members)))
    return out


def dump_ground_truth(classes: Iterable[GroundTruthSet], f: TextIO) -> None:
    json.dump({gt.name: sorted(gt.members) for gt in classes}, f, indent=1)
    f.write("\n")
