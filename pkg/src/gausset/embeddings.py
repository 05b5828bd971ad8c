"""Pretrained word-embedding table and the vector primitives built on it."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np


class EmbeddingFormatError(ValueError):
    """Raised when an embedding text stream cannot be parsed."""


class DegenerateVectorError(ValueError):
    """Raised for zero-norm vectors where a direction is required."""


class UnknownTermError(LookupError):
    pass


@dataclass(frozen=True, eq=False)
class EmbeddingStore:
    """Immutable term -> vector table.

    ``terms`` keeps file order, which for GloVe-style files is frequency
    order, so capping the vocabulary is a prefix truncation.
    """

    terms: tuple[str, ...]
    vectors: np.ndarray
    index: dict[str, int] = field(repr=False)

    @classmethod
    def from_arrays(cls, terms: Sequence[str], vectors) -> "EmbeddingStore":
        vectors = np.array(vectors, dtype=np.float64)
        if vectors.ndim != 2 or vectors.shape[0] != len(terms):
            raise EmbeddingFormatError(
                f"expected {len(terms)} rows, got array of shape {vectors.shape}")
        if vectors.shape[1] < 1:
            raise EmbeddingFormatError("embedding dimension must be positive")
        if not np.all(np.isfinite(vectors)):
            raise EmbeddingFormatError("non-finite embedding entry")
        index: dict[str, int] = {}
        for i, t in enumerate(terms):
            if t in index:
                raise EmbeddingFormatError(f"duplicate term {t!r}")
            index[t] = i
        vectors.setflags(write=False)
        return cls(tuple(terms), vectors, index)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.index

    def vector(self, term: str) -> np.ndarray:
        return self.vectors[self.index[term]]


@dataclass(frozen=True, eq=False)
class SeedSet:
    terms: tuple[str, ...]
    vectors: np.ndarray  # (n, d)

    def __len__(self) -> int:
        return len(self.terms)


def load_embeddings(source: Iterable[str], max_terms: int = 200_000,
                    dim: Optional[int] = None) -> EmbeddingStore:
    """Parse ``term v1 ... vd`` lines, keeping the first ``max_terms`` rows.

    The dimension is fixed by the first line; ``dim``, when given, is
    asserted against it.
    """
    if max_terms < 1:
        raise ValueError("max_terms must be positive")
    terms: list[str] = []
    rows: list[list[float]] = []
    seen: set[str] = set()
    d = None
    for lineno, line in enumerate(source, start=1):
        if len(terms) >= max_terms:
            break
        line = line.rstrip()
        if not line:
            continue
        parts = line.split(" ")
        term, fields = parts[0], parts[1:]
        if d is None:
            d = len(fields)
            if d == 0:
                raise EmbeddingFormatError(f"line {lineno}: no vector components")
            if dim is not None and d != dim:
                raise EmbeddingFormatError(
                    f"line {lineno}: expected dimension {dim}, found {d}")
        elif len(fields) != d:
            raise EmbeddingFormatError(
                f"line {lineno}: dimension mismatch ({len(fields)} != {d})")
        try:
            row = [float(x) for x in fields]
        except ValueError as exc:
            raise EmbeddingFormatError(f"line {lineno}: {exc}") from None
        if term in seen:
            raise EmbeddingFormatError(f"line {lineno}: duplicate term {term!r}")
        seen.add(term)
        terms.append(term)
        rows.append(row)
    if not terms:
        raise EmbeddingFormatError("empty embedding source")
    return EmbeddingStore.from_arrays(terms, rows)


def load_embeddings_file(path, max_terms: int = 200_000,
                         dim: Optional[int] = None) -> EmbeddingStore:
    with open(path, encoding="utf-8") as f:
        return load_embeddings(f, max_terms=max_terms, dim=dim)


def format_vector_line(term: str, vec) -> str:
    # repr() round-trips float64 exactly
    return term + " " + " ".join(repr(float(x)) for x in vec)


def save_embeddings(store: EmbeddingStore, f) -> None:
    for term, vec in zip(store.terms, store.vectors):
        f.write(format_vector_line(term, vec) + "\n")


def lookup(store: EmbeddingStore, term: str) -> Optional[np.ndarray]:
    """Exact match, else the mean of the underscore-separated tokens present.

    Returns None when neither the term nor any of its tokens is known.
    """
    i = store.index.get(term)
    if i is not None:
        return store.vectors[i]
    parts = [p for p in term.split("_") if p in store.index]
    if not parts:
        return None
    return centroid([store.vectors[store.index[p]] for p in parts])


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise DegenerateVectorError("cosine of a zero-norm vector")
    c = float(u @ v / (nu * nv))
    return min(1.0, max(-1.0, c))


def centroid(vectors) -> np.ndarray:
    """Element-wise mean of a non-empty list of equal-length vectors."""
    arr = np.asarray(vectors, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("centroid expects a non-empty list of vectors")
    if arr.shape[0] == 0:
        raise ValueError("centroid of an empty set")
    return arr.sum(axis=0) / arr.shape[0]


def unit_rows(mat) -> np.ndarray:
    mat = np.asarray(mat, dtype=np.float64)
    norms = np.linalg.norm(mat, axis=-1, keepdims=True)
    if np.any(norms == 0.0):
        raise DegenerateVectorError("zero-norm row")
    return mat / norms


def resolve_seed(store: EmbeddingStore, terms: Sequence[str]) -> SeedSet:
    """Embed the seed terms; every one of them must resolve."""
    terms = tuple(terms)
    if not terms:
        raise ValueError("seed set must be non-empty")
    if len(set(terms)) != len(terms):
        raise ValueError("seed set contains duplicate terms")
    vecs = []
    missing = []
    for t in terms:
        v = lookup(store, t)
        if v is None:
            missing.append(t)
        else:
            vecs.append(v)
    if missing:
        raise UnknownTermError(f"seed terms not in vocabulary: {', '.join(missing)}")
    return SeedSet(terms, np.array(vecs, dtype=np.float64))
