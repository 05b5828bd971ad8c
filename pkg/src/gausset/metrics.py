"""Average precision at a cutoff and its mean over evaluation runs."""

from __future__ import annotations

import math
from typing import Optional, Sequence

from .expander import GroundTruthSet, Ranking, default_k


def average_precision(ranking: Ranking, gt: GroundTruthSet, k: int) -> float:
    """AP@k normalised by ``min(|gt|, k)``.

    >>> r = Ranking((("a", 0.1), ("x", 0.2), ("b", 0.3)), 3)
    >>> round(average_precision(r, GroundTruthSet("g", frozenset("ab")), 3), 6)
    0.833333
    """
    if not gt.members:
        raise ValueError("empty ground truth")
    if k < 1:
        raise ValueError("k must be positive")
    hits = 0
    total = 0.0
    for pos, term in enumerate(ranking.terms[:k], start=1):
        if term in gt.members:
            hits += 1
            total += hits / pos
    return total / min(len(gt.members), k)


def map_at_k(runs: Sequence[tuple[Ranking, GroundTruthSet]], k: Optional[int] = None) -> float:
    """Mean AP@k over ``(ranking, ground truth)`` runs.

    With ``k=None`` each run uses the default cutoff for its class size.
    """
    if not runs:
        raise ValueError("no runs to average")
    aps = [average_precision(r, gt, k if k is not None else default_k(len(gt.members)))
           for r, gt in runs]
    # fsum is exactly rounded, so the mean does not depend on run order
    return math.fsum(aps) / len(aps)
