"""MAP evaluation over ground-truth classes with random seed draws."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .embeddings import EmbeddingStore, lookup, resolve_seed
from .encoder import save_params
from .expander import SCORERS, GroundTruthSet, Ranking, default_k, expand, expand_centroid
from .metrics import average_precision
from .trainer import TrainConfig, train_on_occurrences
from .weak import ContextOccurrence


@dataclass
class RunResult:
    class_name: str
    draw: int
    seed_terms: tuple
    scorer: str
    k: int
    ranking: Ranking
    ap: float
    checkpoint: Optional[bytes] = field(default=None, repr=False)


@dataclass
class EvalResult:
    runs: list

    def scorers(self) -> list[str]:
        return [s for s in SCORERS if any(r.scorer == s for r in self.runs)]

    def per_class(self, scorer: str) -> dict[str, float]:
        groups: dict[str, list[float]] = {}
        for r in self.runs:
            if r.scorer == scorer:
                groups.setdefault(r.class_name, []).append(r.ap)
        return {name: math.fsum(aps) / len(aps) for name, aps in groups.items()}

    def mean_ap(self, scorer: str) -> float:
        aps = [r.ap for r in self.runs if r.scorer == scorer]
        if not aps:
            raise KeyError(f"no runs for scorer {scorer!r}")
        return math.fsum(aps) / len(aps)

    def to_dict(self) -> dict:
        return {
            s: {"per_class": self.per_class(s), "map": self.mean_ap(s)}
            for s in self.scorers()
        }

    def table(self) -> str:
        scorers = self.scorers()
        names = list(self.per_class(scorers[0]))
        width = max(len("class"), *(len(n) for n in names), len("average"))
        lines = ["class".ljust(width) + "".join(f"  {s:>8}" for s in scorers)]
        per = {s: self.per_class(s) for s in scorers}
        for n in names:
            lines.append(n.ljust(width) + "".join(f"  {per[s][n]:8.4f}" for s in scorers))
        lines.append("average".ljust(width) + "".join(f"  {self.mean_ap(s):8.4f}" for s in scorers))
        return "\n".join(lines)


def draw_seed_sets(gt: GroundTruthSet, store: EmbeddingStore, draws: int, size: int,
                   rng: np.random.Generator) -> list[tuple[str, ...]]:
    """Sample ``draws`` seed sets of ``size`` resolvable members each."""
    pool = sorted(m for m in gt.members if lookup(store, m) is not None)
    if len(pool) < size + 1:
        raise ValueError(f"class {gt.name!r} has fewer than {size + 1} members in the vocabulary")
    return [tuple(sorted(rng.choice(pool, size=size, replace=False))) for _ in range(draws)]


def evaluate(store: EmbeddingStore, occurrences: Sequence[ContextOccurrence],
             classes: Sequence[GroundTruthSet], config: TrainConfig, draws: int = 3,
             seed_size: int = 3, k: Optional[int] = None,
             scorers: Sequence[str] = SCORERS, rng_seed: int = 0) -> EvalResult:
    """Train one encoder per (class, seed draw) and score both rankers.

    The ground truth of a run is the class minus its seed terms.  ``k=None``
    picks 200, or 350 for classes over 100 members.
    """
    for s in scorers:
        if s not in SCORERS:
            raise ValueError(f"unknown scorer {s!r}")
    rng = np.random.default_rng(rng_seed)
    runs = []
    for gt in classes:
        kk = k if k is not None else default_k(len(gt.members))
        for draw, seed_terms in enumerate(draw_seed_sets(gt, store, draws, seed_size, rng)):
            seed = resolve_seed(store, seed_terms)
            target = GroundTruthSet(gt.name, gt.members - set(seed_terms))
            for scorer in scorers:
                ckpt = None
                if scorer == "gauss":
                    params, _ = train_on_occurrences(store, occurrences, seed, config)
                    ranking = expand(params, store, seed, kk)
                    ckpt = save_params(params)
                else:
                    ranking = expand_centroid(store, seed, kk)
                runs.append(RunResult(gt.name, draw, seed_terms, scorer, kk, ranking,
                                      average_precision(ranking, target, kk), ckpt))
    return EvalResult(runs)
