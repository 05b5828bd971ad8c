"""Fit encoder parameters to weakly labelled candidate pairs with the margin loss."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .embeddings import EmbeddingStore, SeedSet
from .encoder import EncoderParams, init_params, save_params_file
from .scoring import pair_loss_and_grad
from .weak import ContextOccurrence, PairSampler, TrainingPair, extract_contexts

log = logging.getLogger(__name__)


class TrainingDivergedError(RuntimeError):
    pass


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 512
    hidden: int = 64
    margin: float = 0.1
    pairs: int = 100_000
    rng_seed: int = 0
    optimizer: str = "adam"
    window: int = 5
    labeler: str = "max"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1 or self.hidden < 1:
            raise ValueError("batch_size and hidden must be positive")
        if self.margin < 0:
            raise ValueError("margin must be non-negative")
        if self.pairs < 0:
            raise ValueError("pairs must be non-negative")
        if self.optimizer not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


class SGD:
    def __init__(self, lr: float):
        self.lr = lr

    def update(self, params: EncoderParams, grads: EncoderParams) -> EncoderParams:
        new = params.copy()
        for name, g in grads.arrays():
            getattr(new, name)[...] -= self.lr * g
        return new


class Adam:
    def __init__(self, lr: float, beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m: dict[str, np.ndarray] = {}
        self.v: dict[str, np.ndarray] = {}

    def update(self, params: EncoderParams, grads: EncoderParams) -> EncoderParams:
        self.t += 1
        new = params.copy()
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        for name, g in grads.arrays():
            m = self.m.get(name, 0.0) * self.beta1 + (1.0 - self.beta1) * g
            v = self.v.get(name, 0.0) * self.beta2 + (1.0 - self.beta2) * g * g
            self.m[name], self.v[name] = m, v
            getattr(new, name)[...] -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
        return new


def make_optimizer(config: TrainConfig):
    if config.optimizer == "sgd":
        return SGD(config.learning_rate)
    return Adam(config.learning_rate, config.beta1, config.beta2, config.eps)


def _oriented(store: EmbeddingStore, batch: Sequence[TrainingPair]):
    pref, other = [], []
    for p in batch:
        if p.label not in (1, -1):
            raise ValueError(f"invalid label {p.label}")
        a, b = store.vector(p.term_i), store.vector(p.term_j)
        if p.label == -1:
            a, b = b, a
        pref.append(a)
        other.append(b)
    return np.array(pref), np.array(other)


def step_on_vectors(params: EncoderParams, seed_vectors, preferred, other,
                    config: TrainConfig, optimizer=None) -> tuple[EncoderParams, float]:
    """One optimizer update on pre-oriented ``(preferred, other)`` vector batches."""
    loss, grads, _ = pair_loss_and_grad(params, seed_vectors, preferred, other, config.margin)
    if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for _, g in grads.arrays()):
        raise TrainingDivergedError(f"non-finite loss or gradient (loss={loss})")
    if optimizer is None:
        optimizer = make_optimizer(config)
    return optimizer.update(params, grads), loss


def train_step(params: EncoderParams, batch: Sequence[TrainingPair], seed: SeedSet,
               config: TrainConfig, store: EmbeddingStore,
               optimizer=None) -> tuple[EncoderParams, float]:
    """Apply one update; returns the new parameters and the pre-update mean loss.

    Pass the same ``optimizer`` across calls to keep Adam moments; without
    one a fresh optimizer is used.
    """
    if not batch:
        raise ValueError("empty batch")
    pref, other = _oriented(store, batch)
    return step_on_vectors(params, seed.vectors, pref, other, config, optimizer)


@dataclass
class TrainReport:
    config: dict
    seed_terms: list
    pairs_used: int = 0
    steps: int = 0
    loss_curve: list = field(default_factory=list)
    label_counts: dict = field(default_factory=lambda: {"+1": 0, "-1": 0})

    def to_dict(self) -> dict:
        return asdict(self)


def train_on_occurrences(store: EmbeddingStore, occurrences: Sequence[ContextOccurrence],
                         seed: SeedSet, config: TrainConfig,
                         checkpoint=None) -> tuple[EncoderParams, TrainReport]:
    params = init_params(store.dim, config.hidden, config.rng_seed)
    report = TrainReport(config=asdict(config), seed_terms=list(seed.terms))
    if config.pairs > 0:
        sampler = PairSampler(occurrences, seed, store, config.labeler)
        chunks = list(sampler.sample_indices(config.rng_seed, config.pairs))
        if not chunks:
            raise ValueError("empty pair stream")
        ii = np.concatenate([c[0] for c in chunks])
        jj = np.concatenate([c[1] for c in chunks])
        labels = np.concatenate([c[2] for c in chunks])
        rows_i = sampler.term_rows[ii]
        rows_j = sampler.term_rows[jj]
        pref_rows = np.where(labels == 1, rows_i, rows_j)
        other_rows = np.where(labels == 1, rows_j, rows_i)
        report.label_counts = {"+1": int((labels == 1).sum()), "-1": int((labels == -1).sum())}

        optimizer = make_optimizer(config)
        for start in range(0, len(labels), config.batch_size):
            sl = slice(start, start + config.batch_size)
            params, loss = step_on_vectors(
                params, seed.vectors, store.vectors[pref_rows[sl]],
                store.vectors[other_rows[sl]], config, optimizer)
            report.loss_curve.append(loss)
            report.steps += 1
        report.pairs_used = int(len(labels))
        log.info("trained %d steps on %d pairs; loss %.4f -> %.4f", report.steps,
                 report.pairs_used, report.loss_curve[0], report.loss_curve[-1])
    if checkpoint is not None:
        save_params_file(params, checkpoint)
    return params, report


def train(store: EmbeddingStore, corpus: Iterable[str], seed: SeedSet, config: TrainConfig,
          checkpoint=None) -> tuple[EncoderParams, TrainReport]:
    """Initialise, stream weakly labelled pairs from ``corpus`` and fit.

    One model per seed set.  The seed encoding is recomputed at every step.
    """
    occurrences = list(extract_contexts(corpus, store, config.window))
    return train_on_occurrences(store, occurrences, seed, config, checkpoint)


def smoothed_loss(report: TrainReport, window: int = 10) -> tuple[float, float]:
    """Mean loss over the first and the last ``window`` steps."""
    curve = np.asarray(report.loss_curve)
    if curve.size == 0:
        raise ValueError("report has no loss curve")
    w = max(1, min(window, curve.size // 2 or 1))
    return float(curve[:w].mean()), float(curve[-w:].mean())

