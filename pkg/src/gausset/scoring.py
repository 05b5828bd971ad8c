"""Closed-form distances, candidate scores and the margin loss.

Scores are distances: a lower score means the candidate disturbs the seed
set's encoding less, i.e. it is the better expansion.
"""

from __future__ import annotations

import numpy as np

from .embeddings import SeedSet
from .encoder import EncoderParams, GaussianEncoding, backward, forward


def wasserstein_sq(g1: GaussianEncoding, g2: GaussianEncoding) -> float:
    """Squared 2-Wasserstein distance between diagonal Gaussians.

    With standard deviations ``sigma`` this is
    ``||mu1 - mu2||^2 + ||sigma1 - sigma2||^2``; the second term is the
    squared Bures distance of the diagonal covariances.
    """
    if g1.mu.shape != g2.mu.shape or g1.sigma.shape != g2.sigma.shape:
        raise ValueError("encodings have different dimensionality")
    dm = g1.mu - g2.mu
    ds = g1.sigma - g2.sigma
    return float(dm @ dm + ds @ ds)


def wasserstein(g1: GaussianEncoding, g2: GaussianEncoding) -> float:
    return float(np.sqrt(wasserstein_sq(g1, g2)))


def expanded_centroids(seed_vectors: np.ndarray, candidates) -> np.ndarray:
    """Centroids of ``[S0, v]`` for each candidate row ``v``.

    Accumulates in the same order as ``centroid(vstack([S0, v]))``.
    """
    seed_vectors = np.asarray(seed_vectors, dtype=np.float64)
    cand = np.atleast_2d(np.asarray(candidates, dtype=np.float64))
    if cand.shape[1] != seed_vectors.shape[1]:
        raise ValueError("candidate dimension does not match the seed set")
    return (seed_vectors.sum(axis=0) + cand) / (seed_vectors.shape[0] + 1)


def score_candidates(params: EncoderParams, seed: SeedSet, candidates) -> np.ndarray:
    """Vectorised :func:`score_candidate` over the rows of ``candidates``."""
    mu0, sig0, _ = forward(params, seed.vectors.sum(axis=0) / len(seed))
    mu, sig, _ = forward(params, expanded_centroids(seed.vectors, candidates))
    w2 = ((mu - mu0) ** 2).sum(axis=1) + ((sig - sig0) ** 2).sum(axis=1)
    return np.sqrt(w2)


def score_candidate(params: EncoderParams, seed: SeedSet, candidate_vec) -> float:
    """W2 distance between the encodings of ``S0`` and ``[S0, candidate]``.

    Both sets go through the same encoder weights.
    """
    candidate_vec = np.asarray(candidate_vec, dtype=np.float64)
    if candidate_vec.shape != (params.dim,):
        raise ValueError(f"candidate must have shape ({params.dim},)")
    return float(score_candidates(params, seed, candidate_vec[None, :])[0])


def centroid_score(seed_centroid, expanded_centroid) -> float:
    """Squared Euclidean displacement of the centroid (baseline scorer)."""
    a = np.asarray(seed_centroid, dtype=np.float64)
    b = np.asarray(expanded_centroid, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("centroids have different dimensionality")
    diff = a - b
    return float(diff @ diff)


def hinge_loss(s_pref: float, s_other: float, margin: float) -> float:
    """``max(0, s_pref - s_other + margin)``; zero once the preferred
    candidate scores at least ``margin`` below the other."""
    if margin < 0:
        raise ValueError("margin must be non-negative")
    return max(0.0, s_pref - s_other + margin)


def pair_loss_and_grad(params: EncoderParams, seed_vectors, preferred, other,
                       margin: float) -> tuple[float, EncoderParams, np.ndarray]:
    """Mean hinge loss over candidate pairs and its gradient.

    ``preferred`` and ``other`` are ``(B, d)`` candidate vectors; row ``b``
    of each forms one pair.  The seed set is re-encoded with the current
    parameters.  Returns ``(mean_loss, grads, per_pair_losses)``.
    """
    seed_vectors = np.asarray(seed_vectors, dtype=np.float64)
    preferred = np.atleast_2d(np.asarray(preferred, dtype=np.float64))
    other = np.atleast_2d(np.asarray(other, dtype=np.float64))
    if preferred.shape != other.shape:
        raise ValueError("preferred and other batches differ in shape")
    B = preferred.shape[0]
    if B == 0:
        raise ValueError("empty batch")
    n = seed_vectors.shape[0]
    c0 = seed_vectors.sum(axis=0) / n
    rows = np.vstack([c0[None, :], expanded_centroids(seed_vectors, np.vstack([preferred, other]))])
    mu, sig, tape = forward(params, rows)

    dmu = mu[1:] - mu[0]
    dsig = sig[1:] - sig[0]
    scores = np.sqrt((dmu ** 2).sum(axis=1) + (dsig ** 2).sum(axis=1))
    s_pref, s_other = scores[:B], scores[B:]
    losses = np.maximum(0.0, s_pref - s_other + margin)
    mean_loss = float(losses.mean())

    active = (s_pref - s_other + margin) > 0.0
    d_scores = np.concatenate([active, -active.astype(np.float64)]) / B
    # d sqrt(w)/d x = (x - x0) / sqrt(w); taken as 0 where the score is 0
    inv = np.divide(d_scores, scores, out=np.zeros_like(scores), where=scores > 0.0)
    g_mu_rows = dmu * inv[:, None]
    g_sig_rows = dsig * inv[:, None]
    g_mu = np.vstack([-g_mu_rows.sum(axis=0, keepdims=True), g_mu_rows])
    g_sig = np.vstack([-g_sig_rows.sum(axis=0, keepdims=True), g_sig_rows])
    grads, _ = backward(params, tape, g_mu, g_sig)
    return mean_loss, grads, losses
