"""Set encoder: centroid -> 2-layer ReLU trunk -> mean head and log-variance head.

Everything is float64 and hand-differentiated so that gradients can be
checked against finite differences.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from typing import Iterator

import numpy as np

from .embeddings import centroid

PARAM_NAMES = ("W1", "b1", "W2", "b2", "Wmu", "bmu", "Ws", "bs")


@dataclass(eq=False)
class EncoderParams:
    """Trunk ``W1 (h,d), W2 (h,h)`` plus heads ``Wmu, Ws (d,h)``."""

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    Wmu: np.ndarray
    bmu: np.ndarray
    Ws: np.ndarray
    bs: np.ndarray
    seed: int = 0

    @property
    def dim(self) -> int:
        return self.W1.shape[1]

    @property
    def hidden(self) -> int:
        return self.W1.shape[0]

    def arrays(self) -> Iterator[tuple[str, np.ndarray]]:
        for name in PARAM_NAMES:
            yield name, getattr(self, name)

    def copy(self) -> "EncoderParams":
        return replace(self, **{n: a.copy() for n, a in self.arrays()})

    def zeros_like(self) -> "EncoderParams":
        return replace(self, **{n: np.zeros_like(a) for n, a in self.arrays()})

    def equals(self, other: "EncoderParams") -> bool:
        """Bit-exact comparison of shapes, values and seed."""
        if self.seed != other.seed:
            return False
        for name, a in self.arrays():
            b = getattr(other, name)
            if a.shape != b.shape or a.tobytes() != b.tobytes():
                return False
        return True


def expected_shapes(d: int, h: int) -> dict[str, tuple[int, ...]]:
    return {"W1": (h, d), "b1": (h,), "W2": (h, h), "b2": (h,),
            "Wmu": (d, h), "bmu": (d,), "Ws": (d, h), "bs": (d,)}


def check_params(params: EncoderParams) -> None:
    shapes = expected_shapes(params.dim, params.hidden)
    for name, arr in params.arrays():
        if arr.shape != shapes[name]:
            raise ValueError(f"{name} has shape {arr.shape}, expected {shapes[name]}")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"{name} has non-finite entries")


def init_params(d: int, h: int = 64, seed: int = 0) -> EncoderParams:
    """Glorot-uniform weights, zero biases, deterministic in ``seed``."""
    if d < 1 or h < 1:
        raise ValueError("d and h must be positive")
    rng = np.random.default_rng(seed)

    def glorot(n_out, n_in):
        limit = np.sqrt(6.0 / (n_in + n_out))
        return rng.uniform(-limit, limit, size=(n_out, n_in))

    return EncoderParams(
        W1=glorot(h, d), b1=np.zeros(h),
        W2=glorot(h, h), b2=np.zeros(h),
        Wmu=glorot(d, h), bmu=np.zeros(d),
        Ws=glorot(d, h), bs=np.zeros(d),
        seed=int(seed),
    )


@dataclass(frozen=True, eq=False)
class GaussianEncoding:
    mu: np.ndarray
    sigma: np.ndarray  # per-coordinate standard deviation, > 0


class ForwardTape:
    """Activations cached by one forward pass, consumed by one backward pass."""

    __slots__ = ("inputs", "a1", "z1", "a2", "z2", "sigma", "_used")

    def __init__(self, inputs, a1, z1, a2, z2, sigma):
        self.inputs = inputs
        self.a1, self.z1 = a1, z1
        self.a2, self.z2 = a2, z2
        self.sigma = sigma
        self._used = False


def forward(params: EncoderParams, centroids) -> tuple[np.ndarray, np.ndarray, ForwardTape]:
    """Batched encoder on a ``(B, d)`` matrix of set centroids.

    Returns ``mu (B, d)``, ``sigma (B, d)`` and the tape for :func:`backward`.
    """
    c = np.asarray(centroids, dtype=np.float64)
    if c.ndim == 1:
        c = c[None, :]
    if c.shape[1] != params.dim:
        raise ValueError(f"input dimension {c.shape[1]} != encoder dimension {params.dim}")
    a1 = c @ params.W1.T + params.b1
    z1 = np.maximum(a1, 0.0)
    a2 = z1 @ params.W2.T + params.b2
    z2 = np.maximum(a2, 0.0)
    mu = z2 @ params.Wmu.T + params.bmu
    log_var = z2 @ params.Ws.T + params.bs
    sigma = np.exp(0.5 * log_var)
    return mu, sigma, ForwardTape(c, a1, z1, a2, z2, sigma)


def encode_set(params: EncoderParams, vectors) -> tuple[GaussianEncoding, ForwardTape]:
    """Encode a set of vectors as a diagonal Gaussian via its centroid."""
    vectors = np.asarray(vectors, dtype=np.float64)
    if vectors.ndim != 2 or vectors.shape[0] == 0:
        raise ValueError("encode_set needs a non-empty (n, d) set of vectors")
    if vectors.shape[1] != params.dim:
        raise ValueError(f"vector dimension {vectors.shape[1]} != encoder dimension {params.dim}")
    mu, sigma, tape = forward(params, centroid(vectors))
    return GaussianEncoding(mu[0], sigma[0]), tape


def backward(params: EncoderParams, tape: ForwardTape, grad_mu, grad_sigma
             ) -> tuple[EncoderParams, np.ndarray]:
    """Reverse-mode gradients given upstream ``dL/dmu`` and ``dL/dsigma``.

    Works for any batch size; parameter gradients are summed over rows.
    Returns the parameter gradients (as an ``EncoderParams``) and the
    gradient with respect to the input centroids, shaped like the tape's
    input.  ReLU'(0) is taken as 0.
    """
    if tape._used:
        raise RuntimeError("forward tape already consumed")
    g_mu = np.asarray(grad_mu, dtype=np.float64).reshape(tape.sigma.shape)
    g_sigma = np.asarray(grad_sigma, dtype=np.float64).reshape(tape.sigma.shape)
    tape._used = True

    # sigma = exp(s / 2)  =>  dsigma/ds = sigma / 2
    g_s = g_sigma * tape.sigma * 0.5
    g_z2 = g_mu @ params.Wmu + g_s @ params.Ws
    g_a2 = g_z2 * (tape.a2 > 0.0)
    g_z1 = g_a2 @ params.W2
    g_a1 = g_z1 * (tape.a1 > 0.0)
    grads = replace(
        params,
        W1=g_a1.T @ tape.inputs, b1=g_a1.sum(axis=0),
        W2=g_a2.T @ tape.z1, b2=g_a2.sum(axis=0),
        Wmu=g_mu.T @ tape.z2, bmu=g_mu.sum(axis=0),
        Ws=g_s.T @ tape.z2, bs=g_s.sum(axis=0),
    )
    return grads, g_a1 @ params.W1


# checkpoint: magic, version, d, h, seed, then row-major little-endian float64 arrays
_MAGIC = b"GSXP"
_VERSION = 1
_HEADER = struct.Struct("<4sIIIq")


class CheckpointError(ValueError):
    pass


def save_params(params: EncoderParams) -> bytes:
    check_params(params)
    header = _HEADER.pack(_MAGIC, _VERSION, params.dim, params.hidden, params.seed)
    payload = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes()
                       for _, a in params.arrays())
    return header + payload


def load_params(data: bytes) -> EncoderParams:
    if len(data) < _HEADER.size:
        raise CheckpointError("checkpoint shorter than its header")
    magic, version, d, h, seed = _HEADER.unpack_from(data)
    if magic != _MAGIC:
        raise CheckpointError("not an encoder checkpoint (bad magic)")
    if version != _VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    if d < 1 or h < 1:
        raise CheckpointError(f"invalid header dimensions d={d}, h={h}")
    shapes = expected_shapes(d, h)
    n_floats = sum(int(np.prod(s)) for s in shapes.values())
    payload = data[_HEADER.size:]
    if len(payload) != 8 * n_floats:
        raise CheckpointError(
            f"payload length mismatch: {len(payload)} bytes, expected {8 * n_floats} for d={d}, h={h}")
    flat = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    arrays = {}
    offset = 0
    for name in PARAM_NAMES:
        size = int(np.prod(shapes[name]))
        arrays[name] = flat[offset:offset + size].reshape(shapes[name]).copy()
        offset += size
    params = EncoderParams(**arrays, seed=seed)
    if not all(np.all(np.isfinite(a)) for _, a in params.arrays()):
        raise CheckpointError("checkpoint contains non-finite values")
    return params


def save_params_file(params: EncoderParams, path) -> None:
    with open(path, "wb") as f:
        f.write(save_params(params))


def load_params_file(path) -> EncoderParams:
    with open(path, "rb") as f:
        return load_params(f.read())
