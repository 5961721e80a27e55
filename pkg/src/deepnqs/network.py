"""Random deep complex feed-forward networks used as neural quantum states.

A network maps a spin configuration ``x in {0, 1}^L`` through ``mu`` bias-free
layers ``y <- phi(W y)`` with complex weights and converts the last layer to a
log-amplitude with a complex log-sum-exp.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import AmplitudeCancellation
from .meanfield import SELU_ALPHA, SELU_LAMBDA, ActivationKind, selu
from .seeding import make_rng

SPLIT_SELU = "selu_split"
LEXICOGRAPHIC_SELU = "selu_lexicographic"
COMPLEX_ACTIVATIONS = (SPLIT_SELU, LEXICOGRAPHIC_SELU)

_DUMP_MAGIC = b"DNQSNET1"


@dataclass(frozen=True)
class NetworkConfig:
    num_spins: int
    depth: int
    width_factor: float = 1.0
    sigma_w: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.num_spins < 2 or self.num_spins % 2:
            raise ValueError(f"num_spins must be even and >= 2, got {self.num_spins}")
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        if not self.width_factor > 0 or self.width < 1:
            raise ValueError(f"width_factor {self.width_factor} gives an empty hidden layer")
        if self.sigma_w < 0:
            raise ValueError(f"sigma_w must be nonnegative, got {self.sigma_w}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def width(self) -> int:
        return int(round(self.width_factor * self.num_spins))


@dataclass(frozen=True, eq=False)
class DeepNetwork:
    """An immutable sampled realization.

    ``weights[0]`` has shape ``(width, L)``; later layers are ``(width, width)``.
    """

    weights: tuple[np.ndarray, ...]
    activation: str = SPLIT_SELU
    config: NetworkConfig | None = None

    def __post_init__(self):
        if not self.weights:
            raise ValueError("a network needs at least one layer")
        if self.activation not in COMPLEX_ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        for w in self.weights:
            w.setflags(write=False)

    @property
    def num_spins(self) -> int:
        return self.weights[0].shape[1]

    @property
    def depth(self) -> int:
        return len(self.weights)

    @property
    def width(self) -> int:
        return self.weights[-1].shape[0]


def sample_network(config: NetworkConfig, activation: str = SPLIT_SELU) -> DeepNetwork:
    """Draw a network with Re and Im parts of ``W^(l)`` i.i.d. ``N(0, sigma_w^2 / N_{l-1})``.

    Layer ``l`` (1-based) draws from its own stream seeded by
    ``derive_seed(config.seed, [l])``.
    """
    weights = []
    n_in = config.num_spins
    for layer in range(1, config.depth + 1):
        rng = make_rng(config.seed, [layer])
        shape = (config.width, n_in)
        std = config.sigma_w / math.sqrt(n_in)
        re = rng.standard_normal(shape)
        im = rng.standard_normal(shape)
        weights.append(std * (re + 1j * im))
        n_in = config.width
    return DeepNetwork(tuple(weights), activation, config)


def selu_complex(z):
    """Real SELU applied separately to the real and imaginary parts."""
    z = np.asarray(z, dtype=complex)
    return selu(z.real) + 1j * selu(z.imag)


def selu_lexicographic(z):
    """SELU continued to complex inputs by ordering on ``(Re z, Im z)``.

    ``lambda z`` when ``z > 0`` lexicographically, else ``lambda alpha (e^z - 1)``.
    This is what array libraries that order complex numbers lexicographically
    return when handed the real SELU formula.
    """
    z = np.asarray(z, dtype=complex)
    pos = (z.real > 0) | ((z.real == 0) & (z.imag > 0))
    neg_branch = SELU_ALPHA * np.expm1(np.where(pos, 0, z))
    return SELU_LAMBDA * np.where(pos, z, neg_branch)


_COMPLEX_PHI = {SPLIT_SELU: selu_complex, LEXICOGRAPHIC_SELU: selu_lexicographic}


def forward(net: DeepNetwork, x) -> np.ndarray:
    """Last-layer activations ``y^(mu)`` for one configuration or a batch of rows."""
    x = np.asarray(x)
    if x.shape[-1] != net.num_spins:
        raise ValueError(f"expected {net.num_spins} spins, got input of shape {x.shape}")
    phi = _COMPLEX_PHI[net.activation]
    y = x.astype(complex)
    for w in net.weights:
        y = phi(y @ w.T)
    return y


_CANCELLATION_ULPS = 16


def logsumexp_complex(y: np.ndarray) -> np.ndarray:
    """``log sum_i exp(y_i)`` along the last axis, shifted by the largest real part."""
    y = np.asarray(y, dtype=complex)
    m = y.real.max(axis=-1, keepdims=True)
    terms = np.exp(y - m)
    total = terms.sum(axis=-1)
    # a sum below a few ulps of its terms' magnitude carries no digits
    scale = np.abs(terms).sum(axis=-1)
    if np.any(np.abs(total) <= _CANCELLATION_ULPS * np.finfo(float).eps * scale):
        raise AmplitudeCancellation("exponential sum cancelled to rounding level")
    return m[..., 0] + np.log(total)


def log_amplitude(net: DeepNetwork, x) -> complex | np.ndarray:
    """``log <x|psi>`` (principal branch); vectorized over leading axes of ``x``."""
    out = logsumexp_complex(forward(net, x))
    return complex(out) if out.ndim == 0 else out


def dump_network(net: DeepNetwork, path) -> None:
    """Binary dump: magic, layer count, then per layer ``rows, cols`` and
    row-major ``(re, im)`` little-endian float64 pairs."""
    with open(path, "wb") as fh:
        fh.write(_DUMP_MAGIC)
        fh.write(struct.pack("<I", net.depth))
        for w in net.weights:
            fh.write(struct.pack("<II", *w.shape))
            fh.write(np.ascontiguousarray(w, dtype="<c16").tobytes())


def load_network(path, activation: str = SPLIT_SELU) -> DeepNetwork:
    data = Path(path).read_bytes()
    if data[:8] != _DUMP_MAGIC:
        raise ValueError(f"{path} is not a network dump")
    (depth,) = struct.unpack_from("<I", data, 8)
    offset = 12
    weights = []
    for _ in range(depth):
        rows, cols = struct.unpack_from("<II", data, offset)
        offset += 8
        n = rows * cols
        w = np.frombuffer(data, dtype="<c16", count=n, offset=offset).reshape(rows, cols)
        weights.append(w.astype(complex))
        offset += 16 * n
    return DeepNetwork(tuple(weights), activation)


# Real-weighted networks for comparing finite-width statistics with mean-field theory.


@dataclass(frozen=True, eq=False)
class RealNetwork:
    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]
    activation: ActivationKind = ActivationKind.TANH


def sample_real_network(width: int, depth: int, sigma_w: float, sigma_b: float, seed: int,
                        activation: ActivationKind = ActivationKind.TANH) -> RealNetwork:
    """Square real network with ``W ~ N(0, sigma_w^2/width)`` and ``b ~ N(0, sigma_b^2)``."""
    weights, biases = [], []
    for layer in range(1, depth + 1):
        rng = make_rng(seed, [layer])
        weights.append(rng.standard_normal((width, width)) * (sigma_w / math.sqrt(width)))
        biases.append(rng.standard_normal(width) * sigma_b)
    return RealNetwork(tuple(weights), tuple(biases), activation)


def preactivations(net: RealNetwork, inputs: np.ndarray) -> list[np.ndarray]:
    """Pre-activations ``z^(l)`` for ``l = 1..depth``.

    ``inputs`` has shape ``(width, k)``: one column per input vector. The first
    layer acts on the raw inputs, deeper layers on ``phi(z)``.
    """
    out = []
    y = np.asarray(inputs, dtype=float)
    for w, b in zip(net.weights, net.biases):
        z = w @ y + b[:, None]
        out.append(z)
        y = net.activation(z)
    return out
