"""Gaussian mean-field theory of signal propagation in wide random networks.

For a network with weights ``W ~ N(0, sigma_w^2 / N)`` and biases
``b ~ N(0, sigma_b^2)`` the pre-activation second moment ``q`` and the
correlation ``c`` between two inputs obey deterministic depth recurrences in
the infinite-width limit. This module solves them by Gauss-Hermite quadrature
and plain fixed-point iteration, and derives the slope ``chi`` of the
correlation map at its stable fixed point together with the decay length
``xi_c = -1 / ln(chi)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Protocol

import numpy as np

from .errors import ConvergenceError

SELU_LAMBDA = 1.0507009873554805
SELU_ALPHA = 1.6732632423543772

# Stand-in for sqrt(q) when q == 0 so that phi'(sqrt(q) z) keeps the sign of z
# (matters for activations with a kink at the origin).
_TINY_SCALE = 1e-150


class Activation(Protocol):
    """Anything usable as a scalar activation in the recurrences."""

    def __call__(self, x: np.ndarray) -> np.ndarray: ...

    def derivative(self, x: np.ndarray) -> np.ndarray: ...


def selu(x):
    x = np.asarray(x, dtype=float)
    return SELU_LAMBDA * np.where(x > 0, x, SELU_ALPHA * np.expm1(np.minimum(x, 0.0)))


def selu_derivative(x):
    x = np.asarray(x, dtype=float)
    return SELU_LAMBDA * np.where(x > 0, 1.0, SELU_ALPHA * np.exp(np.minimum(x, 0.0)))


class ActivationKind(enum.Enum):
    """Real scalar activations supported by the mean-field solver."""

    TANH = "tanh"
    SELU_REAL = "selu"

    def __call__(self, x):
        if self is ActivationKind.TANH:
            return np.tanh(x)
        return selu(x)

    def derivative(self, x):
        if self is ActivationKind.TANH:
            return 1.0 / np.cosh(x) ** 2
        return selu_derivative(x)

    @property
    def shrinks_toward_origin(self) -> bool:
        """True when ``|phi(x)| < |phi'(0) x|`` for all ``x != 0``.

        For such activations and zero bias, ``sigma_w * |phi'(0)| <= 1`` makes the
        q-map a strict contraction to the origin, so ``q* = 0`` exactly.
        """
        return self is ActivationKind.TANH


@dataclass(frozen=True)
class Quadrature:
    """Nodes and weights for expectations under the standard normal measure."""

    nodes: np.ndarray
    weights: np.ndarray

    def expect(self, values: np.ndarray) -> float:
        return float(self.weights @ values)


@lru_cache(maxsize=16)
def _hermite_e(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.hermite_e.hermegauss(order)
    weights = weights / weights.sum()
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gaussian_quadrature(order: int) -> Quadrature:
    """Gauss-Hermite rule normalized to ``Dz = exp(-z^2/2) dz / sqrt(2 pi)``.

    Exact for polynomials of degree up to ``2 * order - 1``.
    """
    if int(order) != order or order < 2:
        raise ValueError(f"quadrature order must be an integer >= 2, got {order!r}")
    nodes, weights = _hermite_e(int(order))
    return Quadrature(nodes, weights)


@dataclass(frozen=True)
class MeanFieldParams:
    sigma_w: float
    sigma_b: float = 0.0
    activation: Activation = ActivationKind.TANH
    quadrature_order: int = 128
    fixed_point_tol: float = 1e-12
    max_iters: int = 10_000

    def __post_init__(self):
        if not self.sigma_w > 0:
            raise ValueError(f"sigma_w must be positive, got {self.sigma_w}")
        if self.sigma_b < 0:
            raise ValueError(f"sigma_b must be nonnegative, got {self.sigma_b}")
        if self.quadrature_order < 16:
            raise ValueError("quadrature_order must be at least 16")
        if not self.fixed_point_tol > 0:
            raise ValueError("fixed_point_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be positive")

    @property
    def quadrature(self) -> Quadrature:
        return gaussian_quadrature(self.quadrature_order)


@dataclass(frozen=True)
class MeanFieldPoint:
    """One point of the (sigma_w, sigma_b) phase diagram."""

    sigma_w: float
    sigma_b: float
    q_star: float
    c_star: float
    chi: float
    xi_c: float
    converged: bool = True
    note: str = field(default="", compare=False)

    @property
    def xi_infinite(self) -> bool:
        return math.isinf(self.xi_c)


def _scale(q: float) -> float:
    return math.sqrt(q) if q > 0 else _TINY_SCALE


def _pair_expectation(f, c: float, qa: float, qb: float, quad: Quadrature) -> float:
    """``E[f(u1) f(u2)]`` for ``u1 = sqrt(qa) z1``, ``u2 = sqrt(qb) (c z1 + sqrt(1-c^2) z2)``.

    Tensor product of two 1D rules; ``f(u1)`` depends on ``z1`` only.
    """
    z, w = quad.nodes, quad.weights
    s = math.sqrt(max(0.0, 1.0 - c * c))
    f1 = f(_scale(qa) * z)
    f2 = f(_scale(qb) * (c * z[:, None] + s * z[None, :]))
    return float((w * f1) @ (f2 @ w))


def iterate_q(q_prev: float, params: MeanFieldParams) -> float:
    """One layer of the second-moment recurrence."""
    if q_prev < 0:
        raise ValueError(f"q must be nonnegative, got {q_prev}")
    quad = params.quadrature
    phi = params.activation(math.sqrt(q_prev) * quad.nodes)
    return params.sigma_w**2 * quad.expect(phi * phi) + params.sigma_b**2


def covariance(c: float, qa: float, qb: float, params: MeanFieldParams) -> float:
    """Next-layer covariance of two inputs with moments ``qa``, ``qb`` and correlation ``c``."""
    e = _pair_expectation(params.activation, c, qa, qb, params.quadrature)
    return params.sigma_w**2 * e + params.sigma_b**2


def _check_c(c: float) -> float:
    if not -1.0 - 1e-12 <= c <= 1.0 + 1e-12:
        raise ValueError(f"correlation must lie in [-1, 1], got {c}")
    return min(1.0, max(-1.0, c))


def iterate_c(c_prev: float, q_star: float, params: MeanFieldParams) -> float:
    """One layer of the correlation map, evaluated at the magnitude fixed point."""
    if not q_star > 0:
        raise ValueError(f"q_star must be positive to normalize the covariance, got {q_star}")
    c_prev = _check_c(c_prev)
    return covariance(c_prev, q_star, q_star, params) / q_star


def propagate_pair(qa: float, qb: float, c: float, params: MeanFieldParams):
    """Advance ``(qa, qb, c)`` by one layer of the full coupled recurrence."""
    c = _check_c(c)
    qab = covariance(c, qa, qb, params)
    qa_next = iterate_q(qa, params)
    qb_next = iterate_q(qb, params)
    denom = math.sqrt(qa_next * qb_next)
    c_next = qab / denom if denom > 0 else 1.0
    return qa_next, qb_next, min(1.0, max(-1.0, c_next))


def _solve_q(params: MeanFieldParams):
    act = params.activation
    if (
        params.sigma_b == 0
        and getattr(act, "shrinks_toward_origin", False)
        and params.sigma_w * abs(float(act.derivative(0.0))) <= 1.0
    ):
        return 0.0, True, 0.0, 0
    tol = params.fixed_point_tol
    q = 1.0
    resid = math.inf
    for it in range(1, params.max_iters + 1):
        q_next = iterate_q(q, params)
        resid = abs(q_next - q)
        q = q_next
        # Absolute test alone is too loose when q* is tiny (sigma_b ~ 0.01).
        if resid < tol and (resid <= tol * q or q < tol):
            return q, True, resid, it
    return q, False, resid, params.max_iters


def fixed_point_q(params: MeanFieldParams) -> float:
    """Iterate the q-map from ``q = 1`` to its fixed point ``q*``."""
    q, ok, resid, iters = _solve_q(params)
    if not ok:
        raise ConvergenceError("q iteration did not converge", q, resid, iters)
    return q


def _solve_c(params: MeanFieldParams, q_star: float, c0: float = 0.98):
    if q_star == 0.0:
        # Every input is mapped to the origin: perfectly correlated.
        return 1.0, True, 0.0, 0
    tol = params.fixed_point_tol
    c = c0
    resid = math.inf
    for it in range(1, params.max_iters + 1):
        c_next = min(1.0, max(-1.0, iterate_c(c, q_star, params)))
        resid = abs(c_next - c)
        c = c_next
        if resid < tol:
            return c, True, resid, it
    return c, False, resid, params.max_iters


def fixed_point_c(params: MeanFieldParams) -> float:
    """Stable fixed point ``c*`` reached from ``c = 0.98``."""
    q_star = fixed_point_q(params)
    c, ok, resid, iters = _solve_c(params, q_star)
    if not ok:
        raise ConvergenceError("c iteration did not converge", c, resid, iters)
    return c


def _chi_at(params: MeanFieldParams, q_star: float, c_star: float) -> float:
    e = _pair_expectation(params.activation.derivative, c_star, q_star, q_star, params.quadrature)
    return params.sigma_w**2 * e


def correlation_slope_chi(params: MeanFieldParams) -> float:
    """Slope of the c-map at ``c*``: ``sigma_w^2 E[phi'(u1) phi'(u2)]``."""
    q_star = fixed_point_q(params)
    c_star = fixed_point_c(params)
    return _chi_at(params, q_star, c_star)


def xi_from_chi(chi: float, tol: float = 1e-12) -> float:
    """``-1/ln(chi)``; ``inf`` at criticality or where the local slope is expanding."""
    if chi < 0:
        raise ValueError(f"chi must be nonnegative, got {chi}")
    if abs(chi - 1.0) < tol or chi > 1.0:
        return math.inf
    if chi == 0.0:
        return 0.0
    return -1.0 / math.log(chi)


def decay_length_xi(params: MeanFieldParams) -> float:
    return xi_from_chi(correlation_slope_chi(params), params.fixed_point_tol)


def correlation_trajectory(params: MeanFieldParams, depth: int, c0: float = 0.98):
    """``[(l, |c^l - c*|)]`` for ``l = 0..depth`` along the c-map at ``q*``."""
    q_star = fixed_point_q(params)
    c_star = fixed_point_c(params)
    c = c0
    out = [(0, abs(c - c_star))]
    for layer in range(1, depth + 1):
        c = min(1.0, max(-1.0, iterate_c(c, q_star, params)))
        out.append((layer, abs(c - c_star)))
    return out


def fit_decay_length(trajectory, floor: float = 1e-12) -> float:
    """Decay length from a least-squares fit of ``ln|c^l - c*|`` against ``l``.

    Points at or below ``floor`` are treated as numerical zero and dropped.
    The caller is responsible for removing transient layers.
    """
    pts = [(float(l), float(d)) for l, d in trajectory if d > floor]
    if not pts:
        raise ValueError("trajectory is numerically zero everywhere")
    if len(pts) < 4:
        raise ValueError(f"need at least 4 points above {floor:g}, got {len(pts)}")
    layers, dev = np.array(pts).T
    slope = np.polyfit(layers, np.log(dev), 1)[0]
    if slope >= 0:
        raise ValueError(f"trajectory does not decay on average (log-slope {slope:.3g})")
    return -1.0 / slope


def fit_trajectory_decay(params: MeanFieldParams, depth: int | None = None, floor: float = 1e-9) -> float:
    """Trajectory-fit decay length, dropping the first 20% of layers as transient."""
    if depth is None:
        xi = decay_length_xi(params)
        if math.isinf(xi):
            raise ValueError("decay length is infinite at this point")
        depth = int(min(2000, max(40, math.ceil(25 * xi))))
    traj = correlation_trajectory(params, depth)
    start = int(math.ceil(0.2 * depth))
    return fit_decay_length(traj[start:], floor=floor)


def meanfield_point(params: MeanFieldParams) -> MeanFieldPoint:
    """Evaluate ``q*, c*, chi, xi_c`` without raising on non-convergence."""
    q, ok_q, _, _ = _solve_q(params)
    c, ok_c, _, _ = _solve_c(params, q)
    chi = _chi_at(params, q, c)
    converged = ok_q and ok_c
    note = "" if converged else ("q not converged" if not ok_q else "c not converged")
    return MeanFieldPoint(
        sigma_w=params.sigma_w,
        sigma_b=params.sigma_b,
        q_star=q,
        c_star=c,
        chi=chi,
        xi_c=xi_from_chi(chi, params.fixed_point_tol),
        converged=converged,
        note=note,
    )


def phase_sweep(grid, sigma_b: float, activation: Activation = ActivationKind.TANH, **params) -> list[MeanFieldPoint]:
    """One :class:`MeanFieldPoint` per ``sigma_w`` in ``grid``, in grid order."""
    grid = [float(s) for s in grid]
    if not grid:
        raise ValueError("sigma_w grid is empty")
    if any(s <= 0 for s in grid):
        raise ValueError("sigma_w values must be positive")
    return [meanfield_point(MeanFieldParams(s, sigma_b, activation, **params)) for s in grid]
