"""Ensemble sweeps over random network realizations.

Each realization is an independent task identified by integer indices; its
seed is ``derive_seed(master_seed, indices)``. Tasks may run in any order or in
worker processes; results are reduced in index order, so output does not
depend on the degree of parallelism.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import AmplitudeCancellation, NormUnderflowError, SweepAborted
from ..hilbert import build_wavefunction, half_chain_entropy
from ..meanfield import MeanFieldParams, MeanFieldPoint, fit_decay_length, meanfield_point, phase_sweep, propagate_pair
from ..network import NetworkConfig, preactivations, sample_network, sample_real_network
from ..observables import energy_moments
from ..seeding import derive_seed, make_rng
from .config import Experiment, SweepConfig

log = logging.getLogger(__name__)

MAX_FAILURE_FRACTION = 0.10


@dataclass(frozen=True)
class EnsembleResult:
    sigma_w: float
    L: int
    mu: int
    quantity: str
    mean: float
    std_dev: float
    n: int
    failures: int = 0
    values: tuple[float, ...] = field(default=(), repr=False)

    @property
    def grid_point(self) -> tuple[float, int, int]:
        return (self.sigma_w, self.L, self.mu)

    @property
    def std_error(self) -> float:
        return self.std_dev / math.sqrt(self.n) if self.n > 0 else math.nan


def summarize(values) -> tuple[float, float]:
    """Mean and two-pass sample standard deviation (divisor ``n - 1``)."""
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        return math.nan, math.nan
    mean = float(x.sum() / x.size)
    if x.size == 1:
        return mean, 0.0
    return mean, float(math.sqrt(np.sum((x - mean) ** 2) / (x.size - 1)))


def _network(L, mu, alpha, sigma_w, seed, activation):
    return sample_network(NetworkConfig(L, mu, alpha, sigma_w, seed), activation)


def _entropy_task(task):
    L, mu, alpha, sigma_w, seed, activation = task
    try:
        with np.errstate(all="ignore"):
            psi = build_wavefunction(_network(L, mu, alpha, sigma_w, seed, activation))
        return half_chain_entropy(psi)
    except (NormUnderflowError, AmplitudeCancellation):
        return None


def _energy_task(task):
    L, mu, alpha, sigma_w, seed, activation, hamiltonian = task
    try:
        with np.errstate(all="ignore"):
            psi = build_wavefunction(_network(L, mu, alpha, sigma_w, seed, activation))
        return (half_chain_entropy(psi), *energy_moments(hamiltonian, psi))
    except (NormUnderflowError, AmplitudeCancellation):
        return None


def _run_tasks(fn, tasks, workers):
    if workers <= 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (8 * workers))
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=chunk))


def _ensemble(sigma_w, L, mu, quantity, values, requested, keep_values):
    ok = [v for v in values if v is not None]
    failures = requested - len(ok)
    if failures > MAX_FAILURE_FRACTION * requested:
        raise SweepAborted(f"{failures}/{requested} realizations failed at sigma_w={sigma_w}, L={L}, mu={mu}")
    if failures:
        log.warning("%d/%d realizations failed at sigma_w=%g L=%d mu=%d", failures, requested, sigma_w, L, mu)
    mean, std = summarize(ok)
    return EnsembleResult(sigma_w, L, mu, quantity, mean, std, len(ok), failures,
                          tuple(ok) if keep_values else ())


def realization_seed(cfg: SweepConfig, sigma_index: int, mu_index: int, realization: int) -> int:
    return derive_seed(cfg.master_seed, [sigma_index, mu_index, realization])


def _grid(cfg, mus):
    """``(L, mu_index, mu, sigma_index, sigma_w)`` in output order."""
    for L in cfg.L_list:
        for mi, mu in mus:
            for si, s in enumerate(cfg.sigma_w_grid):
                yield L, mi, mu, si, s


def run_entanglement_sweep(cfg: SweepConfig) -> list[EnsembleResult]:
    """Mean half-chain entropy per ``(L, mu, sigma_w)``."""
    cfg.validate()
    n = cfg.n_realizations
    points = list(_grid(cfg, enumerate(cfg.mu_list)))
    tasks = [
        (L, mu, cfg.alpha, s, realization_seed(cfg, si, mi, r), cfg.network_activation)
        for L, mi, mu, si, s in points
        for r in range(n)
    ]
    values = _run_tasks(_entropy_task, tasks, cfg.workers)
    return [
        _ensemble(s, L, mu, "entropy", values[k * n:(k + 1) * n], n, cfg.dump_values)
        for k, (L, mi, mu, si, s) in enumerate(points)
    ]


def run_scaling_sweep(cfg: SweepConfig) -> list[EnsembleResult]:
    """Mean half-chain entropy versus ``L`` at fixed depth ``mu_list[0]``, ordered by ``(sigma_w, L)``.

    Realization ``r`` at a given ``sigma_w`` uses the same seed for every ``L``.
    """
    cfg.validate()
    n = cfg.n_realizations
    mu = cfg.mu_list[0]
    points = [(L, 0, mu, si, s) for si, s in enumerate(cfg.sigma_w_grid) for L in cfg.L_list]
    tasks = [
        (L, mu, cfg.alpha, s, realization_seed(cfg, si, mi, r), cfg.network_activation)
        for L, mi, mu, si, s in points
        for r in range(n)
    ]
    values = _run_tasks(_entropy_task, tasks, cfg.workers)
    return [
        _ensemble(s, L, mu, "entropy", values[k * n:(k + 1) * n], n, cfg.dump_values)
        for k, (L, mi, mu, si, s) in enumerate(points)
    ]


def run_energy_sweep(cfg: SweepConfig) -> list[EnsembleResult]:
    """Entropy, ``<H>`` and ``<H^2>`` on shared realizations.

    Seeds coincide with :func:`run_entanglement_sweep` for the same config, so a
    grid point present in both sweeps sees identical wavefunctions. Returns three
    results per grid point, quantities ``entropy``, ``H``, ``H2``.
    """
    cfg.validate()
    n = cfg.n_realizations
    points = list(_grid(cfg, enumerate(cfg.mu_list)))
    tasks = [
        (L, mu, cfg.alpha, s, realization_seed(cfg, si, mi, r), cfg.network_activation, cfg.hamiltonian(L))
        for L, mi, mu, si, s in points
        for r in range(n)
    ]
    values = _run_tasks(_energy_task, tasks, cfg.workers)
    out = []
    for k, (L, mi, mu, si, s) in enumerate(points):
        chunk = values[k * n:(k + 1) * n]
        for pos, name in enumerate(("entropy", "H", "H2")):
            col = [None if v is None else v[pos] for v in chunk]
            out.append(_ensemble(s, L, mu, name, col, n, cfg.dump_values))
    return out


def run_meanfield_sweep(cfg: SweepConfig) -> list[MeanFieldPoint]:
    cfg.validate()
    return phase_sweep(cfg.sigma_w_grid, cfg.sigma_b, cfg.meanfield_activation)


# Finite-width cross-check of the mean-field correlation map.


@dataclass(frozen=True)
class CorrelationRow:
    sigma_w: float
    layer: int
    empirical_c: float
    empirical_stderr: float
    meanfield_c: float


def _input_pair(width, correlation, scale, seed):
    """Two vectors with ``|v|^2 / width = scale^2`` and exact mutual correlation."""
    rng = make_rng(seed, [0])
    g1, g2 = rng.standard_normal((2, width))
    e1 = g1 / np.linalg.norm(g1)
    g2 = g2 - (g2 @ e1) * e1
    e2 = g2 / np.linalg.norm(g2)
    norm = scale * math.sqrt(width)
    a = norm * e1
    b = norm * (correlation * e1 + math.sqrt(1 - correlation**2) * e2)
    return np.stack([a, b], axis=1)


def _correlation_task(task):
    width, depth, sigma_w, sigma_b, seed, activation, inputs = task
    net = sample_real_network(width, depth, sigma_w, sigma_b, seed, activation)
    out = []
    for z in preactivations(net, inputs):
        za, zb = z[:, 0], z[:, 1]
        out.append(float(za @ zb / math.sqrt((za @ za) * (zb @ zb))))
    return out


def empirical_correlation(cfg: SweepConfig, sigma_index: int) -> tuple[list[CorrelationRow], MeanFieldPoint]:
    """Layerwise ensemble-mean correlation of two fixed inputs next to the mean-field prediction.

    Inputs are scaled so that the first-layer second moment equals ``q*``, which
    removes the magnitude transient from the comparison.
    """
    sigma_w = cfg.sigma_w_grid[sigma_index]
    depth = cfg.mu_list[0]
    params = MeanFieldParams(sigma_w, cfg.sigma_b, cfg.meanfield_activation)
    point = meanfield_point(params)
    s2 = (point.q_star - cfg.sigma_b**2) / sigma_w**2
    scale = math.sqrt(s2) if s2 > 0 else 1.0
    c0 = cfg.input_correlation
    inputs = _input_pair(cfg.width, c0, scale, derive_seed(cfg.master_seed, [sigma_index, -1]))

    tasks = [
        (cfg.width, depth, sigma_w, cfg.sigma_b, derive_seed(cfg.master_seed, [sigma_index, r]),
         cfg.meanfield_activation, inputs)
        for r in range(cfg.n_realizations)
    ]
    traces = np.array(_run_tasks(_correlation_task, tasks, cfg.workers))
    mean = traces.mean(axis=0)
    stderr = traces.std(axis=0, ddof=1) / math.sqrt(len(traces)) if len(traces) > 1 else np.zeros(depth)

    # layer 1 sees the raw inputs; phi enters from layer 2 on
    q = scale**2 * sigma_w**2 + cfg.sigma_b**2
    c = (scale**2 * sigma_w**2 * c0 + cfg.sigma_b**2) / q
    qa = qb = q
    rows = []
    for layer in range(1, depth + 1):
        if layer > 1:
            qa, qb, c = propagate_pair(qa, qb, c, params)
        rows.append(CorrelationRow(sigma_w, layer, float(mean[layer - 1]), float(stderr[layer - 1]), c))
    return rows, point


def empirical_correlation_check(cfg: SweepConfig) -> list[CorrelationRow]:
    replace(cfg, experiment=Experiment.CORRELATION).validate()
    rows = []
    for si in range(len(cfg.sigma_w_grid)):
        rows.extend(empirical_correlation(cfg, si)[0])
    return rows


def empirical_decay_length(rows, c_star: float, transient: float = 0.2, floor: float = 1e-9) -> float:
    """Decay length fitted to ``|c_emp - c*|`` over the resolvable part of the trace.

    The first ``transient`` fraction of layers is dropped; the fit stops at the
    first layer whose deviation falls below ``max(floor, 3 * stderr)``.
    """
    start = int(math.ceil(transient * len(rows)))
    traj = []
    for row in rows[start:]:
        dev = abs(row.empirical_c - c_star)
        if dev <= max(floor, 3 * row.empirical_stderr):
            break
        traj.append((row.layer, dev))
    return fit_decay_length(traj, floor=floor)
