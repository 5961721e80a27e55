"""CSV emission and the metadata sidecar."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

from .. import __version__
from ..hilbert import BIT_ORDER, PageConvention, page_entropy
from ..meanfield import MeanFieldPoint
from ..network import SPLIT_SELU
from ..seeding import RNG_IDENTIFIER
from .config import SweepConfig

MEANFIELD_COLUMNS = ["sigma_w", "sigma_b", "q_star", "c_star", "chi", "xi_c", "converged"]
ENTANGLEMENT_COLUMNS = ["L", "mu", "alpha", "sigma_w", "mean_entropy", "std_entropy", "n", "failures"]
SCALING_COLUMNS = ["L", "mu", "alpha", "sigma_w", "mean_entropy", "std_entropy", "page_paper", "page_standard", "n"]
ENERGY_COLUMNS = ["L", "mu", "alpha", "sigma_w", "J1", "J2", "boundary", "mean_H", "std_H", "mean_H2", "std_H2", "n"]
CORRELATION_COLUMNS = ["sigma_w", "layer", "empirical_c", "empirical_stderr", "meanfield_c"]

ACTIVATION_DESCRIPTIONS = {
    SPLIT_SELU: "real SELU applied separately to Re and Im",
    "selu_lexicographic": "SELU continued by lexicographic ordering of (Re, Im)",
}


def fmt(value) -> str:
    """Shortest round-trip text for floats; ``inf``/``nan`` spelled out."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def _render(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def meanfield_csv(points: list[MeanFieldPoint]) -> str:
    return _render(MEANFIELD_COLUMNS, (
        [p.sigma_w, p.sigma_b, p.q_star, p.c_star, p.chi, p.xi_c, p.converged] for p in points
    ))


def _stderr_cols(with_stderr, *names):
    return [f"stderr_{n}" for n in names] if with_stderr else []


def entanglement_csv(results, alpha: float, with_stderr: bool = False) -> str:
    cols = ENTANGLEMENT_COLUMNS + _stderr_cols(with_stderr, "entropy")
    rows = []
    for r in results:
        row = [r.L, r.mu, float(alpha), r.sigma_w, r.mean, r.std_dev, r.n, r.failures]
        rows.append(row + ([r.std_error] if with_stderr else []))
    return _render(cols, rows)


def scaling_csv(results, alpha: float, with_stderr: bool = False) -> str:
    cols = SCALING_COLUMNS + _stderr_cols(with_stderr, "entropy")
    rows = []
    for r in results:
        row = [r.L, r.mu, float(alpha), r.sigma_w, r.mean, r.std_dev,
               page_entropy(r.L, PageConvention.FULL_LENGTH),
               page_entropy(r.L, PageConvention.STANDARD_HALF_CHAIN), r.n]
        rows.append(row + ([r.std_error] if with_stderr else []))
    return _render(cols, rows)


def energy_csv(results, cfg: SweepConfig, with_stderr: bool = False) -> str:
    cols = ENERGY_COLUMNS + _stderr_cols(with_stderr, "H", "H2")
    by_point: dict = {}
    for r in results:
        by_point.setdefault(r.grid_point, {})[r.quantity] = r
    rows = []
    for (sigma_w, L, mu), q in by_point.items():
        h, h2 = q["H"], q["H2"]
        row = [L, mu, float(cfg.alpha), sigma_w, float(cfg.J1), float(cfg.J2), cfg.boundary.value,
               h.mean, h.std_dev, h2.mean, h2.std_dev, h.n]
        rows.append(row + ([h.std_error, h2.std_error] if with_stderr else []))
    return _render(cols, rows)


def correlation_csv(rows) -> str:
    return _render(CORRELATION_COLUMNS, (
        [r.sigma_w, r.layer, r.empirical_c, r.empirical_stderr, r.meanfield_c] for r in rows
    ))


def values_csv(results) -> str:
    """Per-realization dump: one row per (grid point, quantity, realization)."""
    rows = []
    for r in results:
        for k, v in enumerate(r.values):
            rows.append([r.L, r.mu, r.sigma_w, r.quantity, k, v])
    return _render(["L", "mu", "sigma_w", "quantity", "index", "value"], rows)


def metadata(cfg: SweepConfig) -> dict:
    spin = "S = sigma (H scaled by 4)" if cfg.pauli_convention else "S = sigma/2"
    return {
        "implementation": f"deepnqs {__version__}",
        "rng": RNG_IDENTIFIER,
        "spin_convention": spin,
        "boundary": cfg.boundary.value,
        "bit_order": BIT_ORDER,
        "activation": cfg.network_activation,
        "activation_convention": ACTIVATION_DESCRIPTIONS[cfg.network_activation],
        "meanfield_activation": cfg.meanfield_activation.value,
        "error_bars": "sample standard deviation across realizations (divisor n-1)",
        "config": {k: v for k, v in cfg.as_dict().items() if k != "workers"},
    }


def write_outputs(path, text: str, cfg: SweepConfig, extra: str | None = None) -> Path:
    """Write ``text`` to ``path`` and the metadata sidecar to ``path + '.meta.json'``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    meta = Path(str(path) + ".meta.json")
    meta.write_text(json.dumps(metadata(cfg), indent=2, sort_keys=True) + "\n")
    if extra is not None:
        Path(str(path) + ".values.csv").write_text(extra)
    return path


def render(cfg: SweepConfig, results) -> str:
    from .config import Experiment

    exp = cfg.experiment
    if exp is Experiment.MEANFIELD:
        return meanfield_csv(results)
    if exp is Experiment.ENTANGLEMENT:
        return entanglement_csv(results, cfg.alpha, cfg.with_stderr)
    if exp is Experiment.SCALING:
        return scaling_csv(results, cfg.alpha, cfg.with_stderr)
    if exp is Experiment.ENERGY:
        return energy_csv(results, cfg, cfg.with_stderr)
    return correlation_csv(results)


def emit(cfg: SweepConfig, results) -> str:
    """Render ``results`` as the experiment's CSV; write it (plus sidecar) if ``cfg.output_path`` is set."""
    text = render(cfg, results)
    if cfg.output_path:
        extra = values_csv(results) if cfg.dump_values and cfg.experiment.value in ("entanglement", "scaling", "energy") else None
        write_outputs(cfg.output_path, text, cfg, extra)
    return text
