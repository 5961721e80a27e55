"""Sweep configuration and its flat ``key = value`` file format.

Example file::

    # entanglement sweep at desk scale
    experiment = entanglement
    sigma_w_grid = 0.5:3.0:0.25     # start:stop:step, stop inclusive
    L_list = 10
    mu_list = 5, 10, 20
    alpha = 1.0
    n_realizations = 200
    master_seed = 1234
    output_path = out/entanglement.csv

Lists are comma separated. Keys mirror the fields of :class:`SweepConfig`.
"""

from __future__ import annotations

import configparser
import dataclasses
import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..hilbert import MAX_ENUMERATED_SPINS
from ..meanfield import ActivationKind
from ..network import COMPLEX_ACTIVATIONS, SPLIT_SELU
from ..observables import Boundary, HamiltonianSpec


class Experiment(enum.Enum):
    MEANFIELD = "meanfield"
    ENTANGLEMENT = "entanglement"
    SCALING = "scaling"
    ENERGY = "energy"
    CORRELATION = "correlation"


REFERENCE_REALIZATIONS = 1000


@dataclass
class SweepConfig:
    experiment: Experiment = Experiment.ENTANGLEMENT
    sigma_w_grid: list[float] = field(default_factory=lambda: [1.0])
    L_list: list[int] = field(default_factory=lambda: [10])
    mu_list: list[int] = field(default_factory=lambda: [20])
    alpha: float = 1.0
    n_realizations: int = 200
    master_seed: int = 0
    sigma_b: float = 0.01
    J1: float = 1.0
    J2: float = 0.2
    boundary: Boundary = Boundary.PERIODIC
    pauli_convention: bool = False
    output_path: str | None = None
    workers: int = 1
    with_stderr: bool = False
    dump_values: bool = False
    network_activation: str = SPLIT_SELU
    # mean-field and correlation-check only
    meanfield_activation: ActivationKind = ActivationKind.TANH
    width: int = 1024
    input_correlation: float = 0.5

    def __post_init__(self):
        self.experiment = Experiment(self.experiment)
        self.boundary = Boundary(self.boundary)
        self.meanfield_activation = ActivationKind(self.meanfield_activation)

    def validate(self) -> "SweepConfig":
        if not self.sigma_w_grid:
            raise ValueError("sigma_w_grid is empty")
        if any(s <= 0 for s in self.sigma_w_grid):
            raise ValueError("sigma_w values must be positive")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")
        if self.sigma_b < 0:
            raise ValueError("sigma_b must be nonnegative")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.experiment in (Experiment.MEANFIELD, Experiment.CORRELATION):
            if self.experiment is Experiment.CORRELATION and self.width < 64:
                raise ValueError(f"width {self.width} is below 64; mean-field comparison is meaningless")
            if not self.mu_list or any(m < 1 for m in self.mu_list):
                raise ValueError("mu_list must hold positive depths")
            return self
        if not self.L_list:
            raise ValueError("L_list is empty")
        for L in self.L_list:
            if L < 2 or L % 2 or L > MAX_ENUMERATED_SPINS:
                raise ValueError(f"L={L} must be even and within [2, {MAX_ENUMERATED_SPINS}]")
        if not self.mu_list or any(m < 1 for m in self.mu_list):
            raise ValueError("mu_list must hold positive depths")
        if not self.alpha > 0 or any(round(self.alpha * L) < 1 for L in self.L_list):
            raise ValueError(f"alpha={self.alpha} gives an empty hidden layer")
        if self.network_activation not in COMPLEX_ACTIVATIONS:
            raise ValueError(f"network_activation must be one of {COMPLEX_ACTIVATIONS}")
        return self

    def hamiltonian(self, L: int) -> HamiltonianSpec:
        return HamiltonianSpec(L, self.J1, self.J2, self.boundary, self.pauli_convention)

    def as_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            out[f.name] = v.value if isinstance(v, enum.Enum) else v
        return out


def parse_grid(text: str) -> list[float]:
    """``"a, b, c"`` or ``"start:stop:step"`` (stop inclusive)."""
    text = text.strip()
    if ":" in text:
        start, stop, step = (float(t) for t in text.split(":"))
        if step <= 0:
            raise ValueError(f"grid step must be positive in {text!r}")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + k * step, 12) for k in range(n)]
    return [float(t) for t in text.split(",") if t.strip()]


def _parse_ints(text: str) -> list[int]:
    return [int(v) for v in parse_grid(text)]


def _parse_bool(text: str) -> bool:
    return configparser.ConfigParser.BOOLEAN_STATES[text.strip().lower()]


_PARSERS = {
    "sigma_w_grid": parse_grid,
    "L_list": _parse_ints,
    "mu_list": _parse_ints,
    "alpha": float,
    "n_realizations": int,
    "master_seed": int,
    "sigma_b": float,
    "J1": float,
    "J2": float,
    "boundary": str,
    "pauli_convention": _parse_bool,
    "output_path": str,
    "workers": int,
    "with_stderr": _parse_bool,
    "dump_values": _parse_bool,
    "network_activation": str,
    "meanfield_activation": str,
    "width": int,
    "input_correlation": float,
    "experiment": str,
}


def parse_config_text(text: str, **overrides) -> SweepConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    parser.optionxform = str  # keep L_list, J1 case
    parser.read_string("[sweep]\n" + text)
    values = {}
    for key, raw in parser["sweep"].items():
        if key not in _PARSERS:
            raise ValueError(f"unknown config key {key!r}")
        values[key] = _PARSERS[key](raw)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return SweepConfig(**values)


def load_config(path=None, **overrides) -> SweepConfig:
    text = Path(path).read_text() if path is not None else ""
    return parse_config_text(text, **overrides)
