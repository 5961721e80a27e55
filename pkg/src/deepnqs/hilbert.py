"""Exact wavefunctions over the full spin basis and their bipartite entanglement.

Basis convention: index ``n`` encodes the configuration with site 0 as the most
significant bit, so reshaping the amplitude vector to ``(2^cut, 2^(L-cut))``
puts the first ``cut`` sites on the row index.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import NormUnderflowError
from .network import DeepNetwork, log_amplitude

BIT_ORDER = "site0_msb"
MAX_ENUMERATED_SPINS = 20
SCHMIDT_CUTOFF = 1e-14

_CHUNK = 1 << 14


@dataclass(frozen=True, eq=False)
class Wavefunction:
    num_spins: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.num_spins,):
            raise ValueError(f"expected {1 << self.num_spins} amplitudes, got shape {amps.shape}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes) -> "Wavefunction":
        amps = np.asarray(amplitudes, dtype=complex)
        num_spins = int(round(math.log2(amps.size)))
        norm = np.linalg.norm(amps)
        if not np.isfinite(norm) or norm == 0:
            raise NormUnderflowError(f"cannot normalize a state with norm {norm}")
        return cls(num_spins, amps / norm)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class EntanglementResult:
    cut: int
    schmidt_spectrum: np.ndarray
    entropy: float


def basis_configurations(num_spins: int, start: int = 0, stop: int | None = None) -> np.ndarray:
    """Rows of 0/1 spins for basis indices ``start..stop-1``."""
    stop = 1 << num_spins if stop is None else stop
    idx = np.arange(start, stop, dtype=np.int64)
    shifts = np.arange(num_spins - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.int8)


def log_amplitudes(net: DeepNetwork) -> np.ndarray:
    L = net.num_spins
    if L > MAX_ENUMERATED_SPINS:
        raise ValueError(f"L={L} exceeds the enumeration guard of {MAX_ENUMERATED_SPINS} spins")
    dim = 1 << L
    out = np.empty(dim, dtype=complex)
    for start in range(0, dim, _CHUNK):
        stop = min(dim, start + _CHUNK)
        out[start:stop] = log_amplitude(net, basis_configurations(L, start, stop))
    return out


def build_wavefunction(net: DeepNetwork) -> Wavefunction:
    """Normalized amplitudes ``exp(log psi_n - max_n Re log psi_n)``."""
    logs = log_amplitudes(net)
    shift = logs.real.max()
    if not np.isfinite(shift):
        raise NormUnderflowError(f"non-finite log-amplitude (max real part {shift})")
    return Wavefunction.normalized(np.exp(logs - shift))


def reduced_spectrum(psi: Wavefunction, cut: int) -> np.ndarray:
    """Eigenvalues of ``rho_A`` for ``A`` = sites ``0..cut-1``, in nonincreasing order."""
    L = psi.num_spins
    if not 1 <= cut <= L - 1:
        raise ValueError(f"cut must lie in [1, {L - 1}], got {cut}")
    m = psi.amplitudes.reshape(1 << cut, 1 << (L - cut))
    return np.linalg.svd(m, compute_uv=False) ** 2


def von_neumann_entropy(spectrum) -> float:
    """``-sum p ln p`` dropping ``p < 1e-14``."""
    p = np.asarray(spectrum, dtype=float)
    if np.any(p < -1e-10):
        raise ValueError(f"spectrum has a negative entry {p.min():.3e}")
    total = p.sum()
    if abs(total - 1.0) > 1e-8:
        raise ValueError(f"spectrum sums to {total!r}, not 1")
    p = p[p >= SCHMIDT_CUTOFF]
    return max(0.0, float(-np.sum(p * np.log(p))))


def entanglement(psi: Wavefunction, cut: int) -> EntanglementResult:
    spec = reduced_spectrum(psi, cut)
    return EntanglementResult(cut, spec, von_neumann_entropy(spec))


def half_chain_entropy(psi: Wavefunction) -> float:
    if psi.num_spins % 2:
        raise ValueError(f"half-chain cut needs even L, got {psi.num_spins}")
    return von_neumann_entropy(reduced_spectrum(psi, psi.num_spins // 2))


class PageConvention(enum.Enum):
    FULL_LENGTH = "full_length"
    STANDARD_HALF_CHAIN = "standard"


def page_entropy(L: int, convention: PageConvention = PageConvention.STANDARD_HALF_CHAIN) -> float:
    """Random-state entropy reference.

    ``FULL_LENGTH`` is ``L ln 2 - 1/2``, with the whole chain length in the
    leading term. ``STANDARD_HALF_CHAIN`` is ``(L/2) ln 2 - 1/2``, the large-dimension Page value for an equal bipartition;
    it is the physically attainable one, since no half-chain entropy can exceed
    ``(L/2) ln 2``.
    """
    convention = PageConvention(convention)
    if L < 2:
        raise ValueError(f"L must be >= 2, got {L}")
    if convention is PageConvention.FULL_LENGTH:
        return L * math.log(2) - 0.5
    if L % 2:
        raise ValueError("the half-chain Page value needs even L")
    return (L // 2) * math.log(2) - 0.5


def haar_random_state(num_spins: int, rng: np.random.Generator) -> Wavefunction:
    """Haar-distributed pure state from a normalized complex Gaussian vector."""
    dim = 1 << num_spins
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return Wavefunction.normalized(v)


def dump_wavefunction(psi: Wavefunction, path) -> None:
    """Text dump: a header line then one ``re im`` pair per basis index."""
    with open(path, "w") as fh:
        fh.write(f"# L={psi.num_spins} bit_order={BIT_ORDER}\n")
        for a in psi.amplitudes:
            fh.write(f"{float(a.real)!r} {float(a.imag)!r}\n")


def load_wavefunction(path) -> Wavefunction:
    with open(path) as fh:
        header = fh.readline().split()
        fields = dict(tok.split("=", 1) for tok in header[1:])
        if fields.get("bit_order") != BIT_ORDER:
            raise ValueError(f"unsupported bit order {fields.get('bit_order')!r}")
        pairs = np.loadtxt(fh, ndmin=2)
    return Wavefunction(int(fields["L"]), pairs[:, 0] + 1j * pairs[:, 1])
