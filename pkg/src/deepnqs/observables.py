"""J1-J2 Heisenberg chain acting matrix-free on full-basis state vectors."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from .errors import NumericalIntegrityError
from .hilbert import Wavefunction, half_chain_entropy

IMAG_TOLERANCE = 1e-10
MAX_REFERENCE_SPINS = 14
_DENSE_LIMIT = 10


class Boundary(enum.Enum):
    PERIODIC = "periodic"
    OPEN = "open"


@dataclass(frozen=True)
class HamiltonianSpec:
    """``H = J1 sum_<ij> S_i.S_j + J2 sum_<<ij>> S_i.S_j`` with ``S = sigma/2``.

    ``pauli_convention=True`` uses ``S = sigma`` instead, i.e. ``4 H``.
    Bonds are unordered site pairs: on short rings the wraparound duplicates
    (``L = 2`` nearest, ``L = 4`` next-nearest) are counted once and self-bonds
    are dropped.
    """

    L: int
    J1: float = 1.0
    J2: float = 0.2
    boundary: Boundary = Boundary.PERIODIC
    pauli_convention: bool = False

    def __post_init__(self):
        if self.L < 2:
            raise ValueError(f"L must be >= 2, got {self.L}")
        object.__setattr__(self, "boundary", Boundary(self.boundary))

    def bonds(self) -> list[tuple[int, int, float]]:
        """``(i, j, J)`` with ``i < j``, sorted; couplings of coinciding pairs add."""
        pairs: dict[tuple[int, int], float] = {}
        for distance, coupling in ((1, self.J1), (2, self.J2)):
            seen = set()
            for i in range(self.L):
                j = i + distance
                if j >= self.L:
                    if self.boundary is Boundary.OPEN:
                        continue
                    j %= self.L
                key = (min(i, j), max(i, j))
                if i == j or key in seen:
                    continue
                seen.add(key)
                pairs[key] = pairs.get(key, 0.0) + coupling
        return [(i, j, J) for (i, j), J in sorted(pairs.items()) if J != 0]

    @property
    def scale(self) -> float:
        return 4.0 if self.pauli_convention else 1.0


@dataclass(frozen=True)
class GroundStateReference:
    energy: float
    entropy: float
    degenerate: bool


def _vector(spec: HamiltonianSpec, psi) -> np.ndarray:
    v = psi.amplitudes if isinstance(psi, Wavefunction) else np.asarray(psi, dtype=complex)
    if v.shape != (1 << spec.L,):
        raise ValueError(f"state has shape {v.shape}, expected ({1 << spec.L},)")
    return v


def apply_hamiltonian(spec: HamiltonianSpec, psi) -> np.ndarray:
    """``H psi`` accumulated bond by bond in a fixed order.

    For each bond the diagonal ``S^z S^z`` contributes ``+-1/4`` and, where the
    two spins differ, the exchange term moves amplitude ``1/2`` to the
    configuration with both spins flipped.
    """
    v = _vector(spec, psi)
    L = spec.L
    idx = np.arange(1 << L, dtype=np.int64)
    out = np.zeros_like(v)
    for i, j, J in spec.bonds():
        # site 0 is the most significant bit
        bi, bj = L - 1 - i, L - 1 - j
        differ = ((idx >> bi) ^ (idx >> bj)) & 1
        flipped = idx ^ ((1 << bi) | (1 << bj))
        out += J * (0.25 * (1 - 2 * differ) * v + 0.5 * differ * v[flipped])
    if spec.pauli_convention:
        out *= spec.scale
    return out


def energy_expectation(spec: HamiltonianSpec, psi) -> float:
    """``Re <psi|H|psi>`` for a normalized state."""
    v = _vector(spec, psi)
    value = np.vdot(v, apply_hamiltonian(spec, v))
    if abs(value.imag) >= IMAG_TOLERANCE:
        raise NumericalIntegrityError(f"<H> has imaginary part {value.imag:.3e}")
    return float(value.real)


def h_squared_expectation(spec: HamiltonianSpec, psi) -> float:
    """``<psi|H^2|psi> = ||H psi||^2`` (H is Hermitian)."""
    hv = apply_hamiltonian(spec, psi)
    return float(np.vdot(hv, hv).real)


def energy_moments(spec: HamiltonianSpec, psi) -> tuple[float, float]:
    """``(<H>, <H^2>)`` from a single application of ``H``."""
    v = _vector(spec, psi)
    hv = apply_hamiltonian(spec, v)
    e = np.vdot(v, hv)
    if abs(e.imag) >= IMAG_TOLERANCE:
        raise NumericalIntegrityError(f"<H> has imaginary part {e.imag:.3e}")
    return float(e.real), float(np.vdot(hv, hv).real)


def hamiltonian_matrix(spec: HamiltonianSpec) -> np.ndarray:
    """Dense matrix assembled column by column from :func:`apply_hamiltonian`."""
    dim = 1 << spec.L
    h = np.empty((dim, dim), dtype=complex)
    e = np.zeros(dim, dtype=complex)
    for k in range(dim):
        e[k] = 1.0
        h[:, k] = apply_hamiltonian(spec, e)
        e[k] = 0.0
    return h


def exact_spectrum_reference(spec: HamiltonianSpec, degeneracy_tol: float = 1e-9) -> GroundStateReference:
    """Ground energy and half-chain entropy of the ground state.

    Dense diagonalization up to ``L = 10``, Lanczos above. A degenerate ground
    space is flagged; the entropy is then that of whichever ground vector the
    solver returned.
    """
    L = spec.L
    if L > MAX_REFERENCE_SPINS:
        raise ValueError(f"L={L} exceeds the exact-reference guard of {MAX_REFERENCE_SPINS}")
    if L <= _DENSE_LIMIT:
        vals, vecs = np.linalg.eigh(hamiltonian_matrix(spec))
    else:
        dim = 1 << L
        op = LinearOperator((dim, dim), matvec=lambda x: apply_hamiltonian(spec, x.ravel()), dtype=complex)
        vals, vecs = eigsh(op, k=2, which="SA", tol=1e-12)
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
    ground = Wavefunction.normalized(vecs[:, 0])
    entropy = half_chain_entropy(ground) if L % 2 == 0 else float("nan")
    degenerate = len(vals) > 1 and abs(vals[1] - vals[0]) < degeneracy_tol
    return GroundStateReference(float(vals[0]), entropy, bool(degenerate))
