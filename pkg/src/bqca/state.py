"""Dense n-qubit registers.

Site 0 is the leftmost cell and the most significant bit of the basis index,
so basis index ``b = sum_j s_j * 2**(n-1-j)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

NORM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class PureState:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != 2 ** self.n:
            raise ValueError(f"expected {2 ** self.n} amplitudes for n={self.n}, got {amps.shape[0]}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def to_density(self) -> "DensityMatrix":
        return DensityMatrix(self.n, np.outer(self.amplitudes, self.amplitudes.conj()))

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.n)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    n: int
    matrix: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.matrix, dtype=complex)
        d = 2 ** self.n
        if rho.shape != (d, d):
            raise ValueError(f"expected a {d}x{d} matrix for n={self.n}, got {rho.shape}")
        object.__setattr__(self, "matrix", rho)

    @property
    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def is_valid(self, tol: float = NORM_TOL, psd_tol: float = 1e-9) -> bool:
        """Hermiticity, unit trace and positivity (the expensive part, so on demand only)."""
        rho = self.matrix
        if np.max(np.abs(rho - rho.conj().T)) > tol:
            return False
        if abs(np.trace(rho) - 1) > tol:
            return False
        return bool(np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() >= -psd_tol)


State = Union[PureState, DensityMatrix]


def init_basis(n: int, bits: Sequence[int]) -> PureState:
    if len(bits) != n:
        raise ValueError(f"got {len(bits)} bits for n={n}")
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bits must be 0 or 1")
    index = 0
    for b in bits:
        index = 2 * index + int(b)
    amps = np.zeros(2 ** n, dtype=complex)
    amps[index] = 1.0
    return PureState(n, amps)


def init_product(n: int, site_states: Sequence[Sequence[complex]]) -> PureState:
    if len(site_states) != n:
        raise ValueError(f"got {len(site_states)} site states for n={n}")
    amps = np.ones(1, dtype=complex)
    for j, s in enumerate(site_states):
        v = np.asarray(s, dtype=complex).reshape(-1)
        if v.shape != (2,):
            raise ValueError(f"site {j}: expected a 2-vector")
        if abs(np.vdot(v, v).real - 1) > NORM_TOL:
            raise ValueError(f"site {j}: state is not normalized")
        amps = np.kron(amps, v)
    return PureState(n, amps)


KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)

_TOKENS = {"0": KET0, "1": KET1, "+": KET_PLUS, "-": KET_MINUS}


def from_tokens(tokens: str) -> PureState:
    """Product state from a string such as ``"+000000001"``."""
    try:
        sites = [_TOKENS[c] for c in tokens]
    except KeyError as exc:
        raise ValueError(f"unknown site token {exc.args[0]!r}; use 0, 1, + or -") from None
    return init_product(len(sites), sites)


def _apply_op(tensor: np.ndarray, op: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract ``op`` (2^k x 2^k) into the given axes of a (2,)*m(+batch) tensor."""
    k = len(axes)
    op_t = op.reshape((2,) * (2 * k))
    out = np.tensordot(op_t, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def _check_sites(n: int, sites: Sequence[int], op: np.ndarray) -> None:
    if len(set(sites)) != len(sites):
        raise ValueError(f"sites must be distinct, got {list(sites)}")
    for s in sites:
        if not 0 <= s < n:
            raise ValueError(f"site {s} out of range for n={n}")
    d = 2 ** len(sites)
    if op.shape != (d, d):
        raise ValueError(f"operator shape {op.shape} does not act on {len(sites)} sites")


def apply_local(state: State, op: np.ndarray, sites: Sequence[int]) -> State:
    """Apply ``op`` on ``sites`` (in that tensor order); conjugates density matrices."""
    op = np.asarray(op, dtype=complex)
    sites = list(sites)
    _check_sites(state.n, sites, op)
    n = state.n
    if isinstance(state, PureState):
        out = _apply_op(state.tensor(), op, sites)
        return PureState(n, out.reshape(-1))
    rho = state.matrix.reshape((2,) * (2 * n))
    rho = _apply_op(rho, op, sites)
    rho = _apply_op(rho, op.conj(), [n + s for s in sites])
    return DensityMatrix(n, rho.reshape(2 ** n, 2 ** n))


def reduced_density(state: State, keep: Sequence[int]) -> DensityMatrix:
    """Partial trace onto ``keep``; the result is ordered as ``keep`` is given."""
    keep = list(keep)
    if not keep:
        raise ValueError("keep must name at least one site")
    if len(set(keep)) != len(keep):
        raise ValueError("keep sites must be distinct")
    n = state.n
    for s in keep:
        if not 0 <= s < n:
            raise ValueError(f"site {s} out of range for n={n}")
    rest = [s for s in range(n) if s not in keep]
    k = len(keep)
    if isinstance(state, PureState):
        psi = np.transpose(state.tensor(), keep + rest).reshape(2 ** k, -1)
        return DensityMatrix(k, psi @ psi.conj().T)
    rho = state.matrix.reshape((2,) * (2 * n))
    rho = np.transpose(rho, keep + rest + [n + s for s in keep] + [n + s for s in rest])
    m = 2 ** (n - k)
    rho = rho.reshape(2 ** k, m, 2 ** k, m)
    return DensityMatrix(k, np.einsum("ajbj->ab", rho))


def fidelity_up_to_phase(a: PureState, b: PureState) -> float:
    if a.n != b.n:
        raise ValueError(f"qubit counts differ: {a.n} vs {b.n}")
    return float(min(1.0, abs(np.vdot(a.amplitudes, b.amplitudes))))


def purity(rho: DensityMatrix) -> float:
    m = rho.matrix
    return float(np.real(np.sum(m * m.T)))
