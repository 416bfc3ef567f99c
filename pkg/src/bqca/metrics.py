"""Entanglement and mixedness measures, space-time diagrams, period detection."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence

import numpy as np

from .rules import BoundaryConditions, Rule, step
from .state import DensityMatrix, PureState, State, fidelity_up_to_phase, purity, reduced_density

SY2 = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))
ENTROPY_CUTOFF = 1e-12
SCHMIDT_THRESHOLD = 1e-10


@dataclass
class SpaceTimeDiagram:
    """Rows are time steps (row 0 is the initial state), columns are sites."""
    p1: np.ndarray
    entropy: np.ndarray

    @property
    def n(self) -> int:
        return self.p1.shape[1]

    @property
    def T(self) -> int:
        return self.p1.shape[0]


@dataclass
class MetricSeries:
    """Per-step scalars; entries are None where a metric does not apply."""
    R: List[Optional[float]]
    mixedness: List[float]
    tangle: List[float]

    def __len__(self):
        return len(self.mixedness)


def metric_series(states: Sequence[State], with_tangle: bool = True) -> MetricSeries:
    R = [measure_R(s) if isinstance(s, PureState) else None for s in states]
    mix = [mixedness(s) for s in states]
    tau = [average_tangle(s) if with_tangle else float("nan") for s in states]
    return MetricSeries(R, mix, tau)


def site_reduced(state: State) -> List[np.ndarray]:
    return [reduced_density(state, [j]).matrix for j in range(state.n)]


def entropy_bits(rho: np.ndarray) -> float:
    w = np.linalg.eigvalsh((rho + rho.conj().T) / 2)
    w = w[w > ENTROPY_CUTOFF]
    return float(max(0.0, -np.sum(w * np.log2(w))))


def site_profiles(state: State):
    """Per-site probability of |1> and von Neumann entropy in bits."""
    rhos = site_reduced(state)
    p1 = np.array([float(np.real(r[1, 1])) for r in rhos])
    ent = np.array([entropy_bits(r) for r in rhos])
    return np.clip(p1, 0.0, 1.0), np.clip(ent, 0.0, 1.0)


def space_time(states: Iterable[State]) -> SpaceTimeDiagram:
    rows = [site_profiles(s) for s in states]
    return SpaceTimeDiagram(np.array([r[0] for r in rows]), np.array([r[1] for r in rows]))


def measure_R(state: PureState) -> float:
    """Twice one minus the mean single-site purity: 0 for products, LU invariant."""
    if not isinstance(state, PureState):
        raise TypeError("R is defined for pure states")
    pur = [float(np.real(np.trace(r @ r))) for r in site_reduced(state)]
    return float(2 * (1 - np.mean(pur)))


def _bipartition(n: int, part: Sequence[int]) -> List[int]:
    part = sorted(set(part))
    if not part or len(part) >= n:
        raise ValueError("bipartition must be a proper nonempty subset of the sites")
    if any(not 0 <= s < n for s in part):
        raise ValueError(f"site out of range for n={n}")
    return part


def schmidt_spectrum(state: PureState, part: Sequence[int]) -> np.ndarray:
    """Schmidt coefficients (descending) across ``part`` versus the rest."""
    n = state.n
    part = _bipartition(n, part)
    rest = [s for s in range(n) if s not in part]
    mat = np.transpose(state.tensor(), part + rest).reshape(2 ** len(part), -1)
    return np.linalg.svd(mat, compute_uv=False)


def schmidt_rank(state: PureState, part: Sequence[int], zero_threshold: float = SCHMIDT_THRESHOLD) -> int:
    s = schmidt_spectrum(state, part)
    return int(np.sum(s ** 2 > zero_threshold))


def all_bipartitions(n: int):
    """The 2^(n-1) - 1 nontrivial cuts, each listed once (as the side holding site 0)."""
    others = range(1, n)
    for k in range(0, n - 1):
        for combo in itertools.combinations(others, k):
            yield (0,) + combo


def schmidt_rank_histogram(state: PureState) -> dict:
    counts: dict = {}
    for part in all_bipartitions(state.n):
        r = schmidt_rank(state, part)
        counts[r] = counts.get(r, 0) + 1
    return dict(sorted(counts.items()))


def concurrence_2q(rho: np.ndarray) -> float:
    """Wootters concurrence, clamped at 0.

    With rho = A A^dag the square roots of the eigenvalues of rho rho~ are the
    singular values of the symmetric matrix A^T (Y x Y) A.  Taking them from an
    SVD avoids the sqrt of round-off that eigvals(rho rho~) would suffer
    (1e-16 noise there becomes 1e-8 in lambda).
    """
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    a = v * np.sqrt(np.clip(w, 0, None))
    lam = np.zeros(4)
    sv = np.linalg.svd(a.T @ SY2 @ a, compute_uv=False)
    lam[:len(sv)] = np.sort(sv)[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def tangle(state: State, i: int, j: int) -> float:
    """Squared concurrence of the reduced state of sites i and j."""
    if i == j:
        raise ValueError("tangle needs two distinct sites")
    rho = reduced_density(state, [i, j]).matrix
    return float(min(1.0, concurrence_2q(rho) ** 2))


def average_tangle(state: State) -> float:
    pairs = list(itertools.combinations(range(state.n), 2))
    return float(np.mean([tangle(state, i, j) for i, j in pairs]))


def mixedness(rho) -> float:
    if isinstance(rho, PureState):
        return 0.0
    if not isinstance(rho, DensityMatrix):
        rho = DensityMatrix(int(np.log2(len(rho))), rho)
    return float(1 - purity(rho))


def detect_period(rule: Rule, initial: PureState, bc: BoundaryConditions,
                  max_steps: int = 200, tol: float = 1e-8) -> Optional[int]:
    """Smallest t >= 1 returning to the initial state up to a global phase."""
    state = initial
    for t in range(1, max_steps + 1):
        state = step(state, rule, bc)
        if fidelity_up_to_phase(initial, state) > 1 - tol:
            return t
    return None
