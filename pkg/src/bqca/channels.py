"""Neighborhood-conditioned CPTP maps on density matrices.

A channel holds, for every neighbor configuration ab, a list of single-qubit
effects f_mu^ab.  Lists are zero padded to a common length k and the full
effects on the center site are ``F_mu = sum_ab |ab><ab| (x) f_mu^ab``.  An
optional unitary rule is applied to the center before the effects.
"""
from __future__ import annotations

from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .rules import (I2, P0, P1, PERIODIC, PROJ, SX, BoundaryConditions, Rule, Species, _check_n,
                    neighborhood_operator, rule_matrix)
from .state import DensityMatrix, PureState, State, _apply_op

TP_TOL = 1e-10
CHOI_TOL = 1e-12
MAX_DENSITY_N = 10

NEIGHBORHOODS = ((0, 0), (0, 1), (1, 0), (1, 1))
KET1BRA0 = np.array([[0, 0], [1, 0]], dtype=complex)


class NeighborhoodChannel:
    def __init__(self, effects: Mapping[Tuple[int, int], Sequence[np.ndarray]],
                 pre_unitary: Optional[Rule] = None, name: str = "channel"):
        lists = {}
        for ab in NEIGHBORHOODS:
            ops = [np.asarray(f, dtype=complex) for f in effects.get(ab, [I2])]
            if not ops:
                raise ValueError(f"neighborhood {ab} has no effects")
            for f in ops:
                if f.shape != (2, 2):
                    raise ValueError(f"effect for {ab} must be 2x2, got {f.shape}")
            lists[ab] = ops
        unknown = set(effects) - set(NEIGHBORHOODS)
        if unknown:
            raise ValueError(f"unknown neighborhoods {sorted(unknown)}")
        k = max(len(v) for v in lists.values())
        zero = np.zeros((2, 2), dtype=complex)
        # effects[mu][2a+b]
        self.effects: List[Tuple[np.ndarray, ...]] = [
            tuple(lists[ab][mu] if mu < len(lists[ab]) else zero for ab in NEIGHBORHOODS)
            for mu in range(k)]
        self.pre_unitary = pre_unitary
        self.name = name
        for i, ab in enumerate(NEIGHBORHOODS):
            s = sum(e[i].conj().T @ e[i] for e in self.effects)
            dev = np.max(np.abs(s - I2))
            if dev > TP_TOL:
                raise ValueError(f"effects for neighborhood {ab} are not trace preserving "
                                 f"(deviation {dev:.2e})")

    @property
    def k(self) -> int:
        return len(self.effects)

    def full_effects(self) -> List[np.ndarray]:
        """8x8 effects on (left, center, right), the pre-unitary folded in."""
        pre = rule_matrix(self.pre_unitary) if self.pre_unitary is not None else np.eye(8)
        out = []
        for blocks in self.effects:
            F = sum(np.kron(np.kron(PROJ[a], blocks[2 * a + b]), PROJ[b]) for a, b in NEIGHBORHOODS)
            out.append(F @ pre)
        return out

    def choi(self) -> np.ndarray:
        """Choi matrix of the 3-site action (64x64)."""
        d = 8
        choi = np.zeros((d * d, d * d), dtype=complex)
        for F in self.full_effects():
            v = np.zeros((d * d,), dtype=complex)
            for i in range(d):
                e = np.zeros(d)
                e[i] = 1
                v = v + np.kron(e, F[:, i])
            choi += np.outer(v, v.conj())
        return choi

    def equivalent(self, other: "NeighborhoodChannel", tol: float = CHOI_TOL) -> bool:
        return bool(np.max(np.abs(self.choi() - other.choi())) < tol)

    def __repr__(self):
        return f"NeighborhoodChannel({self.name!r}, k={self.k})"


def _density_tensor(rho: DensityMatrix, max_n: int) -> np.ndarray:
    n = rho.n
    _check_n(n)
    if n > max_n:
        raise ValueError(f"density-matrix engine is capped at n={max_n}, got n={n}")
    return rho.matrix.reshape((2,) * (2 * n))


def _conjugate(t: np.ndarray, op: np.ndarray, sites: List[int], n: int) -> np.ndarray:
    t = _apply_op(t, op, sites)
    return _apply_op(t, op.conj(), [n + s for s in sites])


def _site_map(t: np.ndarray, ch: NeighborhoodChannel, j: int, n: int, bc: BoundaryConditions) -> np.ndarray:
    if ch.pre_unitary is not None:
        op, sites = neighborhood_operator(ch.pre_unitary.blocks, j, n, bc)
        t = _conjugate(t, op, sites, n)
    if ch.k == 1:
        op, sites = neighborhood_operator(ch.effects[0], j, n, bc)
        return _conjugate(t, op, sites, n)
    acc = None
    for blocks in ch.effects:
        op, sites = neighborhood_operator(blocks, j, n, bc)
        term = _conjugate(t, op, sites, n)
        acc = term if acc is None else acc + term
    return acc


def apply_channel_site(rho: DensityMatrix, ch: NeighborhoodChannel, j: int,
                       bc: BoundaryConditions = PERIODIC, max_n: int = MAX_DENSITY_N) -> DensityMatrix:
    n = rho.n
    if not 0 <= j < n:
        raise ValueError(f"site {j} out of range for n={n}")
    t = _site_map(_density_tensor(rho, max_n), ch, j, n, bc)
    return DensityMatrix(n, t.reshape(2 ** n, 2 ** n))


def apply_channel_species(rho: DensityMatrix, ch: NeighborhoodChannel, species: Species,
                          bc: BoundaryConditions = PERIODIC, order=None,
                          max_n: int = MAX_DENSITY_N) -> DensityMatrix:
    n = rho.n
    t = _density_tensor(rho, max_n)
    sites = list(Species(species).sites(n)) if order is None else list(order)
    for j in sites:
        t = _site_map(t, ch, j, n, bc)
    return DensityMatrix(n, t.reshape(2 ** n, 2 ** n))


def channel_step(rho: State, ch: NeighborhoodChannel, bc: BoundaryConditions = PERIODIC,
                 max_n: int = MAX_DENSITY_N) -> DensityMatrix:
    """B sites, then A sites."""
    if isinstance(rho, PureState):
        rho = rho.to_density()
    rho = apply_channel_species(rho, ch, Species.B, bc, max_n=max_n)
    return apply_channel_species(rho, ch, Species.A, bc, max_n=max_n)


def channel_evolve(rho: State, ch: NeighborhoodChannel, bc: BoundaryConditions, steps: int,
                   max_n: int = MAX_DENSITY_N) -> List[DensityMatrix]:
    if isinstance(rho, PureState):
        rho = rho.to_density()
    out = [rho]
    for _ in range(steps):
        rho = channel_step(rho, ch, bc, max_n)
        out.append(rho)
    return out


def lift_rule(rule: Rule) -> NeighborhoodChannel:
    """A unitary rule as a one-effect channel."""
    return NeighborhoodChannel({ab: [rule.block(*ab)] for ab in NEIGHBORHOODS}, name="lifted")


def rule108() -> NeighborhoodChannel:
    return NeighborhoodChannel({}, pre_unitary=Rule(I2, I2, I2, SX), name="rule108")


def mixed_rule(p: float) -> NeighborhoodChannel:
    """Rule 108 for p=0, rule 110 for p=1; p sets the 01-neighborhood decay."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    f1 = P1 + np.sqrt(1 - p) * P0
    f2 = np.sqrt(p) * KET1BRA0
    return NeighborhoodChannel({(0, 1): [f1, f2]}, pre_unitary=Rule(I2, I2, I2, SX),
                               name=f"mixed({p:g})")


def rule110_channel() -> NeighborhoodChannel:
    return NeighborhoodChannel({(0, 1): [P1, KET1BRA0]}, pre_unitary=Rule(I2, I2, I2, SX), name="rule110")


RULE110_TABLE = {(1, 1, 1): 0, (1, 1, 0): 1, (1, 0, 1): 1, (1, 0, 0): 0,
                 (0, 1, 1): 1, (0, 1, 0): 1, (0, 0, 1): 1, (0, 0, 0): 0}


def classical_block_step(bits: Sequence[int], table: Dict[Tuple[int, int, int], int],
                         bc: BoundaryConditions = PERIODIC) -> List[int]:
    """Classical CA in the same B-then-A block order."""
    s = list(bits)
    n = len(s)

    def nb(i):
        if bc.periodic:
            return s[i % n]
        if i < 0:
            return bc.left
        if i >= n:
            return bc.right
        return s[i]

    for parity in (1, 0):
        new = list(s)
        for j in range(parity, n, 2):
            new[j] = table[(nb(j - 1), s[j], nb(j + 1))]
        s = new
    return s
