"""Three-cell rules and block-partitioned updates at the matrix level.

A rule ``M(u00, u01, u10, u11)`` applies ``u_ab`` to the center cell when the
left neighbor is ``a`` and the right neighbor is ``b``. One BQCA step updates
the odd sites (species B) and then the even sites (species A).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, List, Sequence, Tuple

import numpy as np

from .state import DensityMatrix, PureState, State, _apply_op

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
P0 = np.array([[1, 0], [0, 0]], dtype=complex)
P1 = np.array([[0, 0], [0, 1]], dtype=complex)
PROJ = (P0, P1)

UNITARY_TOL = 1e-12


def bloch_axis(theta: float, phi: float) -> np.ndarray:
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


def pauli_dot(axis: Sequence[float]) -> np.ndarray:
    x, y, z = axis
    return x * SX + y * SY + z * SZ


def exp_pauli(angle: float, axis: Sequence[float]) -> np.ndarray:
    """``exp(i * angle * sigma . axis)`` for a unit axis."""
    axis = np.asarray(axis, dtype=float)
    norm = np.linalg.norm(axis)
    if abs(norm - 1) > 1e-12:
        raise ValueError(f"axis must be a unit vector, |axis| = {norm}")
    return np.cos(angle) * I2 + 1j * np.sin(angle) * pauli_dot(axis)


def rotation(gamma: float, theta: float = 0.0, phi: float = 0.0) -> np.ndarray:
    """``exp(i gamma sigma.n)`` with n at polar angle theta, azimuth phi."""
    return exp_pauli(gamma, bloch_axis(theta, phi))


def rx(gamma: float) -> np.ndarray:
    return exp_pauli(gamma, (1, 0, 0))


def rz(gamma: float) -> np.ndarray:
    return exp_pauli(gamma, (0, 0, 1))


def is_unitary(u: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)


class Species(enum.IntEnum):
    A = 0  # even sites
    B = 1  # odd sites

    def sites(self, n: int) -> range:
        return range(int(self), n, 2)

    @property
    def other(self) -> "Species":
        return Species(1 - int(self))


@dataclass(frozen=True)
class BoundaryConditions:
    kind: str = "periodic"
    left: int = 0
    right: int = 0

    def __post_init__(self):
        if self.kind not in ("periodic", "fixed"):
            raise ValueError(f"unknown boundary kind {self.kind!r}")
        if self.left not in (0, 1) or self.right not in (0, 1):
            raise ValueError("fixed boundary values must be 0 or 1")

    @property
    def periodic(self) -> bool:
        return self.kind == "periodic"

    @classmethod
    def fixed(cls, left: int = 0, right: int = 0) -> "BoundaryConditions":
        return cls("fixed", left, right)

    def __str__(self):
        return "periodic" if self.periodic else f"fixed({self.left},{self.right})"


PERIODIC = BoundaryConditions("periodic")


class Rule:
    """Four 2x2 blocks indexed by the (left, right) neighbor values.

    Blocks may be any U(2) matrices; only the pulse compiler insists on SU(2).
    """

    def __init__(self, u00, u01, u10, u11, check: bool = True):
        blocks = tuple(np.asarray(u if u is not None else I2, dtype=complex) for u in (u00, u01, u10, u11))
        for name, u in zip(("u00", "u01", "u10", "u11"), blocks):
            if np.ndim(u) == 0:
                continue
            if u.shape != (2, 2):
                raise ValueError(f"{name} must be 2x2, got shape {u.shape}")
        blocks = tuple(u * I2 if np.ndim(u) == 0 else u for u in blocks)
        if check:
            for name, u in zip(("u00", "u01", "u10", "u11"), blocks):
                if not is_unitary(u):
                    raise ValueError(f"{name} is not unitary")
        self.blocks: Tuple[np.ndarray, ...] = blocks

    @classmethod
    def from_rotations(cls, *specs: Tuple[float, float, float]) -> "Rule":
        """Build from four (gamma, theta, phi) triples."""
        if len(specs) != 4:
            raise ValueError("need four (gamma, theta, phi) triples")
        return cls(*(rotation(*s) for s in specs))

    def block(self, a: int, b: int) -> np.ndarray:
        return self.blocks[2 * a + b]

    @property
    def symmetric(self) -> bool:
        return bool(np.allclose(self.blocks[1], self.blocks[2], atol=1e-12, rtol=0))

    def __repr__(self):
        return "Rule(" + ", ".join(np.array2string(u, precision=3) for u in self.blocks) + ")"


def rule_matrix(rule: Rule) -> np.ndarray:
    """8x8 operator on (left, center, right)."""
    m = np.zeros((8, 8), dtype=complex)
    for a in (0, 1):
        for b in (0, 1):
            m += np.kron(np.kron(PROJ[a], rule.block(a, b)), PROJ[b])
    return m


def neighborhood_operator(blocks: Sequence[np.ndarray], j: int, n: int,
                          bc: BoundaryConditions) -> Tuple[np.ndarray, List[int]]:
    """Operator and site list updating site ``j`` with ``blocks[2a+b]``.

    Missing neighbors under fixed boundaries become frozen classical values, so
    the returned operator acts on two sites (or one, for n=2) instead of three.
    The blocks need not be unitary; the channel engine reuses this for effects.
    """
    if bc.periodic:
        left, right = (j - 1) % n, (j + 1) % n
    else:
        left = j - 1 if j > 0 else None
        right = j + 1 if j < n - 1 else None
    if left is not None and left == right:
        # n=2 on a ring: one qubit plays both neighbors
        op = sum(np.kron(PROJ[a], blocks[3 * a]) for a in (0, 1))
        return op, [left, j]
    sites, op = [], None
    if left is None and right is None:
        return blocks[2 * bc.left + bc.right], [j]
    if left is None:
        op = sum(np.kron(blocks[2 * bc.left + b], PROJ[b]) for b in (0, 1))
        sites = [j, right]
    elif right is None:
        op = sum(np.kron(PROJ[a], blocks[2 * a + bc.right]) for a in (0, 1))
        sites = [left, j]
    else:
        op = sum(np.kron(np.kron(PROJ[a], blocks[2 * a + b]), PROJ[b]) for a in (0, 1) for b in (0, 1))
        sites = [left, j, right]
    return op, sites


def species_operators(rule: Rule, species: Species, n: int,
                      bc: BoundaryConditions) -> Iterator[Tuple[np.ndarray, List[int]]]:
    for j in species.sites(n):
        yield neighborhood_operator(rule.blocks, j, n, bc)


def _check_n(n: int) -> None:
    if n < 2 or n % 2:
        raise ValueError(f"BQCA updates need an even number of sites >= 2, got n={n}")


def _apply_to_tensor(tensor: np.ndarray, ops, n: int, density: bool) -> np.ndarray:
    for op, sites in ops:
        tensor = _apply_op(tensor, op, sites)
        if density:
            tensor = _apply_op(tensor, op.conj(), [n + s for s in sites])
    return tensor


def apply_species(state: State, rule: Rule, species: Species, bc: BoundaryConditions = PERIODIC) -> State:
    """Update every site of ``species`` (ascending order; the updates commute)."""
    n = state.n
    _check_n(n)
    ops = species_operators(rule, Species(species), n, bc)
    if isinstance(state, PureState):
        out = _apply_to_tensor(state.tensor(), ops, n, density=False)
        return PureState(n, out.reshape(-1))
    out = _apply_to_tensor(state.matrix.reshape((2,) * (2 * n)), ops, n, density=True)
    return DensityMatrix(n, out.reshape(2 ** n, 2 ** n))


def step(state: State, rule: Rule, bc: BoundaryConditions = PERIODIC) -> State:
    """One full update ``M = M^A M^B``: species B first, then A."""
    state = apply_species(state, rule, Species.B, bc)
    return apply_species(state, rule, Species.A, bc)


def evolve(state: State, rule: Rule, bc: BoundaryConditions, steps: int) -> List[State]:
    """Trajectory ``[psi(0), ..., psi(steps)]``."""
    out = [state]
    for _ in range(steps):
        state = step(state, rule, bc)
        out.append(state)
    return out


def reflect(state: PureState) -> PureState:
    """Mirror a ring about site 0, j <-> -j mod n.

    This keeps every site on its own species, so it commutes with a full step
    of any left/right symmetric rule.  (``j <-> n-1-j`` would swap A and B.)
    """
    n = state.n
    perm = [(-j) % n for j in range(n)]
    return PureState(n, np.transpose(state.tensor(), perm).reshape(-1))


# Named rules. Transport rule: conditional bit flips, 11 -> -1.
M1 = Rule(I2, rx(-np.pi / 2), rx(-np.pi / 2), rx(-np.pi / 2))
M2 = Rule(I2, rx(-np.pi / 4), rx(-np.pi / 4), rx(-np.pi / 4))
TRANSPORT_RULE = Rule(I2, rx(-np.pi / 2), rx(-np.pi / 2), rx(-np.pi))
CLUSTER_RULE = Rule(I2, rz(-np.pi / 4), rz(-np.pi / 4), rz(-np.pi / 2))
RULE108 = Rule(I2, I2, I2, SX)

PRESETS = {
    "M1": M1,
    "M2": M2,
    "transport-rule": TRANSPORT_RULE,
    "cluster-rule": CLUSTER_RULE,
    "rule108": RULE108,
}


def preset(name: str) -> Rule:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown rule preset {name!r}; known: {sorted(PRESETS)}") from None
