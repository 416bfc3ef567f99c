"""Lowering rules to Ising pulse schedules.

A schedule is a time-ordered list of three kinds of element:

* ``Ising(t, g1, g2)`` -- evolve under ``sum g_b sigma_z sigma_z`` over the bonds
  for a dwell ``t``.  ``g1`` couples even-odd bonds (2j, 2j+1), ``g2`` odd-even
  bonds (2j+1, 2j+2); both default to the schedule coupling ``g``.
* ``Rotation(species, axis, angle)`` -- ``exp(-i angle sigma.axis)`` on every
  site of one species in parallel.
* ``EndRotation(end, angle)`` -- ``exp(-i angle sigma_z)`` on site 0
  (``end="left"``) or site n-1 (``end="right"``).

Angles follow the Hamiltonian convention ``exp(-i H t)``; a rule block written
``exp(i gamma sigma.n)`` therefore appears as a rotation by ``-gamma``.
Single-qubit pulses take no time, so ``total_time`` is the summed Ising dwell.
"""
from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from .rules import (PERIODIC, BoundaryConditions, Rule, Species, bloch_axis,
                    exp_pauli, species_operators, _apply_to_tensor, _check_n)
from .state import PureState, _apply_op

PI = np.pi
SU2_TOL = 1e-10
X_AXIS, Y_AXIS, Z_AXIS = (1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)


@dataclass(frozen=True)
class Ising:
    t: float
    g1: Optional[float] = None
    g2: Optional[float] = None

    def __post_init__(self):
        if self.t < 0:
            raise ValueError(f"negative Ising dwell {self.t}")


@dataclass(frozen=True)
class Rotation:
    species: Species
    axis: Tuple[float, float, float]
    angle: float

    def __post_init__(self):
        axis = tuple(float(a) for a in self.axis)
        if abs(np.linalg.norm(axis) - 1) > 1e-12:
            raise ValueError(f"rotation axis {axis} is not normalized")
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "species", Species(self.species))

    def matrix(self) -> np.ndarray:
        return exp_pauli(-self.angle, self.axis)


@dataclass(frozen=True)
class EndRotation:
    end: str
    angle: float

    def __post_init__(self):
        if self.end not in ("left", "right"):
            raise ValueError(f"end must be 'left' or 'right', got {self.end!r}")

    def matrix(self) -> np.ndarray:
        return exp_pauli(-self.angle, Z_AXIS)


PulseElement = Union[Ising, Rotation, EndRotation]


@dataclass
class PulseSchedule:
    elements: List[PulseElement] = field(default_factory=list)
    g: float = 1.0
    bc: BoundaryConditions = PERIODIC

    @property
    def total_time(self) -> float:
        return float(sum(e.t for e in self.elements if isinstance(e, Ising)))

    @property
    def ising_count(self) -> int:
        return sum(isinstance(e, Ising) for e in self.elements)

    def __add__(self, other: "PulseSchedule") -> "PulseSchedule":
        if other.g != self.g or other.bc != self.bc:
            raise ValueError("cannot concatenate schedules with different coupling or boundaries")
        return PulseSchedule(self.elements + other.elements, self.g, self.bc)

    # -- serialization -------------------------------------------------
    def to_dict(self) -> dict:
        elems = []
        for e in self.elements:
            if isinstance(e, Ising):
                d = {"type": "ising", "t": e.t}
                if e.g1 is not None:
                    d.update(g1=e.g1, g2=e.g2)
            elif isinstance(e, Rotation):
                d = {"type": "rotation", "species": e.species.name, "axis": list(e.axis), "angle": e.angle}
            else:
                d = {"type": "end_rotation", "end": e.end, "angle": e.angle}
            elems.append(d)
        bc = {"kind": self.bc.kind}
        if not self.bc.periodic:
            bc.update(left=self.bc.left, right=self.bc.right)
        return {"g": self.g, "boundary": bc, "total_time": self.total_time, "elements": elems}

    @classmethod
    def from_dict(cls, d: dict) -> "PulseSchedule":
        elems: List[PulseElement] = []
        for e in d["elements"]:
            kind = e["type"]
            if kind == "ising":
                elems.append(Ising(e["t"], e.get("g1"), e.get("g2")))
            elif kind == "rotation":
                elems.append(Rotation(Species[e["species"]], tuple(e["axis"]), e["angle"]))
            elif kind == "end_rotation":
                elems.append(EndRotation(e["end"], e["angle"]))
            else:
                raise ValueError(f"unknown schedule element type {kind!r}")
        b = d.get("boundary", {"kind": "periodic"})
        bc = BoundaryConditions(b["kind"], b.get("left", 0), b.get("right", 0))
        return cls(elems, float(d.get("g", 1.0)), bc)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def bracket_time(x: float, g: float = 1.0) -> float:
    """Smallest ``x + k pi/g >= 0`` with integer ``k >= 0``."""
    if g <= 0:
        raise ValueError("coupling g must be positive")
    period = PI / g
    if x >= 0:
        return float(x)
    k = np.ceil(-x / period)
    t = x + k * period
    return float(max(t, 0.0))


# -- rotation specs ----------------------------------------------------


@dataclass(frozen=True)
class RotationSpec:
    """``u = exp(i gamma sigma.n)`` with n at polar angle theta, azimuth phi."""
    gamma: float
    theta: float = 0.0
    phi: float = 0.0

    @property
    def axis(self) -> np.ndarray:
        return bloch_axis(self.theta, self.phi)

    @property
    def half_axis(self) -> np.ndarray:
        """Axis m at half the polar angle; the pi rotation about m maps z onto n."""
        return bloch_axis(self.theta / 2, self.phi)

    def matrix(self) -> np.ndarray:
        return exp_pauli(self.gamma, self.axis)

    def canonical(self) -> "RotationSpec":
        """Same unitary with gamma in [0, pi] (flip the axis if needed)."""
        g = (self.gamma + PI) % (2 * PI) - PI
        if g >= 0:
            return RotationSpec(float(g), self.theta, self.phi)
        return RotationSpec(float(-g), PI - self.theta, self.phi + PI)

    @property
    def is_identity(self) -> bool:
        return abs(np.sin(self.gamma)) < 1e-14 and np.cos(self.gamma) > 0

    @classmethod
    def from_matrix(cls, u: np.ndarray) -> "RotationSpec":
        u = np.asarray(u, dtype=complex)
        check_su2(u)
        c = float(np.clip(np.real(np.trace(u)) / 2, -1, 1))
        # u = cos(g) 1 + i sin(g) (n.sigma)
        v = np.array([np.imag(u[0, 1] + u[1, 0]) / 2,
                      np.real(u[0, 1] - u[1, 0]) / 2,
                      np.imag(u[0, 0] - u[1, 1]) / 2])
        s = float(np.linalg.norm(v))
        gamma = float(np.arctan2(s, c))
        if s < 1e-15:
            return cls(gamma, 0.0, 0.0)
        nx, ny, nz = v / s
        return cls(gamma, float(np.arccos(np.clip(nz, -1, 1))), float(np.arctan2(ny, nx)))

    def sqrt(self, prefer: Optional["RotationSpec"] = None) -> "RotationSpec":
        """Principal square root: half the canonical angle, in [0, pi/2].

        The root of -1 is any pi/2 rotation; ``prefer`` picks its axis.
        """
        c = self.canonical()
        if prefer is not None and abs(np.sin(c.gamma)) < 1e-12:
            p = prefer.canonical()
            return RotationSpec(c.gamma / 2, p.theta, p.phi)
        return RotationSpec(c.gamma / 2, c.theta, c.phi)

    def inverse(self) -> "RotationSpec":
        return RotationSpec(-self.gamma, self.theta, self.phi)


def check_su2(u: np.ndarray) -> None:
    if u.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    if np.max(np.abs(u.conj().T @ u - np.eye(2))) > SU2_TOL:
        raise ValueError("block is not unitary")
    if abs(np.linalg.det(u) - 1) > SU2_TOL:
        raise ValueError(f"block is not in SU(2) (det = {np.linalg.det(u):.6g})")


def _as_spec(u) -> RotationSpec:
    if isinstance(u, RotationSpec):
        return u
    return RotationSpec.from_matrix(np.asarray(u))


def _rule_specs(rule) -> Tuple[RotationSpec, ...]:
    if isinstance(rule, Rule):
        return tuple(RotationSpec.from_matrix(b) for b in rule.blocks)
    specs = tuple(_as_spec(u) for u in rule)
    if len(specs) != 4:
        raise ValueError("a rule needs four blocks")
    return specs


# -- elementary rules --------------------------------------------------


class _Builder:
    """Accumulates elements for one species update."""

    def __init__(self, species: Species, g: float, bc: BoundaryConditions, flipped: bool = False):
        self.species = Species(species)
        self.g = g
        self.bc = bc
        # neighbors conjugated by sigma_x: the virtual boundary cell flips too
        self.flipped = flipped
        self.elements: List[PulseElement] = []

    def rot(self, axis, angle: float) -> None:
        """Append ``exp(-i angle sigma.axis)`` on the updated species."""
        self.elements.append(Rotation(self.species, tuple(axis), float(angle)))

    def ising(self, x: float, g1: Optional[float] = None, g2: Optional[float] = None) -> None:
        t = bracket_time(x, self.g) if g1 is None else x
        self.elements.append(Ising(t, g1, g2))
        if not self.bc.periodic:
            # the missing bond to the virtual cell is odd-even, so it carries g2
            g_end = self.g if g2 is None else g2
            if self.species is Species.A:
                end, sigma = "left", self.bc.left
            else:
                end, sigma = "right", self.bc.right
            if self.flipped:
                sigma = 1 - sigma
            self.elements.append(EndRotation(end, (-1) ** sigma * g_end * t))

    def schedule(self) -> PulseSchedule:
        return PulseSchedule(self.elements, self.g, self.bc)


def compile_sum_rule(u, species: Species, g: float = 1.0, bc: BoundaryConditions = PERIODIC,
                     flipped: bool = False) -> PulseSchedule:
    """``M(1, u, u, u^2)`` on one species: a single Ising dwell of ``[gamma/2g]``.

    With ``flipped`` the other species is conjugated by sigma_x, which turns
    the rule into ``M(u^2, u, u, 1)``.
    """
    spec = _as_spec(u).canonical()
    b = _Builder(species, g, bc, flipped)
    other = Species(species).other
    if flipped:
        b.elements.append(Rotation(other, X_AXIS, PI / 2))
    m = spec.half_axis
    b.rot(m, -PI / 2)
    b.rot(Z_AXIS, -spec.gamma)
    b.ising(spec.gamma / (2 * g))
    b.rot(m, PI / 2)
    if flipped:
        b.elements.append(Rotation(other, X_AXIS, PI / 2))
    return b.schedule()


def compile_pair_rule(u, species: Species, g: float = 1.0, bc: BoundaryConditions = PERIODIC) -> PulseSchedule:
    """``M(1, u, u, 1)`` on one species with four Ising dwells.

    Dwell arguments are gamma/4g, -pi/4g, -3pi/4g, gamma/4g in time order.
    The single-qubit pulses between them carry the opposite sign of gamma and a
    closing ``exp(i pi/2 sigma_z)``; without those two changes the sequence
    produces ``exp(-i pi/2 sigma_z) M(1, u^-1, u^-1, 1)`` instead.
    """
    spec = _as_spec(u).canonical()
    gm = spec.gamma
    b = _Builder(species, g, bc)
    m = spec.half_axis
    ez = lambda a: b.rot(Z_AXIS, -a)  # noqa: E731  exp(i a sigma_z)
    ey = lambda a: b.rot(Y_AXIS, -a)  # noqa: E731
    ex = lambda a: b.rot(X_AXIS, -a)  # noqa: E731
    b.rot(m, -PI / 2)
    ez(gm / 2)
    b.ising(gm / (4 * g))
    ey(PI / 4)
    ez(PI / 2)
    ex(PI / 4 + gm / 2)
    ez(PI / 4)
    ey(PI / 4)
    b.ising(-PI / (4 * g))
    ey(-gm / 2)
    ez(-PI / 4)
    ez(3 * PI / 2)
    b.ising(-3 * PI / (4 * g))
    ey(PI / 4)
    ez(PI / 2 + gm / 2)
    b.ising(gm / (4 * g))
    ey(-PI / 2)
    ez(PI / 2)
    b.rot(m, PI / 2)
    return b.schedule()


def compile_antisymmetric_rule(u, species: Species, g: float = 1.0,
                               bc: BoundaryConditions = PERIODIC) -> PulseSchedule:
    """``M(1, u^-1, u, 1)`` with one two-coupling Ising dwell of pi/g.

    The integrated couplings satisfy ``G1 + G2 = 2 pi`` and ``G1 - G2 = +-gamma``;
    the sign depends on which bond sits to the left of the updated species.
    """
    spec = _as_spec(u).canonical()
    gm = spec.gamma
    t = PI / g
    sign = 1.0 if Species(species) is Species.B else -1.0
    g1 = g + sign * gm / (2 * t)
    g2 = g - sign * gm / (2 * t)
    b = _Builder(species, g, bc)
    m = spec.half_axis
    b.rot(m, -PI / 2)
    b.ising(t, g1, g2)
    b.rot(m, PI / 2)
    return b.schedule()


def _empty(g: float, bc: BoundaryConditions) -> PulseSchedule:
    return PulseSchedule([], g, bc)


def compile_symmetric(rule, species: Species, g: float = 1.0, bc: BoundaryConditions = PERIODIC) -> PulseSchedule:
    """Any left/right symmetric rule as ``M(v^2,v,v,1) M(1,w,w,1) M(1,u,u,u^2)``.

    ``v = u00^(1/2)``, ``u = u11^(1/2)``, ``w = u00^(-1/2) u01 u11^(-1/2)``;
    pieces whose rotation is the identity are skipped.
    """
    s00, s01, s10, s11 = _rule_specs(rule)
    if not np.allclose(s01.matrix(), s10.matrix(), atol=1e-10, rtol=0):
        raise ValueError("compile_symmetric needs u01 == u10")
    return _compile_symmetric_specs(s00, s01, s11, species, g, bc)


def _compile_symmetric_specs(s00, s01, s11, species, g, bc) -> PulseSchedule:
    # roots of -1 share the u01 axis so that sum rules like M(1,u,u,u^2)
    # do not pick up a spurious pair-rule correction
    v = s00.sqrt(prefer=s01)
    u = s11.sqrt(prefer=s01)
    w = RotationSpec.from_matrix(v.inverse().matrix() @ s01.matrix() @ u.inverse().matrix())
    sched = _empty(g, bc)
    if not u.is_identity:
        sched = sched + compile_sum_rule(u, species, g, bc)
    if not w.is_identity:
        sched = sched + compile_pair_rule(w, species, g, bc)
    if not v.is_identity:
        sched = sched + compile_sum_rule(v, species, g, bc, flipped=True)
    return sched


def compile_asymmetric(rule, species: Species, g: float = 1.0, bc: BoundaryConditions = PERIODIC) -> PulseSchedule:
    """General SU(2) rule: ``M(1,x^-1,x,1) M(1,x,x,1)`` after the symmetric part.

    ``x = (u10 u01^-1)^(1/2)``; when x is the identity this is exactly
    :func:`compile_symmetric`.
    """
    s00, s01, s10, s11 = _rule_specs(rule)
    sched = _compile_symmetric_specs(s00, s01, s11, species, g, bc)
    x = RotationSpec.from_matrix(s10.matrix() @ s01.inverse().matrix()).sqrt()
    if x.is_identity:
        return sched
    sched = sched + compile_pair_rule(x, species, g, bc)
    return sched + compile_antisymmetric_rule(x, species, g, bc)


def compile_step(rule, g: float = 1.0, bc: BoundaryConditions = PERIODIC) -> PulseSchedule:
    """Full BQCA step: species B then species A."""
    return compile_asymmetric(rule, Species.B, g, bc) + compile_asymmetric(rule, Species.A, g, bc)


# -- simulation --------------------------------------------------------


@functools.lru_cache(maxsize=64)
def _bond_energies(n: int, periodic: bool) -> Tuple[np.ndarray, np.ndarray]:
    """Per-basis-state sums of z_i z_j over even-odd and odd-even bonds."""
    bits = (np.arange(2 ** n)[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    z = 1 - 2 * bits
    e1 = np.zeros(2 ** n)
    e2 = np.zeros(2 ** n)
    for j in range(n - 1 if not periodic else n):
        k = (j + 1) % n
        if j % 2 == 0:
            e1 += z[:, j] * z[:, k]
        else:
            e2 += z[:, j] * z[:, k]
    e1.flags.writeable = False
    e2.flags.writeable = False
    return e1, e2


def _run_schedule(amps: np.ndarray, schedule: PulseSchedule, n: int, bc: BoundaryConditions) -> np.ndarray:
    """Evolve a (2^n, k) batch of column states."""
    _check_n(n)
    if schedule.bc != bc:
        raise ValueError(f"schedule was compiled for {schedule.bc}, not {bc}")
    e1, e2 = _bond_energies(n, bc.periodic)
    batch = amps.shape[1]
    for el in schedule.elements:
        if isinstance(el, Ising):
            g1 = schedule.g if el.g1 is None else el.g1
            g2 = schedule.g if el.g2 is None else el.g2
            phase = np.exp(-1j * el.t * (g1 * e1 + g2 * e2))
            amps = phase[:, None] * amps
            continue
        tensor = amps.reshape((2,) * n + (batch,))
        op = el.matrix()
        if isinstance(el, Rotation):
            for j in el.species.sites(n):
                tensor = _apply_op(tensor, op, [j])
        else:
            tensor = _apply_op(tensor, op, [0 if el.end == "left" else n - 1])
        amps = tensor.reshape(2 ** n, batch)
    return amps


def simulate_schedule(schedule: PulseSchedule, state: PureState,
                      bc: Optional[BoundaryConditions] = None) -> PureState:
    bc = schedule.bc if bc is None else bc
    out = _run_schedule(state.amplitudes[:, None], schedule, state.n, bc)
    return PureState(state.n, out[:, 0])


def schedule_unitary(schedule: PulseSchedule, n: int, bc: Optional[BoundaryConditions] = None) -> np.ndarray:
    """Net 2^n x 2^n unitary, one column per basis input."""
    bc = schedule.bc if bc is None else bc
    return _run_schedule(np.eye(2 ** n, dtype=complex), schedule, n, bc)


def rule_unitary(rule: Rule, n: int, bc: BoundaryConditions, species: Optional[Species] = None) -> np.ndarray:
    """Ground-truth unitary from the rule engine (a full step when species is None)."""
    _check_n(n)
    order = [Species.B, Species.A] if species is None else [Species(species)]
    tensor = np.eye(2 ** n, dtype=complex).reshape((2,) * n + (2 ** n,))
    for sp in order:
        tensor = _apply_to_tensor(tensor, species_operators(rule, sp, n, bc), n, density=False)
    return tensor.reshape(2 ** n, 2 ** n)


def phase_aligned_deviation(actual: np.ndarray, expected: np.ndarray) -> float:
    """Max entrywise deviation after fitting one global phase.

    The phase is read off the largest entry of the first column of ``expected``.
    """
    i = int(np.argmax(np.abs(expected[:, 0])))
    ref = expected[i, 0]
    ph = actual[i, 0] / ref
    ph = ph / abs(ph) if abs(ph) > 0 else 1.0
    return float(np.max(np.abs(actual - ph * expected)))


def verify_schedule(schedule: PulseSchedule, rule: Rule, n: int,
                    bc: Optional[BoundaryConditions] = None,
                    species: Optional[Species] = None) -> float:
    if n > 10:
        raise ValueError("verification builds dense unitaries; keep n <= 10")
    bc = schedule.bc if bc is None else bc
    return phase_aligned_deviation(schedule_unitary(schedule, n, bc), rule_unitary(rule, n, bc, species))
