"""Multi-step recipes: transport, end swap, Bell pair, GHZ and cluster states.

Every recipe is a :class:`SequenceProgram` whose steps are listed in time
order (the first step acts first).  Programs run either through the rule
engine (:func:`run_program`) or as compiled pulse schedules
(:func:`compile_program`).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np

from . import pulses
from .rules import (CLUSTER_RULE, M1, TRANSPORT_RULE, BoundaryConditions, Rule, Species,
                    apply_species, exp_pauli, step)
from .state import KET0, KET_PLUS, PureState, State, apply_local, init_product

FIXED00 = BoundaryConditions.fixed(0, 0)
PI = np.pi


@dataclass(frozen=True)
class FullStep:
    rule: Rule


@dataclass(frozen=True)
class SpeciesUpdate:
    rule: Rule
    species: Species


@dataclass(frozen=True)
class LocalRotation:
    """``exp(-i angle sigma.axis)`` on one site."""
    site: int
    axis: tuple
    angle: float

    def matrix(self) -> np.ndarray:
        return exp_pauli(-self.angle, self.axis)


Step = Union[FullStep, SpeciesUpdate, LocalRotation]


@dataclass
class SequenceProgram:
    name: str
    n: int
    steps: List[Step]
    n_form: str = "any even"
    seed_site: Optional[int] = None
    bc: BoundaryConditions = FIXED00
    g: float = 1.0
    _schedule: Optional[pulses.PulseSchedule] = field(default=None, repr=False, compare=False)

    @property
    def schedule(self) -> pulses.PulseSchedule:
        if self._schedule is None:
            self._schedule = compile_program(self)
        return self._schedule

    @property
    def total_time(self) -> float:
        """Physical duration (units of 1/g) of the compiled schedule."""
        return self.schedule.total_time

    def initial_state(self, seed_state=KET_PLUS) -> PureState:
        """All sites |0>, with ``seed_state`` on the seed site (if the recipe has one)."""
        sites = [KET0] * self.n
        if self.seed_site is not None:
            sites = list(sites)
            sites[self.seed_site] = np.asarray(seed_state, dtype=complex)
        return init_product(self.n, sites)


def apply_step(state: State, st: Step, bc: BoundaryConditions) -> State:
    if isinstance(st, FullStep):
        return step(state, st.rule, bc)
    if isinstance(st, SpeciesUpdate):
        return apply_species(state, st.rule, st.species, bc)
    return apply_local(state, st.matrix(), [st.site])


def run_program(program: SequenceProgram, state: State, record: bool = False):
    """Run on the rule engine. With ``record`` returns every intermediate state."""
    if state.n != program.n:
        raise ValueError(f"program is for n={program.n}, state has n={state.n}")
    history = [state]
    for st in program.steps:
        state = apply_step(state, st, program.bc)
        history.append(state)
    return history if record else state


def compile_program(program: SequenceProgram) -> pulses.PulseSchedule:
    g, bc, n = program.g, program.bc, program.n
    sched = pulses.PulseSchedule([], g, bc)
    for st in program.steps:
        if isinstance(st, FullStep):
            sched = sched + pulses.compile_step(st.rule, g, bc)
        elif isinstance(st, SpeciesUpdate):
            sched = sched + pulses.compile_asymmetric(st.rule, st.species, g, bc)
        else:
            if st.site not in (0, n - 1) or not np.allclose(st.axis, (0, 0, 1)):
                raise ValueError("only z rotations on the end sites have a pulse realization")
            end = "left" if st.site == 0 else "right"
            sched = sched + pulses.PulseSchedule([pulses.EndRotation(end, st.angle)], g, bc)
    return sched


def _check_even(n: int, minimum: int = 2) -> None:
    if n % 2 or n < minimum:
        raise ValueError(f"need an even n >= {minimum}, got {n}")


def _z(site: int, angle: float) -> LocalRotation:
    return LocalRotation(site, (0.0, 0.0, 1.0), angle)


# sigma_z equals exp(-i pi/2 sigma_z) up to the global phase i
def _sigma_z(site: int) -> LocalRotation:
    return _z(site, PI / 2)


def transport(n: int, g: float = 1.0) -> SequenceProgram:
    """Carry the state of site 0 to site n-1 through a chain of |0> cells."""
    _check_even(n)
    steps: List[Step] = [FullStep(TRANSPORT_RULE)] * (n // 2) + [_sigma_z(n - 1)]
    return SequenceProgram("transport", n, steps, seed_site=0, g=g)


def swap_ends(n: int, g: float = 1.0) -> SequenceProgram:
    """Exchange the states of sites 0 and n-1 (interior cells start and end in |0>)."""
    _check_even(n)
    steps: List[Step] = [FullStep(TRANSPORT_RULE)] * (n // 2)
    steps += [SpeciesUpdate(TRANSPORT_RULE, Species.B), _sigma_z(n - 1), _sigma_z(0)]
    return SequenceProgram("swap", n, steps, g=g)


def _seed_site(n: int) -> int:
    # A-species cell closest to the middle
    return n // 2 if n % 4 == 0 else n // 2 - 1


def bell_pair(n: int, g: float = 1.0) -> SequenceProgram:
    """Seed |+> near the middle and spread it into a Bell pair on sites (0, n-1)."""
    _check_even(n, 4)
    k = n // 4
    steps: List[Step] = [FullStep(M1)]
    if n % 4 == 0:
        steps += [FullStep(TRANSPORT_RULE)] * (k - 1) + [SpeciesUpdate(TRANSPORT_RULE, Species.B)]
        form = "4k"
    else:
        steps += [FullStep(TRANSPORT_RULE)] * k
        form = "4k+2"
    steps.append(_z(0, PI / 4))
    return SequenceProgram("bell", n, steps, n_form=form, seed_site=_seed_site(n), g=g)


def ghz(n: int, g: float = 1.0) -> SequenceProgram:
    """Seed |+> near the middle and grow it into the n-spin GHZ state."""
    _check_even(n, 4)
    k = n // 4
    # end phase fixes the relative sign of |1...1>; the flips leave (-i)^(n-1)
    if n % 4 == 0:
        steps: List[Step] = [FullStep(TRANSPORT_RULE)] * k
        steps.append(_z(0, -(-1) ** k * PI / 4))
        form = "4k"
    else:
        steps = [FullStep(TRANSPORT_RULE)] * k + [SpeciesUpdate(TRANSPORT_RULE, Species.B)]
        steps.append(_z(0, (-1) ** k * PI / 4))
        form = "4k+2"
    return SequenceProgram("ghz", n, steps, n_form=form, seed_site=_seed_site(n), g=g)


def cluster(n: int, g: float = 1.0) -> SequenceProgram:
    """One cluster-rule step; start from :func:`cluster_input`."""
    _check_even(n)
    return SequenceProgram("cluster", n, [FullStep(CLUSTER_RULE)], g=g)


def cluster_input(n: int) -> PureState:
    """``exp(-i pi/4 sum sigma_y)|0...0>``, i.e. |+> on every site."""
    return init_product(n, [KET_PLUS] * n)


def cluster_reference(n: int) -> PureState:
    """Directly built cluster state: amplitude ``2^(-n/2) prod (-1)^((1-s_a) s_(a+1))``."""
    idx = np.arange(2 ** n)
    bits = (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1
    exponent = np.sum((1 - bits[:, :-1]) * bits[:, 1:], axis=1)
    return PureState(n, (-1.0) ** exponent / 2 ** (n / 2))


def ghz_state(n: int) -> PureState:
    amps = np.zeros(2 ** n, dtype=complex)
    amps[0] = amps[-1] = 1 / np.sqrt(2)
    return PureState(n, amps)


def bell_state_ends(n: int) -> PureState:
    """(|0..0> + |1 0..0 1>)/sqrt2: Bell pair on the end sites, interior |0>."""
    amps = np.zeros(2 ** n, dtype=complex)
    amps[0] = 1 / np.sqrt(2)
    amps[(1 << (n - 1)) | 1] = 1 / np.sqrt(2)
    return PureState(n, amps)


PROGRAMS = {
    "transport": transport,
    "swap": swap_ends,
    "bell": bell_pair,
    "ghz": ghz,
    "cluster": cluster,
}
