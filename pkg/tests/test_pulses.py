import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm

from bqca import pulses
from bqca.pulses import (EndRotation, Ising, PulseSchedule, Rotation, RotationSpec, bracket_time,
                         compile_antisymmetric_rule, compile_asymmetric, compile_pair_rule,
                         compile_step, compile_sum_rule, compile_symmetric, schedule_unitary,
                         simulate_schedule, verify_schedule)
from bqca.rules import (CLUSTER_RULE, I2, M1, PERIODIC, SX, SZ, BoundaryConditions, Rule, Species,
                        rotation, rz, step)
from bqca.sequences import cluster_input
from conftest import random_state, random_su2

PI = np.pi
FIXED = [BoundaryConditions.fixed(a, b) for a in (0, 1) for b in (0, 1)]
ALL_BC = [PERIODIC] + FIXED
TOL = 1e-9

angles = st.tuples(st.floats(-2 * PI, 2 * PI), st.floats(0, PI), st.floats(-PI, PI))


def ising_oracle(n, t, g1, g2, periodic):
    """Dense exp(-i t sum g_b z z) from Kronecker products."""
    H = np.zeros((2 ** n, 2 ** n))
    bonds = range(n) if periodic else range(n - 1)
    for j in bonds:
        k = (j + 1) % n
        ops = [np.eye(2)] * n
        ops[j] = ops[k] = np.real(SZ)
        term = ops[0]
        for o in ops[1:]:
            term = np.kron(term, o)
        H += (g1 if j % 2 == 0 else g2) * term
    return expm(-1j * t * H)


def sym_rule(u00, u01, u11):
    return Rule(u00, u01, u01, u11)


def test_bracket_time():
    assert bracket_time(0.3) == 0.3
    assert np.isclose(bracket_time(-PI / 4), 3 * PI / 4)
    assert np.isclose(bracket_time(-3 * PI / 4, g=2.0), PI / 4)
    assert np.isclose(bracket_time(-PI), 0.0)
    with pytest.raises(ValueError):
        bracket_time(1.0, g=0)


@pytest.mark.parametrize("periodic", [True, False])
def test_ising_matches_expm(periodic, rng):
    n, t = 6, 0.37
    bc = PERIODIC if periodic else BoundaryConditions.fixed(0, 0)
    sched = PulseSchedule([Ising(t, 0.8, 1.3)], 1.0, bc)
    assert np.allclose(schedule_unitary(sched, n), ising_oracle(n, t, 0.8, 1.3, periodic), atol=1e-12)


def test_ising_pi_is_global_phase():
    U = schedule_unitary(PulseSchedule([Ising(PI)]), 6)
    assert np.allclose(U, U[0, 0] * np.eye(64), atol=1e-12)


def test_empty_schedule_identity(rng):
    psi = random_state(4, rng)
    assert np.allclose(simulate_schedule(PulseSchedule(), psi).amplitudes, psi.amplitudes)


def test_element_validation():
    with pytest.raises(ValueError):
        Ising(-0.1)
    with pytest.raises(ValueError):
        Rotation(Species.A, (1, 1, 0), 0.2)
    with pytest.raises(ValueError):
        EndRotation("middle", 0.1)


def test_rotation_sign_convention():
    r = Rotation(Species.A, (1, 0, 0), 0.3)
    assert np.allclose(r.matrix(), expm(-1j * 0.3 * SX))


def test_schedule_bc_mismatch():
    s = compile_sum_rule(rz(0.3), Species.A, bc=BoundaryConditions.fixed(0, 0))
    with pytest.raises(ValueError):
        schedule_unitary(s, 4, PERIODIC)
    with pytest.raises(ValueError):
        s + PulseSchedule()


@settings(max_examples=50, deadline=None)
@given(angles)
def test_spec_roundtrip(a):
    spec = RotationSpec(*a)
    back = RotationSpec.from_matrix(spec.matrix())
    assert np.allclose(back.matrix(), spec.matrix(), atol=1e-12)
    c = spec.canonical()
    assert 0 <= c.gamma <= PI + 1e-12
    assert np.allclose(c.matrix(), spec.matrix(), atol=1e-12)
    r = spec.sqrt().matrix()
    assert np.allclose(r @ r, spec.matrix(), atol=1e-10)


def test_sqrt_of_minus_one_prefers_axis():
    minus = RotationSpec(PI)
    prefer = RotationSpec(0.3, PI / 2, 0.0)
    r = minus.sqrt(prefer)
    assert np.allclose(r.matrix() @ r.matrix(), -I2)
    assert np.allclose(r.axis, prefer.axis)


def test_check_su2():
    with pytest.raises(ValueError, match="SU"):
        pulses.check_su2(SZ)
    with pytest.raises(ValueError):
        RotationSpec.from_matrix(2 * I2)
    with pytest.raises(ValueError):
        compile_symmetric(Rule(I2, SX, SX, I2), Species.A)


@pytest.mark.parametrize("bc", ALL_BC, ids=str)
def test_sum_rule_verifies(bc, rng):
    for sp in Species:
        for flipped in (False, True):
            u = RotationSpec(*rng.uniform([-PI, 0, -PI], [PI, PI, PI]))
            s = compile_sum_rule(u, sp, 1.0, bc, flipped)
            m = u.matrix()
            rule = Rule(m @ m, m, m, I2) if flipped else Rule(I2, m, m, m @ m)
            assert s.ising_count == 1
            assert verify_schedule(s, rule, 6, species=sp) < TOL


def test_sum_rule_dwell():
    s = compile_sum_rule(RotationSpec(0.8, 0.4, 1.0), Species.A)
    assert np.isclose(s.total_time, 0.4)
    assert np.isclose(compile_sum_rule(RotationSpec(0.8), Species.A, g=2.0).total_time, 0.2)


@pytest.mark.parametrize("bc", ALL_BC, ids=str)
def test_pair_rule_verifies(bc, rng):
    for sp in Species:
        m = random_su2(rng)
        s = compile_pair_rule(m, sp, 1.0, bc)
        assert verify_schedule(s, Rule(I2, m, m, I2), 6, species=sp) < TOL


def test_pair_rule_segments():
    g = 0.6
    s = compile_pair_rule(RotationSpec(g, 1.0, 0.5), Species.B)
    dwells = [e.t for e in s.elements if isinstance(e, Ising)]
    expected = [bracket_time(x) for x in (g / 4, -PI / 4, -3 * PI / 4, g / 4)]
    assert len(dwells) == 4
    assert np.allclose(dwells, expected)


def test_pair_rule_identity():
    s = compile_pair_rule(I2, Species.A)
    assert verify_schedule(s, Rule(I2, I2, I2, I2), 4, species=Species.A) < 1e-12


@pytest.mark.parametrize("bc", ALL_BC, ids=str)
def test_antisymmetric_verifies(bc, rng):
    for sp in Species:
        x = random_su2(rng)
        s = compile_antisymmetric_rule(x, sp, 1.0, bc)
        assert verify_schedule(s, Rule(I2, x.conj().T, x, I2), 6, species=sp) < TOL


def test_antisymmetric_example():
    """u = exp(i pi/6 sigma_z): integrated couplings pi +- pi/12."""
    u = rz(PI / 6)
    s = compile_antisymmetric_rule(u, Species.B)
    (el,) = [e for e in s.elements if isinstance(e, Ising)]
    assert np.isclose(el.g1 * el.t, PI + PI / 12)
    assert np.isclose(el.g2 * el.t, PI - PI / 12)
    rule = Rule(I2, u.conj().T, u, I2)
    assert verify_schedule(s, rule, 6, species=Species.B) < TOL
    assert verify_schedule(compile_asymmetric(rule, Species.B), rule, 6, species=Species.B) < TOL


def test_symmetric_cluster_rule():
    for bc in ALL_BC:
        for sp in Species:
            s = compile_symmetric(CLUSTER_RULE, sp, 1.0, bc)
            assert s.ising_count <= 6
            assert verify_schedule(s, CLUSTER_RULE, 6, species=sp) < TOL


def test_symmetric_identity():
    s = compile_symmetric(Rule(I2, I2, I2, I2), Species.A)
    assert verify_schedule(s, Rule(I2, I2, I2, I2), 4, species=Species.A) < 1e-12


def test_symmetric_rejects_asymmetric(rng):
    with pytest.raises(ValueError):
        compile_symmetric(Rule(I2, rz(0.3), rz(0.5), I2), Species.A)


@pytest.mark.parametrize("bc", ALL_BC, ids=str)
def test_asymmetric_random(bc, rng):
    for _ in range(4):
        rule = Rule(*(random_su2(rng) for _ in range(4)))
        for sp in Species:
            s = compile_asymmetric(rule, sp, 1.0, bc)
            assert s.ising_count <= 11
            assert all(e.t >= 0 for e in s.elements if isinstance(e, Ising))
            assert verify_schedule(s, rule, 6, species=sp) < TOL


def test_asymmetric_reduces_to_symmetric(rng):
    u, w, v = random_su2(rng), random_su2(rng), random_su2(rng)
    rule = sym_rule(u, w, v)
    a = compile_asymmetric(rule, Species.A)
    b = compile_symmetric(rule, Species.A)
    assert a.elements == b.elements


def test_full_step_and_g(rng):
    rule = Rule(*(random_su2(rng) for _ in range(4)))
    for g in (1.0, 2.5):
        s = compile_step(rule, g, BoundaryConditions.fixed(1, 0))
        assert verify_schedule(s, rule, 6) < TOL


def test_cluster_schedule_on_plus_states():
    bc = BoundaryConditions.fixed(0, 0)
    psi = cluster_input(6)
    out = simulate_schedule(compile_step(CLUSTER_RULE, 1.0, bc), psi)
    ref = step(psi, CLUSTER_RULE, bc)
    ph = np.vdot(ref.amplitudes, out.amplitudes)
    assert np.max(np.abs(out.amplitudes - ph * ref.amplitudes)) < TOL


def test_corrupted_dwell_is_detected(rng):
    rule = Rule(*(random_su2(rng) for _ in range(4)))
    s = compile_asymmetric(rule, Species.A)
    i = next(k for k, e in enumerate(s.elements) if isinstance(e, Ising) and e.g1 is None)
    bad = list(s.elements)
    bad[i] = Ising(bad[i].t + 0.1)
    assert verify_schedule(PulseSchedule(bad, s.g, s.bc), rule, 6, species=Species.A) > 1e-3


def test_bracketing_adds_only_phase(rng):
    rule = Rule(*(random_su2(rng) for _ in range(4)))
    s = compile_asymmetric(rule, Species.B)
    for i, e in enumerate(s.elements):
        if isinstance(e, Ising) and e.g1 is None:
            shifted = list(s.elements)
            shifted[i] = Ising(e.t + PI)
            assert verify_schedule(PulseSchedule(shifted), rule, 6, species=Species.B) < TOL


def test_end_rotation_inserted_for_fixed_bc():
    s = compile_sum_rule(RotationSpec(0.5), Species.A, bc=BoundaryConditions.fixed(1, 0))
    ends = [e for e in s.elements if isinstance(e, EndRotation)]
    assert len(ends) == 1 and ends[0].end == "left"
    assert np.isclose(ends[0].angle, -0.25)
    assert not any(isinstance(e, EndRotation) for e in compile_sum_rule(RotationSpec(0.5), Species.A).elements)


def test_schedule_json_roundtrip(rng):
    rule = Rule(*(random_su2(rng) for _ in range(4)))
    s = compile_step(rule, 1.5, BoundaryConditions.fixed(0, 1))
    d = json.loads(s.to_json())
    assert d["g"] == 1.5 and d["boundary"] == {"kind": "fixed", "left": 0, "right": 1}
    assert {e["type"] for e in d["elements"]} == {"ising", "rotation", "end_rotation"}
    back = PulseSchedule.from_dict(d)
    assert back == s
    with pytest.raises(ValueError):
        PulseSchedule.from_dict({"elements": [{"type": "laser"}]})


def test_m1_step_time():
    # sum rule (pi/8) plus pair rule (9 pi/8) per species
    s = compile_step(M1, 1.0, BoundaryConditions.fixed(0, 0))
    assert np.isclose(s.total_time, 5 * PI / 2)


def test_verify_size_cap():
    with pytest.raises(ValueError):
        verify_schedule(PulseSchedule(), M1, 12)


@settings(max_examples=15, deadline=None)
@given(angles, angles, angles, st.sampled_from(ALL_BC), st.sampled_from(list(Species)))
def test_symmetric_property(a, b, c, bc, sp):
    rule = sym_rule(rotation(*a), rotation(*b), rotation(*c))
    assert verify_schedule(compile_symmetric(rule, sp, 1.0, bc), rule, 6, species=sp) < TOL
