import numpy as np
import pytest

from bqca import pulses
from bqca.metrics import measure_R, schmidt_rank, tangle
from bqca.rules import SZ
from bqca.sequences import (LocalRotation, SequenceProgram, bell_pair, bell_state_ends,
                            cluster, cluster_input, cluster_reference, compile_program, ghz,
                            ghz_state, run_program, swap_ends, transport)
from bqca.state import KET0, fidelity_up_to_phase, init_product
from conftest import random_su2

PI = np.pi


def random_qubit(rng):
    return random_su2(rng)[:, 0]


@pytest.mark.parametrize("n", [2, 4, 6, 10])
def test_transport_moves_state(n, rng):
    phi = random_qubit(rng)
    prog = transport(n)
    out = run_program(prog, init_product(n, [phi] + [KET0] * (n - 1)))
    want = init_product(n, [KET0] * (n - 1) + [phi])
    assert fidelity_up_to_phase(out, want) > 1 - 1e-10


def test_transport_compiled_time_and_state(rng):
    n = 8
    prog = transport(n)
    assert abs(prog.total_time - n * PI / 4) < 1e-12
    phi = random_qubit(rng)
    psi = init_product(n, [phi] + [KET0] * (n - 1))
    out = pulses.simulate_schedule(prog.schedule, psi)
    want = init_product(n, [KET0] * (n - 1) + [phi])
    assert fidelity_up_to_phase(out, want) > 1 - 1e-10


@pytest.mark.parametrize("n", [4, 6, 8])
def test_swap(n, rng):
    a, b = random_qubit(rng), random_qubit(rng)
    out = run_program(swap_ends(n), init_product(n, [a] + [KET0] * (n - 2) + [b]))
    want = init_product(n, [b] + [KET0] * (n - 2) + [a])
    assert fidelity_up_to_phase(out, want) > 1 - 1e-10


@pytest.mark.parametrize("n", [4, 6, 8, 10])
def test_bell(n):
    prog = bell_pair(n)
    out = run_program(prog, prog.initial_state())
    assert fidelity_up_to_phase(out, bell_state_ends(n)) > 1 - 1e-10
    assert tangle(out, 0, n - 1) > 1 - 1e-8


@pytest.mark.parametrize("n", [4, 6, 8, 10, 12])
def test_ghz(n):
    prog = ghz(n)
    out = run_program(prog, prog.initial_state())
    assert fidelity_up_to_phase(out, ghz_state(n)) > 1 - 1e-10
    assert abs(prog.total_time - n * PI / 8) < 1e-12


def test_ghz_compiled_matches_engine():
    prog = ghz(6)
    psi = prog.initial_state()
    out = pulses.simulate_schedule(prog.schedule, psi)
    assert fidelity_up_to_phase(out, ghz_state(6)) > 1 - 1e-10


def test_bell_compiled_matches_engine():
    prog = bell_pair(6)
    out = pulses.simulate_schedule(prog.schedule, prog.initial_state())
    assert fidelity_up_to_phase(out, bell_state_ends(6)) > 1 - 1e-10


def test_seed_sites():
    assert ghz(8).seed_site == 4 and ghz(8).n_form == "4k"
    assert ghz(10).seed_site == 4 and ghz(10).n_form == "4k+2"
    assert bell_pair(14).seed_site % 2 == 0


def test_cluster_reference_amplitudes():
    ref = cluster_reference(3)
    # s = 011: (1-s0)s1 = 1, (1-s1)s2 = 0
    assert np.isclose(ref.amplitudes[0b011], -1 / np.sqrt(8))
    assert np.isclose(ref.amplitudes[0b101], -1 / np.sqrt(8))
    assert np.isclose(ref.amplitudes[0b110], 1 / np.sqrt(8))
    assert np.isclose(ref.norm, 1)


def test_cluster_program_spectra():
    n = 6
    out = run_program(cluster(n), cluster_input(n))
    ref = cluster_reference(n)
    for part in ([0], [0, 1, 2], [0, 2, 4], [1, 4]):
        assert schmidt_rank(out, part) == schmidt_rank(ref, part)
    assert abs(measure_R(out) - 1) < 1e-10


def test_program_validation():
    with pytest.raises(ValueError):
        transport(5)
    with pytest.raises(ValueError):
        ghz(2)
    with pytest.raises(ValueError):
        run_program(transport(4), init_product(6, [KET0] * 6))


def test_local_rotation_needs_end_z():
    prog = SequenceProgram("x", 4, [LocalRotation(1, (0, 0, 1), 0.3)])
    with pytest.raises(ValueError):
        compile_program(prog)
    prog = SequenceProgram("x", 4, [LocalRotation(0, (1, 0, 0), 0.3)])
    with pytest.raises(ValueError):
        compile_program(prog)


def test_local_rotation_matrix():
    r = LocalRotation(0, (0, 0, 1), PI / 2)
    assert np.allclose(r.matrix(), -1j * SZ)


def test_record_history():
    prog = transport(4)
    hist = run_program(prog, prog.initial_state(), record=True)
    assert len(hist) == len(prog.steps) + 1
