import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdecide import CapacityError, Circuit, Gate, ValidationError
from qdecide.statevector import (
    OutcomeDistribution,
    apply_gate,
    bits_to_str,
    decode_index,
    encode_bits,
    exact_distribution,
    init_state,
    run_circuit,
    sample_outcomes,
    shot_uniforms,
    total_variation,
)

H = np.array([[1, 1], [1, -1]]) / math.sqrt(2)


def dense_unitary(gate, n):
    """Full 2^n matrix via Kronecker products (qubit 0 is least significant)."""
    if gate.name == "cnot":
        c, t = gate.qubits
        u = np.zeros((2**n, 2**n), dtype=complex)
        for i in range(2**n):
            j = i ^ (1 << t) if (i >> c) & 1 else i
            u[j, i] = 1
        return u
    q = gate.qubits[0]
    return np.kron(np.kron(np.eye(2 ** (n - 1 - q)), gate.matrix()), np.eye(2**q))


def dense_run(circuit):
    psi = np.zeros(2**circuit.n_qubits, dtype=complex)
    psi[0] = 1
    for gate in circuit.ops:
        psi = dense_unitary(gate, circuit.n_qubits) @ psi
    return psi


def random_gate(n, draw):
    name = draw(st.sampled_from(["ry", "x", "y", "z", "h", "i", "cnot"] if n > 1 else ["ry", "x", "y", "z", "h", "i"]))
    if name == "cnot":
        c, t = draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=2, unique=True))
        return Gate.cnot(c, t)
    q = draw(st.integers(0, n - 1))
    if name == "ry":
        return Gate.ry(q, draw(st.floats(-2 * math.pi, 2 * math.pi)))
    return Gate(name, (q,))


@st.composite
def circuits(draw, max_qubits=10, max_ops=100):
    n = draw(st.integers(1, max_qubits))
    ops = [random_gate(n, draw) for _ in range(draw(st.integers(0, max_ops)))]
    return Circuit(n, ops)


class TestInitState:
    def test_one_qubit(self):
        assert np.array_equal(init_state(1).amplitudes, [1, 0])

    def test_two_qubits(self):
        assert np.array_equal(init_state(2).amplitudes, [1, 0, 0, 0])

    @pytest.mark.parametrize("n", [0, 25, -1])
    def test_out_of_range(self, n):
        with pytest.raises(CapacityError):
            init_state(n)


class TestApplyGate:
    def test_x_flips(self):
        assert np.allclose(apply_gate(init_state(1), Gate.x(0)).amplitudes, [0, 1])

    @pytest.mark.parametrize("tau", [0.0, 0.3, 1.5, math.pi, 4.0])
    def test_ry_sign_convention(self, tau):
        out = apply_gate(init_state(1), Gate.ry(0, tau)).amplitudes
        assert out == pytest.approx([math.cos(tau / 2), -math.sin(tau / 2)], abs=1e-15)

    def test_bell_state(self):
        state = apply_gate(apply_gate(init_state(2), Gate.h(0)), Gate.cnot(0, 1))
        assert state.amplitudes == pytest.approx([1 / math.sqrt(2), 0, 0, 1 / math.sqrt(2)], abs=1e-15)

    def test_z_phase(self):
        one = apply_gate(init_state(1), Gate.x(0))
        assert np.allclose(apply_gate(one, Gate.z(0)).amplitudes, [0, -1])
        assert np.allclose(apply_gate(init_state(1), Gate.z(0)).amplitudes, [1, 0])

    @pytest.mark.parametrize("gate", [Gate.x(2), Gate.cnot(0, 3), Gate.cnot(1, 1), Gate.ry(0, math.nan)])
    def test_invalid(self, gate):
        with pytest.raises(ValidationError):
            apply_gate(init_state(2), gate)

    def test_input_unchanged(self):
        state = init_state(2)
        apply_gate(state, Gate.x(0))
        assert state.amplitudes[0] == 1
        assert not state.amplitudes.flags.writeable


class TestRunCircuit:
    def test_action1_layout(self):
        tau = 1.1
        amps = run_circuit(Circuit(2, [Gate.ry(0, tau)])).amplitudes
        # s0 = 1 is index 1 (qubit 0 is least significant)
        assert amps[0] == pytest.approx(math.cos(tau / 2))
        assert amps[1] == pytest.approx(-math.sin(tau / 2))
        assert abs(amps[2]) == abs(amps[3]) == 0

    def test_empty(self):
        assert np.array_equal(run_circuit(Circuit(2, [])).amplitudes, [1, 0, 0, 0])

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            n = int(rng.integers(1, 6))
            ops = []
            for _ in range(15):
                kind = rng.choice(["ry", "x", "y", "z", "h", "cnot"]) if n > 1 else rng.choice(["ry", "h", "y"])
                if kind == "cnot":
                    c, t = rng.choice(n, 2, replace=False)
                    ops.append(Gate.cnot(int(c), int(t)))
                elif kind == "ry":
                    ops.append(Gate.ry(int(rng.integers(n)), float(rng.uniform(-4, 4))))
                else:
                    ops.append(Gate(str(kind), (int(rng.integers(n)),)))
            circuit = Circuit(n, ops)
            assert np.allclose(run_circuit(circuit).amplitudes, dense_run(circuit), atol=1e-12)


@pytest.mark.property
@settings(max_examples=60, deadline=None)
@given(circuits())
def test_norm_preserved(circuit):
    assert abs(run_circuit(circuit).norm() - 1) < 1e-10


@pytest.mark.property
@settings(max_examples=40, deadline=None)
@given(circuits(max_qubits=6, max_ops=20), st.floats(-10, 10), st.integers(0, 5))
def test_ry_inverse_and_self_inverse_gates(circuit, theta, q):
    q = q % circuit.n_qubits
    state = run_circuit(circuit)
    back = apply_gate(apply_gate(state, Gate.ry(q, theta)), Gate.ry(q, -theta))
    assert np.allclose(back.amplitudes, state.amplitudes, atol=1e-10, rtol=0)
    gates = [Gate.x(q), Gate.h(q)]
    if circuit.n_qubits > 1:
        gates.append(Gate.cnot(q, (q + 1) % circuit.n_qubits))
    for gate in gates:
        twice = apply_gate(apply_gate(state, gate), gate)
        assert np.allclose(twice.amplitudes, state.amplitudes, atol=1e-10, rtol=0)


@settings(max_examples=30, deadline=None)
@given(circuits(max_qubits=10, max_ops=30))
def test_exact_distribution_matches_enumeration(circuit):
    state = run_circuit(circuit)
    dist = exact_distribution(state)
    for i in range(2**circuit.n_qubits):
        assert dist.probabilities[i] == abs(state.amplitudes[i]) ** 2
    assert abs(dist.probabilities.sum() - 1) < 1e-12


class TestExactDistribution:
    def test_bell(self):
        dist = exact_distribution(run_circuit(Circuit(2, [Gate.h(0), Gate.cnot(0, 1)])))
        assert dist.as_dict() == pytest.approx({"00": 0.5, "11": 0.5}, abs=1e-15)

    def test_ground(self):
        assert exact_distribution(init_state(2)).as_dict() == {"00": 1.0}

    def test_action3_example(self):
        tau, tau0 = math.pi / 2, math.pi / 10
        circuit = Circuit(2, [Gate.ry(0, tau0), Gate.cnot(0, 1), Gate.ry(0, tau - tau0)])
        dist = exact_distribution(run_circuit(circuit))
        expected = {"00": 0.6385, "01": 0.0085, "10": 0.3370, "11": 0.0160}
        for bits, p in expected.items():
            assert dist.probability(bits) == pytest.approx(p, abs=5e-4)


class TestBits:
    def test_roundtrip(self):
        for i in range(16):
            assert encode_bits(decode_index(i, 4)) == i

    def test_display_order(self):
        assert bits_to_str(decode_index(1, 2)) == "10"
        assert encode_bits((0, 1)) == 2


class TestSampling:
    def test_deterministic_state(self):
        state = run_circuit(Circuit(2, [Gate.x(1)]))
        dist = sample_outcomes(state, 500, seed=3)
        assert dist.as_dict() == {"01": 1.0}
        assert dist.counts.sum() == 500

    def test_reproducible(self):
        state = run_circuit(Circuit(2, [Gate.h(0), Gate.cnot(0, 1)]))
        a = sample_outcomes(state, 1024, seed=11)
        b = sample_outcomes(state, 1024, seed=11)
        assert np.array_equal(a.samples, b.samples)

    @pytest.mark.property
    def test_chunking_and_workers_do_not_change_samples(self):
        state = run_circuit(Circuit(3, [Gate.h(0), Gate.ry(1, 0.7), Gate.cnot(0, 2)]))
        serial = sample_outcomes(state, 10_001, seed=5)
        chunked = sample_outcomes(state, 10_001, seed=5, chunk=333, workers=4)
        assert np.array_equal(serial.samples, chunked.samples)

    def test_shot_uniforms_are_per_shot(self):
        whole = shot_uniforms(9, 0, 0, 50, width=3)
        for start in (0, 1, 7, 13):
            assert np.array_equal(shot_uniforms(9, 0, start, 5, width=3), whole[start : start + 5])

    @pytest.mark.parametrize("shots", [0, -3, 1.5])
    def test_bad_shots(self, shots):
        with pytest.raises(ValidationError):
            sample_outcomes(init_state(1), shots, seed=0)

    def test_bell_binomial_band(self):
        state = run_circuit(Circuit(2, [Gate.h(0), Gate.cnot(0, 1)]))
        half_width = 4 * math.sqrt(0.25 / 1024)
        hits = sum(abs(sample_outcomes(state, 1024, seed=s).probability("00") - 0.5) <= half_width for s in range(200))
        assert hits >= 198

    def test_convergence_on_bundled_circuits(self, bundled_problems):
        for problem in bundled_problems.values():
            for action in problem.resolved:
                state = run_circuit(action.circuit)
                exact = exact_distribution(state)
                good = sum(total_variation(sample_outcomes(state, 100_000, seed=s), exact) < 0.01 for s in range(100))
                assert good >= 99, action.name


def test_empirical_distribution_from_counts():
    dist = OutcomeDistribution.from_counts(1, [3, 1])
    assert dist.mode == "empirical"
    assert dist.shots == 4
    assert dist.probability("1") == 0.25
