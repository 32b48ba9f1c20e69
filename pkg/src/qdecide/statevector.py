"""Statevector simulation of the small gate set used for decision circuits.

Conventions
-----------
Qubit ``k`` is measured into bit ``s_k`` and carries weight ``2**k`` in the
integer encoding of a basis state, so qubit 0 is the least significant bit.
Bit vectors are displayed with ``s_0`` first, e.g. ``"10"`` means rain and
travelling light in the umbrella problem.

``RY(t)`` maps ``|0>`` to ``cos(t/2)|0> - sin(t/2)|1>``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

from .errors import CapacityError, ValidationError

MAX_QUBITS = 24

BitVector = tuple[int, ...]

_SQRT_HALF = 1.0 / math.sqrt(2.0)

_FIXED_MATRICES = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "h": np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT_HALF,
}

SINGLE_QUBIT_GATES = ("i", "x", "y", "z", "h", "ry")
GATE_NAMES = SINGLE_QUBIT_GATES + ("cnot",)


@dataclass(frozen=True)
class Gate:
    """One operation of a circuit.

    ``qubits`` holds the operands in order; for ``cnot`` that is
    ``(control, target)``. ``angle`` is only set for ``ry``.
    """

    name: str
    qubits: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.name not in GATE_NAMES:
            raise ValidationError(f"unknown gate {self.name!r}")
        arity = 2 if self.name == "cnot" else 1
        if len(self.qubits) != arity:
            raise ValidationError(f"{self.name} takes {arity} qubit operand(s), got {len(self.qubits)}")
        if (self.name == "ry") != (self.angle is not None):
            raise ValidationError("an angle is required for ry and forbidden otherwise")
        if self.angle is not None:
            object.__setattr__(self, "angle", float(self.angle))

    @classmethod
    def ry(cls, target: int, angle: float) -> Gate:
        return cls("ry", (target,), angle)

    @classmethod
    def x(cls, target: int) -> Gate:
        return cls("x", (target,))

    @classmethod
    def y(cls, target: int) -> Gate:
        return cls("y", (target,))

    @classmethod
    def z(cls, target: int) -> Gate:
        return cls("z", (target,))

    @classmethod
    def h(cls, target: int) -> Gate:
        return cls("h", (target,))

    @classmethod
    def i(cls, target: int) -> Gate:
        return cls("i", (target,))

    @classmethod
    def cnot(cls, control: int, target: int) -> Gate:
        return cls("cnot", (control, target))

    def matrix(self) -> np.ndarray:
        """2x2 unitary of a single-qubit gate."""
        if self.name == "ry":
            c, s = math.cos(self.angle / 2), math.sin(self.angle / 2)
            return np.array([[c, s], [-s, c]], dtype=complex)
        if self.name == "cnot":
            raise ValueError("cnot has no single-qubit matrix")
        return _FIXED_MATRICES[self.name]


@dataclass(frozen=True)
class Circuit:
    """Qubit count plus gates, applied to ``|0...0>`` in list order."""

    n_qubits: int
    ops: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ops", tuple(self.ops))

    def __len__(self):
        return len(self.ops)


@dataclass(frozen=True, eq=False)
class QuantumState:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (2**self.n_qubits,):
            raise ValidationError(f"expected {2**self.n_qubits} amplitudes, got shape {amps.shape}")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def encode_bits(bits: Sequence[int]) -> int:
    return sum(int(b) << k for k, b in enumerate(bits))


def decode_index(index: int, n_qubits: int) -> BitVector:
    return tuple((int(index) >> k) & 1 for k in range(n_qubits))


def bits_to_str(bits: Sequence[int]) -> str:
    return "".join(str(int(b)) for b in bits)


def str_to_bits(text: str) -> BitVector:
    if not text or set(text) - {"0", "1"}:
        raise ValidationError(f"not a bit string: {text!r}")
    return tuple(int(ch) for ch in text)


def bit_table(n_qubits: int, indices: np.ndarray | None = None) -> np.ndarray:
    """Bits of each basis index as an array of shape (len(indices), n_qubits)."""
    if indices is None:
        indices = np.arange(2**n_qubits)
    indices = np.asarray(indices, dtype=np.int64)
    return ((indices[:, None] >> np.arange(n_qubits)) & 1).astype(np.int64)


@dataclass(frozen=True, eq=False)
class OutcomeDistribution:
    """Probabilities over all ``2**n_qubits`` bit vectors, stored densely.

    In empirical mode ``counts`` holds the number of shots per outcome and
    ``probabilities`` the fractions ``n_i / N``. ``samples`` optionally keeps
    the per-shot outcome indices in shot order.
    """

    n_qubits: int
    probabilities: np.ndarray
    counts: np.ndarray | None = None
    samples: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        probs = np.asarray(self.probabilities, dtype=float)
        if probs.shape != (2**self.n_qubits,):
            raise ValidationError(f"expected {2**self.n_qubits} probabilities, got shape {probs.shape}")
        probs.flags.writeable = False
        object.__setattr__(self, "probabilities", probs)

    @classmethod
    def from_counts(cls, n_qubits: int, counts, samples=None) -> OutcomeDistribution:
        counts = np.asarray(counts, dtype=np.int64)
        total = int(counts.sum())
        if total < 1:
            raise ValidationError("an empirical distribution needs at least one shot")
        counts.flags.writeable = False
        return cls(n_qubits, counts / total, counts=counts, samples=samples)

    @property
    def mode(self) -> str:
        return "exact" if self.counts is None else "empirical"

    @property
    def shots(self) -> int | None:
        return None if self.counts is None else int(self.counts.sum())

    def support(self, threshold: float = 0.0) -> np.ndarray:
        """Indices of outcomes with probability above ``threshold``."""
        return np.flatnonzero(self.probabilities > threshold)

    def probability(self, bits: Sequence[int] | str) -> float:
        if isinstance(bits, str):
            bits = str_to_bits(bits)
        if len(bits) != self.n_qubits:
            raise ValidationError(f"expected {self.n_qubits} bits, got {len(bits)}")
        return float(self.probabilities[encode_bits(bits)])

    def items(self) -> Iterator[tuple[BitVector, float]]:
        for idx in self.support():
            yield decode_index(idx, self.n_qubits), float(self.probabilities[idx])

    def as_dict(self) -> dict[str, float]:
        return {bits_to_str(bits): p for bits, p in self.items()}


def total_variation(a: OutcomeDistribution, b: OutcomeDistribution) -> float:
    if a.n_qubits != b.n_qubits:
        raise ValidationError("distributions over different qubit counts")
    return 0.5 * float(np.abs(a.probabilities - b.probabilities).sum())


def init_state(n_qubits: int) -> QuantumState:
    if not isinstance(n_qubits, (int, np.integer)) or not 1 <= n_qubits <= MAX_QUBITS:
        raise CapacityError(f"qubit count must be between 1 and {MAX_QUBITS}, got {n_qubits!r}")
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[0] = 1.0
    return QuantumState(int(n_qubits), amps)


@lru_cache(maxsize=256)
def _cnot_permutation(n_qubits: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(2**n_qubits)
    return idx ^ (((idx >> control) & 1) << target)


def _apply_one_qubit(amps: np.ndarray, n_qubits: int, qubit: int, matrix: np.ndarray) -> np.ndarray:
    # Splits the last axis into (high bits, target bit, low bits); leading axes are a batch.
    lead = amps.shape[:-1]
    t = amps.reshape(lead + (2 ** (n_qubits - 1 - qubit), 2, 2**qubit))
    return np.einsum("ab,...ibj->...iaj", matrix, t).reshape(amps.shape)


def apply_gate_array(amps: np.ndarray, n_qubits: int, gate: Gate) -> np.ndarray:
    """Apply ``gate`` to amplitude arrays of shape ``(..., 2**n_qubits)``.

    No validation; callers check indices first.
    """
    if gate.name == "cnot":
        control, target = gate.qubits
        return amps[..., _cnot_permutation(n_qubits, control, target)]
    if gate.name == "i":
        return amps.copy()
    return _apply_one_qubit(amps, n_qubits, gate.qubits[0], gate.matrix())


def check_gate(gate: Gate, n_qubits: int) -> None:
    for q in gate.qubits:
        if not 0 <= q < n_qubits:
            raise ValidationError(f"{gate.name} operand q[{q}] out of range for {n_qubits} qubit(s)")
    if gate.name == "cnot" and gate.qubits[0] == gate.qubits[1]:
        raise ValidationError(f"cnot control and target are both q[{gate.qubits[0]}]")
    if gate.angle is not None and not math.isfinite(gate.angle):
        raise ValidationError(f"ry angle must be finite, got {gate.angle}")


def apply_gate(state: QuantumState, gate: Gate) -> QuantumState:
    check_gate(gate, state.n_qubits)
    return QuantumState(state.n_qubits, apply_gate_array(state.amplitudes, state.n_qubits, gate))


def run_circuit(circuit: Circuit) -> QuantumState:
    state = init_state(circuit.n_qubits)
    for gate in circuit.ops:
        check_gate(gate, circuit.n_qubits)
    amps = state.amplitudes
    for gate in circuit.ops:
        amps = apply_gate_array(amps, circuit.n_qubits, gate)
    return QuantumState(circuit.n_qubits, amps)


def exact_distribution(state: QuantumState) -> OutcomeDistribution:
    return OutcomeDistribution(state.n_qubits, np.abs(state.amplitudes) ** 2)


@lru_cache(maxsize=1024)
def circuit_distribution(circuit: Circuit) -> OutcomeDistribution:
    """Cached ``exact_distribution(run_circuit(circuit))``."""
    return exact_distribution(run_circuit(circuit))


# -- seeded per-shot randomness ---------------------------------------------

MEASURE_STREAM = 0
NOISE_STREAM = 1
_PHILOX_WORDS = 4  # uint64 outputs per Philox4x64 counter step


def _check_seed(seed) -> int:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool) or seed < 0:
        raise ValidationError(f"seed must be a non-negative integer, got {seed!r}")
    return int(seed) % 2**64


def derive_seed(seed: int, *path: int) -> int:
    """Child seed for a labelled sub-task, e.g. ``(grid_index, action_index)``."""
    seq = np.random.SeedSequence(_check_seed(seed), spawn_key=tuple(int(p) for p in path))
    return int(seq.generate_state(1, np.uint64)[0])


def shot_uniforms(seed: int, stream: int, start: int, count: int, width: int = 1) -> np.ndarray:
    """Uniforms in [0, 1) for shots ``start .. start+count-1``, shape (count, width).

    Shot ``k`` always receives draws ``k*width .. (k+1)*width - 1`` of a
    counter-based Philox stream keyed by ``(seed, stream)``, so any chunking
    of the shot range reproduces the serial values exactly.
    """
    seed = _check_seed(seed)
    first = start * width
    skip = first % _PHILOX_WORDS
    bitgen = np.random.Philox(counter=first // _PHILOX_WORDS, key=np.array([seed, stream], dtype=np.uint64))
    draws = np.random.Generator(bitgen).random(skip + count * width)[skip:]
    return draws.reshape(count, width)


def _chunks(shots: int, chunk: int) -> list[tuple[int, int]]:
    return [(s, min(chunk, shots - s)) for s in range(0, shots, chunk)]


def inverse_cdf(probabilities: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Outcome index for each uniform ``u`` by inverse-CDF lookup."""
    cdf = np.cumsum(probabilities)
    idx = np.searchsorted(cdf, u, side="right")
    # Round-off can leave cdf[-1] slightly below 1.
    last = int(np.flatnonzero(probabilities > 0)[-1])
    return np.minimum(idx, last)


def check_shots(shots) -> int:
    if not isinstance(shots, (int, np.integer)) or isinstance(shots, bool) or shots < 1:
        raise ValidationError(f"shots must be a positive integer, got {shots!r}")
    return int(shots)


def sample_outcomes(
    state: QuantumState, shots: int, seed: int, *, workers: int = 1, chunk: int = 1 << 16
) -> OutcomeDistribution:
    """Measure all qubits ``shots`` times; returns an empirical distribution.

    Each shot uses its own deterministic uniform, so ``workers > 1`` yields
    exactly the serial result.
    """
    shots = check_shots(shots)
    _check_seed(seed)
    probs = np.abs(state.amplitudes) ** 2

    def draw(span):
        start, count = span
        return inverse_cdf(probs, shot_uniforms(seed, MEASURE_STREAM, start, count)[:, 0])

    spans = _chunks(shots, chunk)
    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(draw, spans))
    else:
        parts = [draw(span) for span in spans]
    samples = np.concatenate(parts)
    counts = np.bincount(samples, minlength=2**state.n_qubits)
    return OutcomeDistribution.from_counts(state.n_qubits, counts, samples=samples)
