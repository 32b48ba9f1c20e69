"""Symmetric depolarizing noise, one event per qubit operand after each gate.

With probability ``p`` an error site receives X, Y or Z (``p/3`` each). Two
independent routes compute the resulting outcome statistics:

* trajectory sampling draws an error pattern per shot and measures the
  resulting pure state;
* :func:`exact_noisy_distribution` enumerates every error pattern and mixes
  the ideal outcome distributions with their weights.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ValidationError
from .statevector import (
    MEASURE_STREAM,
    NOISE_STREAM,
    BitVector,
    Circuit,
    Gate,
    OutcomeDistribution,
    apply_gate_array,
    check_gate,
    check_shots,
    decode_index,
    exact_distribution,
    inverse_cdf,
    run_circuit,
    shot_uniforms,
)

MAX_BRANCHES = 10**7

NONE, X_ERR, Y_ERR, Z_ERR = 0, 1, 2, 3
_PAULI_NAMES = {X_ERR: "x", Y_ERR: "y", Z_ERR: "z"}


@dataclass(frozen=True)
class NoiseModel:
    per_op_error_prob: float = 0.0

    def __post_init__(self):
        p = float(self.per_op_error_prob)
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"error probability must lie in [0, 1], got {self.per_op_error_prob!r}")
        object.__setattr__(self, "per_op_error_prob", p)

    @property
    def noiseless(self) -> bool:
        return self.per_op_error_prob == 0.0


def error_sites(circuit: Circuit) -> list[tuple[int, int]]:
    """``(gate index, qubit)`` for every operand of every gate, in circuit order."""
    return [(g, q) for g, gate in enumerate(circuit.ops) for q in gate.qubits]


def _validated(circuit: Circuit) -> Circuit:
    if not 1 <= circuit.n_qubits:
        raise ValidationError("a circuit needs at least one qubit")
    for gate in circuit.ops:
        check_gate(gate, circuit.n_qubits)
    return circuit


def simulate_patterns(circuit: Circuit, patterns: np.ndarray) -> np.ndarray:
    """Final amplitudes for each row of ``patterns`` (shape (B, n_sites)).

    Row entries are NONE/X_ERR/Y_ERR/Z_ERR; the Pauli is applied right after
    the gate owning the site.
    """
    n = circuit.n_qubits
    patterns = np.asarray(patterns, dtype=np.int8).reshape(-1, len(error_sites(circuit)))
    amps = np.zeros((patterns.shape[0], 2**n), dtype=complex)
    amps[:, 0] = 1.0
    site = 0
    for gate in circuit.ops:
        amps = apply_gate_array(amps, n, gate)
        for q in gate.qubits:
            column = patterns[:, site]
            for code, name in _PAULI_NAMES.items():
                rows = np.flatnonzero(column == code)
                if rows.size:
                    amps[rows] = apply_gate_array(amps[rows], n, Gate(name, (q,)))
            site += 1
    return amps


def _draw_patterns(p: float, u: np.ndarray) -> np.ndarray:
    hit = u < p
    # Reuse the uniform below p to pick the Pauli: [0, p/3) -> X, [p/3, 2p/3) -> Y, rest -> Z.
    which = np.zeros(u.shape, dtype=np.int8)
    if p > 0:
        which[hit] = 1 + np.minimum((3.0 * u[hit] / p).astype(np.int64), 2)
    return which


def _noisy_sample_span(circuit: Circuit, p: float, seed: int, start: int, count: int) -> np.ndarray:
    n_sites = len(error_sites(circuit))
    u_meas = shot_uniforms(seed, MEASURE_STREAM, start, count)[:, 0]
    if n_sites == 0 or p == 0.0:
        # Same arithmetic path as ideal sampling, so p = 0 matches it bit for bit.
        return inverse_cdf(np.abs(run_circuit(circuit).amplitudes) ** 2, u_meas)
    patterns = _draw_patterns(p, shot_uniforms(seed, NOISE_STREAM, start, count, width=n_sites))
    if n_sites <= 31:
        # Base-4 codes fit in int64; 1-D unique is far cheaper than row-wise unique.
        codes = patterns.astype(np.int64) @ (4 ** np.arange(n_sites, dtype=np.int64))
        _, first, inverse = np.unique(codes, return_index=True, return_inverse=True)
        unique = patterns[first]
    else:
        unique, inverse = np.unique(patterns, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    probs = np.abs(simulate_patterns(circuit, unique)) ** 2
    dim = probs.shape[1]
    if dim <= 256:
        cdfs = np.cumsum(probs, axis=1)
        idx = (cdfs[inverse] <= u_meas[:, None]).sum(axis=1)
        last = dim - 1 - np.argmax(probs[:, ::-1] > 0, axis=1)
        return np.minimum(idx, last[inverse])
    out = np.empty(count, dtype=np.int64)
    for k in range(unique.shape[0]):
        members = np.flatnonzero(inverse == k)
        out[members] = inverse_cdf(probs[k], u_meas[members])
    return out


def sample_noisy_outcome(circuit: Circuit, noise: NoiseModel, seed: int, shot_index: int) -> BitVector:
    """One noisy shot; identical to shot ``shot_index`` of a full run with ``seed``."""
    _validated(circuit)
    idx = _noisy_sample_span(circuit, noise.per_op_error_prob, seed, int(shot_index), 1)
    return decode_index(int(idx[0]), circuit.n_qubits)


def noisy_empirical_distribution(
    circuit: Circuit, noise: NoiseModel, shots: int, seed: int, *, workers: int = 1, chunk: int = 1 << 16
) -> OutcomeDistribution:
    shots = check_shots(shots)
    _validated(circuit)
    p = noise.per_op_error_prob
    spans = [(s, min(chunk, shots - s)) for s in range(0, shots, chunk)]

    def run(span):
        return _noisy_sample_span(circuit, p, seed, *span)

    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, spans))
    else:
        parts = [run(span) for span in spans]
    samples = np.concatenate(parts)
    counts = np.bincount(samples, minlength=2**circuit.n_qubits)
    return OutcomeDistribution.from_counts(circuit.n_qubits, counts, samples=samples)


# -- brute-force mixture ----------------------------------------------------


def _check_branch_capacity(circuit: Circuit) -> None:
    n_sites = len(error_sites(circuit))
    if 4**n_sites > MAX_BRANCHES:
        raise CapacityError(
            f"{n_sites} error sites give 4^{n_sites} = {4**n_sites} branches, above the 4^M <= 10^7 bound"
        )


def _merge_equivalent(amps: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Combine branches whose states agree up to a global phase."""
    lead = np.argmax(np.abs(amps) > 1e-9, axis=1)
    phase = amps[np.arange(amps.shape[0]), lead]
    canon = amps * (np.conj(phase) / np.abs(phase))[:, None]
    key = np.round(np.concatenate([canon.real, canon.imag], axis=1), 10) + 0.0
    _, first, inverse = np.unique(key, axis=0, return_index=True, return_inverse=True)
    merged = np.bincount(inverse.reshape(-1), weights=weights, minlength=first.size)
    return canon[first], merged


def noise_branches(circuit: Circuit, noise: NoiseModel, *, merge: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Final branch states and weights of the depolarized circuit.

    Weight of a pattern is the product over sites of ``1-p`` or ``p/3``.
    With ``merge`` branches that end in the same state (up to phase) are
    pooled as they appear, which keeps the mixture exact and small.
    """
    _validated(circuit)
    _check_branch_capacity(circuit)
    p = noise.per_op_error_prob
    n = circuit.n_qubits
    site_weights = np.array([1.0 - p, p / 3, p / 3, p / 3])
    amps = np.zeros((1, 2**n), dtype=complex)
    amps[0, 0] = 1.0
    weights = np.ones(1)
    for gate in circuit.ops:
        amps = apply_gate_array(amps, n, gate)
        for q in gate.qubits:
            branches = [amps] + [apply_gate_array(amps, n, Gate(name, (q,))) for name in ("x", "y", "z")]
            amps = np.concatenate(branches)
            weights = np.concatenate([weights * w for w in site_weights])
            keep = weights > 0
            amps, weights = amps[keep], weights[keep]
            if merge:
                amps, weights = _merge_equivalent(amps, weights)
    return amps, weights


def exact_noisy_distribution(circuit: Circuit, noise: NoiseModel, *, merge: bool = True) -> OutcomeDistribution:
    _check_branch_capacity(circuit)
    if noise.noiseless:
        return exact_distribution(run_circuit(_validated(circuit)))
    amps, weights = noise_branches(circuit, noise, merge=merge)
    probs = weights @ (np.abs(amps) ** 2)
    return OutcomeDistribution(circuit.n_qubits, probs)
