"""Dense density-matrix simulation with moment-scheduled gate and idle noise."""

from __future__ import annotations

import functools
import json
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .circuit import Circuit, Gate, GateKind, H, MEASURE, S_DAG
from .noise import (
    SWAP_DEPOLARIZING_REPEATS,
    NoiseModel,
    ReadoutPovm,
    amplitude_damping_channel,
    dephasing_channel,
    depolarizing_channel,
)

MAX_QUBITS = 12
TRACE_TOL = 1e-10
PSD_SLACK = -1e-9

_SQ2 = 1 / np.sqrt(2)
_S = np.diag([1, 1j])
_HM = np.array([[1, 1], [1, -1]]) * _SQ2
_XM = np.array([[0, 1], [1, 0]])
_PREP = {
    ("Z", 0): np.eye(2),
    ("Z", 1): _XM,
    ("X", 0): _HM,
    ("X", 1): _HM @ _XM,
    ("Y", 0): _S @ _HM,
    ("Y", 1): _S @ _HM @ _XM,
}
_FIXED = {
    GateKind.H: _HM,
    GateKind.X: _XM,
    GateKind.S_DAG: np.diag([1, -1j]),
    # control is the first (most significant) qubit
    GateKind.CNOT: np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]),
    GateKind.SWAP: np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]),
}


def gate_unitary(gate: Gate) -> np.ndarray:
    """Unitary of a gate; PREP maps |0> onto the requested Pauli eigenstate."""
    if gate.kind is GateKind.PREP:
        return _PREP[(gate.axis, gate.eigenindex)].astype(complex)
    if gate.kind is GateKind.MEASURE:
        return np.eye(2, dtype=complex)
    return _FIXED[gate.kind].astype(complex)


def unitary_superop(u: np.ndarray) -> np.ndarray:
    return np.kron(u, u.conj())


@dataclass
class DensityMatrix:
    num_qubits: int
    data: np.ndarray

    @classmethod
    def zero_state(cls, n: int) -> DensityMatrix:
        d = 2**n
        rho = np.zeros((d, d), dtype=complex)
        rho[0, 0] = 1.0
        return cls(n, rho)

    @property
    def trace(self) -> float:
        return float(np.trace(self.data).real)

    @property
    def purity(self) -> float:
        return float(np.real(np.vdot(self.data, self.data)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh((self.data + self.data.conj().T) / 2).min())

    def validate(self, tol: float = TRACE_TOL) -> None:
        if np.max(np.abs(self.data - self.data.conj().T)) > tol:
            raise ValueError("density matrix is not Hermitian")
        if abs(self.trace - 1.0) > tol:
            raise ValueError(f"density matrix trace {self.trace} != 1")
        if self.min_eigenvalue() < PSD_SLACK:
            raise ValueError("density matrix is not positive semidefinite")

    def diagonal(self) -> np.ndarray:
        return np.real(np.diagonal(self.data)).copy()


@dataclass(frozen=True)
class OutputDistribution:
    """Probabilities over big-endian bitstrings (qubit 0 leftmost)."""

    num_bits: int
    probs: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.probs, dtype=float)
        if p.shape != (2**self.num_bits,):
            raise ValueError(f"expected {2**self.num_bits} probabilities, got shape {p.shape}")
        object.__setattr__(self, "probs", p)

    def __getitem__(self, bits: str | int) -> float:
        if isinstance(bits, str):
            if len(bits) != self.num_bits:
                raise ValueError(f"bitstring {bits!r} does not have {self.num_bits} bits")
            bits = int(bits, 2)
        return float(self.probs[bits])

    def total(self) -> float:
        return float(self.probs.sum())

    def marginal(self, bits: Sequence[int]) -> OutputDistribution:
        """Distribution of the listed bit positions, in the listed order."""
        t = self.probs.reshape((2,) * self.num_bits)
        drop = tuple(i for i in range(self.num_bits) if i not in bits)
        t = t.sum(axis=drop)
        kept = sorted(bits)
        t = np.transpose(t, [kept.index(b) for b in bits])
        return OutputDistribution(len(bits), t.reshape(-1))

    def clipped(self) -> OutputDistribution:
        """Negative entries set to zero, then renormalized."""
        p = np.clip(self.probs, 0.0, None)
        return OutputDistribution(self.num_bits, p / p.sum())

    def to_dict(self, threshold: float = 0.0) -> dict[str, float]:
        fmt = f"0{self.num_bits}b"
        return {format(i, fmt): float(p) for i, p in enumerate(self.probs) if abs(p) > threshold}

    @classmethod
    def from_dict(cls, num_bits: int, d: dict[str, float]) -> OutputDistribution:
        p = np.zeros(2**num_bits)
        for k, v in d.items():
            p[int(k, 2)] = v
        return cls(num_bits, p)

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps({"num_bits": self.num_bits, "probs": self.to_dict()}, indent=2, sort_keys=True)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text

    @classmethod
    def from_json(cls, path: str | Path) -> OutputDistribution:
        d = json.loads(Path(path).read_text())
        return cls.from_dict(int(d["num_bits"]), d["probs"])


# ---------------------------------------------------------------- scheduling


@dataclass(frozen=True)
class Moment:
    gates: tuple[int, ...]
    duration: float
    busy: frozenset[int]


def gate_duration(gate: Gate, noise: NoiseModel | None) -> float:
    if gate.duration is not None:
        return gate.duration
    if noise is None:
        return 0.0
    return noise.duration(gate.kind)


def schedule(circuit: Circuit, noise: NoiseModel | None = None) -> list[Moment]:
    """ASAP moments; terminal MEASURE pseudo-gates are not scheduled."""
    level = [0] * circuit.num_qubits
    buckets: dict[int, list[int]] = {}
    for i, g in enumerate(circuit.gates):
        if g.kind is GateKind.MEASURE:
            continue
        m = max(level[q] for q in g.qubits)
        buckets.setdefault(m, []).append(i)
        for q in g.qubits:
            level[q] = m + 1
    moments = []
    for m in sorted(buckets):
        idx = tuple(buckets[m])
        busy = frozenset(q for i in idx for q in circuit.gates[i].qubits)
        duration = max(gate_duration(circuit.gates[i], noise) for i in idx)
        moments.append(Moment(idx, duration, busy))
    return moments


def measure_with_axis(circuit: Circuit) -> Circuit:
    """Replace MEASURE(X) by H, MEASURE(Z) and MEASURE(Y) by S_DAG, H, MEASURE(Z)."""
    gates: list[Gate] = []
    for g in circuit.gates:
        if g.kind is GateKind.MEASURE and g.axis != "Z":
            (q,) = g.qubits
            if g.axis == "Y":
                gates.append(S_DAG(q))
            gates.append(H(q))
            gates.append(MEASURE(q, "Z"))
        else:
            gates.append(g)
    return Circuit(circuit.num_qubits, tuple(gates), circuit.label)


# ---------------------------------------------------------------- simulation


@functools.lru_cache(maxsize=256)
def _gate_superop(gate_key: tuple, depol: float | None) -> np.ndarray:
    kind, axis, eigenindex = gate_key
    u = gate_unitary(Gate(kind, (0,) if kind.arity == 1 else (0, 1), axis, eigenindex))
    s = unitary_superop(u)
    if depol:
        d = depolarizing_channel(depol, kind.arity).superoperator
        repeats = SWAP_DEPOLARIZING_REPEATS if kind is GateKind.SWAP else 1
        for _ in range(repeats):
            s = d @ s
    return s


@functools.lru_cache(maxsize=256)
def _idle_superop(idle_ns: float, t1: float, t2: float) -> np.ndarray:
    return amplitude_damping_channel(idle_ns, t1).then(dephasing_channel(idle_ns, t1, t2)).superoperator


def apply_superop(rho: DensityMatrix, superop: np.ndarray, qubits: Sequence[int]) -> DensityMatrix:
    n = rho.num_qubits
    if len(qubits) == 1:
        data = kernels.apply_superop_1q(rho.data, superop, qubits[0], n)
    elif len(qubits) == 2:
        data = kernels.apply_superop_2q(rho.data, superop, qubits[0], qubits[1], n)
    else:
        raise ValueError("only 1- and 2-qubit operations are supported")
    return DensityMatrix(n, data)


def apply_channel(rho: DensityMatrix, kraus_ops: Sequence[np.ndarray], qubits: Sequence[int]) -> DensityMatrix:
    superop = sum(np.kron(k, np.conj(k)) for k in kraus_ops)
    return apply_superop(rho, superop, qubits)


def simulate(circuit: Circuit, noise: NoiseModel | None = None, max_qubits: int = MAX_QUBITS) -> DensityMatrix:
    """Evolve |0...0><0...0| through the circuit.

    Within a moment: gate unitaries, then depolarizing noise on the acted
    qubits, then amplitude damping and dephasing on every qubit the moment
    leaves idle. Non-Z measurement pseudo-gates are rewritten into rotations
    first; readout noise is applied by :func:`measure_distribution`.
    """
    if circuit.num_qubits > max_qubits:
        raise ValueError(f"{circuit.num_qubits} qubits exceeds the dense simulator cap of {max_qubits}")
    circuit = measure_with_axis(circuit)
    rho = DensityMatrix.zero_state(circuit.num_qubits)
    gate_noise = noise is not None and noise.enabled["gate"]
    idle_noise = noise is not None and noise.enabled["idle"]
    for moment in schedule(circuit, noise):
        for i in moment.gates:
            g = circuit.gates[i]
            depol = None
            if gate_noise:
                depol = noise.depol_1q if g.kind.arity == 1 else noise.depol_2q
            rho = apply_superop(rho, _gate_superop((g.kind, g.axis, g.eigenindex), depol), g.qubits)
        if idle_noise and moment.duration > 0:
            s = _idle_superop(moment.duration, noise.t1, noise.t2)
            for q in range(circuit.num_qubits):
                if q not in moment.busy:
                    rho = apply_superop(rho, s, (q,))
    return rho


def measure_distribution(rho: DensityMatrix, readout: ReadoutPovm | None = None) -> OutputDistribution:
    """Z-basis outcome distribution, optionally through the per-qubit readout POVM."""
    p = rho.diagonal()
    if readout is not None:
        t = p.reshape((2,) * rho.num_qubits)
        c = readout.confusion
        for q in range(rho.num_qubits):
            t = np.moveaxis(np.tensordot(c, t, axes=([1], [q])), 0, q)
        p = t.reshape(-1)
    return OutputDistribution(rho.num_qubits, p)


def sample_counts(dist: OutputDistribution, shots: int, seed: int = 0) -> np.ndarray:
    """Multinomial histogram over all 2^n outcomes."""
    if shots <= 0:
        raise ValueError("shots must be positive")
    p = np.clip(dist.probs, 0.0, None)
    p = p / p.sum()
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return rng.multinomial(shots, p)


def counts_to_dict(counts: np.ndarray, num_bits: int) -> dict[str, int]:
    fmt = f"0{num_bits}b"
    return {format(i, fmt): int(c) for i, c in enumerate(counts) if c}


def run(
    circuit: Circuit,
    noise: NoiseModel | None = None,
    shots: int | None = None,
    seed: int = 0,
    max_qubits: int = MAX_QUBITS,
) -> OutputDistribution:
    """Simulate and read out; ``shots=None`` returns the exact distribution."""
    rho = simulate(circuit, noise, max_qubits=max_qubits)
    dist = measure_distribution(rho, noise.readout_povm() if noise is not None else None)
    if shots is None:
        return dist
    counts = sample_counts(dist, shots, seed)
    return OutputDistribution(dist.num_bits, counts / shots)
