"""Reference implementations that share no code with the package under test.

Everything here is built from explicit full-register matrices (np.kron over
all qubits) and plain loops, so it is slow but easy to audit.
"""

from __future__ import annotations

import itertools
from functools import reduce

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
SDG = np.diag([1, -1j]).astype(complex)
P0 = np.diag([1, 0]).astype(complex)
P1 = np.diag([0, 1]).astype(complex)

ONE_QUBIT = {"H": H, "X": X, "S_DAG": SDG}

EIGVECS = {
    ("X", 0): np.array([1, 1]) / np.sqrt(2),
    ("X", 1): np.array([1, -1]) / np.sqrt(2),
    ("Y", 0): np.array([1, 1j]) / np.sqrt(2),
    ("Y", 1): np.array([1, -1j]) / np.sqrt(2),
    ("Z", 0): np.array([1, 0]),
    ("Z", 1): np.array([0, 1]),
}
PAULI = {"X": X, "Y": Y, "Z": Z}


def kron_all(ops):
    return reduce(np.kron, ops, np.eye(1, dtype=complex))


def embed_1q(u, q, n):
    return kron_all([u if k == q else I2 for k in range(n)])


def cnot_full(c, t, n):
    """|0><0|_c (x) I + |1><1|_c (x) X_t as a full 2^n matrix."""
    a = kron_all([P0 if k == c else I2 for k in range(n)])
    b = kron_all([P1 if k == c else (X if k == t else I2) for k in range(n)])
    return a + b


def swap_full(a, b, n):
    return cnot_full(a, b, n) @ cnot_full(b, a, n) @ cnot_full(a, b, n)


def gate_full(kind, qubits, n, axis=None, eigenindex=None):
    if kind in ONE_QUBIT:
        return embed_1q(ONE_QUBIT[kind], qubits[0], n)
    if kind == "CNOT":
        return cnot_full(qubits[0], qubits[1], n)
    if kind == "SWAP":
        return swap_full(qubits[0], qubits[1], n)
    raise ValueError(kind)


def _rotation_to_z(axis):
    """Unitary V with V|psi_axis^b> = |b> up to phase."""
    return {"X": H, "Y": H @ SDG, "Z": I2}[axis]


def statevector(gates, n):
    """Ideal final state; gates are (kind, qubits, axis, eigenindex) tuples.

    PREP sets a fresh wire to the eigenvector; MEASURE(axis) rotates into the
    Z basis.
    """
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1
    for kind, qubits, axis, b in gates:
        if kind == "PREP_PAULI_EIGENSTATE":
            # wire starts in |0>; map |0> to the eigenvector with a unitary
            v = EIGVECS[(axis, b)].astype(complex)
            w = np.array([-np.conj(v[1]), np.conj(v[0])])
            u = np.column_stack([v, w])
            psi = embed_1q(u, qubits[0], n) @ psi
        elif kind == "MEASURE":
            psi = embed_1q(_rotation_to_z(axis), qubits[0], n) @ psi
        else:
            psi = gate_full(kind, qubits, n) @ psi
    return psi


def circuit_tuples(circuit):
    return [(g.kind.value, tuple(g.qubits), g.axis, g.eigenindex) for g in circuit.gates]


def statevector_probs(circuit):
    psi = statevector(circuit_tuples(circuit), circuit.num_qubits)
    return np.abs(psi) ** 2


# ------------------------------------------------------------------ noise


def depolarizing_kraus(q):
    return [np.sqrt(1 - 3 * q / 4) * I2] + [np.sqrt(q / 4) * P for P in (X, Y, Z)]


def amplitude_damping_kraus(p):
    return [np.array([[1, 0], [0, np.sqrt(1 - p)]], dtype=complex), np.array([[0, np.sqrt(p)], [0, 0]], dtype=complex)]


def phase_damping_kraus(p):
    return [np.array([[1, 0], [0, np.sqrt(1 - p)]], dtype=complex), np.array([[0, 0], [0, np.sqrt(p)]], dtype=complex)]


def apply_local_kraus(rho, kraus, q, n):
    out = np.zeros_like(rho)
    for k in kraus:
        full = embed_1q(k, q, n)
        out += full @ rho @ full.conj().T
    return out


def noisy_density_matrix(circuit, depol_1q, depol_2q, t1_us, t2_us, durations_ns, swap_repeats=3):
    """Brute-force moment-by-moment evolution with full-register Kraus operators.

    Measurement pseudo-gates on non-Z axes are expanded into H / S_DAG+H first
    (each a noisy 1q gate). Scheduling is ASAP per wire.
    """
    n = circuit.num_qubits
    ops = []
    for g in circuit.gates:
        kind = g.kind.value
        if kind == "MEASURE":
            if g.axis == "X":
                ops.append(("H", g.qubits, None, None))
            elif g.axis == "Y":
                ops.append(("S_DAG", g.qubits, None, None))
                ops.append(("H", g.qubits, None, None))
            continue
        ops.append((kind, tuple(g.qubits), g.axis, g.eigenindex))
    # ASAP layering
    level = [0] * n
    layers: dict[int, list] = {}
    for op in ops:
        lv = max(level[q] for q in op[1])
        layers.setdefault(lv, []).append(op)
        for q in op[1]:
            level[q] = lv + 1
    rho = np.zeros((2**n, 2**n), dtype=complex)
    rho[0, 0] = 1
    inv_tphi = 1 / t2_us - 1 / (2 * t1_us)
    for lv in sorted(layers):
        busy = set()
        longest = 0.0
        for kind, qubits, axis, b in layers[lv]:
            busy.update(qubits)
            longest = max(longest, durations_ns[kind])
            if kind == "PREP_PAULI_EIGENSTATE":
                v = EIGVECS[(axis, b)].astype(complex)
                w = np.array([-np.conj(v[1]), np.conj(v[0])])
                u = embed_1q(np.column_stack([v, w]), qubits[0], n)
            else:
                u = gate_full(kind, qubits, n)
            rho = u @ rho @ u.conj().T
            if len(qubits) == 1:
                rho = apply_local_kraus(rho, depolarizing_kraus(depol_1q), qubits[0], n)
            else:
                for _ in range(swap_repeats if kind == "SWAP" else 1):
                    for q in qubits:
                        rho = apply_local_kraus(rho, depolarizing_kraus(depol_2q), q, n)
        if longest > 0:
            p_ad = 1 - np.exp(-longest * 1e-3 / t1_us)
            p_pd = 1 - np.exp(-2 * longest * 1e-3 * inv_tphi)
            for q in range(n):
                if q not in busy:
                    rho = apply_local_kraus(rho, amplitude_damping_kraus(p_ad), q, n)
                    rho = apply_local_kraus(rho, phase_damping_kraus(p_pd), q, n)
    return rho


def readout_probs(rho, gamma):
    """Diagonal pushed through the per-qubit POVM {I - E, E}, E = diag(0, 1 - gamma)."""
    n = int(np.log2(rho.shape[0]))
    e1 = np.diag([0.0, 1 - gamma])
    e0 = np.eye(2) - e1
    probs = np.zeros(2**n)
    for idx, bits in enumerate(itertools.product((0, 1), repeat=n)):
        effect = kron_all([e1 if b else e0 for b in bits])
        probs[idx] = np.real(np.trace(effect @ rho))
    return probs


# ------------------------------------------------------------- fidelities


def haar_state(d, rng):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)


def monte_carlo_average_fidelity(kraus, d, samples, rng):
    """Mean <psi| E(|psi><psi|) |psi> over Haar-random pure states."""
    total = 0.0
    for _ in range(samples):
        psi = haar_state(d, rng)
        rho = np.outer(psi, psi.conj())
        out = sum(k @ rho @ k.conj().T for k in kraus)
        total += np.real(psi.conj() @ out @ psi)
    return total / samples


# -------------------------------------------------------- reconstruction


def two_fragment_bell_formula(p_a, p_b):
    """Closed-form two-fragment reconstruction by explicit loops.

    p_a[alpha][s_a, b'] and p_b[alpha][b, s_b] are numpy arrays over the
    upstream (final bits, measured bit) and downstream (ancilla bit, final bits)
    outcomes for measurement axis alpha in X, Y, Z.
    """
    gamma = {
        "X": lambda b, bp: 2 * (b == bp) - 1,
        "Y": lambda b, bp: -(2 * (b == bp) - 1),
        "Z": lambda b, bp: 2 * (b == bp),
    }
    first = next(iter(p_a.values()))
    n_sa = first.shape[0]
    n_sb = next(iter(p_b.values())).shape[1]
    out = np.zeros((n_sa, n_sb))
    for alpha in "XYZ":
        for b in (0, 1):
            for bp in (0, 1):
                g = gamma[alpha](b, bp)
                if g == 0:
                    continue
                out += g * np.outer(p_a[alpha][:, bp], p_b[alpha][b, :])
    return out


# ------------------------------------------------------------------ graphs


def has_simple_path(edges, n, length):
    """Brute-force path enumeration over vertex sequences."""
    adj = {v: set() for v in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)

    def extend(path):
        if len(path) == length:
            return True
        return any(extend(path + [v]) for v in adj[path[-1]] if v not in path)

    return any(extend([v]) for v in range(n))


def bfs_distance(edges, n, a, b):
    adj = {v: set() for v in range(n)}
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    frontier, seen, d = {a}, {a}, 0
    while frontier:
        if b in frontier:
            return d
        frontier = {w for u in frontier for w in adj[u]} - seen
        seen |= frontier
        d += 1
    return -1
