"""Wire cutting: split a circuit DAG into fragments and build their measurement variants.

Each removed wire edge leaves an outgoing leg on the upstream fragment (the
wire is measured along a Pauli axis) and an incoming leg on the downstream
fragment. The incoming side is fed either by half of a Bell pair whose other
half is measured along a Pauli axis (``"bell"``) or by a prepared Pauli
eigenstate (``"eigenstate"``).
"""

from __future__ import annotations

import itertools
import json
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .circuit import (
    AXES,
    CNOT,
    MEASURE,
    PREP,
    Circuit,
    CircuitDag,
    Edge,
    Gate,
    H,
    Vertex,
    ghz_ladder,
    to_dag,
)
from .noise import NoiseModel
from .sim import OutputDistribution, run

GADGETS = ("bell", "eigenstate")


@dataclass(frozen=True)
class CutSpec:
    """Wire edges to remove, kept in a canonical order (the cut index)."""

    cut_edges: tuple[Edge, ...]

    def __post_init__(self) -> None:
        rank = {"init": 0, "gate": 1, "term": 2}
        key = lambda e: (rank[e.source.kind], e.source.index, e.qubit)  # noqa: E731
        edges = tuple(sorted(set(self.cut_edges), key=key))
        if len(edges) != len(self.cut_edges):
            raise ValueError("duplicate cut edge")
        object.__setattr__(self, "cut_edges", edges)

    def __len__(self) -> int:
        return len(self.cut_edges)

    def to_list(self) -> list[dict]:
        def gate_index(v: Vertex):
            return v.index if v.kind == "gate" else None

        return [
            {"source_gate_index": gate_index(e.source), "target_gate_index": gate_index(e.target), "qubit": e.qubit}
            for e in self.cut_edges
        ]

    @classmethod
    def from_list(cls, dag: CircuitDag, items: Sequence[dict]) -> CutSpec:
        """Resolve ``{source_gate_index, target_gate_index, qubit}`` records against ``dag``.

        A null source/target index stands for the wire's INIT/TERMINAL vertex.
        """
        edges = []
        for item in items:
            q = int(item["qubit"])
            s, t = item.get("source_gate_index"), item.get("target_gate_index")
            src = Vertex("gate", int(s)) if s is not None else Vertex("init", q)
            tgt = Vertex("gate", int(t)) if t is not None else Vertex("term", q)
            edges.append(dag.edge(src, tgt, q))
        return cls(tuple(edges))

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps(self.to_list(), indent=2)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text


def wire_cut(dag: CircuitDag, qubit: int, after_gate: int) -> Edge:
    """The wire edge of ``qubit`` leaving gate ``after_gate``."""
    for e in dag.wire_edges(qubit):
        if e.source == Vertex("gate", after_gate):
            return e
    raise KeyError(f"gate {after_gate} does not act on qubit {qubit}")


@dataclass(frozen=True)
class Leg:
    cut: int  # index into CutSpec.cut_edges
    qubit: int  # original wire
    local: int  # local qubit inside the fragment


@dataclass(frozen=True)
class Fragment:
    index: int
    sub_circuit: Circuit
    incoming_legs: tuple[Leg, ...]
    outgoing_legs: tuple[Leg, ...]
    final_qubits: tuple[int, ...]  # original qubits whose terminal segment lives here
    final_locals: tuple[int, ...]
    gate_indices: tuple[int, ...]  # positions in the original gate list
    wires: tuple[int, ...]  # original wire of each local qubit

    @property
    def n_in(self) -> int:
        return len(self.incoming_legs)

    @property
    def n_out(self) -> int:
        return len(self.outgoing_legs)

    @property
    def p(self) -> int:
        return len(self.final_qubits)

    @property
    def num_logical(self) -> int:
        return self.sub_circuit.num_qubits

    def variant_count(self, gadget: str = "bell") -> int:
        per_in = 3 if gadget == "bell" else 6
        return per_in**self.n_in * 3**self.n_out

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "circuit": self.sub_circuit.to_dict(),
            "incoming_legs": [vars(leg) for leg in self.incoming_legs],
            "outgoing_legs": [vars(leg) for leg in self.outgoing_legs],
            "final_qubits": list(self.final_qubits),
            "final_locals": list(self.final_locals),
            "gate_indices": list(self.gate_indices),
            "wires": list(self.wires),
        }

    @classmethod
    def from_dict(cls, d: dict) -> Fragment:
        return cls(
            int(d["index"]),
            Circuit.from_dict(d["circuit"]),
            tuple(Leg(**leg) for leg in d["incoming_legs"]),
            tuple(Leg(**leg) for leg in d["outgoing_legs"]),
            tuple(d["final_qubits"]),
            tuple(d["final_locals"]),
            tuple(d["gate_indices"]),
            tuple(d["wires"]),
        )


def _components(vertices: Sequence[Vertex], edges: Sequence[Edge]) -> dict[Vertex, int]:
    parent = {v: v for v in vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for e in edges:
        a, b = find(e.source), find(e.target)
        if a != b:
            parent[a] = b
    roots: dict[Vertex, int] = {}
    label = {}
    for v in vertices:
        label[v] = roots.setdefault(find(v), len(roots))
    return label


def cut(dag: CircuitDag, spec: CutSpec, allow_empty: bool = False) -> list[Fragment]:
    """Remove the cut edges and return the resulting fragments.

    Fragments are ordered by their smallest original qubit, then their first
    gate. ``allow_empty`` accepts a spec without cuts and returns the whole
    circuit as a single fragment.
    """
    cut_edges = spec.cut_edges
    if not cut_edges and not allow_empty:
        raise ValueError("a cut needs at least one wire edge (K >= 2 fragments)")
    for e in cut_edges:
        if e not in dag.edges:
            raise ValueError(f"{e} is not a wire edge of the circuit DAG")
    cut_set = set(cut_edges)
    kept = [e for e in dag.edges if e not in cut_set]
    comp = _components(dag.vertices, kept)
    for e in cut_edges:
        if comp[e.source] == comp[e.target]:
            raise ValueError(f"cutting {e.source}->{e.target} on qubit {e.qubit} does not disconnect the circuit")
    cut_index = {e: i for i, e in enumerate(cut_edges)}

    # wire segments: (qubit, vertices, incoming cut, outgoing cut)
    segments = []
    for q in range(dag.num_qubits):
        path = dag.wire_path(q)
        succ_edge = {e.source: e for e in dag.wire_edges(q)}
        current: list[Vertex] = [path[0]]
        incoming = None
        for v in path[:-1]:
            e = succ_edge[v]
            if e in cut_set:
                segments.append((q, current, incoming, cut_index[e]))
                current, incoming = [], cut_index[e]
            current.append(e.target)
        segments.append((q, current, incoming, None))

    groups: dict[int, list] = {}
    for seg in segments:
        groups.setdefault(comp[seg[1][0]], []).append(seg)
    for c in set(comp.values()):
        if c not in groups:
            raise ValueError("circuit DAG has a component without wire segments")

    def order_key(segs):
        gates = [v.index for s in segs for v in s[1] if v.kind == "gate"]
        return (min(s[0] for s in segs), min(gates) if gates else len(dag.gates))

    ordered = sorted(groups.values(), key=order_key)
    if len(ordered) < 2 and not allow_empty:
        raise ValueError("cut does not split the circuit into at least two fragments")

    fragments = []
    for fi, segs in enumerate(ordered):
        segs = sorted(segs, key=lambda s: (s[0], s[1][0].kind != "init", s[2] if s[2] is not None else -1))
        local_of: dict[tuple[Vertex, int], int] = {}
        for li, (q, verts, _, _) in enumerate(segs):
            for v in verts:
                local_of[(v, q)] = li
        gate_idx = sorted({v.index for s in segs for v in s[1] if v.kind == "gate"})
        gates = []
        for gi in gate_idx:
            g = dag.gates[gi]
            gates.append(g.on(*(local_of[(Vertex("gate", gi), q)] for q in g.qubits)))
        sub = Circuit(len(segs), tuple(gates), label=f"{dag.label}:frag{fi}" if dag.label else f"frag{fi}")
        incoming = sorted((Leg(s[2], s[0], li) for li, s in enumerate(segs) if s[2] is not None), key=lambda l: l.cut)
        outgoing = sorted((Leg(s[3], s[0], li) for li, s in enumerate(segs) if s[3] is not None), key=lambda l: l.cut)
        finals = sorted((s[0], li) for li, s in enumerate(segs) if s[3] is None)
        fragments.append(
            Fragment(
                index=fi,
                sub_circuit=sub,
                incoming_legs=tuple(incoming),
                outgoing_legs=tuple(outgoing),
                final_qubits=tuple(q for q, _ in finals),
                final_locals=tuple(li for _, li in finals),
                gate_indices=tuple(gate_idx),
                wires=tuple(s[0] for s in segs),
            )
        )
    return fragments


def fragment_circuit(circuit: Circuit, spec: CutSpec | None) -> list[Fragment]:
    """Cut ``circuit``; an empty or missing spec yields the whole circuit as one fragment."""
    dag = to_dag(circuit)
    if spec is None or len(spec) == 0:
        return cut(dag, CutSpec(()), allow_empty=True)
    return cut(dag, spec)


def ghz_fragment_sizes(m: int, k: int) -> list[int]:
    """Final-qubit counts of a balanced k-way split; earlier fragments take the remainder."""
    if not 1 <= k <= m:
        raise ValueError(f"fragment count must lie in [1, {m}], got {k}")
    base, extra = divmod(m, k)
    return [base + 1 if i < extra else base for i in range(k)]


def balanced_ghz_cutspec(m: int, k: int) -> CutSpec:
    """k-1 ladder cuts giving fragments whose final-qubit counts differ by at most one.

    A fragment boundary before qubit j cuts the wire of qubit j right after
    CNOT(j-1, j). ``k = 1`` returns an empty spec.
    """
    if k < 1 or k > m:
        raise ValueError(f"fragment count must lie in [1, {m}], got {k}")
    dag = to_dag(ghz_ladder(m))
    sizes = ghz_fragment_sizes(m, k)
    boundaries = list(itertools.accumulate(sizes))[:-1]
    # gate index of CNOT(j-1, j) is j (H is gate 0)
    return CutSpec(tuple(wire_cut(dag, j, j) for j in boundaries))


# ----------------------------------------------------------------- variants


@dataclass(frozen=True)
class FragmentVariant:
    fragment_index: int
    axes_in: tuple[str, ...]
    axes_out: tuple[str, ...]
    circuit: Circuit
    gadget: str = "bell"
    prep_bits: tuple[int, ...] = ()  # eigenstate gadget only
    ancilla_partners: tuple[tuple[int, int], ...] = ()  # (ancilla, fragment qubit it feeds)

    @property
    def key(self) -> tuple:
        return (self.axes_in, self.axes_out, self.prep_bits)


def generate_variants(fragment: Fragment, gadget: str = "bell") -> list[FragmentVariant]:
    """All axis assignments for the fragment's legs, with gadgets materialized.

    Bell gadget: ancilla k (appended after the logical qubits, in incoming-leg
    order) and the leg's local qubit are entangled by H + CNOT before the body;
    the ancilla is measured along ``axes_in[k]``. Outgoing legs are measured
    along ``axes_out``.
    """
    if gadget not in GADGETS:
        raise ValueError(f"gadget must be one of {GADGETS}")
    f = fragment
    L = f.num_logical
    variants = []
    for axes_in in itertools.product(AXES, repeat=f.n_in):
        bit_choices = itertools.product((0, 1), repeat=f.n_in) if gadget == "eigenstate" else [()]
        for prep_bits in bit_choices:
            for axes_out in itertools.product(AXES, repeat=f.n_out):
                gates: list[Gate] = []
                if gadget == "bell":
                    n_qubits = L + f.n_in
                    for k, leg in enumerate(f.incoming_legs):
                        gates += [H(L + k), CNOT(L + k, leg.local)]
                else:
                    n_qubits = L
                    for leg, axis, b in zip(f.incoming_legs, axes_in, prep_bits):
                        gates.append(PREP(leg.local, axis, b))
                gates += f.sub_circuit.gates
                gates += [MEASURE(leg.local, a) for leg, a in zip(f.outgoing_legs, axes_out)]
                if gadget == "bell":
                    gates += [MEASURE(L + k, a) for k, a in enumerate(axes_in)]
                label = f"{f.sub_circuit.label}[{''.join(axes_in)}|{''.join(map(str, prep_bits))}|{''.join(axes_out)}]"
                circ = Circuit(n_qubits, tuple(gates), label=label)
                partners = tuple((L + k, leg.local) for k, leg in enumerate(f.incoming_legs)) if gadget == "bell" else ()
                variants.append(FragmentVariant(f.index, axes_in, axes_out, circ, gadget, tuple(prep_bits), partners))
    return variants


# ------------------------------------------------------------ distributions


@dataclass(frozen=True)
class FragmentDistribution:
    """Probability tensor of one fragment over all its variants.

    Axes: (incoming-leg axes..., outgoing-leg axes..., b..., s..., b'...), with
    3-valued axis indices (X, Y, Z) and 2-valued bits. ``b`` are Bell-ancilla
    outcomes (or prepared eigenindices for the eigenstate gadget), ``s`` the
    fragment's final qubits in original-qubit order and ``b'`` the outgoing-leg
    outcomes.
    """

    fragment_index: int
    tensor: np.ndarray
    in_cuts: tuple[int, ...]
    out_cuts: tuple[int, ...]
    final_qubits: tuple[int, ...]
    gadget: str = "bell"

    def __post_init__(self) -> None:
        t = np.asarray(self.tensor, dtype=float)
        n_in, n_out, p = len(self.in_cuts), len(self.out_cuts), len(self.final_qubits)
        shape = (3,) * (n_in + n_out) + (2,) * (n_in + p + n_out)
        if t.shape != shape:
            raise ValueError(f"fragment tensor has shape {t.shape}, expected {shape}")
        object.__setattr__(self, "tensor", t)

    @property
    def n_in(self) -> int:
        return len(self.in_cuts)

    @property
    def n_out(self) -> int:
        return len(self.out_cuts)

    def slice_sums(self) -> np.ndarray:
        """Total probability of every variant (eigenstate gadget: per preparation)."""
        t = self.tensor
        n_axes = self.n_in + self.n_out
        if self.gadget == "bell":
            return t.reshape(3**n_axes, -1).sum(axis=1)
        lead = t.reshape((3**n_axes, 2**self.n_in, -1))
        return lead.sum(axis=2).reshape(-1)

    def to_dict(self) -> dict:
        return {
            "fragment_index": self.fragment_index,
            "gadget": self.gadget,
            "in_cuts": list(self.in_cuts),
            "out_cuts": list(self.out_cuts),
            "final_qubits": list(self.final_qubits),
            "index_order": ["axes_in"] * self.n_in
            + ["axes_out"] * self.n_out
            + ["b"] * self.n_in
            + ["s"] * len(self.final_qubits)
            + ["b_prime"] * self.n_out,
            "shape": list(self.tensor.shape),
            "values": self.tensor.reshape(-1).tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> FragmentDistribution:
        tensor = np.asarray(d["values"], dtype=float).reshape(d["shape"])
        return cls(
            int(d["fragment_index"]),
            tensor,
            tuple(d["in_cuts"]),
            tuple(d["out_cuts"]),
            tuple(d["final_qubits"]),
            d.get("gadget", "bell"),
        )


Executor = Callable[[Circuit, int, Mapping[int, int]], OutputDistribution]


def collect_distributions(
    fragment: Fragment,
    variants: Sequence[FragmentVariant],
    noise: NoiseModel | None = None,
    shots: int | None = None,
    seed: int = 0,
    executor: Executor | None = None,
) -> FragmentDistribution:
    """Run every variant and assemble the fragment tensor.

    ``executor(circuit, seed, ancilla_partners)`` returns the circuit's output
    distribution over its own qubits (the partner map lets a router keep each
    gadget ancilla next to the qubit it feeds); the default simulates it directly with ``noise`` and
    ``shots`` (``None`` means exact).
    """
    if not variants:
        raise ValueError("no variants to collect")
    gadget = variants[0].gadget
    f = fragment
    if any(v.fragment_index != f.index or v.gadget != gadget for v in variants):
        raise ValueError("variants belong to different fragments or gadgets")
    expected = f.variant_count(gadget)
    if len({v.key for v in variants}) != expected or len(variants) != expected:
        raise ValueError(f"fragment {f.index} needs {expected} distinct variants, got {len(variants)}")
    if executor is None:

        def executor(circ: Circuit, s: int, partners: Mapping[int, int]) -> OutputDistribution:
            return run(circ, noise, shots=shots, seed=s)

    L = f.num_logical
    n_in, n_out = f.n_in, f.n_out
    if gadget == "bell":
        bit_order = [L + k for k in range(n_in)] + list(f.final_locals) + [leg.local for leg in f.outgoing_legs]
    else:
        bit_order = list(f.final_locals) + [leg.local for leg in f.outgoing_legs]
    tensor = np.zeros((3,) * (n_in + n_out) + (2,) * (n_in + f.p + n_out))
    seeds = np.random.SeedSequence([seed, f.index]).generate_state(len(variants), dtype=np.uint32)
    axis_id = {a: i for i, a in enumerate(AXES)}
    for v, s in zip(variants, seeds):
        dist = executor(v.circuit, int(s), dict(v.ancilla_partners))
        probs = dist.marginal(bit_order).probs
        idx = tuple(axis_id[a] for a in v.axes_in + v.axes_out)
        if gadget == "bell":
            tensor[idx] = probs.reshape(tensor.shape[n_in + n_out :])
        else:
            tensor[idx + v.prep_bits] = probs.reshape(tensor.shape[n_in + n_out + n_in :])
    return FragmentDistribution(
        f.index,
        tensor,
        tuple(leg.cut for leg in f.incoming_legs),
        tuple(leg.cut for leg in f.outgoing_legs),
        f.final_qubits,
        gadget,
    )
