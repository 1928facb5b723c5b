"""Gate-level circuits, their wire DAG, and the GHZ ladder benchmark family.

Bitstrings are big-endian throughout the package: qubit 0 is the leftmost bit
and the most significant bit of the basis-state index.
"""

from __future__ import annotations

import enum
import json
import operator
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple


class GateKind(str, enum.Enum):
    H = "H"
    X = "X"
    S_DAG = "S_DAG"
    CNOT = "CNOT"
    SWAP = "SWAP"
    PREP = "PREP_PAULI_EIGENSTATE"
    MEASURE = "MEASURE"

    @property
    def arity(self) -> int:
        return 2 if self in (GateKind.CNOT, GateKind.SWAP) else 1


AXES = ("X", "Y", "Z")


@dataclass(frozen=True)
class Gate:
    """One operation on an ordered tuple of qubits.

    ``axis`` is set for ``PREP`` and ``MEASURE`` and ``eigenindex`` for ``PREP``
    only; ``eigenindex`` 0 selects the +1 eigenvector of the Pauli along
    ``axis``. ``duration`` in nanoseconds overrides the noise model's default
    for this gate kind when given.
    """

    kind: GateKind
    qubits: tuple[int, ...]
    axis: str | None = None
    eigenindex: int | None = None
    duration: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", GateKind(self.kind))
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(self.qubits) != self.kind.arity:
            raise ValueError(f"{self.kind.value} takes {self.kind.arity} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"repeated qubit in {self.kind.value}{self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ValueError(f"negative qubit index in {self.qubits}")
        if self.duration is not None and self.duration < 0:
            raise ValueError("gate duration must be non-negative")
        if self.kind in (GateKind.PREP, GateKind.MEASURE):
            if self.axis not in AXES:
                raise ValueError(f"{self.kind.value} needs an axis in {AXES}, got {self.axis!r}")
        elif self.axis is not None:
            raise ValueError(f"{self.kind.value} takes no axis")
        if self.kind is GateKind.PREP:
            if self.eigenindex not in (0, 1):
                raise ValueError("PREP_PAULI_EIGENSTATE needs eigenindex 0 or 1")
        elif self.eigenindex is not None:
            raise ValueError(f"{self.kind.value} takes no eigenindex")

    def on(self, *qubits: int) -> Gate:
        """Same gate moved onto other qubits."""
        return Gate(self.kind, qubits, self.axis, self.eigenindex, self.duration)

    def to_dict(self) -> dict:
        params: dict = {}
        if self.axis is not None:
            params["axis"] = self.axis
        if self.eigenindex is not None:
            params["eigenindex"] = self.eigenindex
        if self.duration is not None:
            params["duration"] = self.duration
        return {"kind": self.kind.value, "qubits": list(self.qubits), "params": params}

    @classmethod
    def from_dict(cls, d: dict) -> Gate:
        params = d.get("params") or {}
        return cls(
            GateKind(d["kind"]),
            tuple(d["qubits"]),
            axis=params.get("axis"),
            eigenindex=params.get("eigenindex"),
            duration=params.get("duration"),
        )

    def __str__(self) -> str:
        extra = ""
        if self.kind is GateKind.PREP:
            extra = f"[{self.axis}{self.eigenindex}]"
        elif self.kind is GateKind.MEASURE:
            extra = f"[{self.axis}]"
        return f"{self.kind.value}{extra}{list(self.qubits)}"


def H(q: int) -> Gate:
    return Gate(GateKind.H, (q,))


def X(q: int) -> Gate:
    return Gate(GateKind.X, (q,))


def S_DAG(q: int) -> Gate:
    return Gate(GateKind.S_DAG, (q,))


def CNOT(control: int, target: int) -> Gate:
    return Gate(GateKind.CNOT, (control, target))


def SWAP(a: int, b: int) -> Gate:
    return Gate(GateKind.SWAP, (a, b))


def PREP(q: int, axis: str, eigenindex: int) -> Gate:
    return Gate(GateKind.PREP, (q,), axis=axis, eigenindex=eigenindex)


def MEASURE(q: int, axis: str = "Z") -> Gate:
    return Gate(GateKind.MEASURE, (q,), axis=axis)


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...] = ()
    label: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.num_qubits < 1:
            raise ValueError("a circuit needs at least one qubit")
        measured: set[int] = set()
        prepared: set[int] = set()
        touched: set[int] = set()
        for g in self.gates:
            for q in g.qubits:
                if q >= self.num_qubits:
                    raise ValueError(f"{g} acts outside a {self.num_qubits}-qubit register")
                if q in measured:
                    raise ValueError(f"{g} follows the terminal measurement of qubit {q}")
            if g.kind is GateKind.PREP:
                (q,) = g.qubits
                if q in touched or q in prepared:
                    raise ValueError(f"{g} must be the first operation on qubit {q}")
                prepared.add(q)
            if g.kind is GateKind.MEASURE:
                measured.add(g.qubits[0])
            touched.update(g.qubits)

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def append(self, *gates: Gate) -> Circuit:
        return Circuit(self.num_qubits, self.gates + tuple(gates), self.label)

    def wire(self, q: int) -> list[int]:
        """Indices of the gates touching qubit ``q``, in program order."""
        return [i for i, g in enumerate(self.gates) if q in g.qubits]

    def measured_axes(self) -> dict[int, str]:
        return {g.qubits[0]: g.axis for g in self.gates if g.kind is GateKind.MEASURE}

    def count(self, kind: GateKind) -> int:
        return sum(1 for g in self.gates if g.kind is kind)

    def to_dict(self) -> dict:
        return {
            "num_qubits": self.num_qubits,
            "gates": [g.to_dict() for g in self.gates],
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, d: dict) -> Circuit:
        return cls(int(d["num_qubits"]), tuple(Gate.from_dict(g) for g in d["gates"]), d.get("label", ""))

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            Path(path).write_text(text + "\n")
        return text

    @classmethod
    def from_json(cls, source: str | Path) -> Circuit:
        p = Path(source)
        text = p.read_text() if p.exists() else str(source)
        return cls.from_dict(json.loads(text))

    def __str__(self) -> str:
        body = "; ".join(str(g) for g in self.gates)
        return f"Circuit({self.num_qubits}q{', ' + self.label if self.label else ''}: {body})"


def ghz_ladder(m: int) -> Circuit:
    """H on qubit 0, CNOT(i, i+1) for i = 0..m-2, then X on qubits m//2..m-1.

    Any m >= 2 is accepted; only even m gives the two-target GHZ output.
    """
    m = operator.index(m)
    if m < 2:
        raise ValueError(f"ladder needs at least 2 qubits, got {m}")
    gates = [H(0)]
    gates += [CNOT(i, i + 1) for i in range(m - 1)]
    gates += [X(q) for q in range(m // 2, m)]
    return Circuit(m, tuple(gates), label=f"ghz{m}")


def build_ghz_circuit(m: int) -> Circuit:
    """GHZ-type ladder whose ideal output is |0^{m/2}1^{m/2}> + |1^{m/2}0^{m/2}>.

    Every wire between two consecutive CNOTs is a single-edge cut point.
    """
    try:
        m = operator.index(m)
    except TypeError:
        raise ValueError(f"GHZ ladder needs an even qubit count >= 2, got {m!r}") from None
    if m < 2 or m % 2:
        raise ValueError(f"GHZ ladder needs an even qubit count >= 2, got {m!r}")
    return ghz_ladder(m)


def ghz_target_bitstrings(m: int) -> tuple[str, str]:
    half = m // 2
    return "0" * half + "1" * half, "1" * half + "0" * half


# --------------------------------------------------------------------------- DAG


class Vertex(NamedTuple):
    kind: str  # "init" | "gate" | "term"
    index: int  # gate index, or qubit for init/term

    def __str__(self) -> str:
        return f"{self.kind}:{self.index}"


class Edge(NamedTuple):
    source: Vertex
    target: Vertex
    qubit: int


@dataclass(frozen=True)
class CircuitDag:
    """Wire DAG of a circuit: one vertex per gate plus INIT/TERMINAL per wire."""

    num_qubits: int
    gates: tuple[Gate, ...]
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    label: str = ""
    _wire_edges: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        by_wire: dict[int, list[Edge]] = {q: [] for q in range(self.num_qubits)}
        for e in self.edges:
            by_wire[e.qubit].append(e)
        self._wire_edges.update(by_wire)

    def wire_edges(self, q: int) -> list[Edge]:
        return list(self._wire_edges[q])

    def wire_path(self, q: int) -> list[Vertex]:
        """Vertices of wire ``q`` from INIT to TERMINAL."""
        succ = {e.source: e.target for e in self._wire_edges[q]}
        v = Vertex("init", q)
        path = [v]
        while v in succ:
            v = succ[v]
            path.append(v)
        return path

    def successors(self, v: Vertex) -> list[Vertex]:
        return [e.target for e in self.edges if e.source == v]

    def in_degree(self) -> dict[Vertex, int]:
        deg = {v: 0 for v in self.vertices}
        for e in self.edges:
            deg[e.target] += 1
        return deg

    def topological_order(self) -> list[Vertex]:
        """Kahn's algorithm, ties broken by (kind, index); raises on a cycle."""
        deg = self.in_degree()
        out: dict[Vertex, list[Vertex]] = {v: [] for v in self.vertices}
        for e in self.edges:
            out[e.source].append(e.target)
        rank = {"init": 0, "gate": 1, "term": 2}
        ready = sorted((v for v, d in deg.items() if d == 0), key=lambda v: (rank[v.kind], v.index))
        order = []
        while ready:
            v = ready.pop(0)
            order.append(v)
            for w in out[v]:
                deg[w] -= 1
                if deg[w] == 0:
                    ready.append(w)
            ready.sort(key=lambda v: (rank[v.kind], v.index))
        if len(order) != len(self.vertices):
            raise ValueError("circuit DAG contains a cycle")
        return order

    def is_acyclic(self) -> bool:
        try:
            self.topological_order()
        except ValueError:
            return False
        return True

    def edge(self, source: Vertex, target: Vertex, qubit: int) -> Edge:
        e = Edge(source, target, qubit)
        if e not in self.edges:
            raise KeyError(f"no wire edge {source}->{target} on qubit {qubit}")
        return e


def to_dag(circuit: Circuit) -> CircuitDag:
    vertices = [Vertex("init", q) for q in range(circuit.num_qubits)]
    vertices += [Vertex("gate", i) for i in range(len(circuit.gates))]
    vertices += [Vertex("term", q) for q in range(circuit.num_qubits)]
    last = {q: Vertex("init", q) for q in range(circuit.num_qubits)}
    edges = []
    for i, g in enumerate(circuit.gates):
        v = Vertex("gate", i)
        for q in g.qubits:
            edges.append(Edge(last[q], v, q))
            last[q] = v
    for q in range(circuit.num_qubits):
        edges.append(Edge(last[q], Vertex("term", q), q))
    return CircuitDag(circuit.num_qubits, circuit.gates, tuple(vertices), tuple(edges), circuit.label)


def to_circuit(dag: CircuitDag) -> Circuit:
    """Serialize a DAG back into a gate list in topological order."""
    gates = [dag.gates[v.index] for v in dag.topological_order() if v.kind == "gate"]
    return Circuit(dag.num_qubits, tuple(gates), dag.label)


def wire_sequences(circuit: Circuit) -> dict[int, list[Gate]]:
    return {q: [circuit.gates[i] for i in circuit.wire(q)] for q in range(circuit.num_qubits)}


def relabel(circuit: Circuit, mapping: Sequence[int] | dict[int, int], num_qubits: int) -> Circuit:
    """Move every gate through ``mapping`` (old qubit -> new qubit)."""
    gates = tuple(g.on(*(mapping[q] for q in g.qubits)) for g in circuit.gates)
    return Circuit(num_qubits, gates, circuit.label)


def random_circuit(num_qubits: int, depth: int, rng, kinds: Iterable[GateKind] | None = None) -> Circuit:
    """Random gate list over the unitary gate set (used by property tests and benchmarks)."""
    kinds = [GateKind(k) for k in (kinds or (GateKind.H, GateKind.X, GateKind.S_DAG, GateKind.CNOT, GateKind.SWAP))]
    if num_qubits < 2:
        kinds = [k for k in kinds if k.arity == 1]
    gates = []
    for _ in range(depth):
        kind = kinds[int(rng.integers(len(kinds)))]
        qs = rng.choice(num_qubits, size=kind.arity, replace=False)
        gates.append(Gate(kind, tuple(int(q) for q in qs)))
    return Circuit(num_qubits, tuple(gates), label="random")
