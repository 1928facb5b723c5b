"""Placement and greedy SWAP insertion onto a restricted coupling graph."""

from __future__ import annotations

import json
from collections import deque
from collections.abc import Mapping
from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np

from .circuit import SWAP, Circuit, relabel
from .noise import NoiseModel
from .sim import MAX_QUBITS, OutputDistribution, run

PLACEMENTS = ("trivial", "line", "random")
PATH_SEARCH_BUDGET = 200_000


@dataclass(frozen=True)
class ConnectivityGraph:
    num_physical_qubits: int
    edges: tuple[tuple[int, int], ...]
    name: str = ""

    def __post_init__(self) -> None:
        n = self.num_physical_qubits
        if n < 1:
            raise ValueError("a coupling graph needs at least one qubit")
        canon = set()
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValueError(f"self-loop on qubit {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) outside 0..{n - 1}")
            canon.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", tuple(sorted(canon)))
        if not self.is_connected():
            raise ValueError("coupling graph is not connected")

    @cached_property
    def neighbors(self) -> tuple[tuple[int, ...], ...]:
        adj: list[list[int]] = [[] for _ in range(self.num_physical_qubits)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        return tuple(tuple(sorted(v)) for v in adj)

    def degree(self, q: int) -> int:
        return len(self.neighbors[q])

    def has_edge(self, a: int, b: int) -> bool:
        return b in self.neighbors[a]

    def _bfs(self, source: int) -> list[int]:
        parent = [-2] * self.num_physical_qubits
        parent[source] = -1
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for v in self.neighbors[u]:
                if parent[v] == -2:
                    parent[v] = u
                    queue.append(v)
        return parent

    def is_connected(self) -> bool:
        return all(p != -2 for p in self._bfs(0))

    @cached_property
    def _distances(self) -> np.ndarray:
        n = self.num_physical_qubits
        d = np.full((n, n), -1, dtype=int)
        for s in range(n):
            d[s, s] = 0
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for v in self.neighbors[u]:
                    if d[s, v] < 0:
                        d[s, v] = d[s, u] + 1
                        queue.append(v)
        return d

    def distance(self, a: int, b: int) -> int:
        return int(self._distances[a, b])

    def shortest_path(self, a: int, b: int) -> list[int]:
        """A shortest path a..b; at each hop the lowest-index neighbor that stays on a geodesic."""
        path = [a]
        while path[-1] != b:
            u = path[-1]
            path.append(next(v for v in self.neighbors[u] if self.distance(v, b) == self.distance(u, b) - 1))
        return path

    def to_dict(self) -> dict:
        return {"n": self.num_physical_qubits, "edges": [list(e) for e in self.edges]}


def load_coupling_map(source: str | Path) -> ConnectivityGraph:
    """Read ``{"n": int, "edges": [[a, b], ...]}``."""
    path = Path(source)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise ValueError(f"cannot read coupling map {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"coupling map {path} is not valid JSON: {exc}") from exc
    try:
        return ConnectivityGraph(int(data["n"]), tuple(tuple(e) for e in data["edges"]), data.get("name", path.stem))
    except (KeyError, TypeError) as exc:
        raise ValueError(f"coupling map {path} lacks 'n' or 'edges'") from exc


def johannesburg_graph() -> ConnectivityGraph:
    data = json.loads(resources.files("qdc").joinpath("data/johannesburg.json").read_text())
    return ConnectivityGraph(data["n"], tuple(tuple(e) for e in data["edges"]), data["name"])


def fully_connected(n: int) -> ConnectivityGraph:
    return ConnectivityGraph(n, tuple((a, b) for a in range(n) for b in range(a + 1, n)), f"complete{n}")


def line_graph(n: int) -> ConnectivityGraph:
    return ConnectivityGraph(n, tuple((i, i + 1) for i in range(n - 1)), f"line{n}")


def coupling_graph(spec: str | None) -> ConnectivityGraph | None:
    """Resolve a CLI routing value: ``johannesburg``, ``none`` or a JSON file."""
    if spec is None or spec == "none":
        return None
    if spec == "johannesburg":
        return johannesburg_graph()
    return load_coupling_map(spec)


# ------------------------------------------------------------------ placement


def find_simple_path(graph: ConnectivityGraph, length: int, budget: int = PATH_SEARCH_BUDGET) -> list[int] | None:
    """First simple path on ``length`` vertices in DFS order from low indices, or None."""
    if length < 1 or length > graph.num_physical_qubits:
        return None
    steps = 0
    for start in range(graph.num_physical_qubits):
        stack = [(start, [start])]
        while stack:
            steps += 1
            if steps > budget:
                return None
            u, path = stack.pop()
            if len(path) == length:
                return path
            for v in reversed(graph.neighbors[u]):
                if v not in path:
                    stack.append((v, path + [v]))
    return None


def interaction_order(circuit: Circuit) -> list[int]:
    """Logical qubits in path order when the 2-qubit interaction graph is a
    union of paths (a ladder, or a ladder plus gadget ancillas); otherwise 0..n-1."""
    n = circuit.num_qubits
    adj: list[set[int]] = [set() for _ in range(n)]
    for g in circuit.gates:
        if g.kind.arity == 2:
            a, b = g.qubits
            adj[a].add(b)
            adj[b].add(a)
    if any(len(v) > 2 for v in adj):
        return list(range(n))
    order: list[int] = []
    seen: set[int] = set()
    for start in sorted(range(n), key=lambda q: (len(adj[q]) != 1, q)):
        if start in seen:
            continue
        prev, cur = None, start
        while cur is not None and cur not in seen:
            order.append(cur)
            seen.add(cur)
            nxt = [v for v in sorted(adj[cur]) if v != prev and v not in seen]
            prev, cur = cur, (nxt[0] if nxt else None)
        if cur is not None:  # closed a cycle
            return list(range(n))
    return order


def line_subgraph_placement(circuit: Circuit, graph: ConnectivityGraph) -> list[int]:
    """Lay the circuit's interaction path along a simple path of the graph;
    identity mapping if no long enough path is found."""
    n = circuit.num_qubits
    if n > graph.num_physical_qubits:
        raise ValueError(f"{n}-qubit circuit does not fit a {graph.num_physical_qubits}-qubit graph")
    path = find_simple_path(graph, n)
    if path is None:
        return list(range(n))
    mapping = [0] * n
    for logical, physical in zip(interaction_order(circuit), path):
        mapping[logical] = physical
    return mapping


def _place_ancillas(
    mapping: dict[int, int], anchors: Mapping[int, int], graph: ConnectivityGraph
) -> dict[int, int]:
    """Put each anchored qubit on the lowest free neighbor of its partner
    (lowest free qubit overall when the partner's neighbors are taken)."""
    used = set(mapping.values())
    for anc in sorted(anchors):
        home = mapping[anchors[anc]]
        free = [v for v in graph.neighbors[home] if v not in used]
        if not free:
            free = [v for v in range(graph.num_physical_qubits) if v not in used]
        mapping[anc] = free[0]
        used.add(free[0])
    return mapping


def initial_placement(
    circuit: Circuit,
    graph: ConnectivityGraph,
    placement: str = "trivial",
    seed: int = 0,
    anchors: Mapping[int, int] | None = None,
) -> list[int]:
    """Logical -> physical start mapping.

    ``anchors`` maps gadget ancillas to the qubit they feed; under trivial
    placement the other qubits keep their order on 0, 1, 2, ... and each
    ancilla sits next to its partner. Other placements ignore it.
    """
    n = circuit.num_qubits
    if n > graph.num_physical_qubits:
        raise ValueError(f"{n}-qubit circuit does not fit a {graph.num_physical_qubits}-qubit graph")
    if placement == "trivial":
        anchors = dict(anchors or {})
        if any(a not in range(n) or p not in range(n) or p in anchors for a, p in anchors.items()):
            raise ValueError(f"invalid ancilla anchors {anchors}")
        core = [q for q in range(n) if q not in anchors]
        mapping = _place_ancillas({q: i for i, q in enumerate(core)}, anchors, graph)
        return [mapping[q] for q in range(n)]
    if placement == "line":
        return line_subgraph_placement(circuit, graph)
    if placement == "random":
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        return [int(p) for p in rng.permutation(graph.num_physical_qubits)[:n]]
    raise ValueError(f"unknown placement {placement!r}; choose from {PLACEMENTS}")


# -------------------------------------------------------------------- routing


@dataclass(frozen=True)
class RoutedCircuit:
    circuit: Circuit  # over physical qubits
    initial_mapping: tuple[int, ...]  # logical -> physical
    final_mapping: tuple[int, ...]
    swap_count: int
    inserted: frozenset[int] = frozenset()  # positions of routing SWAPs in circuit.gates

    def logical_circuit(self) -> Circuit:
        """Drop the routing SWAPs and map every gate back to logical qubits."""
        n = len(self.initial_mapping)
        p2l = {p: l for l, p in enumerate(self.initial_mapping)}
        gates = []
        for i, g in enumerate(self.circuit.gates):
            if i in self.inserted:
                a, b = g.qubits
                p2l[a], p2l[b] = p2l.get(b), p2l.get(a)
                continue
            gates.append(g.on(*(p2l[q] for q in g.qubits)))
        return Circuit(n, tuple(gates), self.circuit.label)

    def active_qubits(self) -> list[int]:
        used = set(self.initial_mapping)
        for g in self.circuit.gates:
            used.update(g.qubits)
        return sorted(used)


def route(
    circuit: Circuit,
    graph: ConnectivityGraph,
    seed: int = 0,
    placement: str = "trivial",
    anchors: Mapping[int, int] | None = None,
) -> RoutedCircuit:
    """Greedy router: before each distant 2-qubit gate, walk its first qubit
    along a shortest path with d-1 SWAPs until the pair is adjacent."""
    mapping = initial_placement(circuit, graph, placement, seed, anchors)
    l2p = list(mapping)
    p2l = {p: l for l, p in enumerate(l2p)}
    gates = []
    inserted = set()
    for g in circuit.gates:
        if g.kind.arity == 2:
            a, b = (l2p[q] for q in g.qubits)
            if not graph.has_edge(a, b):
                path = graph.shortest_path(a, b)
                for u, v in zip(path[:-2], path[1:-1]):
                    inserted.add(len(gates))
                    gates.append(SWAP(u, v))
                    lu, lv = p2l.get(u), p2l.get(v)
                    if lu is not None:
                        l2p[lu] = v
                    if lv is not None:
                        l2p[lv] = u
                    p2l = {p: l for l, p in enumerate(l2p)}
        gates.append(g.on(*(l2p[q] for q in g.qubits)))
    routed = Circuit(graph.num_physical_qubits, tuple(gates), circuit.label)
    return RoutedCircuit(routed, tuple(mapping), tuple(l2p), len(inserted), frozenset(inserted))


def routed_distribution(
    routed: RoutedCircuit,
    noise: NoiseModel | None = None,
    shots: int | None = None,
    seed: int = 0,
    max_qubits: int = MAX_QUBITS,
) -> OutputDistribution:
    """Simulate only the physical qubits the routed circuit touches, then
    report bits in logical order through the final mapping."""
    active = routed.active_qubits()
    compact = {p: i for i, p in enumerate(active)}
    small = relabel(routed.circuit, compact, len(active))
    dist = run(small, noise, shots=shots, seed=seed, max_qubits=max_qubits)
    return dist.marginal([compact[p] for p in routed.final_mapping])


def routed_executor(
    graph: ConnectivityGraph | None,
    noise: NoiseModel | None = None,
    shots: int | None = None,
    placement: str = "trivial",
    max_qubits: int = MAX_QUBITS,
):
    """``(circuit, seed, anchors) -> OutputDistribution`` that routes before simulating.

    The returned callable also tallies inserted SWAPs in ``.swap_total``.
    """

    def execute(circuit: Circuit, seed: int = 0, anchors: Mapping[int, int] | None = None) -> OutputDistribution:
        if graph is None:
            return run(circuit, noise, shots=shots, seed=seed, max_qubits=max_qubits)
        routed = route(circuit, graph, seed=seed, placement=placement, anchors=anchors)
        execute.swap_total += routed.swap_count
        return routed_distribution(routed, noise, shots=shots, seed=seed, max_qubits=max_qubits)

    execute.swap_total = 0
    return execute


def embeds_as_path(graph: ConnectivityGraph, n: int) -> bool:
    return find_simple_path(graph, n) is not None


