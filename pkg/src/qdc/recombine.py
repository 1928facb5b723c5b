"""Recombination tensor network: fragment tensors joined through gamma tensors.

Index labels are tuples: ``("alpha", c)`` (3-valued measurement axis of cut
c), ``("b", c)`` (downstream Bell-ancilla outcome or prepared eigenindex),
``("bp", c)`` (upstream measured outcome) and ``("s", q)`` (final bit of
original qubit q). The axis label is shared by three tensors: both fragments
and the cut's gamma tensor.

Step cost counts scalar multiplications of a pairwise contraction, i.e. the
product of the dimensions of every index carried by either operand. For a
chain contracted one bitstring at a time this gives 12, 36, 12, ..., 36, 12, 6.
"""

from __future__ import annotations

import json
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

from .cutting import FragmentDistribution
from .pauli import GammaVariant, gamma_tensor
from .sim import OutputDistribution

MAX_EXTERNAL_BITS = 24

Label = tuple


def label_dim(label: Label) -> int:
    return 3 if label[0] == "alpha" else 2


def _str_label(label: Label) -> str:
    return f"{label[0]}{label[1]}"


@dataclass
class TensorNode:
    name: str
    kind: str  # "fragment" | "gamma"
    labels: tuple[Label, ...]
    tensor: np.ndarray


@dataclass
class RecombinationNetwork:
    fragment_nodes: list[TensorNode]
    connecting_nodes: list[TensorNode]
    edges: list[tuple[int, int, int]]  # (fragment position, gamma position, cut)
    final_qubits: tuple[int, ...]
    upstream: dict[int, int] = field(default_factory=dict)  # cut -> fragment position
    downstream: dict[int, int] = field(default_factory=dict)

    @property
    def nodes(self) -> list[TensorNode]:
        return self.fragment_nodes + self.connecting_nodes

    @property
    def K(self) -> int:
        return len(self.fragment_nodes)

    @property
    def M(self) -> int:
        return len(self.connecting_nodes)

    @property
    def external_labels(self) -> tuple[Label, ...]:
        return tuple(("s", q) for q in self.final_qubits)

    def fragment_graph(self) -> dict[int, list[int]]:
        """Fragment adjacency through cuts (with multiplicity)."""
        adj: dict[int, list[int]] = {i: [] for i in range(self.K)}
        for c, u in self.upstream.items():
            d = self.downstream[c]
            adj[u].append(d)
            adj[d].append(u)
        return adj

    def is_chain(self) -> bool:
        if self.M != self.K - 1:
            return False
        adj = self.fragment_graph()
        if any(len(v) > 2 or len(set(v)) != len(v) for v in adj.values()):
            return False
        return _connected(self.structure(per_bitstring=False)[0])

    def structure(self, per_bitstring: bool = True) -> tuple[list[tuple[Label, ...]], tuple[Label, ...]]:
        """Label sets of all nodes and the output labels, for planning."""
        ext = set(self.external_labels)
        labels = []
        for node in self.nodes:
            if per_bitstring:
                labels.append(tuple(l for l in node.labels if l not in ext))
            else:
                labels.append(node.labels)
        out = () if per_bitstring else self.external_labels
        return labels, out


def build_network(dists: Sequence[FragmentDistribution]) -> RecombinationNetwork:
    """One gamma node per cut, wired to the producing and consuming fragments."""
    if not dists:
        raise ValueError("no fragment distributions")
    gadgets = {d.gadget for d in dists}
    if len(gadgets) != 1:
        raise ValueError("fragment distributions mix gadget types")
    gadget = gadgets.pop()
    upstream: dict[int, int] = {}
    downstream: dict[int, int] = {}
    for pos, d in enumerate(dists):
        for c in d.out_cuts:
            if c in upstream:
                raise ValueError(f"cut {c} has two upstream fragments")
            upstream[c] = pos
        for c in d.in_cuts:
            if c in downstream:
                raise ValueError(f"cut {c} has two downstream fragments")
            downstream[c] = pos
    if set(upstream) != set(downstream):
        dangling = sorted(set(upstream) ^ set(downstream))
        raise ValueError(f"dangling cut legs: {dangling}")
    finals = [q for d in dists for q in d.final_qubits]
    if len(set(finals)) != len(finals):
        raise ValueError("a final qubit appears in two fragments")

    frag_nodes = []
    for pos, d in enumerate(dists):
        labels = (
            tuple(("alpha", c) for c in d.in_cuts)
            + tuple(("alpha", c) for c in d.out_cuts)
            + tuple(("b", c) for c in d.in_cuts)
            + tuple(("s", q) for q in d.final_qubits)
            + tuple(("bp", c) for c in d.out_cuts)
        )
        frag_nodes.append(TensorNode(f"F{d.fragment_index}", "fragment", labels, d.tensor))

    if gadget == "bell":
        weights = gamma_tensor(GammaVariant.BELL).values
    else:
        weights = gamma_tensor(GammaVariant.TILDE).values / 2.0
    gamma_nodes = []
    edges = []
    for gi, c in enumerate(sorted(upstream)):
        gamma_nodes.append(TensorNode(f"gamma{c}", "gamma", (("alpha", c), ("b", c), ("bp", c)), np.array(weights)))
        edges.append((upstream[c], gi, c))
        edges.append((downstream[c], gi, c))
    return RecombinationNetwork(frag_nodes, gamma_nodes, edges, tuple(sorted(finals)), upstream, downstream)


# ---------------------------------------------------------------- planning


@dataclass(frozen=True)
class ContractionStep:
    left: int
    right: int
    result: int
    labels: tuple[Label, ...]
    cost: int


@dataclass(frozen=True)
class ContractionPlan:
    """Pairwise steps over node ids; step t creates node id ``num_inputs + t``."""

    num_inputs: int
    steps: tuple[ContractionStep, ...]
    output: tuple[Label, ...]
    kind: str = "greedy"

    @property
    def costs(self) -> list[int]:
        return [s.cost for s in self.steps]

    @property
    def total_cost(self) -> int:
        return sum(self.costs)

    def to_dict(self, names: Sequence[str] | None = None) -> dict:
        def name(i):
            if names is not None and i < len(names):
                return names[i]
            return f"T{i}"

        return {
            "planner": self.kind,
            "num_inputs": self.num_inputs,
            "output": [_str_label(l) for l in self.output],
            "steps": [
                {
                    "left": name(s.left),
                    "right": name(s.right),
                    "result": name(s.result),
                    "labels": [_str_label(l) for l in s.labels],
                    "cost": s.cost,
                }
                for s in self.steps
            ],
            "costs": self.costs,
            "total_cost": self.total_cost,
        }


def pair_cost(a: Sequence[Label], b: Sequence[Label]) -> int:
    return math.prod(label_dim(l) for l in set(a) | set(b))


def _result_labels(a, b, others: Sequence[Sequence[Label]], output: Sequence[Label]) -> tuple[Label, ...]:
    needed = set(output)
    for o in others:
        needed.update(o)
    seen = []
    for l in tuple(a) + tuple(b):
        if l in needed and l not in seen:
            seen.append(l)
    return tuple(seen)


def _connected(labels: Sequence[Sequence[Label]]) -> bool:
    if len(labels) <= 1:
        return True
    reached = {0}
    frontier = [0]
    while frontier:
        i = frontier.pop()
        for j in range(len(labels)):
            if j not in reached and set(labels[i]) & set(labels[j]):
                reached.add(j)
                frontier.append(j)
    return len(reached) == len(labels)


def _plan_from_pairs(labels, output, pairs: Sequence[tuple[int, int]], kind: str) -> ContractionPlan:
    live = dict(enumerate(labels))
    steps = []
    next_id = len(labels)
    for i, j in pairs:
        a, b = live.pop(i), live.pop(j)
        res = _result_labels(a, b, list(live.values()), output)
        steps.append(ContractionStep(i, j, next_id, res, pair_cost(a, b)))
        live[next_id] = res
        next_id += 1
    return ContractionPlan(len(labels), tuple(steps), tuple(output), kind)


def sequential_chain_plan(network: RecombinationNetwork, per_bitstring: bool = True) -> ContractionPlan:
    """Walk a chain from its lowest-index end: fragment, gamma, fragment, ..."""
    if not network.is_chain():
        raise ValueError("network is not a linear chain")
    labels, output = network.structure(per_bitstring)
    K = network.K
    if K == 1:
        return ContractionPlan(1, (), output, "chain")
    adj = network.fragment_graph()
    start = min(i for i in range(K) if len(adj[i]) == 1)
    cut_between = {}
    for c, u in network.upstream.items():
        d = network.downstream[c]
        cut_between[frozenset((u, d))] = c
    gamma_pos = {c: K + gi for gi, c in enumerate(sorted(network.upstream))}
    order = [start]
    while len(order) < K:
        nxt = [j for j in adj[order[-1]] if j not in order]
        order.append(nxt[0])
    pairs = []
    current = start
    next_id = len(labels)
    for prev, frag in zip(order, order[1:]):
        g = gamma_pos[cut_between[frozenset((prev, frag))]]
        pairs.append((current, g))
        current = next_id
        next_id += 1
        pairs.append((current, frag))
        current = next_id
        next_id += 1
    return _plan_from_pairs(labels, output, pairs, "chain")


def greedy_plan(labels: Sequence[Sequence[Label]], output: Sequence[Label]) -> ContractionPlan:
    """Repeatedly contract the connected pair with the cheapest step.

    Ties go to the pair whose result carries the fewest indices, then to the
    lowest node ids.
    """
    if not _connected(labels):
        raise ValueError("tensor network is disconnected")
    live = dict(enumerate(tuple(l) for l in labels))
    steps = []
    next_id = len(labels)
    while len(live) > 1:
        best = None
        ids = sorted(live)
        for x, i in enumerate(ids):
            for j in ids[x + 1 :]:
                if not set(live[i]) & set(live[j]):
                    continue
                others = [live[k] for k in ids if k not in (i, j)]
                res = _result_labels(live[i], live[j], others, output)
                key = (pair_cost(live[i], live[j]), len(res), i, j)
                if best is None or key < best[0]:
                    best = (key, i, j, res)
        _, i, j, res = best
        steps.append(ContractionStep(i, j, next_id, res, pair_cost(live[i], live[j])))
        del live[i], live[j]
        live[next_id] = res
        next_id += 1
    return ContractionPlan(len(labels), tuple(steps), tuple(output), "greedy")


def general_contraction_plan(network: RecombinationNetwork, per_bitstring: bool = True) -> ContractionPlan:
    labels, output = network.structure(per_bitstring)
    return greedy_plan(labels, output)


def naive_cost(network: RecombinationNetwork) -> int:
    """Terms of the simultaneous sum over every internal (alpha, b, b') index: 12^M."""
    return 12**network.M


# ---------------------------------------------------------------- execution


@dataclass(frozen=True)
class ExecutionResult:
    value: np.ndarray
    labels: tuple[Label, ...]
    ledger: tuple[int, ...]  # executed multiplications per step

    @property
    def total_cost(self) -> int:
        return sum(self.ledger)


def _einsum_pair(a: np.ndarray, la, b: np.ndarray, lb, lout) -> np.ndarray:
    ids = {l: i for i, l in enumerate(dict.fromkeys(tuple(la) + tuple(lb)))}
    return np.einsum(a, [ids[l] for l in la], b, [ids[l] for l in lb], [ids[l] for l in lout], optimize=False)


def _slice_external(node: TensorNode, bits: Mapping[int, int]) -> tuple[np.ndarray, tuple[Label, ...]]:
    index = []
    labels = []
    for l in node.labels:
        if l[0] == "s":
            index.append(bits[l[1]])
        else:
            index.append(slice(None))
            labels.append(l)
    return node.tensor[tuple(index)], tuple(labels)


def execute_plan(
    network: RecombinationNetwork, plan: ContractionPlan, bits: Mapping[int, int] | None = None
) -> ExecutionResult:
    """Run ``plan``; with ``bits`` (original qubit -> bit) the external legs are fixed first."""
    tensors: dict[int, tuple[np.ndarray, tuple[Label, ...]]] = {}
    for i, node in enumerate(network.nodes):
        tensors[i] = _slice_external(node, bits) if bits is not None else (node.tensor, node.labels)
    if plan.num_inputs != len(tensors):
        raise ValueError("plan does not match the network")
    ledger = []
    for step in plan.steps:
        a, la = tensors.pop(step.left)
        b, lb = tensors.pop(step.right)
        dims = {l: n for l, n in zip(la, a.shape)}
        dims.update(zip(lb, b.shape))
        ledger.append(math.prod(dims.values()))
        tensors[step.result] = (_einsum_pair(a, la, b, lb, step.labels), step.labels)
    ((value, labels),) = tensors.values()
    if set(labels) != set(plan.output):
        raise ValueError(f"contraction left indices {labels}, expected {plan.output}")
    perm = [labels.index(l) for l in plan.output]
    return ExecutionResult(np.transpose(value, perm), tuple(plan.output), tuple(ledger))


def _bits_mapping(network: RecombinationNetwork, bits: str | Sequence[int]) -> dict[int, int]:
    values = [int(b) for b in bits]
    if len(values) != len(network.final_qubits):
        raise ValueError(f"expected {len(network.final_qubits)} bits, got {len(values)}")
    if any(v not in (0, 1) for v in values):
        raise ValueError("bits must be 0 or 1")
    return dict(zip(network.final_qubits, values))


def reconstruct_bitstring(
    network: RecombinationNetwork, bits: str | Sequence[int], plan: ContractionPlan | None = None
) -> float:
    """Probability of one output bitstring (bit i belongs to the i-th final qubit)."""
    mapping = _bits_mapping(network, bits)
    if plan is None:
        plan = general_contraction_plan(network, per_bitstring=True)
    return float(execute_plan(network, plan, mapping).value)


def reconstruct_full(
    network: RecombinationNetwork, clip: bool = False, plan: ContractionPlan | None = None
) -> OutputDistribution:
    """All 2^m probabilities from one contraction with the external legs open.

    Entries can be slightly negative for sampled or noisy inputs; ``clip``
    zeroes them and renormalizes.
    """
    m = len(network.final_qubits)
    if m > MAX_EXTERNAL_BITS:
        raise ValueError(f"{m} external bits exceeds the cap of {MAX_EXTERNAL_BITS}")
    if plan is None:
        plan = general_contraction_plan(network, per_bitstring=False)
    result = execute_plan(network, plan)
    dist = OutputDistribution(m, np.asarray(result.value).reshape(-1))
    return dist.clipped() if clip else dist


def explain(network: RecombinationNetwork, planner: str = "greedy", per_bitstring: bool = True) -> dict:
    """JSON-ready description of a plan and its cost ledger."""
    if planner == "chain":
        plan = sequential_chain_plan(network, per_bitstring)
    elif planner == "greedy":
        plan = general_contraction_plan(network, per_bitstring)
    else:
        raise ValueError(f"unknown planner {planner!r}")
    names = [n.name for n in network.nodes]
    out = plan.to_dict(names)
    out.update(
        {
            "K": network.K,
            "M": network.M,
            "per_bitstring": per_bitstring,
            "naive_cost": naive_cost(network),
            "is_chain": network.is_chain(),
            "nodes": [{"name": n.name, "kind": n.kind, "labels": [_str_label(l) for l in n.labels]} for n in network.nodes],
        }
    )
    return out


def explain_json(network: RecombinationNetwork, planner: str = "greedy", per_bitstring: bool = True) -> str:
    return json.dumps(explain(network, planner, per_bitstring), indent=2)
