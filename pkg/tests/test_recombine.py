import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from qdc.circuit import CNOT, Circuit, H, X, build_ghz_circuit, random_circuit, to_dag
from qdc.cutting import (
    CutSpec,
    balanced_ghz_cutspec,
    collect_distributions,
    fragment_circuit,
    generate_variants,
    wire_cut,
)
from qdc.noise import johannesburg_default
from qdc.recombine import (
    build_network,
    execute_plan,
    explain,
    explain_json,
    general_contraction_plan,
    greedy_plan,
    naive_cost,
    pair_cost,
    reconstruct_bitstring,
    reconstruct_full,
    sequential_chain_plan,
)
from qdc.sim import run


def network_for(circuit, spec, gadget="bell", noise=None):
    frags = fragment_circuit(circuit, spec)
    return build_network([collect_distributions(f, generate_variants(f, gadget), noise=noise) for f in frags])


def ghz_network(m, k, gadget="bell", noise=None):
    return network_for(build_ghz_circuit(m), balanced_ghz_cutspec(m, k), gadget, noise)


def cyclic_circuit():
    """Three fragments with a cycle between the first two (K=3, M=3)."""
    c = Circuit(4, (H(0), CNOT(0, 1), CNOT(2, 3), CNOT(1, 2), CNOT(0, 1)))
    dag = to_dag(c)
    return c, CutSpec((wire_cut(dag, 1, 1), wire_cut(dag, 2, 2), wire_cut(dag, 1, 3)))


def test_two_fragment_network_shape():
    net = ghz_network(4, 2)
    assert (net.K, net.M) == (2, 1)
    assert len(net.nodes) == 3 and len(net.edges) == 2
    assert net.is_chain()


def test_cyclic_network_shape():
    net = network_for(*cyclic_circuit())
    assert (net.K, net.M) == (3, 3)
    assert len(net.nodes) == 6 and len(net.edges) == 6
    assert not net.is_chain()


@pytest.mark.parametrize("k", [2, 3, 4, 5])
def test_ghz_networks_are_chains(k):
    net = ghz_network(10, k)
    assert net.is_chain()
    adj = net.fragment_graph()
    assert sorted(len(v) for v in adj.values()) == [1, 1] + [2] * (k - 2)


def test_m2_reconstruction():
    net = ghz_network(2, 2)
    assert reconstruct_bitstring(net, "01") == pytest.approx(0.5, abs=1e-10)
    assert reconstruct_bitstring(net, "10") == pytest.approx(0.5, abs=1e-10)
    assert abs(reconstruct_bitstring(net, "00")) < 1e-10
    assert abs(reconstruct_bitstring(net, [1, 1])) < 1e-10


def test_m6_every_bitstring():
    net = ghz_network(6, 3)
    ref = run(build_ghz_circuit(6)).probs
    for i in range(64):
        assert abs(reconstruct_bitstring(net, format(i, "06b")) - ref[i]) < 1e-10


@pytest.mark.parametrize("gadget", ["bell", "eigenstate"])
@pytest.mark.parametrize("m,k", [(4, 2), (6, 3), (8, 4), (10, 4)])
def test_full_reconstruction_matches_uncut(gadget, m, k):
    net = ghz_network(m, k, gadget)
    assert np.max(np.abs(reconstruct_full(net).probs - run(build_ghz_circuit(m)).probs)) < 1e-10


def test_single_fragment_passthrough():
    c = build_ghz_circuit(4)
    net = network_for(c, None)
    assert (net.K, net.M) == (1, 0)
    assert np.allclose(reconstruct_full(net).probs, run(c).probs, atol=1e-14)


@pytest.mark.parametrize("m,k", [(4, 2), (6, 3), (8, 4)])
def test_eigenstate_normalized_under_noise(m, k):
    net = ghz_network(m, k, "eigenstate", johannesburg_default())
    assert reconstruct_full(net).total() == pytest.approx(1.0, abs=1e-9)


def test_bell_total_follows_ancilla_marginals():
    """Under noise the Bell-gadget total is 1 + sum over X, Y of +-(bias_A)(bias_B)."""
    noise = johannesburg_default()
    a, b = (
        collect_distributions(f, generate_variants(f), noise=noise)
        for f in fragment_circuit(build_ghz_circuit(4), balanced_ghz_cutspec(4, 2))
    )
    total = reconstruct_full(build_network([a, b])).total()
    q_a = a.tensor.sum(axis=(1, 2))  # (alpha, b')
    q_b = b.tensor.sum(axis=(2, 3))  # (alpha, b)
    bias = lambda q: q[:, 0] - q[:, 1]  # noqa: E731
    expected = bias(q_a)[0] * bias(q_b)[0] - bias(q_a)[1] * bias(q_b)[1] + 2 * q_a[2] @ q_b[2]
    assert total == pytest.approx(expected, abs=1e-12)
    assert abs(total - 1) > 1e-4


def test_cyclic_reconstruction():
    c, spec = cyclic_circuit()
    for gadget in ("bell", "eigenstate"):
        net = network_for(c, spec, gadget)
        assert np.max(np.abs(reconstruct_full(net).probs - run(c).probs)) < 1e-10


@settings(max_examples=15)
@given(st.integers(2, 4), st.integers(2, 8), st.integers(0, 2**32 - 1), st.data())
def test_random_cuts_reconstruct(n, depth, seed, data):
    """Any disconnecting set of wire cuts on a random circuit reconstructs exactly."""
    rng = np.random.default_rng(seed)
    body = random_circuit(n, depth, rng, kinds=("H", "X", "S_DAG", "CNOT"))
    # a leading ladder keeps the circuit (and so the network) connected
    c = Circuit(n, tuple(CNOT(i, i + 1) for i in range(n - 1)) + body.gates)
    dag = to_dag(c)
    candidates = [e for e in dag.edges if e.source.kind == "gate" and e.target.kind == "gate"]
    assume(candidates)
    chosen = data.draw(st.lists(st.sampled_from(candidates), min_size=1, max_size=3, unique=True))
    try:
        frags = fragment_circuit(c, CutSpec(tuple(chosen)))
    except ValueError:
        assume(False)  # the chosen edges do not disconnect the circuit
    net = build_network([collect_distributions(f, generate_variants(f)) for f in frags])
    assert np.max(np.abs(reconstruct_full(net).probs - run(c).probs)) < 1e-10


# ------------------------------------------------------------------ costs


@pytest.mark.parametrize("k", range(2, 9))
def test_chain_costs(k):
    plan = sequential_chain_plan(ghz_network(2 * k, k))
    assert plan.total_cost == 48 * k - 78
    assert plan.costs == [12] + [36, 12] * (k - 2) + [6]


def test_chain_cost_examples():
    assert sequential_chain_plan(ghz_network(4, 2)).costs == [12, 6]
    assert sequential_chain_plan(ghz_network(10, 5)).total_cost == 162
    assert sequential_chain_plan(ghz_network(16, 8)).total_cost == 306


def test_chain_plan_rejects_non_chain():
    with pytest.raises(ValueError):
        sequential_chain_plan(network_for(*cyclic_circuit()))


@pytest.mark.parametrize("k", [3, 4, 5, 6])
def test_greedy_matches_chain_and_beats_naive(k):
    net = ghz_network(2 * k, k)
    greedy = general_contraction_plan(net)
    assert greedy.total_cost == sequential_chain_plan(net).total_cost
    assert greedy.total_cost < 12 ** (k - 1) == naive_cost(net)


def test_k2_orders():
    net = ghz_network(4, 2)
    labels, out = net.structure()
    assert general_contraction_plan(net).total_cost == 18
    # contracting the two fragments before the gamma node is more expensive
    f0, f1, g = labels
    first = pair_cost(f0, f1)
    merged = tuple(set(f0) ^ set(f1)) + tuple(set(f0) & set(f1) & set(g))
    assert first + pair_cost(merged, g) == 24


def test_cyclic_greedy_below_naive():
    net = network_for(*cyclic_circuit())
    plan = general_contraction_plan(net)
    assert plan.total_cost < naive_cost(net) == 12**3


def test_cyclic_cost_lower_bound():
    """Every step that touches the middle fragment pays at least its size."""
    net = network_for(*cyclic_circuit())
    labels, _ = net.structure()
    widest = max(math.prod(3 if l[0] == "alpha" else 2 for l in ls) for ls in labels)
    assert widest == 216
    plan = general_contraction_plan(net)
    assert max(plan.costs) >= widest


def test_ledger_matches_plan():
    for net in (ghz_network(8, 4), network_for(*cyclic_circuit())):
        for per_bitstring in (True, False):
            plan = general_contraction_plan(net, per_bitstring)
            bits = {q: 0 for q in net.final_qubits} if per_bitstring else None
            assert list(execute_plan(net, plan, bits).ledger) == plan.costs


def test_plans_agree_with_each_other():
    net = ghz_network(8, 4)
    chain = sequential_chain_plan(net)
    greedy = general_contraction_plan(net)
    for bits in ("00001111", "11110000", "01010101"):
        assert reconstruct_bitstring(net, bits, chain) == pytest.approx(reconstruct_bitstring(net, bits, greedy), abs=1e-12)


def test_greedy_rejects_disconnected():
    with pytest.raises(ValueError, match="disconnected"):
        greedy_plan([(("b", 0),), (("b", 1),)], ())


def test_build_errors():
    a, b = (collect_distributions(f, generate_variants(f)) for f in fragment_circuit(
        build_ghz_circuit(4), balanced_ghz_cutspec(4, 2)))
    with pytest.raises(ValueError):
        build_network([])
    with pytest.raises(ValueError, match="dangling"):
        build_network([a])
    with pytest.raises(ValueError):
        build_network([a, a, b])
    f = fragment_circuit(build_ghz_circuit(4), balanced_ghz_cutspec(4, 2))[1]
    eig = collect_distributions(f, generate_variants(f, "eigenstate"))
    with pytest.raises(ValueError, match="mix"):
        build_network([a, eig])


def test_bitstring_errors():
    net = ghz_network(4, 2)
    with pytest.raises(ValueError):
        reconstruct_bitstring(net, "010")
    with pytest.raises(ValueError):
        reconstruct_bitstring(net, "0120")


def test_clip_flag():
    net = ghz_network(4, 2)
    d = reconstruct_full(net, clip=True)
    assert (d.probs >= 0).all() and d.total() == pytest.approx(1.0)


def test_explain():
    net = ghz_network(8, 4)
    info = explain(net, planner="chain")
    assert info["costs"] == [12, 36, 12, 36, 12, 6]
    assert info["total_cost"] == 114
    assert info["K"] == 4 and info["M"] == 3 and info["is_chain"]
    assert info["naive_cost"] == 1728
    assert json.loads(explain_json(net))["total_cost"] == 114
    with pytest.raises(ValueError):
        explain(net, planner="random")
