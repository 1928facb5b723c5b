"""End-to-end acceptance checks, one per criterion, each printing a PASS/FAIL line.

Tolerances are the ones the criteria state. Two criteria are expected to fail
(readout duration and the K=2 cost bound); see the decisions ledger.
"""

import functools

import numpy as np
import pytest

from oracles import monte_carlo_average_fidelity
from qdc.circuit import X, Circuit, build_ghz_circuit
from qdc.cutting import balanced_ghz_cutspec, collect_distributions, fragment_circuit, generate_variants
from qdc.experiment import ExperimentConfig, run_scenarios, scenario_gains, success_probability
from qdc.noise import (
    JOHANNESBURG_EPS_1Q,
    JOHANNESBURG_EPS_2Q,
    JOHANNESBURG_READOUT_ERROR,
    JOHANNESBURG_T1_US,
    NoiseModel,
    Scenario,
    depolarizing_channel,
    depolarizing_for_error_rate,
    johannesburg_default,
    solve_readout_tau,
)
from qdc.pauli import gamma_tensor, identity_decomposition, pauli_decompose, ptm_of_channel, scalar_product
from qdc.recombine import build_network, general_contraction_plan, reconstruct_full, sequential_chain_plan
from qdc.routing import embeds_as_path, johannesburg_graph, line_graph, route, routed_distribution
from qdc.sim import run

GRID_M = (2, 4, 6, 8, 10)
GRID_K = (2, 3, 4)
GRID = [(m, k) for m in GRID_M for k in GRID_K if k <= m]


@functools.lru_cache(maxsize=None)
def reconstructed(m, k, gadget):
    frags = fragment_circuit(build_ghz_circuit(m), balanced_ghz_cutspec(m, k))
    net = build_network([collect_distributions(f, generate_variants(f, gadget)) for f in frags])
    return reconstruct_full(net).probs


@functools.lru_cache(maxsize=None)
def uncut(m):
    return run(build_ghz_circuit(m)).probs


@functools.lru_cache(maxsize=None)
def desk_sweeps():
    """Exact-mode sweeps on the default grid with Johannesburg routing."""
    return run_scenarios(ExperimentConfig(), [Scenario.BASELINE, Scenario.FASTER_READOUT, Scenario.BETTER_COHERENCE])


def test_criterion_01_oracle_equivalence(verdict):
    err = max(np.max(np.abs(reconstructed(m, k, "bell") - uncut(m))) for m, k in GRID)
    assert verdict(1, "noiseless cut+recombine equals uncut simulation", err < 1e-10, f"max error {err:.1e} over {len(GRID)} cases")


def test_criterion_02_variant_equivalence(verdict):
    err = max(np.max(np.abs(reconstructed(m, k, "bell") - reconstructed(m, k, "eigenstate"))) for m, k in GRID)
    assert verdict(2, "eigenstate and Bell-gadget backends agree", err < 1e-10, f"max difference {err:.1e}")


def test_criterion_03_identity_resolution(verdict):
    err = np.max(np.abs(identity_decomposition(gamma_tensor("tilde")) - ptm_of_channel([np.eye(2)]).matrix))
    assert verdict(3, "gamma tensor resolves the one-qubit identity", err < 1e-12, f"entrywise error {err:.1e}")


def test_criterion_04_trace_inner_product(verdict):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for i in range(1000):
        n = 1 + i % 3
        d = 2**n
        a, b = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for _ in range(2))
        a, b = a + a.conj().T, b + b.conj().T
        a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)  # unit Frobenius norm
        lhs = np.trace(a.conj().T @ b).real
        worst = max(worst, abs(lhs - d * scalar_product(pauli_decompose(a), pauli_decompose(b))))
    assert verdict(4, "Tr[A^dag B] = 2^n <<A|B>>", worst < 1e-12, f"max deviation {worst:.1e} over 1000 pairs")


def test_criterion_05_readout_calibration(verdict):
    tau = solve_readout_tau(JOHANNESBURG_READOUT_ERROR, JOHANNESBURG_T1_US)
    model = johannesburg_default().with_enabled(gate=False, idle=False)
    flip = run(Circuit(1, (X(0),)), model)["0"]
    ok_tau = abs(tau - 2.75) <= 0.01
    ok_flip = abs(flip - 0.041) <= 1e-6
    detail = f"tau = {tau:.4f} us vs 2.75 +- 0.01; p(flip) = {flip:.7f}"
    assert verdict(5, "readout duration and flip probability", ok_tau and ok_flip, detail)


def test_criterion_06_depolarizing_calibration(verdict):
    rng = np.random.default_rng(6)
    errors = []
    for eps, arity in ((JOHANNESBURG_EPS_1Q, 1), (JOHANNESBURG_EPS_2Q, 2)):
        ch = depolarizing_channel(depolarizing_for_error_rate(eps, arity), arity)
        mc = 1 - monte_carlo_average_fidelity(ch.kraus_ops, 2**arity, 10_000, rng)
        errors.append((eps, mc))
    ok = all(abs(mc - eps) <= 0.1 * eps for eps, mc in errors)
    detail = ", ".join(f"target {eps:.5f} measured {mc:.5f}" for eps, mc in errors)
    assert verdict(6, "Monte-Carlo average gate error matches calibration", ok, detail)


def test_criterion_07_contraction_cost(verdict):
    failures = []
    for k in range(2, 9):
        frags = fragment_circuit(build_ghz_circuit(2 * k), balanced_ghz_cutspec(2 * k, k))
        net = build_network([collect_distributions(f, generate_variants(f)) for f in frags])
        chain = sequential_chain_plan(net)
        if chain.total_cost != 48 * k - 78 or chain.costs != [12] + [36, 12] * (k - 2) + [6]:
            failures.append(f"K={k} chain {chain.costs}")
        greedy = general_contraction_plan(net).total_cost
        if greedy > 12 ** (k - 1):
            failures.append(f"K={k} greedy {greedy} > {12 ** (k - 1)}")
    detail = "; ".join(failures) if failures else "48K-78 and greedy bound hold for K=2..8"
    assert verdict(7, "chain cost 48K-78, greedy within 12^(K-1)", not failures, detail)


def test_criterion_08_size_and_fragment_trends(verdict):
    table = desk_sweeps()[Scenario.BASELINE].table()
    ms = sorted({m for m, _ in table})
    ks = sorted({k for _, k in table})
    decreasing = all(table[(a, k)] > table[(b, k)] for k in ks for a, b in zip(ms, ms[1:]))
    more_fragments = all(table[(m, 4)] > table[(m, 1)] for m in (8, 10))
    detail = ", ".join(f"m={m}: n_f=4 {table[(m, 4)]:.4f} vs n_f=1 {table[(m, 1)]:.4f}" for m in (8, 10))
    ok = verdict(8, "P_success falls with m and rises with fragments", decreasing and more_fragments,
                 f"strictly decreasing in m: {decreasing}; {detail}")
    assert ok


def test_criterion_09_scenario_gains(verdict):
    gains = scenario_gains(desk_sweeps(), (1, 2, 3, 4))
    fr = [gains["faster-readout"][k] for k in (1, 2, 3, 4)]
    bc = [gains["better-coherence"][k] for k in (1, 2, 3, 4)]
    ok = (
        all(a <= b for a, b in zip(fr, fr[1:]))
        and all(a >= b for a, b in zip(bc, bc[1:]))
        and all(v == 0.0 for v in gains["baseline"].values())
    )
    detail = f"faster-readout {np.round(fr, 4).tolist()}, better-coherence {np.round(bc, 4).tolist()}"
    assert verdict(9, "readout gain grows and coherence gain shrinks with fragments", ok, detail)


def test_criterion_10_routing_soundness(verdict):
    jb = johannesburg_graph()
    err = 0.0
    for m in (2, 4, 6, 8):
        c = build_ghz_circuit(m)
        for placement in ("trivial", "line"):
            err = max(err, np.max(np.abs(routed_distribution(route(c, jb, placement=placement)).probs - uncut(m))))
    swaps = {}
    for graph in (jb, line_graph(12)):
        for m in range(2, min(graph.num_physical_qubits, 20) + 1, 2):
            if embeds_as_path(graph, m):
                swaps[(graph.name, m)] = route(build_ghz_circuit(m), graph, placement="line").swap_count
    ok = err < 1e-10 and all(v == 0 for v in swaps.values())
    assert verdict(10, "routing preserves outputs; path embeddings need no SWAPs", ok,
                   f"max error {err:.1e}; {len(swaps)} embeddable cases, max swaps {max(swaps.values())}")


def test_criterion_11_normalization(verdict):
    rows = desk_sweeps()[Scenario.BASELINE].rows
    worst = max(abs(r.total - 1) for r in rows)
    jb = johannesburg_graph()
    noise = johannesburg_default()
    degenerate = 0.0
    for r in rows:
        if r.n_fragments == 1:
            direct = success_probability(routed_distribution(route(build_ghz_circuit(r.m), jb), noise), r.m)
            degenerate = max(degenerate, abs(direct - r.p_success))
    ok = worst < 1e-6 and degenerate < 1e-9
    assert verdict(11, "noisy reconstructions normalized; one fragment equals direct run", ok,
                   f"max |sum-1| {worst:.1e} over {len(rows)} points; n_f=1 deviation {degenerate:.1e}")
