import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import noisy_density_matrix, readout_probs, statevector_probs
from qdc.circuit import CNOT, MEASURE, PREP, SWAP, Circuit, H, X, build_ghz_circuit, ghz_target_bitstrings, random_circuit
from qdc.noise import NoiseModel, johannesburg_default
from qdc.sim import (
    MAX_QUBITS,
    DensityMatrix,
    OutputDistribution,
    measure_distribution,
    run,
    sample_counts,
    schedule,
    simulate,
)

seeds = st.integers(0, 2**32 - 1)


def oracle_rho(circuit, noise):
    durations = {k.value: v for k, v in noise.gate_durations.items()}
    return noisy_density_matrix(circuit, noise.depol_1q, noise.depol_2q, noise.t1, noise.t2, durations)


@given(st.integers(1, 4), st.integers(0, 10), seeds)
def test_noiseless_matches_statevector(n, depth, seed):
    c = random_circuit(n, depth, np.random.default_rng(seed))
    assert np.max(np.abs(run(c).probs - statevector_probs(c))) < 1e-12


@settings(max_examples=20)
@given(st.integers(1, 4), st.integers(0, 8), seeds)
def test_noisy_matches_bruteforce(n, depth, seed):
    c = random_circuit(n, depth, np.random.default_rng(seed))
    noise = johannesburg_default()
    rho = simulate(c, noise)
    assert np.max(np.abs(rho.data - oracle_rho(c, noise))) < 1e-12


@settings(max_examples=20)
@given(st.integers(1, 4), st.integers(0, 8), seeds)
def test_density_matrix_stays_physical(n, depth, seed):
    c = random_circuit(n, depth, np.random.default_rng(seed))
    noise = NoiseModel(readout_tau=3, t1=2, t2=3, depol_1q=0.2, depol_2q=0.3)
    rho = simulate(c, noise)
    rho.validate()
    assert rho.trace == pytest.approx(1, abs=1e-10)
    assert rho.purity <= 1 + 1e-10


def test_swap_noise_and_duration():
    c = Circuit(3, (X(0), SWAP(0, 1)))
    noise = johannesburg_default()
    assert np.max(np.abs(simulate(c, noise).data - oracle_rho(c, noise))) < 1e-12
    assert [m.duration for m in schedule(c, noise)] == [50.0, 900.0]


def test_readout_matches_povm():
    noise = johannesburg_default()
    c = build_ghz_circuit(4)
    rho = simulate(c, noise)
    dist = measure_distribution(rho, noise.readout_povm())
    assert np.allclose(dist.probs, readout_probs(rho.data, noise.readout_gamma), atol=1e-13)


def test_readout_only_on_excited():
    noise = johannesburg_default().with_enabled(gate=False, idle=False)
    p = run(Circuit(2, (X(0),)), noise)
    g = noise.readout_gamma
    assert p["10"] == pytest.approx(1 - g)
    assert p["00"] == pytest.approx(g)


def test_ghz_fidelity_drops_with_noise():
    noise = johannesburg_default()
    ideal = run(build_ghz_circuit(6))
    noisy = run(build_ghz_circuit(6), noise)
    a, b = ghz_target_bitstrings(6)
    assert ideal[a] + ideal[b] == pytest.approx(1.0)
    assert 0.5 < noisy[a] + noisy[b] < 0.99


def test_schedule_is_asap():
    c = Circuit(3, (H(0), CNOT(0, 1), X(2), MEASURE(2)))
    moments = schedule(c, johannesburg_default())
    assert [m.gates for m in moments] == [(0, 2), (1,)]
    assert moments[1].busy == frozenset({0, 1})


def test_measure_axes():
    for axis, b in (("X", 0), ("X", 1), ("Y", 0), ("Y", 1), ("Z", 1)):
        p = run(Circuit(1, (PREP(0, axis, b), MEASURE(0, axis))))
        assert p[b] == pytest.approx(1.0, abs=1e-12)


def test_qubit_cap():
    with pytest.raises(ValueError):
        simulate(Circuit(MAX_QUBITS + 1), None)


def test_sampling_is_seeded():
    dist = run(build_ghz_circuit(4), johannesburg_default())
    a = sample_counts(dist, 1000, seed=3)
    assert np.array_equal(a, sample_counts(dist, 1000, seed=3))
    assert a.sum() == 1000
    shot = run(build_ghz_circuit(4), johannesburg_default(), shots=1000, seed=3)
    assert shot.total() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        sample_counts(dist, 0)


def test_distribution_helpers(tmp_path):
    d = OutputDistribution(3, np.arange(8) / 28)
    m = d.marginal([2, 0])
    assert m["10"] == pytest.approx(sum(d[i] for i in range(8) if (i & 1) and not (i & 4)))
    path = tmp_path / "d.json"
    d.to_json(path)
    assert np.allclose(OutputDistribution.from_json(path).probs, d.probs)
    neg = OutputDistribution(1, np.array([1.1, -0.1]))
    assert neg.clipped()["0"] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        d["01"]


def test_validate_rejects_bad_state():
    with pytest.raises(ValueError):
        DensityMatrix(1, np.diag([0.6, 0.6])).validate()
    with pytest.raises(ValueError):
        DensityMatrix(1, np.diag([1.5, -0.5])).validate()
