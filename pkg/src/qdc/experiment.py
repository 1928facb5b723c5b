"""GHZ sweeps over qubit and fragment counts, success probability and scenario gains."""

from __future__ import annotations

import csv
import io
import json
import os
import time
from collections.abc import Iterable, Mapping, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .circuit import build_ghz_circuit, ghz_target_bitstrings
from .cutting import GADGETS, balanced_ghz_cutspec, collect_distributions, fragment_circuit, generate_variants
from .noise import NoiseModel, Scenario, apply_scenario, johannesburg_default, noise_from_config
from .recombine import build_network, reconstruct_full
from .routing import PLACEMENTS, coupling_graph, routed_executor
from .sim import OutputDistribution

DEFAULT_QUBITS = (4, 6, 8, 10)
DEFAULT_FRAGMENTS = (1, 2, 3, 4)
DEFAULT_SHOTS = 8192
MAX_WORKERS = 4
CSV_COLUMNS = ("m", "n_fragments", "scenario", "p_success", "swap_count", "n_variant_circuits", "seed")


def success_probability(dist: OutputDistribution, m: int) -> float:
    """Weight on the two GHZ target bitstrings."""
    if m % 2:
        raise ValueError(f"success probability needs an even qubit count, got {m}")
    if dist.num_bits != m:
        raise ValueError(f"distribution has {dist.num_bits} bits, expected {m}")
    a, b = ghz_target_bitstrings(m)
    return dist[a] + dist[b]


@dataclass(frozen=True)
class ExperimentConfig:
    qubit_counts: tuple[int, ...] = DEFAULT_QUBITS
    fragment_counts: tuple[int, ...] = DEFAULT_FRAGMENTS
    noise_scenario: Scenario = Scenario.BASELINE
    shots: int | None = None  # None: exact distributions
    routing: str | None = "johannesburg"  # preset, coupling-map path, or None
    seed: int = 0
    output_path: str | None = None
    gadget: str = "eigenstate"  # normalized under noise; "bell" over-sums slightly
    placement: str = "trivial"
    noiseless: bool = False
    noise: Mapping | None = None  # overrides layered over the default calibration
    workers: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "qubit_counts", tuple(int(m) for m in self.qubit_counts))
        object.__setattr__(self, "fragment_counts", tuple(int(k) for k in self.fragment_counts))
        object.__setattr__(self, "noise_scenario", Scenario.parse(self.noise_scenario))
        if self.routing == "none":
            object.__setattr__(self, "routing", None)
        for m in self.qubit_counts:
            if m < 2 or m % 2:
                raise ValueError(f"qubit counts must be even and at least 2, got {m}")
        for k in self.fragment_counts:
            if k < 1:
                raise ValueError(f"fragment counts must be positive, got {k}")
            for m in self.qubit_counts:
                if k > m:
                    raise ValueError(f"{k} fragments exceed {m} qubits")
        if self.shots is not None and self.shots <= 0:
            raise ValueError("shots must be positive")
        if self.gadget not in GADGETS:
            raise ValueError(f"unknown gadget {self.gadget!r}")
        if self.placement not in PLACEMENTS:
            raise ValueError(f"unknown placement {self.placement!r}")
        if self.workers is not None and self.workers < 1:
            raise ValueError("workers must be at least 1")

    def noise_model(self) -> NoiseModel | None:
        if self.noiseless:
            return None
        base = noise_from_config(self.noise) if self.noise else johannesburg_default()
        return apply_scenario(base, self.noise_scenario)

    def points(self) -> list[tuple[int, int]]:
        return [(m, k) for m in self.qubit_counts for k in self.fragment_counts]


@dataclass(frozen=True)
class SweepRow:
    m: int
    n_fragments: int
    scenario: str
    p_success: float
    swap_count: int
    n_variant_circuits: int
    seed: int
    wall_time: float = field(default=0.0, compare=False)
    total: float = field(default=1.0, compare=False)  # sum of the reconstructed distribution

    def record(self) -> dict:
        """Emitted fields; diagnostics are left out so output files are reproducible."""
        d = asdict(self)
        del d["wall_time"], d["total"]
        return d


@dataclass(frozen=True)
class SweepResult:
    rows: tuple[SweepRow, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "rows", tuple(sorted(self.rows, key=lambda r: (r.scenario, r.m, r.n_fragments))))

    def table(self) -> dict[tuple[int, int], float]:
        return {(r.m, r.n_fragments): r.p_success for r in self.rows}

    def __len__(self) -> int:
        return len(self.rows)


def point_seed(seed: int, m: int, k: int) -> int:
    return int(np.random.SeedSequence([seed, m, k]).generate_state(1, dtype=np.uint32)[0])


def run_point(config: ExperimentConfig, m: int, k: int) -> SweepRow:
    start = time.perf_counter()
    noise = config.noise_model()
    graph = coupling_graph(config.routing)
    execute = routed_executor(graph, noise, shots=config.shots, placement=config.placement)
    fragments = fragment_circuit(build_ghz_circuit(m), balanced_ghz_cutspec(m, k))
    seed = point_seed(config.seed, m, k)
    dists = []
    n_variants = 0
    for f in fragments:
        variants = generate_variants(f, config.gadget)
        n_variants += len(variants)
        dists.append(collect_distributions(f, variants, seed=seed, executor=execute))
    dist = reconstruct_full(build_network(dists))
    return SweepRow(
        m,
        k,
        config.noise_scenario.value,
        success_probability(dist, m),
        execute.swap_total,
        n_variants,
        config.seed,
        time.perf_counter() - start,
        dist.total(),
    )


def _run_point_args(args: tuple[ExperimentConfig, int, int]) -> SweepRow:
    return run_point(*args)


def run_sweep(config: ExperimentConfig) -> SweepResult:
    """Every (m, n_f) point as an independent job; rows come back sorted."""
    jobs = [(config, m, k) for m, k in config.points()]
    workers = config.workers or min(MAX_WORKERS, os.cpu_count() or 1)
    if workers == 1 or len(jobs) <= 1:
        rows = [_run_point_args(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            rows = list(pool.map(_run_point_args, jobs))
    return SweepResult(tuple(rows))


def run_scenarios(config: ExperimentConfig, scenarios: Iterable[Scenario | str]) -> dict[Scenario, SweepResult]:
    return {Scenario.parse(s): run_sweep(replace(config, noise_scenario=Scenario.parse(s))) for s in scenarios}


def delta_p(scenario_results: SweepResult, baseline_results: SweepResult, n_f: int) -> float:
    """Mean over qubit counts of the success-probability gain at ``n_f`` fragments."""
    scen = {m: p for (m, k), p in scenario_results.table().items() if k == n_f}
    base = {m: p for (m, k), p in baseline_results.table().items() if k == n_f}
    if set(scenario_results.table()) != set(baseline_results.table()):
        raise ValueError("scenario and baseline sweeps cover different (m, n_f) grids")
    if not scen:
        raise ValueError(f"no rows with {n_f} fragments")
    return float(np.mean([scen[m] - base[m] for m in sorted(scen)]))


def format_rows(results: SweepResult, fmt: str = "csv") -> str:
    records = [r.record() for r in results.rows]
    if fmt == "json":
        return json.dumps({"columns": list(CSV_COLUMNS), "rows": records}, indent=2, sort_keys=True) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown output format {fmt!r}")
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow({**rec, "p_success": repr(rec["p_success"])})
    return buf.getvalue()


def emit(results: SweepResult, fmt: str, path: str | Path) -> Path:
    path = Path(path)
    try:
        path.write_text(format_rows(results, fmt))
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    return path


def read_rows(path: str | Path) -> SweepResult:
    """Load rows emitted by :func:`emit` (either format)."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        records = json.loads(text)["rows"]
    else:
        records = list(csv.DictReader(io.StringIO(text)))
    rows = [
        SweepRow(
            int(r["m"]),
            int(r["n_fragments"]),
            str(r["scenario"]),
            float(r["p_success"]),
            int(r["swap_count"]),
            int(r["n_variant_circuits"]),
            int(r["seed"]),
        )
        for r in records
    ]
    return SweepResult(tuple(rows))


def scenario_gains(
    results: Mapping[Scenario, SweepResult], fragment_counts: Sequence[int]
) -> dict[str, dict[int, float]]:
    base = results[Scenario.BASELINE]
    return {s.value: {k: delta_p(r, base, k) for k in fragment_counts} for s, r in results.items()}
