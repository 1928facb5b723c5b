"""Hardware noise: Kraus channels for gate, idle and readout noise, plus scenario transforms.

Times follow hardware conventions: coherence times and readout duration in
microseconds, gate and idle durations in nanoseconds.
"""

from __future__ import annotations

import enum
import json
import math
from collections.abc import Mapping
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .circuit import GateKind
from .pauli import PAULIS, Ptm, check_kraus_completeness, ptm_of_channel

# Calibration averages of the 20-qubit Johannesburg device.
JOHANNESBURG_READOUT_ERROR = 0.041
JOHANNESBURG_EPS_1Q = 0.00041
JOHANNESBURG_EPS_2Q = 0.00202
JOHANNESBURG_T1_US = 65.0
JOHANNESBURG_T2_US = 70.0

DEFAULT_GATE_DURATIONS_NS = {
    GateKind.H: 50.0,
    GateKind.X: 50.0,
    GateKind.S_DAG: 50.0,
    GateKind.PREP: 50.0,
    GateKind.CNOT: 300.0,
    GateKind.SWAP: 900.0,
    GateKind.MEASURE: 0.0,
}

NOISE_CATEGORIES = ("readout", "gate", "idle")

# Every non-SWAP gate carries one depolarizing application; SWAP carries three.
SWAP_DEPOLARIZING_REPEATS = 3


class Scenario(str, enum.Enum):
    BASELINE = "baseline"
    FASTER_READOUT = "faster-readout"
    BETTER_GATES = "better-gates"
    BETTER_COHERENCE = "better-coherence"

    @classmethod
    def parse(cls, value: str | Scenario) -> Scenario:
        if isinstance(value, Scenario):
            return value
        key = value.strip().lower().replace("_", "-")
        for s in cls:
            if s.value == key:
                return s
        raise ValueError(f"unknown scenario {value!r}; choose from {[s.value for s in cls]}")


IMPROVEMENT_FACTOR = 5.0


@dataclass(frozen=True)
class KrausChannel:
    kraus_ops: tuple[np.ndarray, ...]
    arity: int

    def __post_init__(self) -> None:
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus_ops)
        dim = check_kraus_completeness(ops)
        if dim != 2**self.arity:
            raise ValueError(f"{self.arity}-qubit channel needs {2**self.arity}x{2**self.arity} operators")
        object.__setattr__(self, "kraus_ops", ops)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.kraus_ops)

    @property
    def superoperator(self) -> np.ndarray:
        """Row-major vectorized action: vec(rho') = S vec(rho)."""
        return sum(np.kron(k, k.conj()) for k in self.kraus_ops)

    def ptm(self) -> Ptm:
        return ptm_of_channel(self.kraus_ops)

    def then(self, other: KrausChannel) -> KrausChannel:
        """Channel that applies ``self`` first and ``other`` second."""
        if other.arity != self.arity:
            raise ValueError("cannot compose channels of different arity")
        ops = [b @ a for a in self.kraus_ops for b in other.kraus_ops]
        return KrausChannel(tuple(op for op in ops if np.any(np.abs(op) > 0)), self.arity)


def identity_channel(arity: int = 1) -> KrausChannel:
    return KrausChannel((np.eye(2**arity, dtype=complex),), arity)


def average_gate_fidelity(channel: KrausChannel) -> float:
    """Closed form F_avg = (d F_pro + 1) / (d + 1), with F_pro = sum |Tr K|^2 / d^2."""
    d = 2**channel.arity
    f_pro = sum(abs(np.trace(k)) ** 2 for k in channel.kraus_ops) / d**2
    return float((d * f_pro + 1) / (d + 1))


def depolarizing_channel(p: float, arity: int = 1) -> KrausChannel:
    """Depolarizing channel rho -> (1-p) rho + p I/2 per qubit.

    Kraus operators sqrt(1-3p/4) I and sqrt(p/4) sigma_i; the 2-qubit channel
    is the tensor product of two such channels with the same ``p``.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing probability must lie in [0, 1], got {p}")
    if arity not in (1, 2):
        raise ValueError("depolarizing channel arity must be 1 or 2")
    if p == 0.0:
        return identity_channel(arity)
    weights = [1.0 - 3.0 * p / 4.0] + [p / 4.0] * 3
    single = [(w, s) for w, s in zip(weights, PAULIS) if w > 0]
    if arity == 1:
        ops = tuple(math.sqrt(w) * s for w, s in single)
    else:
        ops = tuple(math.sqrt(w1 * w2) * np.kron(s1, s2) for w1, s1 in single for w2, s2 in single)
    return KrausChannel(ops, arity)


def depolarizing_for_error_rate(eps_avg: float, arity: int) -> float:
    """Depolarizing parameter whose channel has average gate infidelity ``eps_avg``.

    One qubit: eps = p/2. Two qubits (product of one-qubit channels): the
    process fidelity is (1 - 3p/4)^2, so 1 - eps = (4 (1-3p/4)^2 + 1) / 5.
    """
    if not 0.0 <= eps_avg < 0.5:
        raise ValueError("average error rate out of range")
    if arity == 1:
        return 2.0 * eps_avg
    if arity == 2:
        return 4.0 / 3.0 * (1.0 - math.sqrt(1.0 - 5.0 * eps_avg / 4.0))
    raise ValueError("arity must be 1 or 2")


def relaxation_probability(idle_ns: float, t1_us: float) -> float:
    return 1.0 - math.exp(-idle_ns / (1000.0 * t1_us))


def pure_dephasing_rate(t1_us: float, t2_us: float) -> float:
    """1/T_phi = 1/T2 - 1/(2 T1), in 1/us."""
    if t2_us > 2.0 * t1_us * (1 + 1e-12):
        raise ValueError(f"unphysical coherence times: T2={t2_us} exceeds 2*T1={2 * t1_us}")
    return max(1.0 / t2_us - 1.0 / (2.0 * t1_us), 0.0)


def dephasing_probability(idle_ns: float, t1_us: float, t2_us: float) -> float:
    return 1.0 - math.exp(-2.0 * (idle_ns / 1000.0) * pure_dephasing_rate(t1_us, t2_us))


def amplitude_damping_channel(idle_ns: float, t1_us: float) -> KrausChannel:
    if idle_ns < 0:
        raise ValueError("idle duration must be non-negative")
    p = relaxation_probability(idle_ns, t1_us)
    return amplitude_damping_kraus(p)


def amplitude_damping_kraus(p: float) -> KrausChannel:
    if p == 0.0:
        return identity_channel(1)
    k0 = np.array([[1, 0], [0, math.sqrt(1 - p)]], dtype=complex)
    k1 = np.array([[0, math.sqrt(p)], [0, 0]], dtype=complex)
    return KrausChannel((k0, k1), 1)


def dephasing_channel(idle_ns: float, t1_us: float, t2_us: float) -> KrausChannel:
    if idle_ns < 0:
        raise ValueError("idle duration must be non-negative")
    p = dephasing_probability(idle_ns, t1_us, t2_us)
    if p == 0.0:
        return identity_channel(1)
    k0 = np.array([[1, 0], [0, math.sqrt(1 - p)]], dtype=complex)
    k1 = np.array([[0, 0], [0, math.sqrt(p)]], dtype=complex)
    return KrausChannel((k0, k1), 1)


@dataclass(frozen=True)
class ReadoutPovm:
    """Two-outcome readout {I - E, E} with E = diag(0, 1 - gamma)."""

    gamma: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"readout error must lie in [0, 1), got {self.gamma}")

    @property
    def effect_E(self) -> np.ndarray:
        return np.diag([0.0, 1.0 - self.gamma]).astype(complex)

    @property
    def complement(self) -> np.ndarray:
        return np.eye(2, dtype=complex) - self.effect_E

    def effects(self) -> tuple[np.ndarray, np.ndarray]:
        """(effect for outcome 0, effect for outcome 1)."""
        return self.complement, self.effect_E

    @property
    def confusion(self) -> np.ndarray:
        """Column-stochastic map from ideal Z outcome to reported outcome."""
        return np.array([[1.0, self.gamma], [0.0, 1.0 - self.gamma]])


@dataclass(frozen=True)
class NoiseModel:
    """Averaged device noise parameters.

    ``depol_1q``/``depol_2q`` are depolarizing-channel parameters (the 2-qubit
    value applies to each qubit of the gate). ``readout_t1`` is the relaxation
    time that sets the readout error during a measurement of length
    ``readout_tau``; it is frozen at calibration so that improving idle
    coherence leaves the measurement chain untouched.
    """

    readout_tau: float
    t1: float
    t2: float
    depol_1q: float
    depol_2q: float
    readout_t1: float | None = None
    gate_durations: Mapping[GateKind, float] = field(default_factory=lambda: dict(DEFAULT_GATE_DURATIONS_NS))
    enabled: Mapping[str, bool] = field(default_factory=lambda: {c: True for c in NOISE_CATEGORIES})

    def __post_init__(self) -> None:
        if self.readout_t1 is None:
            object.__setattr__(self, "readout_t1", self.t1)
        durations = dict(DEFAULT_GATE_DURATIONS_NS)
        durations.update({GateKind(k): float(v) for k, v in self.gate_durations.items()})
        object.__setattr__(self, "gate_durations", durations)
        enabled = {c: True for c in NOISE_CATEGORIES}
        for k, v in self.enabled.items():
            if k not in NOISE_CATEGORIES:
                raise ValueError(f"unknown noise category {k!r}")
            enabled[k] = bool(v)
        object.__setattr__(self, "enabled", enabled)
        if min(self.t1, self.t2, self.readout_t1) <= 0 or self.readout_tau < 0:
            raise ValueError("times must be positive")
        if self.t2 > 2.0 * self.t1 * (1 + 1e-12):
            raise ValueError(f"unphysical coherence times: T2={self.t2} > 2*T1={2 * self.t1}")
        for name in ("depol_1q", "depol_2q"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if any(d < 0 for d in durations.values()):
            raise ValueError("gate durations must be non-negative")

    @property
    def readout_gamma(self) -> float:
        return 1.0 - math.exp(-self.readout_tau / self.readout_t1)

    def readout_povm(self) -> ReadoutPovm | None:
        return ReadoutPovm(self.readout_gamma) if self.enabled["readout"] else None

    def duration(self, kind: GateKind) -> float:
        return self.gate_durations[GateKind(kind)]

    def gate_channel(self, arity: int) -> KrausChannel:
        return depolarizing_channel(self.depol_1q if arity == 1 else self.depol_2q, arity)

    def idle_channel(self, idle_ns: float) -> KrausChannel:
        """Amplitude damping followed by pure dephasing over ``idle_ns``."""
        return amplitude_damping_channel(idle_ns, self.t1).then(dephasing_channel(idle_ns, self.t1, self.t2))

    def with_enabled(self, **flags: bool) -> NoiseModel:
        enabled = dict(self.enabled)
        enabled.update(flags)
        return replace(self, enabled=enabled)

    def to_dict(self) -> dict:
        return {
            "readout_tau_us": self.readout_tau,
            "readout_t1_us": self.readout_t1,
            "t1_us": self.t1,
            "t2_us": self.t2,
            "depol_1q": self.depol_1q,
            "depol_2q": self.depol_2q,
            "gate_durations_ns": {k.value: v for k, v in sorted(self.gate_durations.items(), key=lambda kv: kv[0].value)},
            "enabled": dict(self.enabled),
        }


def solve_readout_tau(gamma: float, t1_us: float) -> float:
    """Measurement duration (us) for which 1 - exp(-tau/T1) equals ``gamma``."""
    return -t1_us * math.log1p(-gamma)


def johannesburg_default() -> NoiseModel:
    return NoiseModel(
        readout_tau=solve_readout_tau(JOHANNESBURG_READOUT_ERROR, JOHANNESBURG_T1_US),
        t1=JOHANNESBURG_T1_US,
        t2=JOHANNESBURG_T2_US,
        depol_1q=depolarizing_for_error_rate(JOHANNESBURG_EPS_1Q, 1),
        depol_2q=depolarizing_for_error_rate(JOHANNESBURG_EPS_2Q, 2),
    )


def apply_scenario(model: NoiseModel, scenario: Scenario | str) -> NoiseModel:
    scenario = Scenario.parse(scenario)
    f = IMPROVEMENT_FACTOR
    if scenario is Scenario.BASELINE:
        return model
    if scenario is Scenario.FASTER_READOUT:
        return replace(model, readout_tau=model.readout_tau / f)
    if scenario is Scenario.BETTER_GATES:
        return replace(model, depol_1q=model.depol_1q / f, depol_2q=model.depol_2q / f)
    return replace(model, t1=model.t1 * f, t2=model.t2 * f)


# ------------------------------------------------------------- config files

_CONFIG_KEYS = {
    "readout_tau_us",
    "readout_t1_us",
    "t1_us",
    "t2_us",
    "depol_1q",
    "depol_2q",
    "eps_1q",
    "eps_2q",
    "readout_error",
    "gate_durations_ns",
    "enabled",
    "scenario",
}


def noise_from_config(config: Mapping) -> NoiseModel:
    """Build a model from key-value settings layered over the Johannesburg defaults.

    ``eps_1q``/``eps_2q`` and ``readout_error`` are calibration targets and are
    converted to ``depol_*`` and ``readout_tau_us``; ``scenario`` is applied last.
    """
    unknown = set(config) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown noise settings: {sorted(unknown)}")
    base = johannesburg_default()
    t1 = float(config.get("t1_us", base.t1))
    kwargs = {
        "t1": t1,
        "t2": float(config.get("t2_us", base.t2)),
        "readout_t1": float(config.get("readout_t1_us", t1)),
        "depol_1q": base.depol_1q,
        "depol_2q": base.depol_2q,
        "readout_tau": base.readout_tau,
    }
    if "eps_1q" in config:
        kwargs["depol_1q"] = depolarizing_for_error_rate(float(config["eps_1q"]), 1)
    if "eps_2q" in config:
        kwargs["depol_2q"] = depolarizing_for_error_rate(float(config["eps_2q"]), 2)
    if "depol_1q" in config:
        kwargs["depol_1q"] = float(config["depol_1q"])
    if "depol_2q" in config:
        kwargs["depol_2q"] = float(config["depol_2q"])
    if "readout_error" in config:
        kwargs["readout_tau"] = solve_readout_tau(float(config["readout_error"]), kwargs["readout_t1"])
    if "readout_tau_us" in config:
        kwargs["readout_tau"] = float(config["readout_tau_us"])
    if "gate_durations_ns" in config:
        kwargs["gate_durations"] = {GateKind(k): float(v) for k, v in config["gate_durations_ns"].items()}
    if "enabled" in config:
        kwargs["enabled"] = dict(config["enabled"])
    model = NoiseModel(**kwargs)
    return apply_scenario(model, config.get("scenario", Scenario.BASELINE))


def load_noise_config(path: str | Path) -> NoiseModel:
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except OSError as exc:
        raise OSError(f"cannot read noise config {p}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"noise config {p} is not valid JSON: {exc}") from exc
    return noise_from_config(data)

