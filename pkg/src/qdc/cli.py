"""``qdc`` command line: sweeps, cutting, simulation, recombination, plan inspection."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .circuit import Circuit, build_ghz_circuit, to_dag
from .cutting import (
    GADGETS,
    CutSpec,
    FragmentDistribution,
    balanced_ghz_cutspec,
    collect_distributions,
    fragment_circuit,
    generate_variants,
)
from .experiment import (
    DEFAULT_FRAGMENTS,
    DEFAULT_QUBITS,
    DEFAULT_SHOTS,
    ExperimentConfig,
    format_rows,
    run_sweep,
    success_probability,
)
from .noise import Scenario, apply_scenario, johannesburg_default, load_noise_config, noise_from_config
from .recombine import build_network, explain, reconstruct_full
from .routing import PLACEMENTS, coupling_graph, routed_executor

SCENARIOS = [s.value for s in Scenario]


class CliError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None


def _shots(text: str) -> int | None:
    if str(text).lower() == "exact":
        return None
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--shots takes a positive integer or 'exact', got {text!r}") from None
    if n <= 0:
        raise argparse.ArgumentTypeError("--shots must be positive")
    return n


def _flatten(values) -> list[int]:
    out = []
    for v in values if isinstance(values, (list, tuple)) else [values]:
        out.extend(_int_list(v) if isinstance(v, str) else [int(v)])
    return out


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="JSON file whose keys override command-line flags")
    p.add_argument("--scenario", choices=SCENARIOS, default="baseline")
    p.add_argument("--noise", type=Path, help="JSON noise settings layered over the default calibration")
    p.add_argument("--noiseless", action="store_true", help="disable every noise channel")
    p.add_argument("--shots", type=_shots, default=None, help=f"N or 'exact' (default exact; hardware runs used {DEFAULT_SHOTS})")
    p.add_argument("--routing", default="none", help="johannesburg, none, or a coupling-map JSON file")
    p.add_argument("--placement", choices=PLACEMENTS, default="trivial")
    p.add_argument("--gadget", choices=GADGETS, default="bell")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, help="output file (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdc", description="Circuit cutting with noisy density-matrix simulation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ghz-sweep", help="success probability over qubit and fragment counts")
    _add_common(p)
    p.add_argument("--qubits", nargs="+", default=[str(m) for m in DEFAULT_QUBITS])
    p.add_argument("--fragments", nargs="+", default=[str(k) for k in DEFAULT_FRAGMENTS])
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(routing="johannesburg", gadget="eigenstate")

    p = sub.add_parser("cut", help="split a circuit into fragments")
    _add_common(p)
    p.add_argument("--circuit", type=Path, help="circuit JSON (default: GHZ ladder of --qubits)")
    p.add_argument("--qubits", type=int, default=4)
    p.add_argument("--fragments", type=int, default=2, help="balanced GHZ cut count when no --cuts file is given")
    p.add_argument("--cuts", type=Path, help="CutSpec JSON")

    p = sub.add_parser("simulate", help="output distribution of a circuit, or fragment tensors when cutting")
    _add_common(p)
    p.add_argument("--circuit", type=Path)
    p.add_argument("--qubits", type=int, default=4)
    p.add_argument("--fragments", type=int, default=None, help="cut first and emit fragment distributions")
    p.add_argument("--cuts", type=Path)

    p = sub.add_parser("recombine", help="rebuild the full distribution from fragment distributions")
    _add_common(p)
    p.add_argument("--input", type=Path, required=True, help="JSON list of fragment distributions")
    p.add_argument("--clip", action="store_true", help="zero negative entries and renormalize")

    p = sub.add_parser("explain-contraction", help="contraction plan and cost ledger")
    _add_common(p)
    p.add_argument("--input", type=Path, help="fragment distributions JSON (default: GHZ from --qubits/--fragments)")
    p.add_argument("--qubits", type=int, default=8)
    p.add_argument("--fragments", type=int, default=4)
    p.add_argument("--planner", choices=("chain", "greedy"), default="chain")
    p.add_argument("--full", action="store_true", help="keep output bits open instead of fixing one bitstring")
    return parser


def apply_config(args: argparse.Namespace) -> argparse.Namespace:
    if args.config is None:
        return args
    try:
        settings = json.loads(args.config.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(settings, dict):
        raise CliError(f"config {args.config} must hold a JSON object")
    for key, value in settings.items():
        dest = key.replace("-", "_")
        if dest in ("command", "config") or not hasattr(args, dest):
            raise CliError(f"config key {key!r} is not an option of '{args.command}'")
        if dest == "shots":
            value = _shots(value) if value is not None else None
        elif dest in ("out", "input", "circuit", "cuts") and value is not None:
            value = Path(value)
        elif dest == "noise" and value is not None and not isinstance(value, dict):
            value = Path(value)
        setattr(args, dest, value)
    return args


def _noise(args):
    if args.noiseless:
        return None
    if isinstance(args.noise, dict):
        base = noise_from_config(args.noise)
    elif args.noise is not None:
        base = load_noise_config(args.noise)
    else:
        base = johannesburg_default()
    return apply_scenario(base, args.scenario)


def _circuit(args) -> Circuit:
    if getattr(args, "circuit", None) is not None:
        return Circuit.from_json(args.circuit)
    return build_ghz_circuit(args.qubits)


def _cut_spec(args, circuit: Circuit, count: int | None) -> CutSpec:
    if getattr(args, "cuts", None) is not None:
        items = json.loads(Path(args.cuts).read_text())
        if isinstance(items, dict):
            items = items.get("cut_spec", items.get("cut_edges"))
        return CutSpec.from_list(to_dag(circuit), items)
    if getattr(args, "circuit", None) is not None and count not in (None, 1):
        raise CliError("a custom circuit needs an explicit --cuts file")
    return balanced_ghz_cutspec(circuit.num_qubits, count or 1)


def _fragment_distributions(args, circuit: Circuit, spec: CutSpec) -> list[FragmentDistribution]:
    execute = routed_executor(coupling_graph(args.routing), _noise(args), shots=args.shots, placement=args.placement)
    out = []
    for f in fragment_circuit(circuit, spec):
        out.append(collect_distributions(f, generate_variants(f, args.gadget), seed=args.seed, executor=execute))
    return out


def _write(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if args.out is None:
        sys.stdout.write(text)
        return
    try:
        Path(args.out).write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {args.out}: {exc}") from exc


def cmd_ghz_sweep(args) -> None:
    config = ExperimentConfig(
        qubit_counts=_flatten(args.qubits),
        fragment_counts=_flatten(args.fragments),
        noise_scenario=args.scenario,
        shots=args.shots,
        routing=args.routing,
        seed=args.seed,
        output_path=str(args.out) if args.out else None,
        gadget=args.gadget,
        placement=args.placement,
        noiseless=args.noiseless,
        workers=args.workers,
    )
    if isinstance(args.noise, dict):
        config = replace(config, noise=args.noise)
    elif args.noise is not None:
        config = replace(config, noise=json.loads(Path(args.noise).read_text()))
    _write(args, format_rows(run_sweep(config), args.format))


def cmd_cut(args) -> None:
    circuit = _circuit(args)
    spec = _cut_spec(args, circuit, args.fragments)
    fragments = fragment_circuit(circuit, spec)
    doc = {
        "circuit": circuit.to_dict(),
        "cut_spec": spec.to_list(),
        "fragments": [f.to_dict() for f in fragments],
        "variant_circuits": {g: sum(f.variant_count(g) for f in fragments) for g in GADGETS},
    }
    _write(args, json.dumps(doc, indent=2, sort_keys=True))


def cmd_simulate(args) -> None:
    circuit = _circuit(args)
    if args.fragments is None and args.cuts is None:
        execute = routed_executor(coupling_graph(args.routing), _noise(args), shots=args.shots, placement=args.placement)
        dist = execute(circuit, args.seed)
        doc = {"num_bits": dist.num_bits, "probabilities": dist.to_dict(), "swap_count": execute.swap_total}
        _write(args, json.dumps(doc, indent=2, sort_keys=True))
        return
    spec = _cut_spec(args, circuit, args.fragments)
    dists = _fragment_distributions(args, circuit, spec)
    _write(args, json.dumps([d.to_dict() for d in dists], indent=2))


def _load_distributions(path: Path) -> list[FragmentDistribution]:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read fragment distributions from {path}: {exc}") from exc
    if isinstance(data, dict):
        data = data["fragments"]
    return [FragmentDistribution.from_dict(d) for d in data]


def cmd_recombine(args) -> None:
    dists = _load_distributions(args.input)
    dist = reconstruct_full(build_network(dists), clip=args.clip)
    doc = {"num_bits": dist.num_bits, "total": dist.total(), "probabilities": dist.to_dict()}
    if dist.num_bits % 2 == 0:
        doc["p_success"] = success_probability(dist, dist.num_bits)
    _write(args, json.dumps(doc, indent=2, sort_keys=True))


def cmd_explain(args) -> None:
    if args.input is not None:
        dists = _load_distributions(args.input)
    else:
        circuit = build_ghz_circuit(args.qubits)
        dists = _fragment_distributions(args, circuit, balanced_ghz_cutspec(args.qubits, args.fragments))
    doc = explain(build_network(dists), planner=args.planner, per_bitstring=not args.full)
    _write(args, json.dumps(doc, indent=2))


COMMANDS = {
    "ghz-sweep": cmd_ghz_sweep,
    "cut": cmd_cut,
    "simulate": cmd_simulate,
    "recombine": cmd_recombine,
    "explain-contraction": cmd_explain,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = apply_config(args)
        COMMANDS[args.command](args)
    except (CliError, ValueError, KeyError, TypeError, OSError, argparse.ArgumentTypeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"qdc {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
