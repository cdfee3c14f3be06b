"""Command-line entry point: ``polbsa <subcommand> [options]``.

Exit codes: 0 success, 1 usage error, 2 circuit parse/validation failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence, TextIO

from . import _fmt
from .analysis import (
    CapacityRegime,
    capacity,
    derive_rules,
    distinguishable_classes,
    event_probabilities,
    multi_pair_success,
    single_pair_success,
    success_curve,
)
from .circuit import SCHEMES, Circuit, circuit_to_dict, validate
from .dsl import DSLError, diagnose, serialize
from .evolution import EvolutionError, amplitude_maps, coefficient_table, evolve_to_tap
from .montecarlo import EvidencePolicy, analytic_confusion, estimate_confusion
from .states import BELL_STATES, BellState

STATE_COLUMNS = ",".join(s.value for s in BELL_STATES)
SUCCESS_HEADER = "N," + STATE_COLUMNS

CSV_SCHEMAS = f"""\
CSV schemas (10 significant digits):
  coeffs   row,input,D1,...,DK   one line per coefficient row C1..C4
  success  {SUCCESS_HEADER}
  fig2     two success tables, panel a (broken) then panel b (symmetric),
           each preceded by a '# fig2<panel> scheme=<name>' line
JSON output uses 17 significant digits and is written to stdout only."""


class UsageError(Exception):
    pass


class CircuitError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _state(label: str) -> BellState:
    try:
        return BellState.from_label(label)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="polbsa", description="Linear-optics polarization Bell-state analysis.",
                     epilog=CSV_SCHEMAS, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", metavar="<command>")
    sub.required = True

    source = _Parser(add_help=False)
    group = source.add_mutually_exclusive_group()
    group.add_argument("--scheme", choices=sorted(SCHEMES), help="built-in circuit")
    group.add_argument("--file", type=Path, help="circuit in .loc format")

    def fmt(p, choices):
        p.add_argument("--format", choices=choices, default="pretty")

    def add(name, help, formats=("json", "pretty"), **kw):
        p = sub.add_parser(name, help=help, parents=[source], epilog=CSV_SCHEMAS,
                           formatter_class=argparse.RawDescriptionHelpFormatter, **kw)
        fmt(p, formats)
        return p

    add("coeffs", "coefficient table C1..C4 over detectors", ("json", "csv", "pretty"))
    p = add("amplitudes", "merged two-photon detector amplitudes per Bell state")
    p.add_argument("--state", type=_state)
    p = add("taps", "two-photon state at a named cut inside the circuit")
    p.add_argument("--tap")
    p.add_argument("--state", type=_state)
    add("rules", "unique events and elimination rule")
    p = add("success", "success-rate curve S_N for N = 1..n-max", ("json", "csv", "pretty"))
    p.add_argument("--n-max", type=_positive, default=10)
    p = add("capacity", "post-selection channel capacity in bits")
    p.add_argument("--regime", choices=[r.value for r in CapacityRegime], default="asymptotic")
    p = add("simulate", "Monte Carlo confusion matrix")
    p.add_argument("--state", type=_state, help="true state (default: all four)")
    p.add_argument("--pairs", type=_positive, required=True, help="photon pairs per trial")
    p.add_argument("--trials", type=_positive, default=10_000)
    p.add_argument("--seed", type=_seed, required=True)
    p.add_argument("--workers", type=_positive, default=1)
    p.add_argument("--evidence", choices=[e.value for e in EvidencePolicy], default="cross")
    add("parse", "validate a .loc file and print it in canonical form")
    p = sub.add_parser("fig2", help="success curves of both built-in schemes as CSV",
                       epilog=CSV_SCHEMAS, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--n-max", type=_positive, default=10)
    p.add_argument("--out-dir", type=Path, help="also write fig2a_broken.csv and fig2b_symmetric.csv here")
    return parser


def load_circuit(args) -> Circuit:
    if args.file is not None:
        try:
            text = args.file.read_text()
        except OSError as exc:
            raise UsageError(f"cannot read {args.file}: {exc}") from None
        circuit, diags = diagnose(text)
        for d in diags:
            if d.severity == "warning":
                print(d.format(str(args.file)), file=sys.stderr)
        if circuit is None:
            raise CircuitError("\n".join(d.format(str(args.file)) for d in diags if d.severity == "error"))
        return circuit
    if args.scheme is None:
        raise UsageError("one of --scheme or --file is required")
    circuit = SCHEMES[args.scheme]()
    diags = validate(circuit)
    if diags:  # pragma: no cover - builders are validated by the test suite
        raise CircuitError("\n".join(map(str, diags)))
    return circuit


def _states(args) -> list[BellState]:
    return [args.state] if getattr(args, "state", None) else list(BELL_STATES)


def _pretty_row(cells, widths) -> str:
    return "  ".join(str(c).rjust(w) for c, w in zip(cells, widths))


def cmd_coeffs(args, out: TextIO) -> None:
    t = coefficient_table(load_circuit(args))
    if args.format == "json":
        out.write(_fmt.dumps(t.to_dict()))
        return
    header = ["row", "input"] + [f"D{i}" for i in range(1, t.n_detectors + 1)]
    rows = [[f"C{k + 1}", str(t.inputs[k])] + [_fmt.csv_complex(complex(z)) for z in t.rows[k]] for k in range(4)]
    if args.format == "csv":
        out.write(",".join(header) + "\n")
        out.writelines(",".join(r) + "\n" for r in rows)
        return
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    out.write(f"coefficient table: {t.scheme}\n")
    for r in [header] + rows:
        out.write(_pretty_row(r, widths) + "\n")


def cmd_amplitudes(args, out: TextIO) -> None:
    c = load_circuit(args)
    maps = amplitude_maps(c)
    selected = _states(args)
    if args.format == "json":
        out.write(_fmt.dumps({"scheme": c.name, "maps": [maps[s].to_dict() for s in selected]}))
        return
    for s in selected:
        m = maps[s]
        probs = event_probabilities(m)
        out.write(f"{c.name} {s.symbol}:\n")
        for key in m.keys():
            out.write(f"  D{key[0]} D{key[1]}  amp {m[key].real:+.6f}{m[key].imag:+.6f}j  P {probs[key]:.6f}\n")


def cmd_taps(args, out: TextIO) -> None:
    c = load_circuit(args)
    names = [args.tap] if args.tap else [t for t, _ in c.taps]
    try:
        for n in names:
            c.tap_index(n)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    results = [evolve_to_tap(c, s, n) for n in names for s in _states(args)]
    if args.format == "json":
        out.write(_fmt.dumps({"scheme": c.name, "taps": [r.to_dict() for r in results]}))
        return
    for r in results:
        out.write(f"{c.name} tap {r.tap} {r.state.symbol}:\n")
        for (x, y), a in r.entries.items():
            out.write(f"  {x} {y}  {a.real:+.6f}{a.imag:+.6f}j\n")


def _analysis(c: Circuit):
    maps = {s: event_probabilities(m) for s, m in amplitude_maps(c).items()}
    rules = derive_rules(maps)
    return maps, rules, single_pair_success(rules, maps)


def cmd_rules(args, out: TextIO) -> None:
    c = load_circuit(args)
    _, rules, s1 = _analysis(c)
    if args.format == "json":
        data = rules.to_dict()
        data["S1"] = {s.value: s1[s] for s in BELL_STATES}
        out.write(_fmt.dumps(data))
        return
    out.write(f"rules for {c.name}:\n")
    for s in BELL_STATES:
        events = " ".join(f"D{i}D{j}" for i, j in sorted(rules.unique_events[s])) or "-"
        out.write(f"  {s.symbol:5s} S1={s1[s]:.6g}  unique: {events}\n")
    target = rules.elimination_target
    out.write(f"  elimination target: {target.symbol if target else 'none'}\n")
    if rules.indistinguishable:
        out.write("  indistinguishable: " + ", ".join(s.symbol for s in rules.indistinguishable) + "\n")


def _curve_csv(c: Circuit, n_max: int) -> str:
    _, rules, s1 = _analysis(c)
    lines = [SUCCESS_HEADER]
    for n, row in success_curve(rules, s1, n_max):
        lines.append(",".join([str(n)] + [_fmt.csv_number(row[s]) for s in BELL_STATES]))
    return "\n".join(lines) + "\n"


def cmd_success(args, out: TextIO) -> None:
    c = load_circuit(args)
    if args.format == "csv":
        out.write(_curve_csv(c, args.n_max))
        return
    _, rules, s1 = _analysis(c)
    curve = success_curve(rules, s1, args.n_max)
    if args.format == "json":
        out.write(_fmt.dumps({"scheme": c.name,
                              "rows": [{"N": n, **{s.value: row[s] for s in BELL_STATES}} for n, row in curve]}))
        return
    out.write(f"success rates for {c.name}\n  N  " + "  ".join(f"{s.symbol:>10s}" for s in BELL_STATES) + "\n")
    for n, row in curve:
        out.write(f"{n:3d}  " + "  ".join(f"{row[s]:10.6f}" for s in BELL_STATES) + "\n")


def cmd_capacity(args, out: TextIO) -> None:
    c = load_circuit(args)
    _, rules, _ = _analysis(c)
    regime = CapacityRegime(args.regime)
    bits = capacity(rules, regime)
    classes = [sorted(s.value for s in k) for k in distinguishable_classes(rules, regime)]
    if args.format == "json":
        out.write(_fmt.dumps({"scheme": c.name, "regime": regime.value, "classes": classes, "bits": bits}))
        return
    out.write(f"{c.name} ({regime.value}): {len(classes)} classes, {bits:.6f} bits\n")


def cmd_simulate(args, out: TextIO) -> None:
    c = load_circuit(args)
    maps, rules, s1 = _analysis(c)
    policy = EvidencePolicy(args.evidence)
    cm = estimate_confusion(c, args.pairs, args.trials, args.seed, workers=args.workers,
                            policy=policy, states=_states(args), maps=maps)
    s_n = multi_pair_success(s1, rules, args.pairs)
    exact = analytic_confusion(maps, args.pairs, policy)
    data = cm.to_dict()
    data["analytic"] = {
        "S_N": {s.value: s_n[s] for s in BELL_STATES},
        "rows": {t.value: exact[t] for t in cm.counts},
    }
    if args.format == "json":
        out.write(_fmt.dumps(data))
        return
    out.write(f"{c.name}: N={cm.n_pairs} trials={cm.trials} seed={cm.seed}\n")
    for t, row in data["rows"].items():
        cells = "  ".join(f"{k}={v:.5f}" for k, v in row.items())
        out.write(f"  true {t}: {cells}\n")


def cmd_parse(args, out: TextIO) -> None:
    if args.file is None:
        raise UsageError("parse needs --file")
    c = load_circuit(args)
    if args.format == "json":
        out.write(_fmt.dumps(circuit_to_dict(c)))
    else:
        out.write(serialize(c))


def cmd_fig2(args, out: TextIO) -> None:
    panels = [("a", "broken"), ("b", "symmetric")]
    blocks = []
    for panel, scheme in panels:
        text = _curve_csv(SCHEMES[scheme](), args.n_max)
        if args.out_dir is not None:
            args.out_dir.mkdir(parents=True, exist_ok=True)
            (args.out_dir / f"fig2{panel}_{scheme}.csv").write_text(text)
        blocks.append(f"# fig2{panel} scheme={scheme}\n{text}")
    out.write("\n".join(blocks))


COMMANDS = {
    "coeffs": cmd_coeffs, "amplitudes": cmd_amplitudes, "taps": cmd_taps, "rules": cmd_rules,
    "success": cmd_success, "capacity": cmd_capacity, "simulate": cmd_simulate, "parse": cmd_parse,
    "fig2": cmd_fig2,
}


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None) -> int:
    out = out if out is not None else sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args, out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"polbsa: error: {exc}", file=sys.stderr)
        return 1
    except (CircuitError, DSLError, EvolutionError) as exc:
        print(str(exc), file=sys.stderr)
        return 2
    return 0


def main_entry() -> None:
    sys.exit(main())
