"""Command-line entry point: build, sim, verify, count and table."""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import resources
from .adders import (
    AdderVariant, ControlledStrategy, SubtractMethod, build_const_adder, build_controlled_adder,
    build_ctrl_const_adder, build_plain_adder, build_subtractor, iqft, pcqft, qft,
)
from .bitarith import BitString
from .circuit import Circuit, CircuitError, deserialize, serialize
from .compare import (
    ComparatorVariant, build_comparator, build_const_comparator, build_controlled_comparator,
    build_ctrl_const_comparator,
)
from .modular import NEEDS_A, PRESETS, ArchitectureSpec, Kind
from .sim import (
    BackendUnsupported, BudgetExceeded, Forced, NoOracle, Seeded, SimulationError,
    _input_ranges, decode_registers, exhaustive_verify, run_basis, run_statevector,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

ARCHES = {"cdkpm": "CDKPM_ALL", "gidney": "GIDNEY_ALL", "hybrid": "HYBRID", "vbe": "VBE_ALL",
          "draper": "DRAPER_BEAUREGARD"}
_ADDER = {"cdkpm": AdderVariant.CDKPM, "gidney": AdderVariant.GIDNEY, "vbe": AdderVariant.VBE,
          "draper": AdderVariant.DRAPER}
_COMPARATOR = {"cdkpm": ComparatorVariant.CDKPM_HALF, "gidney": ComparatorVariant.GIDNEY_HALF,
               "vbe": ComparatorVariant.TWO_ADDER, "draper": ComparatorVariant.DRAPER}
MODULAR_KINDS = {k.value.replace("_", "-"): k for k in Kind}
OTHER_KINDS = ("plain-add", "ctrl-add", "sub", "const-add", "ctrl-const-add", "compare",
               "ctrl-compare", "const-compare", "ctrl-const-compare", "qft", "iqft", "pcqft")
KINDS = tuple(MODULAR_KINDS) + OTHER_KINDS
_DISPLAY = {"TOFFOLI": "Toffoli"}


class UsageError(Exception):
    """Invalid command-line parameters."""


def parse_number(text: str) -> int:
    """Decimal, or MSB-first binary with a ``0b`` prefix."""
    text = text.strip()
    if text.lower().startswith("0b"):
        return BitString.parse(text).to_int()
    try:
        return int(text, 10)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a decimal or 0b number: {text!r}") from None


def parse_range(text: str) -> list[int]:
    """``A..B`` inclusive, or a comma list."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        a, b = parse_number(lo), parse_number(hi)
        if a > b:
            raise argparse.ArgumentTypeError(f"empty range {text!r}")
        return list(range(a, b + 1))
    return [parse_number(t) for t in text.split(",") if t]


def parse_assignments(text: str) -> dict[str, int]:
    out = {}
    for part in text.split(","):
        if not part:
            continue
        if "=" not in part:
            raise argparse.ArgumentTypeError(f"expected name=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = parse_number(v)
    return out


def parse_bits(text: str) -> list[int]:
    bits = [parse_number(t) for t in text.split(",") if t]
    if any(b not in (0, 1) for b in bits):
        raise argparse.ArgumentTypeError("forced outcomes must be 0 or 1")
    return bits


@dataclass
class Target:
    circuit: Circuit
    registry: str | None
    spec: dict


def _arch(args) -> str:
    arch = args.arch.lower()
    if arch not in ARCHES and args.arch not in PRESETS:
        raise UsageError(f"unknown architecture {args.arch!r}; choose from {sorted(ARCHES)}")
    return arch


def make_target(args) -> Target:
    """Build the circuit named by --kind/--arch/--n/--p/--a/--mbu, or load --circuit."""
    if getattr(args, "circuit", None):
        try:
            c = deserialize(Path(args.circuit).read_bytes())
        except OSError as e:
            raise UsageError(f"cannot read {args.circuit}: {e.strerror}") from None
        return Target(c, None, {"circuit": str(args.circuit)})
    if args.n is None:
        raise UsageError("--n is required unless --circuit is given")
    n, kind = args.n, args.kind
    if n < 1:
        raise UsageError("n must be at least 1")
    if kind in MODULAR_KINDS:
        k = MODULAR_KINDS[kind]
        preset = ARCHES.get(args.arch.lower(), args.arch)
        p = args.p if args.p is not None else (1 << n) - 1
        if k in NEEDS_A and args.a is None:
            raise UsageError(f"--kind {kind} needs --a")
        spec = ArchitectureSpec(k, n, p, args.a if k in NEEDS_A else None, args.mbu, preset)
        return Target(spec.build(), f"{k.value}:{preset}", spec.to_dict())
    arch = _arch(args)
    if arch == "hybrid":
        raise UsageError("hybrid is a modular-adder preset; pick cdkpm, gidney, vbe or draper")
    if args.mbu:
        raise UsageError("--mbu applies to modular kinds only")
    spec = {"kind": kind, "arch": arch, "n": n}
    a = args.a
    if kind in ("const-add", "ctrl-const-add", "const-compare", "ctrl-const-compare"):
        if a is None:
            raise UsageError(f"--kind {kind} needs --a")
        spec["a"] = a
    adder, cmp_ = _ADDER[arch], _COMPARATOR[arch]
    builders: dict[str, Callable[[], tuple[Circuit, str | None]]] = {
        "plain-add": lambda: (build_plain_adder(adder, n), f"plain_add:{adder.name}"),
        "sub": lambda: (build_subtractor(adder, n, SubtractMethod[args.method.upper()]), None),
        "const-add": lambda: (build_const_adder(adder, n, a), None),
        "ctrl-const-add": lambda: (build_ctrl_const_adder(adder, n, a), None),
        "compare": lambda: (build_comparator(cmp_, n), f"compare:{cmp_.name}"),
        "ctrl-compare": lambda: (build_controlled_comparator(cmp_, n),
                                 f"ctrl_compare:{cmp_.name}"),
        "const-compare": lambda: (build_const_comparator(cmp_, n, a),
                                  f"const_compare:{cmp_.name}"),
        "ctrl-const-compare": lambda: (build_ctrl_const_comparator(cmp_, n, a),
                                       f"ctrl_const_compare:{cmp_.name}"),
        "qft": lambda: (qft(n), None),
        "iqft": lambda: (iqft(n), None),
        "pcqft": lambda: (pcqft(n), None),
    }
    if kind == "ctrl-add":
        default = "draper_1anc" if adder is AdderVariant.DRAPER else "generic_load_mbu"
        strategy = ControlledStrategy[(args.strategy or default).upper()]
        c = build_controlled_adder(strategy, n, adder)
        base = AdderVariant.DRAPER if strategy.name.startswith("DRAPER") else adder
        spec["strategy"] = strategy.name
        return Target(c, f"ctrl_add:{strategy.name}:{base.name}", spec)
    c, reg = builders[kind]()
    return Target(c, reg, spec)


# Output helpers ---------------------------------------------------------------

def _frac(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else str(float(v))


def _emit(args, text: str) -> None:
    if args.out and args.command != "build":
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _label(target: Target, gate: str, column: str, value: Fraction) -> str:
    if target.registry is None:
        return ""
    f = resources.lookup(target.registry, gate, column)
    if f is None:
        return ""
    n = target.circuit.semantic.n
    hp = resources.hamming_weight(target.circuit.semantic.p or 0)
    status = resources.classify(f, value, n, hp)
    if status == resources.EXACT:
        return f" ({f.reference.label()})"
    if status == resources.DRIFT:
        return f" (expected {f.reference.label()}: drift)"
    return f" ({f.built.label()}; reference {f.reference.label()}: {status})"


_COUNT_GATES = ("TOFFOLI", resources.CNOT_CZ, "CNOT", "CZ", "X", "H", "MEASURE", "ROT", "CROT")


def count_lines(target: Target) -> list[str]:
    r = resources.static_counts(target.circuit)
    # Static formulas describe the circuit without MBU, so an MBU circuit's worst case is unlabeled.
    label_static = not target.circuit.semantic.mbu
    lines = []
    for gate in _COUNT_GATES:
        st = r.count(gate)
        if gate != "TOFFOLI" and not st:
            continue
        name = _DISPLAY.get(gate, gate)
        tail = _label(target, gate, 'static', st) if label_static else ""
        lines.append(f"{name} {_frac(st)}{tail}")
        ex = r.count(gate, True)
        if ex != st:
            lines.append(f"{name} expected {_frac(ex)}{_label(target, gate, 'expected', ex)}")
    for tag in ("QFT", "IQFT", "PCQFT"):
        if r.blocks_static.get(tag):
            st, ex = Fraction(r.blocks_static[tag]), r.blocks_expected[tag]
            tail = f" expected {_frac(ex)}" if ex != st else ""
            lines.append(f"{tag} blocks {_frac(st)}{tail}")
    q = Fraction(r.total_qubits)
    lines.append(f"qubits {r.total_qubits}{_label(target, 'qubits', 'static', q)}")
    lines.append(f"ancillas {r.ancilla_count}"
                 f"{_label(target, 'ancillas', 'static', Fraction(r.ancilla_count))}")
    return lines


# Commands ---------------------------------------------------------------------

def cmd_build(args) -> int:
    t = make_target(args)
    data = serialize(t.circuit)
    r = resources.static_counts(t.circuit)
    tof_s, tof_e = r.count("TOFFOLI"), r.count("TOFFOLI", True)
    if args.format == "json":
        summary = json.dumps({"spec": t.spec, "counts": r.to_dict()}, sort_keys=True) + "\n"
    else:
        summary = (f"Toffoli static {_frac(tof_s)} expected {_frac(tof_e)}\n"
                   f"qubits {r.total_qubits} ancillas {r.ancilla_count}\n")
    if args.out:
        Path(args.out).write_bytes(data)
        sys.stdout.write(summary)
    else:
        sys.stdout.write(data.decode("ascii") + "\n")
        sys.stderr.write(summary)
    return EXIT_OK


def _warn_inadmissible(c: Circuit, inputs: dict[str, int]) -> None:
    try:
        ranges = _input_ranges(c)
    except NoOracle:
        return
    bad = [k for k, v in inputs.items() if k in ranges and v not in ranges[k]]
    if bad:
        sys.stderr.write(f"warning: input {', '.join(bad)} outside the admissible range; "
                         "the result is not guaranteed\n")


def _result_register(c: Circuit) -> str | None:
    for role in ("output", "target-bit"):
        regs = c.registers_with_role(role)
        if regs:
            return regs[0].name
    return None


def cmd_sim(args) -> int:
    t = make_target(args)
    c = t.circuit
    inputs = args.input or {}
    missing = [r.name for r in c.registers
               if r.role in ("input", "output", "control", "target-bit") and r.name not in inputs]
    if missing:
        raise UsageError(f"missing inputs for registers: {', '.join(missing)}")
    _warn_inadmissible(c, inputs)
    policy = Forced(args.force) if args.force is not None else Seeded(args.seed)
    if args.backend == "basis":
        res = run_basis(c, inputs, policy)
        regs, cbits, prob = res.registers, res.cbits, res.path_probability
    else:
        sv = run_statevector(c, inputs, policy)
        probs = np.abs(sv.amplitudes) ** 2
        idx = int(np.argmax(probs))
        if probs[idx] < 1 - 1e-9:
            raise UsageError("final state is not a basis state; inspect it through the library API")
        row = np.array([(idx >> q) & 1 for q in range(c.num_qubits)], dtype=np.uint8)
        regs, cbits, prob = decode_registers(c, row), tuple(sv.cbits), sv.probability
    out = {"registers": regs, "cbits": list(cbits),
           "path_probability": str(prob) if isinstance(prob, Fraction) else f"{prob:.12g}",
           "seed": None if args.force is not None else args.seed}
    name = _result_register(c)
    if name is not None:
        out["result"] = regs[name]
    if args.format == "json":
        text = json.dumps(out, sort_keys=True) + "\n"
    else:
        lines = [" ".join(f"{k}={v}" for k, v in regs.items())]
        if name is not None:
            lines.append(f"result={regs[name]}")
        lines.append("cbits=" + "".join(str(b) for b in cbits))
        lines.append(f"path_probability={out['path_probability']}")
        if args.force is None:
            lines.append(f"seed={args.seed}")
        text = "\n".join(lines) + "\n"
    _emit(args, text)
    return EXIT_OK


def cmd_verify(args) -> int:
    t = make_target(args)
    rep = exhaustive_verify(t.circuit, args.backend, args.branches, args.seed, args.trials)
    rep.spec = t.spec
    if args.format == "json":
        text = rep.to_json() + "\n"
    else:
        head = "PASS" if rep.passed else "FAIL"
        text = (f"{head} backend={rep.backend} inputs={rep.inputs_checked} "
                f"branches={rep.branches_checked}"
                + (f" seed={rep.seed}" if rep.seed is not None else "") + "\n")
        for f in rep.failures:
            text += json.dumps(f, sort_keys=True, default=int) + "\n"
    _emit(args, text)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_count(args) -> int:
    t = make_target(args)
    if args.format == "json":
        text = json.dumps({"spec": t.spec, "counts": resources.static_counts(t.circuit).to_dict()},
                          sort_keys=True) + "\n"
    else:
        text = "\n".join(count_lines(t)) + "\n"
    _emit(args, text)
    return EXIT_OK


def _table_job(job: tuple[str, int, tuple[int, ...]]) -> list:
    row, n, ps = job
    return resources.table_lines([row], [n], ps)


def cmd_table(args) -> int:
    rows = [r.strip().lower() for r in args.rows.split(",") if r.strip()]
    unknown = [r for r in rows if r not in resources.TABLE_ROWS]
    if unknown:
        raise UsageError(f"unknown rows {unknown}; choose from {sorted(resources.TABLE_ROWS)}")
    jobs = [(r, n, tuple(args.p)) for r in rows for n in args.n]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            parts = list(pool.map(_table_job, jobs))
    else:
        parts = [_table_job(j) for j in jobs]
    lines = [ln for part in parts for ln in part]
    fmt = args.format or "csv"
    if fmt not in ("csv", "md"):
        raise UsageError("table supports --format csv or md")
    _emit(args, resources.render_lines(lines, fmt))
    return EXIT_OK


# Parser -------------------------------------------------------------------------

def _global_flags(top: bool) -> argparse.ArgumentParser:
    # Subcommand copies use SUPPRESS so they do not overwrite values given before the command.
    def d(value):
        return value if top else argparse.SUPPRESS
    g = argparse.ArgumentParser(add_help=False)
    g.add_argument("--seed", type=parse_number, default=d(0),
                   help="measurement RNG seed (default 0)")
    g.add_argument("--format", choices=("json", "md", "csv", "text"), default=d(None))
    g.add_argument("--out", default=d(None), help="output file")
    return g


def _arch_flags(p: argparse.ArgumentParser, circuit: bool) -> None:
    p.add_argument("--arch", default="cdkpm",
                   help=f"one of {', '.join(ARCHES)} or a preset name (default cdkpm)")
    p.add_argument("--kind", choices=KINDS, default="modadd")
    p.add_argument("--n", type=parse_number)
    p.add_argument("--p", type=parse_number, help="modulus (default 2^n - 1)")
    p.add_argument("--a", type=parse_number, help="classical constant")
    p.add_argument("--mbu", action="store_true", help="uncompute the flag by measurement")
    p.add_argument("--strategy", choices=[s.name.lower() for s in ControlledStrategy],
                   help="controlled-adder strategy for --kind ctrl-add")
    p.add_argument("--method", choices=[m.name.lower() for m in SubtractMethod],
                   default="adjoint", help="subtraction method for --kind sub")
    if circuit:
        p.add_argument("--circuit", help="circuit JSON file instead of --arch/--kind")


def build_parser() -> argparse.ArgumentParser:
    g = _global_flags(top=False)
    parser = argparse.ArgumentParser(prog="mbuarith", parents=[_global_flags(top=True)],
                                     description="Quantum modular arithmetic circuits.")
    sub = parser.add_subparsers(dest="command", required=True)
    b = sub.add_parser("build", parents=[g], help="build a circuit and write its JSON")
    _arch_flags(b, circuit=False)
    s = sub.add_parser("sim", parents=[g], help="simulate one input")
    _arch_flags(s, circuit=True)
    s.add_argument("--input", type=parse_assignments, help="register values, e.g. x=5,y=4")
    s.add_argument("--force", type=parse_bits, help="forced measurement outcomes, e.g. 0,1")
    s.add_argument("--backend", choices=("basis", "statevector"), default="basis")
    v = sub.add_parser("verify", parents=[g], help="check a circuit against its oracle")
    _arch_flags(v, circuit=True)
    v.add_argument("--branches", choices=("all", "sampled"), default="all")
    v.add_argument("--trials", type=parse_number, default=1000)
    v.add_argument("--backend", choices=("auto", "basis", "statevector"), default="auto")
    c = sub.add_parser("count", parents=[g], help="gate counts with closed forms")
    _arch_flags(c, circuit=True)
    t = sub.add_parser("table", parents=[g], help="cost table with conformance status")
    t.add_argument("--rows", default="cdkpm,gidney,hybrid")
    t.add_argument("--n", type=parse_range, default=[4])
    t.add_argument("--p", type=parse_range, default=[11])
    t.add_argument("--jobs", type=parse_number, default=1)
    return parser


_COMMANDS = {"build": cmd_build, "sim": cmd_sim, "verify": cmd_verify, "count": cmd_count,
             "table": cmd_table}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except BackendUnsupported as e:
        hint = "" if "statevector" in str(e) else "; retry with --backend statevector"
        sys.stderr.write(f"error: {e}{hint}\n")
    except BudgetExceeded as e:
        sys.stderr.write(f"error: {e}; use --branches sampled\n")
    except (UsageError, CircuitError, SimulationError, ValueError, KeyError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        sys.stderr.write(f"error: {msg}\n")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
