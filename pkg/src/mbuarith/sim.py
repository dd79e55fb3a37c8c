"""Basis-state and statevector simulation plus exhaustive oracle verification."""

from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from ._backend import kernels
from .circuit import (
    CNOT, CONDBLOCK, CROT, CZ, H, MEASURE, ROT, TOFFOLI, X, Circuit, Gate, Semantic,
)

MAX_SV_QUBITS = 24
VERIFY_BUDGET = 1 << 22
AMP_TOL = 1e-9
NORM_TOL = 1e-12

OP_X, OP_CNOT, OP_TOF, OP_TALLY, OP_MEAS_RAND, OP_MEAS_DET, OP_COND = 1, 2, 3, 4, 5, 6, 7
TALLY_KINDS = (X, H, CNOT, CZ, TOFFOLI, MEASURE)
_TALLY = {k: i for i, k in enumerate(TALLY_KINDS)}


class SimulationError(RuntimeError):
    """Base class for simulator failures."""


class BackendUnsupported(SimulationError):
    """The circuit uses a gate pattern the basis backend cannot represent."""


class ForcedOutcomeError(SimulationError):
    """A forced measurement outcome is impossible or the forced list ran out."""


class BudgetExceeded(SimulationError):
    """Verification would exceed the enumeration budget."""

    def __init__(self, required: int, budget: int = VERIFY_BUDGET):
        super().__init__(f"verification needs {required} runs, budget is {budget}")
        self.required = required
        self.budget = budget


@dataclass(frozen=True)
class Seeded:
    seed: int = 0


@dataclass(frozen=True)
class Forced:
    outcomes: tuple[int, ...]

    def __init__(self, outcomes: Iterable[int]):
        object.__setattr__(self, "outcomes", tuple(int(o) for o in outcomes))


MeasurePolicy = Seeded | Forced


def rng_for(seed: int) -> np.random.Generator:
    """PCG64 stream; derive independent child streams with ``SeedSequence.spawn``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


# Basis backend ---------------------------------------------------------------

def _next_touch(gates: Sequence[Gate], i: int, q: int) -> Gate | None:
    for g in gates[i + 1:]:
        if q in g.touched():
            return g
    return None


def _closes_frame(gates: Sequence[Gate], i: int, q: int) -> bool:
    """True if the next H on q follows with q used only as an XOR target in between."""
    for g in gates[i + 1:]:
        if q not in g.touched():
            continue
        if g.kind == H and g.qubits == (q,):
            return True
        if g.kind in (X, CNOT, TOFFOLI) and g.target == q and q not in g.controls:
            continue
        return False
    return False


def _compile(gates: Sequence[Gate], prog: list, framed: set[int], pending: set[int]) -> None:
    for i, g in enumerate(gates):
        k = g.kind
        if k == H:
            q = g.qubits[0]
            if q in framed:
                framed.discard(q)
            else:
                nxt = _next_touch(gates, i, q)
                if nxt is not None and nxt.kind == MEASURE and nxt.qubits[0] == q:
                    pending.add(q)
                elif _closes_frame(gates, i, q):
                    framed.add(q)
                else:
                    raise BackendUnsupported(
                        f"H on qubit {q} is not followed by a measurement; "
                        "use the statevector backend")
            prog.append((OP_TALLY, 0, 0, 0, _TALLY[H]))
        elif k in (X, CNOT, TOFFOLI):
            busy = framed | pending
            if any(c in busy for c in g.controls) or g.target in pending:
                raise BackendUnsupported(
                    f"{k} uses a qubit in the Hadamard basis; use the statevector backend")
            if g.target in framed:
                # X-type gate on a Hadamard-framed qubit is a phase on basis states.
                prog.append((OP_TALLY, 0, 0, 0, _TALLY[k]))
            elif k == X:
                prog.append((OP_X, g.qubits[0], 0, 0, _TALLY[k]))
            elif k == CNOT:
                prog.append((OP_CNOT, g.qubits[0], g.qubits[1], 0, _TALLY[k]))
            else:
                prog.append((OP_TOF, *g.qubits, _TALLY[k]))
        elif k == CZ:
            if any(q in framed or q in pending for q in g.qubits):
                raise BackendUnsupported("CZ on a Hadamard-framed qubit")
            prog.append((OP_TALLY, 0, 0, 0, _TALLY[k]))
        elif k == MEASURE:
            q = g.qubits[0]
            if q in framed:
                raise BackendUnsupported("measurement inside a Hadamard frame")
            if q in pending:
                pending.discard(q)
                prog.append((OP_MEAS_RAND, q, g.cbit, 0, _TALLY[k]))
            else:
                prog.append((OP_MEAS_DET, q, g.cbit, 0, _TALLY[k]))
        elif k == CONDBLOCK:
            pos = len(prog)
            prog.append(None)
            before = (set(framed), set(pending))
            _compile(g.body, prog, framed, pending)
            if (framed, pending) != before:
                raise BackendUnsupported("Hadamard frame crosses a conditional block boundary")
            prog[pos] = (OP_COND, g.cbit, len(prog) - pos - 1, 0, -1)
        else:
            raise BackendUnsupported(f"{k} gates need the statevector backend")


def compile_basis(c: Circuit) -> np.ndarray:
    """Lower a circuit to the flat int32 program run by the basis kernels."""
    cached = c.__dict__.get("_basis_prog")
    if cached is not None:
        return cached
    prog: list = []
    framed: set[int] = set()
    pending: set[int] = set()
    _compile(c.gates, prog, framed, pending)
    if framed or pending:
        raise BackendUnsupported("unterminated Hadamard pattern")
    arr = np.array(prog, dtype=np.int32).reshape(-1, 5)
    object.__setattr__(c, "_basis_prog", arr)
    return arr


def measurement_count(c: Circuit) -> int:
    return sum(1 for g, _ in c.walk() if g.kind == MEASURE)


def supports_basis(c: Circuit) -> bool:
    try:
        compile_basis(c)
    except BackendUnsupported:
        return False
    return True


@dataclass
class BatchResult:
    state: np.ndarray
    cbits: np.ndarray
    n_random: np.ndarray
    tally: np.ndarray
    status: np.ndarray


def run_basis_batch(c: Circuit, state: np.ndarray, outcomes: np.ndarray,
                    out_len: np.ndarray | None = None, forced: bool = True) -> BatchResult:
    """Run many basis inputs at once; row r consumes ``outcomes[r]`` in execution order."""
    prog = compile_basis(c)
    runs = state.shape[0]
    state = np.ascontiguousarray(state, dtype=np.uint8).copy()
    outcomes = np.ascontiguousarray(outcomes, dtype=np.uint8)
    if out_len is None:
        out_len = np.full(runs, outcomes.shape[1], dtype=np.int32)
    cbits = np.zeros((runs, c.num_cbits), dtype=np.uint8)
    n_rand = np.zeros(runs, dtype=np.int32)
    tally = np.zeros((runs, len(TALLY_KINDS)), dtype=np.int64)
    status = np.zeros(runs, dtype=np.int8)
    kernels.basis_sweep(prog, state, cbits, outcomes, np.ascontiguousarray(out_len, np.int32),
                        n_rand, tally, status, bool(forced))
    return BatchResult(state, cbits, n_rand, tally, status)


def encode_inputs(c: Circuit, inputs: Mapping[str, int]) -> np.ndarray:
    row = np.zeros(c.num_qubits, dtype=np.uint8)
    for name, value in inputs.items():
        reg = c.register(name)
        value = int(value)
        if not 0 <= value < (1 << len(reg)):
            raise ValueError(f"value {value} does not fit register {name} of width {len(reg)}")
        for i, q in enumerate(reg.qubits):
            row[q] = (value >> i) & 1
    return row


def decode_registers(c: Circuit, row: np.ndarray) -> dict[str, int]:
    return {r.name: sum(int(row[q]) << i for i, q in enumerate(r.qubits)) for r in c.registers}


def _check_inputs(c: Circuit, inputs: Mapping[str, int]) -> None:
    for name in inputs:
        c.register(name)


@dataclass
class BasisResult:
    registers: dict[str, int]
    cbits: tuple[int, ...]
    path_probability: Fraction
    executed: dict[str, int]


def run_basis(c: Circuit, inputs: Mapping[str, int],
              policy: MeasurePolicy = Seeded(0)) -> BasisResult:
    _check_inputs(c, inputs)
    row = encode_inputs(c, inputs)[None, :]
    m = measurement_count(c)
    if isinstance(policy, Forced):
        outs = np.array([policy.outcomes], dtype=np.uint8).reshape(1, -1)
        if outs.shape[1] == 0:
            outs = np.zeros((1, 1), dtype=np.uint8)
            out_len = np.zeros(1, dtype=np.int32)
        else:
            out_len = np.array([len(policy.outcomes)], dtype=np.int32)
        forced = True
    else:
        outs = rng_for(policy.seed).integers(0, 2, size=(1, max(m, 1)), dtype=np.uint8)
        out_len = np.array([m], dtype=np.int32)
        forced = False
    res = run_basis_batch(c, row, outs, out_len, forced)
    if res.status[0] == 1:
        raise ForcedOutcomeError("forced outcome list is shorter than the executed measurements")
    if res.status[0] == 2:
        raise ForcedOutcomeError("forced outcome contradicts a deterministic measurement")
    return BasisResult(
        registers=decode_registers(c, res.state[0]),
        cbits=tuple(int(b) for b in res.cbits[0]),
        path_probability=Fraction(1, 1 << int(res.n_random[0])),
        executed={k: int(res.tally[0, i]) for i, k in enumerate(TALLY_KINDS)},
    )


# Statevector backend ---------------------------------------------------------

@dataclass
class StateVector:
    amplitudes: np.ndarray
    num_qubits: int
    cbits: list[int]
    probability: float = 1.0

    @classmethod
    def basis(cls, num_qubits: int, index: int, num_cbits: int = 0) -> "StateVector":
        if num_qubits > MAX_SV_QUBITS:
            raise SimulationError(
                f"{num_qubits} qubits exceeds the statevector cap {MAX_SV_QUBITS}")
        amps = np.zeros(1 << num_qubits, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps, num_qubits, [0] * num_cbits)

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def fidelity(self, other: np.ndarray) -> float:
        return float(abs(np.vdot(other, self.amplitudes)) ** 2)


def _angle(g: Gate) -> complex:
    return np.exp(2j * np.pi * g.s * g.m / (1 << g.k))


class _SVRunner:
    def __init__(self, sv: StateVector, policy: MeasurePolicy):
        self.sv = sv
        self.forced = policy.outcomes if isinstance(policy, Forced) else None
        self.rng = rng_for(policy.seed) if isinstance(policy, Seeded) else None
        self.ptr = 0

    def run(self, gates: Sequence[Gate]) -> None:
        psi = self.sv.amplitudes
        for g in gates:
            k = g.kind
            q = g.qubits
            if k == X:
                kernels.sv_xgate(psi, 0, 1 << q[0])
            elif k == CNOT:
                kernels.sv_xgate(psi, 1 << q[0], 1 << q[1])
            elif k == TOFFOLI:
                kernels.sv_xgate(psi, (1 << q[0]) | (1 << q[1]), 1 << q[2])
            elif k == CZ:
                kernels.sv_phase(psi, (1 << q[0]) | (1 << q[1]), -1.0 + 0j)
            elif k == H:
                kernels.sv_h(psi, 1 << q[0])
            elif k == ROT:
                kernels.sv_phase(psi, 1 << q[0], _angle(g))
            elif k == CROT:
                kernels.sv_phase(psi, (1 << q[0]) | (1 << q[1]), _angle(g))
            elif k == MEASURE:
                self._measure(q[0], g.cbit)
            elif k == CONDBLOCK:
                if self.sv.cbits[g.cbit]:
                    self.run(g.body)

    def _measure(self, q: int, cbit: int) -> None:
        psi = self.sv.amplitudes
        p1 = min(max(kernels.sv_prob1(psi, 1 << q), 0.0), 1.0)
        if self.forced is not None:
            if self.ptr >= len(self.forced):
                raise ForcedOutcomeError(
                    "forced outcome list is shorter than the executed measurements")
            outcome = self.forced[self.ptr]
            self.ptr += 1
        else:
            outcome = int(self.rng.random() < p1)
        prob = p1 if outcome else 1.0 - p1
        if prob < NORM_TOL:
            raise ForcedOutcomeError(f"outcome {outcome} on qubit {q} has zero probability")
        kernels.sv_project(psi, 1 << q, outcome, 1.0 / np.sqrt(prob))
        self.sv.cbits[cbit] = outcome
        self.sv.probability *= prob


def run_statevector(c: Circuit, inputs: Mapping[str, int] | np.ndarray,
                    policy: MeasurePolicy = Seeded(0),
                    max_qubits: int = MAX_SV_QUBITS) -> StateVector:
    """Evolve a basis input (register mapping) or an explicit amplitude vector."""
    if c.num_qubits > max_qubits:
        raise SimulationError(f"{c.num_qubits} qubits exceeds the statevector cap {max_qubits}")
    if isinstance(inputs, np.ndarray):
        amps = np.ascontiguousarray(inputs, dtype=np.complex128).copy()
        if amps.shape != (1 << c.num_qubits,):
            raise ValueError("amplitude vector has the wrong dimension")
        sv = StateVector(amps, c.num_qubits, [0] * c.num_cbits)
    else:
        _check_inputs(c, inputs)
        row = encode_inputs(c, inputs)
        index = sum(int(b) << q for q, b in enumerate(row))
        sv = StateVector.basis(c.num_qubits, index, c.num_cbits)
    _SVRunner(sv, policy).run(c.gates)
    return sv


def basis_index(c: Circuit, values: Mapping[str, int]) -> int:
    row = encode_inputs(c, values)
    return sum(int(b) << q for q, b in enumerate(row))


# Oracles ---------------------------------------------------------------------

class NoOracle(SimulationError):
    """The circuit's semantic descriptor has no classical oracle."""


def _input_ranges(c: Circuit) -> dict[str, range]:
    sem = c.semantic
    n = sem.n
    op = sem.op
    full = range(1 << n)
    ranges: dict[str, range] = {}
    if sem.controlled:
        ranges["c"] = range(2)
    if op in ("add", "sub"):
        ranges.update(x=full, y=full)
    elif op in ("const_add", "const_sub"):
        ranges.update(x=full)
    elif op in ("compare_gt", "compare_le"):
        ranges.update(x=full, y=full, t=range(2))
    elif op in ("const_compare_lt", "const_compare_ge"):
        ranges.update(x=full, t=range(2))
    elif op == "modadd":
        ranges.update(x=range(sem.p), y=range(sem.p))
    elif op == "const_modadd":
        ranges.update(x=range(sem.p))
    elif op == "in_range":
        ranges.update(x=full, y=full, z=full, t=range(2))
    else:
        raise NoOracle(f"no oracle for semantic op {op!r}")
    return ranges


def expected_outputs(sem: Semantic, v: Mapping[str, int]) -> dict[str, int]:
    """Oracle: expected values of every non-ancilla register."""
    n = sem.n
    out = dict(v)
    on = v.get("c", 1) if sem.controlled else 1
    op = sem.op
    if op == "add":
        out["y"] = (v["y"] + on * v["x"]) % (1 << (n + 1))
    elif op == "sub":
        out["y"] = (v["y"] - on * v["x"]) % (1 << (n + 1))
    elif op == "const_add":
        out["x"] = (v["x"] + on * sem.a) % (1 << (n + 1))
    elif op == "const_sub":
        out["x"] = (v["x"] - on * sem.a) % (1 << (n + 1))
    elif op == "compare_gt":
        out["t"] = v["t"] ^ (on & int(v["x"] > v["y"]))
    elif op == "compare_le":
        out["t"] = v["t"] ^ (on & int(v["x"] <= v["y"]))
    elif op == "const_compare_lt":
        out["t"] = v["t"] ^ (on & int(v["x"] < sem.a))
    elif op == "const_compare_ge":
        out["t"] = v["t"] ^ (on & int(v["x"] >= sem.a))
    elif op == "modadd":
        out["y"] = (v["y"] + on * v["x"]) % sem.p
    elif op == "const_modadd":
        out["x"] = (v["x"] + on * sem.a) % sem.p
    elif op == "in_range":
        out["t"] = v["t"] ^ int(v["y"] < v["x"] < v["z"])
    else:
        raise NoOracle(f"no oracle for semantic op {op!r}")
    return out


def admissible_inputs(c: Circuit) -> list[dict[str, int]]:
    ranges = _input_ranges(c)
    names = list(ranges)
    return [dict(zip(names, vals)) for vals in itertools.product(*(ranges[k] for k in names))]


# Verification ----------------------------------------------------------------

@dataclass
class VerifyReport:
    spec: dict
    backend: str
    inputs_checked: int
    branches_checked: int
    failures: list[dict] = field(default_factory=list)
    seed: int | None = None

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"))


MAX_REPORTED_FAILURES = 10


def _ancilla_ok(c: Circuit, row: np.ndarray) -> bool:
    return all(row[q] == 0 for q in c.ancilla_qubits)


def _resolve(target: Any) -> Circuit:
    if isinstance(target, Circuit):
        return target
    build = getattr(target, "build", None)
    if build is None:
        raise TypeError("verify target must be a Circuit or an architecture spec")
    return build()


def _spec_dict(target: Any, c: Circuit) -> dict:
    to_dict = getattr(target, "to_dict", None)
    if to_dict is not None:
        return to_dict()
    return asdict(c.semantic)


def exhaustive_verify(target: Any, backend: str = "auto", branches: str = "all",
                      seed: int = 0, trials: int = 1000,
                      budget: int = VERIFY_BUDGET) -> VerifyReport:
    """Check a circuit against its oracle on admissible inputs and measurement branches.

    ``branches='all'`` forces every combination of measurement outcomes;
    ``branches='sampled'`` draws ``trials`` random inputs with seeded outcomes.
    """
    c = _resolve(target)
    if backend == "auto":
        backend = "basis" if supports_basis(c) else "statevector"
    if backend not in ("basis", "statevector"):
        raise ValueError(f"unknown backend {backend!r}")
    if branches not in ("all", "sampled"):
        raise ValueError(f"unknown branch mode {branches!r}")
    ranges = _input_ranges(c)
    m = measurement_count(c)
    n_inputs = 1
    for r in ranges.values():
        n_inputs *= len(r)
    if branches == "all":
        # Size the sweep before materializing it.
        required = n_inputs << m
        if required > budget:
            raise BudgetExceeded(required, budget)
        inputs = admissible_inputs(c)
        branch_rows = np.array(list(itertools.product((0, 1), repeat=m)), dtype=np.uint8)
        branch_rows = branch_rows.reshape(1 << m, m)
        cases = [(v, b) for v in inputs for b in branch_rows]
        rep_seed = None
        checked = n_inputs
    else:
        rng = rng_for(seed)
        # Uniform over the product of register ranges, drawn register by register.
        cols = {k: rng.integers(r.start, r.stop, size=trials) for k, r in ranges.items()}
        bits = rng.integers(0, 2, size=(trials, m), dtype=np.uint8)
        cases = [({k: int(v[j]) for k, v in cols.items()}, bits[j]) for j in range(trials)]
        rep_seed = seed
        checked = len({tuple(v.items()) for v, _ in cases})
    report = VerifyReport(
        spec=_spec_dict(target, c), backend=backend, inputs_checked=checked,
        branches_checked=(1 << m) if branches == "all" else trials, seed=rep_seed,
    )
    if backend == "basis":
        _verify_basis(c, cases, m, report)
    else:
        _verify_statevector(c, cases, report)
    return report


def _record(report: VerifyReport, inputs, branch, expected, got, reason: str) -> None:
    if len(report.failures) < MAX_REPORTED_FAILURES:
        report.failures.append({
            "inputs": dict(inputs), "branch": [int(b) for b in branch],
            "expected": expected, "got": got, "reason": reason,
        })


def _verify_basis(c: Circuit, cases, m: int, report: VerifyReport, chunk: int = 1 << 16) -> None:
    anc = list(c.ancilla_qubits)
    for start in range(0, len(cases), chunk):
        part = cases[start:start + chunk]
        state = np.stack([encode_inputs(c, v) for v, _ in part])
        outs = np.zeros((len(part), max(m, 1)), dtype=np.uint8)
        if m:
            outs[:, :m] = np.stack([b for _, b in part])
        res = run_basis_batch(c, state, outs, np.full(len(part), m, dtype=np.int32), True)
        for r, (v, b) in enumerate(part):
            if res.status[r] == 2:
                continue  # forced outcome contradicts a deterministic measurement
            if res.status[r]:
                _record(report, v, b, None, None, f"simulation status {int(res.status[r])}")
                continue
            want = expected_outputs(c.semantic, v)
            got = decode_registers(c, res.state[r])
            bad = {k: got[k] for k in want if got[k] != want[k]}
            if bad:
                _record(report, v, b, {k: want[k] for k in bad}, bad, "output mismatch")
            elif anc and any(res.state[r, q] for q in anc):
                _record(report, v, b, None, {k: got[k] for k in got if k not in want},
                        "ancilla not restored")


def _verify_statevector(c: Circuit, cases, report: VerifyReport) -> None:
    for v, b in cases:
        try:
            sv = run_statevector(c, v, Forced(b))
        except ForcedOutcomeError:
            continue
        want = expected_outputs(c.semantic, v)
        full = dict(want)
        for r in c.registers_with_role("ancilla"):
            full[r.name] = 0
        idx = basis_index(c, full)
        amp = abs(sv.amplitudes[idx])
        if amp < 1 - AMP_TOL:
            top = int(np.argmax(np.abs(sv.amplitudes)))
            row = np.array([(top >> q) & 1 for q in range(c.num_qubits)], dtype=np.uint8)
            _record(report, v, b, want, decode_registers(c, row), f"amplitude {amp:.6f}")
