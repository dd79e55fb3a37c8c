"""Gate-level circuit IR with registers, block tags, classical control and JSON I/O."""

from __future__ import annotations

import json
from contextlib import contextmanager
from dataclasses import dataclass, replace
from typing import Iterator, Sequence

FORMAT_VERSION = 1

X, H, CNOT, CZ, TOFFOLI, ROT, CROT, MEASURE, CONDBLOCK = (
    "X", "H", "CNOT", "CZ", "TOFFOLI", "ROT", "CROT", "MEASURE", "CONDBLOCK",
)
GATE_KINDS = (X, H, CNOT, CZ, TOFFOLI, ROT, CROT, MEASURE, CONDBLOCK)
_ARITY = {X: 1, H: 1, CNOT: 2, CZ: 2, TOFFOLI: 3, ROT: 1, CROT: 2, MEASURE: 1, CONDBLOCK: 0}

ROLES = ("input", "output", "ancilla", "control", "target-bit")

# Block tags emitted by the builders. MBU_SITE:<q> marks a subroutine whose
# XOR target is qubit q and which may be replaced by measurement-based uncompute.
TAGS = (
    "QFT", "IQFT", "PCQFT", "MAJ", "UMA", "C_UMA", "CARRY", "SUM",
    "Phi_ADD", "Phi_SUB", "C_Phi_ADD", "C_Phi_SUB",
    "Phi_ADD_CONST", "Phi_SUB_CONST", "C_Phi_ADD_CONST", "C_Phi_SUB_CONST",
    "MBU_BRANCH", "LOAD", "UNLOAD", "AND", "UNAND",
)
SITE_PREFIX = "MBU_SITE:"


class CircuitError(ValueError):
    """Invalid circuit construction."""


class UnsupportedOperation(CircuitError):
    """The requested transform does not apply to this circuit."""


class CircuitFormatError(CircuitError):
    """Malformed or incompatible circuit document."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message if offset is None else f"{message} (byte offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class Gate:
    """One gate record.

    Qubit order: CNOT (control, target); TOFFOLI (c1, c2, target);
    CROT (control, target). Rotation angle is ``s * 2*pi * m / 2**k``
    applied as diag(1, e^{i angle}).
    """

    kind: str
    qubits: tuple[int, ...] = ()
    cbit: int | None = None
    m: int | None = None
    k: int | None = None
    s: int | None = None
    body: tuple["Gate", ...] | None = None
    tag_open: tuple[str, ...] = ()
    tag_close: int = 0

    @property
    def target(self) -> int | None:
        if self.kind in (X, H, ROT, MEASURE):
            return self.qubits[0]
        if self.kind in (CNOT, TOFFOLI, CROT):
            return self.qubits[-1]
        return None

    @property
    def controls(self) -> tuple[int, ...]:
        if self.kind in (CNOT, TOFFOLI, CROT):
            return self.qubits[:-1]
        return ()

    def touched(self) -> set[int]:
        out = set(self.qubits)
        for g in self.body or ():
            out |= g.touched()
        return out


def dyadic(m: int, k: int) -> tuple[int, int] | None:
    """Reduce the angle 2*pi*m/2**k to lowest terms; None for a zero angle."""
    m %= 1 << k
    if m == 0:
        return None
    while m % 2 == 0:
        m //= 2
        k -= 1
    return m, k


def x(q: int) -> Gate:
    return Gate(X, (q,))


def h(q: int) -> Gate:
    return Gate(H, (q,))


def cnot(c: int, t: int) -> Gate:
    return Gate(CNOT, (c, t))


def cz(a: int, b: int) -> Gate:
    return Gate(CZ, (a, b))


def toffoli(c1: int, c2: int, t: int) -> Gate:
    return Gate(TOFFOLI, (c1, c2, t))


def rot(q: int, k: int, s: int = 1, m: int = 1) -> Gate:
    return Gate(ROT, (q,), m=m, k=k, s=s)


def crot(c: int, t: int, k: int, s: int = 1, m: int = 1) -> Gate:
    return Gate(CROT, (c, t), m=m, k=k, s=s)


def measure(q: int, cbit: int) -> Gate:
    return Gate(MEASURE, (q,), cbit=cbit)


def condblock(cbit: int, body: Sequence[Gate]) -> Gate:
    return Gate(CONDBLOCK, (), cbit=cbit, body=tuple(body))


@dataclass(frozen=True)
class Register:
    name: str
    role: str
    qubits: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.qubits)


@dataclass(frozen=True)
class Semantic:
    """The arithmetic function a circuit claims to compute."""

    op: str
    n: int
    p: int | None = None
    a: int | None = None
    controlled: bool = False
    mbu: bool = False


_INVERSE_OPS = {"add": "sub", "sub": "add", "const_add": "const_sub", "const_sub": "const_add"}
_SELF_INVERSE_OPS = {
    "compare_gt", "compare_le", "const_compare_lt", "const_compare_ge", "in_range", "identity",
}


def _inverse_op(op: str) -> str:
    if op in _INVERSE_OPS:
        return _INVERSE_OPS[op]
    if op in _SELF_INVERSE_OPS:
        return op
    if op.endswith("_inverse"):
        return op[: -len("_inverse")]
    return op + "_inverse"


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    num_cbits: int
    registers: tuple[Register, ...]
    gates: tuple[Gate, ...]
    semantic: Semantic

    def __post_init__(self) -> None:
        _validate_registers(self.registers, self.num_qubits)
        _validate_gates(self.gates, self.num_qubits, self.num_cbits, set())
        _spans(self.gates)

    def register(self, name: str) -> Register:
        for r in self.registers:
            if r.name == name:
                return r
        raise KeyError(name)

    def registers_with_role(self, role: str) -> list[Register]:
        return [r for r in self.registers if r.role == role]

    @property
    def ancilla_qubits(self) -> tuple[int, ...]:
        return tuple(q for r in self.registers_with_role("ancilla") for q in r.qubits)

    @property
    def ancilla_count(self) -> int:
        return len(self.ancilla_qubits)

    def walk(self) -> Iterator[tuple[Gate, int]]:
        """Yield (gate, conditional depth) for every gate, including block bodies."""
        yield from _walk(self.gates, 0)

    def has_measurement(self) -> bool:
        return any(g.kind in (MEASURE, CONDBLOCK) for g, _ in self.walk())


def _walk(gates: Sequence[Gate], depth: int) -> Iterator[tuple[Gate, int]]:
    for g in gates:
        yield g, depth
        if g.kind == CONDBLOCK:
            yield from _walk(g.body, depth + 1)


def _validate_registers(registers: Sequence[Register], nq: int) -> None:
    seen: set[int] = set()
    names: set[str] = set()
    for r in registers:
        if r.role not in ROLES:
            raise CircuitError(f"unknown register role {r.role!r}")
        if r.name in names:
            raise CircuitError(f"duplicate register name {r.name!r}")
        names.add(r.name)
        for q in r.qubits:
            if not 0 <= q < nq:
                raise CircuitError(f"register {r.name} qubit {q} out of range")
            if q in seen:
                raise CircuitError(f"qubit {q} belongs to two registers")
            seen.add(q)


def _validate_gate(g: Gate, nq: int, ncb: int, written: set[int]) -> None:
    if g.kind not in GATE_KINDS:
        raise CircuitError(f"unknown gate kind {g.kind!r}")
    if len(g.qubits) != _ARITY[g.kind]:
        raise CircuitError(f"{g.kind} expects {_ARITY[g.kind]} qubits, got {len(g.qubits)}")
    if len(set(g.qubits)) != len(g.qubits):
        raise CircuitError(f"{g.kind} has duplicate qubit indices {g.qubits}")
    for q in g.qubits:
        if not 0 <= q < nq:
            raise CircuitError(f"qubit index {q} out of range for {nq} qubits")
    if g.kind in (ROT, CROT):
        if g.k is None or g.k < 1 or g.s not in (1, -1) or g.m is None or g.m < 1:
            raise CircuitError("rotation needs k >= 1, m >= 1 and s in {+1, -1}")
    if g.kind == MEASURE:
        if g.cbit is None or not 0 <= g.cbit < ncb:
            raise CircuitError(f"measurement cbit {g.cbit} out of range")
        written.add(g.cbit)
    if g.kind == CONDBLOCK:
        if g.cbit is None or g.cbit not in written:
            raise CircuitError(f"condition cbit {g.cbit} is not written by an earlier MEASURE")
        _validate_gates(g.body, nq, ncb, written)


def _validate_gates(gates: Sequence[Gate], nq: int, ncb: int, written: set[int]) -> None:
    for g in gates:
        _validate_gate(g, nq, ncb, written)


def _spans(gates: Sequence[Gate]) -> list[tuple[str, int, int]]:
    """Return (tag, start, end) spans of one gate list; end is inclusive."""
    stack: list[tuple[str, int]] = []
    out: list[tuple[str, int, int]] = []
    for i, g in enumerate(gates):
        for t in g.tag_open:
            stack.append((t, i))
        for _ in range(g.tag_close):
            if not stack:
                raise CircuitError(f"unbalanced block tags at gate {i}")
            t, s = stack.pop()
            out.append((t, s, i))
    if stack:
        raise CircuitError(f"unclosed block tag {stack[-1][0]!r}")
    return out


def _apply_spans(gates: Sequence[Gate], spans: Sequence[tuple[str, int, int]]) -> list[Gate]:
    opens: list[list[tuple[int, str]]] = [[] for _ in gates]
    closes = [0] * len(gates)
    for t, s, e in spans:
        opens[s].append((e, t))
        closes[e] += 1
    out = []
    for g, op, cl in zip(gates, opens, closes):
        # Longer spans open first so nesting stays outer-to-inner.
        op.sort(key=lambda et: -et[0])
        out.append(replace(g, tag_open=tuple(t for _, t in op), tag_close=cl))
    return out


def block_spans(c: Circuit) -> list[tuple[str, int, int]]:
    """Top-level block spans of a circuit."""
    return _spans(c.gates)


class Builder:
    """Mutable single-owner circuit builder; ``seal`` freezes it."""

    def __init__(self) -> None:
        self.num_qubits = 0
        self.num_cbits = 0
        self.registers: list[Register] = []
        self._frames: list[list[Gate]] = [[]]
        self._tag_stacks: list[list[tuple[str, int]]] = [[]]
        self._written: set[int] = set()
        self._sealed = False

    def register(self, name: str, size: int, role: str) -> list[int]:
        if size < 0:
            raise CircuitError("register size must be nonnegative")
        qs = list(range(self.num_qubits, self.num_qubits + size))
        self.num_qubits += size
        if size:
            self.registers.append(Register(name, role, tuple(qs)))
            _validate_registers(self.registers, self.num_qubits)
        return qs

    def new_cbit(self) -> int:
        self.num_cbits += 1
        return self.num_cbits - 1

    @property
    def _gates(self) -> list[Gate]:
        return self._frames[-1]

    def append(self, gate: Gate) -> None:
        if self._sealed:
            raise CircuitError("builder already sealed")
        _validate_gate(gate, self.num_qubits, self.num_cbits, self._written)
        self._gates.append(gate)

    def extend(self, gates: Sequence[Gate]) -> None:
        for g in gates:
            self.append(g)

    def open_block(self, tag: str) -> None:
        self._tag_stacks[-1].append((tag, len(self._gates)))

    def close_block(self) -> None:
        stack = self._tag_stacks[-1]
        if not stack:
            raise CircuitError("close_block without open_block")
        tag, start = stack.pop()
        gates = self._gates
        if start == len(gates):
            return
        gates[start] = replace(gates[start], tag_open=(tag,) + gates[start].tag_open)
        gates[-1] = replace(gates[-1], tag_close=gates[-1].tag_close + 1)

    @contextmanager
    def block(self, tag: str) -> Iterator[None]:
        self.open_block(tag)
        yield
        self.close_block()

    @contextmanager
    def cond(self, cbit: int) -> Iterator[None]:
        """Gates appended inside run only if ``cbit`` is 1."""
        if cbit not in self._written:
            raise CircuitError(f"condition cbit {cbit} is not written by an earlier MEASURE")
        self._frames.append([])
        self._tag_stacks.append([])
        yield
        if self._tag_stacks[-1]:
            raise CircuitError("unbalanced block tags inside conditional block")
        self._tag_stacks.pop()
        body = self._frames.pop()
        self._gates.append(condblock(cbit, body))

    def seal(self, semantic: Semantic) -> Circuit:
        if len(self._frames) != 1 or self._tag_stacks[0]:
            raise CircuitError("unbalanced block tags")
        self._sealed = True
        return Circuit(self.num_qubits, self.num_cbits, tuple(self.registers),
                       tuple(self._frames[0]), semantic)


def dagger(c: Circuit) -> Circuit:
    """Inverse of a measurement-free circuit."""
    if c.has_measurement():
        raise UnsupportedOperation(
            "dagger of a circuit with measurements; use the dedicated inverse builder")
    n = len(c.gates)
    spans = [(t, n - 1 - e, n - 1 - s) for t, s, e in _spans(c.gates)]
    rev = []
    for g in reversed(c.gates):
        g = replace(g, tag_open=(), tag_close=0)
        if g.kind in (ROT, CROT):
            g = replace(g, s=-g.s)
        rev.append(g)
    sem = replace(c.semantic, op=_inverse_op(c.semantic.op))
    return Circuit(c.num_qubits, c.num_cbits, c.registers, tuple(_apply_spans(rev, spans)), sem)


def _gate_to_obj(g: Gate) -> dict:
    d: dict = {"kind": g.kind, "qubits": list(g.qubits)}
    if g.cbit is not None:
        d["cbit"] = g.cbit
    if g.kind in (ROT, CROT):
        d["m"], d["k"], d["s"] = g.m, g.k, g.s
    if g.tag_open:
        d["tag_open"] = list(g.tag_open)
    if g.tag_close:
        d["tag_close"] = g.tag_close
    if g.body is not None:
        d["body"] = [_gate_to_obj(b) for b in g.body]
    return d


def serialize(c: Circuit) -> bytes:
    sem: dict = {"op": c.semantic.op, "n": c.semantic.n}
    if c.semantic.p is not None:
        sem["p"] = c.semantic.p
    if c.semantic.a is not None:
        sem["a"] = c.semantic.a
    sem["controlled"] = int(c.semantic.controlled)
    sem["mbu"] = int(c.semantic.mbu)
    doc = {
        "version": FORMAT_VERSION,
        "num_qubits": c.num_qubits,
        "num_cbits": c.num_cbits,
        "registers": [{"name": r.name, "role": r.role, "qubits": list(r.qubits)}
                      for r in c.registers],
        "semantic": sem,
        "gates": [_gate_to_obj(g) for g in c.gates],
    }
    return json.dumps(doc, separators=(",", ":")).encode("ascii")


def _int(d: dict, key: str, required: bool = True) -> int | None:
    v = d.get(key)
    if v is None:
        if required:
            raise CircuitFormatError(f"missing integer field {key!r}")
        return None
    if isinstance(v, bool) or not isinstance(v, int):
        raise CircuitFormatError(f"field {key!r} must be an integer")
    return v


def _gate_from_obj(d: dict) -> Gate:
    if not isinstance(d, dict) or "kind" not in d:
        raise CircuitFormatError("gate record must be an object with a kind")
    qubits = d.get("qubits", [])
    if not isinstance(qubits, list) or not all(isinstance(q, int) for q in qubits):
        raise CircuitFormatError("gate qubits must be a list of integers")
    body = d.get("body")
    return Gate(
        kind=d["kind"],
        qubits=tuple(qubits),
        cbit=_int(d, "cbit", False),
        m=_int(d, "m", False),
        k=_int(d, "k", False),
        s=_int(d, "s", False),
        body=None if body is None else tuple(_gate_from_obj(b) for b in body),
        tag_open=tuple(d.get("tag_open", ())),
        tag_close=_int(d, "tag_close", False) or 0,
    )


def deserialize(data: bytes) -> Circuit:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise CircuitFormatError("document is not UTF-8", e.start) from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise CircuitFormatError(f"parse error: {e.msg}", len(text[: e.pos].encode("utf-8"))) from e
    if not isinstance(doc, dict):
        raise CircuitFormatError("document root must be an object", 0)
    version = doc.get("version")
    if version != FORMAT_VERSION:
        raise CircuitFormatError(f"unsupported format version {version!r}")
    try:
        sem_d = doc["semantic"]
        sem = Semantic(
            op=sem_d["op"], n=_int(sem_d, "n"), p=_int(sem_d, "p", False),
            a=_int(sem_d, "a", False), controlled=bool(_int(sem_d, "controlled", False)),
            mbu=bool(_int(sem_d, "mbu", False)),
        )
        regs = tuple(Register(r["name"], r["role"], tuple(r["qubits"])) for r in doc["registers"])
        gates = tuple(_gate_from_obj(g) for g in doc["gates"])
        return Circuit(_int(doc, "num_qubits"), _int(doc, "num_cbits"), regs, gates, sem)
    except (KeyError, TypeError) as e:
        raise CircuitFormatError(f"malformed document: {e}") from e
    except CircuitFormatError:
        raise
    except CircuitError as e:
        raise CircuitFormatError(f"invalid circuit: {e}") from e
