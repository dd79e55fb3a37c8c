"""Gate counting, ancilla audit, closed-form cost registry and cost-table rendering."""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .adders import (
    AdderVariant, ControlledStrategy, build_controlled_adder, build_plain_adder,
)
from .bitarith import hamming_weight
from .circuit import CNOT, CZ, SITE_PREFIX, Circuit, _spans
from .compare import (
    ComparatorVariant, build_comparator, build_const_comparator, build_controlled_comparator,
    build_ctrl_const_comparator,
)
from .modular import NEEDS_A, ArchitectureSpec, Kind
from .sim import (
    TALLY_KINDS, admissible_inputs, encode_inputs, measurement_count, rng_for, run_basis_batch,
)

CNOT_CZ = "CNOT+CZ"
QFT_BLOCKS = "QFT_BLOCKS"


@dataclass
class ResourceReport:
    """Static and expected tallies per gate kind and per block tag.

    Expected counts weight a gate nested in k measurement-conditioned blocks
    by (1/2)^k, every condition being a fair coin.
    """

    static: dict[str, int] = field(default_factory=dict)
    expected: dict[str, Fraction] = field(default_factory=dict)
    blocks_static: dict[str, int] = field(default_factory=dict)
    blocks_expected: dict[str, Fraction] = field(default_factory=dict)
    ancilla_count: int = 0
    total_qubits: int = 0

    def count(self, gate: str, expected: bool = False) -> Fraction:
        """Tally for a gate kind, ``CNOT+CZ``, ``qubits``, ``ancillas``, a block tag or
        ``QFT_BLOCKS``."""
        if gate == "qubits":
            return Fraction(self.total_qubits)
        if gate == "ancillas":
            return Fraction(self.ancilla_count)
        gates = self.expected if expected else self.static
        blocks = self.blocks_expected if expected else self.blocks_static
        if gate == CNOT_CZ:
            return Fraction(gates.get(CNOT, 0)) + Fraction(gates.get(CZ, 0))
        if gate == QFT_BLOCKS:
            return Fraction(blocks.get("QFT", 0)) + Fraction(blocks.get("IQFT", 0))
        if gate in gates:
            return Fraction(gates[gate])
        return Fraction(blocks.get(gate, 0))

    def amortized_qft_blocks(self, expected: bool = False) -> Fraction:
        """QFT-class blocks excluding the outermost QFT/IQFT pair, for repeated use."""
        return max(self.count(QFT_BLOCKS, expected) - 2, Fraction(0))

    def to_dict(self) -> dict:
        def frac(v: Fraction) -> str | int:
            return int(v) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
        return {
            "static": dict(self.static),
            "expected": {k: frac(v) for k, v in self.expected.items()},
            "blocks_static": dict(self.blocks_static),
            "blocks_expected": {k: frac(v) for k, v in self.blocks_expected.items()},
            "cnot_cz_static": frac(self.count(CNOT_CZ)),
            "cnot_cz_expected": frac(self.count(CNOT_CZ, True)),
            "ancilla_count": self.ancilla_count,
            "total_qubits": self.total_qubits,
        }


def _tag_name(tag: str) -> str:
    return "MBU_SITE" if tag.startswith(SITE_PREFIX) else tag


def _tally(gates, depth: int, r: ResourceReport, st, ex, bst, bex) -> None:
    w = Fraction(1, 1 << depth)
    for tag, _, _ in _spans(gates):
        bst[_tag_name(tag)] += 1
        bex[_tag_name(tag)] += w
    for g in gates:
        st[g.kind] += 1
        ex[g.kind] += w
        if g.body is not None:
            _tally(g.body, depth + 1, r, st, ex, bst, bex)


def _analyze(c: Circuit) -> ResourceReport:
    r = ResourceReport(ancilla_count=c.ancilla_count, total_qubits=c.num_qubits)
    st: dict = defaultdict(int)
    ex: dict = defaultdict(Fraction)
    bst: dict = defaultdict(int)
    bex: dict = defaultdict(Fraction)
    _tally(c.gates, 0, r, st, ex, bst, bex)
    r.static, r.expected = dict(st), dict(ex)
    r.blocks_static, r.blocks_expected = dict(bst), dict(bex)
    return r


def static_counts(c: Circuit) -> ResourceReport:
    """Exact tallies; gates inside conditional blocks count at full weight in ``static``."""
    return _analyze(c)


def expected_counts(c: Circuit) -> ResourceReport:
    """Same report; read the ``expected`` fields for measurement-weighted tallies."""
    return _analyze(c)


def ancilla_audit(c: Circuit, report) -> dict:
    """Declared ancillas, those touched by some gate, and whether verification saw them restored."""
    touched: set[int] = set()
    for g, _ in c.walk():
        touched |= set(g.qubits)
    anc = set(c.ancilla_qubits)
    leaked = any(f.get("reason") == "ancilla not restored" for f in report.failures)
    return {
        "declared": len(anc),
        "touched": len(anc & touched),
        "restored": bool(report.passed and not leaked),
    }


@dataclass(frozen=True)
class Empirical:
    mean: float
    stderr: float


def empirical_counts(c: Circuit, runs: int = 10_000, seed: int = 0) -> dict[str, Empirical]:
    """Per-run executed-gate tallies over seeded basis runs on random admissible inputs."""
    cases = admissible_inputs(c)
    rng = rng_for(seed)
    picks = rng.integers(0, len(cases), size=runs)
    state = np.stack([encode_inputs(c, cases[int(i)]) for i in picks])
    m = max(measurement_count(c), 1)
    outcomes = rng.integers(0, 2, size=(runs, m), dtype=np.uint8)
    res = run_basis_batch(c, state, outcomes, forced=False)
    out = {}
    for i, kind in enumerate(TALLY_KINDS):
        col = res.tally[:, i].astype(float)
        out[kind] = Empirical(float(col.mean()), float(col.std(ddof=1) / np.sqrt(runs)))
    return out


# Closed forms ----------------------------------------------------------------

@dataclass(frozen=True)
class Poly:
    """c_n * n + c_p * |p| + c_0."""

    n: Fraction = Fraction(0)
    p: Fraction = Fraction(0)
    c: Fraction = Fraction(0)

    def __call__(self, n: int, hp: int = 0) -> Fraction:
        return self.n * n + self.p * hp + self.c

    def label(self) -> str:
        def num(v: Fraction) -> str:
            return str(v.numerator) if v.denominator == 1 else str(float(v))
        parts = []
        for coef, sym in ((self.n, "n"), (self.p, "|p|")):
            if coef:
                parts.append(sym if coef == 1 else f"{num(coef)}{sym}")
        if self.c or not parts:
            parts.append(num(self.c))
        out = "+".join(parts)
        return out.replace("+-", "-")


def P(n=0, p=0, c=0) -> Poly:
    return Poly(Fraction(n), Fraction(p), Fraction(c))


EXACT, GOLDEN, DISCREPANCY, DRIFT = "exact", "golden", "discrepancy-documented", "drift"
_SEVERITY = {EXACT: 0, GOLDEN: 1, DISCREPANCY: 2, DRIFT: 3}


@dataclass(frozen=True)
class Formula:
    """A reference closed form, and for non-exact cells the frozen value the build produces."""

    target: str
    gate: str
    column: str
    reference: Poly
    status: str = EXACT
    built: Poly | None = None
    note: str = ""


def _spec_builder(kind: Kind, preset: str) -> Callable[[int, int, int, bool], Circuit]:
    def build(n: int, p: int, a: int, mbu: bool) -> Circuit:
        return ArchitectureSpec(kind, n, p, a if kind in NEEDS_A else None, mbu, preset).build()
    return build


_PRESET_ROWS = {"CDKPM_ALL": "cdkpm", "GIDNEY_ALL": "gidney", "HYBRID": "hybrid",
                "VBE_ALL": "vbe", "DRAPER_BEAUREGARD": "draper"}

TARGETS: dict[str, Callable[[int, int, int, bool], Circuit]] = {}
for _kind in Kind:
    for _preset in _PRESET_ROWS:
        TARGETS[f"{_kind.value}:{_preset}"] = _spec_builder(_kind, _preset)
for _v in (AdderVariant.VBE, AdderVariant.CDKPM, AdderVariant.GIDNEY, AdderVariant.DRAPER):
    TARGETS[f"plain_add:{_v.name}"] = (lambda v: lambda n, p, a, mbu: build_plain_adder(v, n))(_v)
for _s in ControlledStrategy:
    _draper = _s in (ControlledStrategy.DRAPER_CENTRAL, ControlledStrategy.DRAPER_1ANC)
    for _b in (AdderVariant.DRAPER,) if _draper else (AdderVariant.CDKPM, AdderVariant.GIDNEY):
        TARGETS[f"ctrl_add:{_s.name}:{_b.name}"] = (
            lambda s, b: lambda n, p, a, mbu: build_controlled_adder(s, n, b))(_s, _b)
for _cv in ComparatorVariant:
    TARGETS[f"compare:{_cv.name}"] = (lambda v: lambda n, p, a, mbu: build_comparator(v, n))(_cv)
    TARGETS[f"ctrl_compare:{_cv.name}"] = (
        lambda v: lambda n, p, a, mbu: build_controlled_comparator(v, n))(_cv)
    TARGETS[f"const_compare:{_cv.name}"] = (
        lambda v: lambda n, p, a, mbu: build_const_comparator(v, n, a % (1 << n)))(_cv)
    TARGETS[f"ctrl_const_compare:{_cv.name}"] = (
        lambda v: lambda n, p, a, mbu: build_ctrl_const_comparator(v, n, a % (1 << n)))(_cv)

T, C, XG, Q, A = "TOFFOLI", CNOT_CZ, "X", "qubits", "ancillas"
S, E = "static", "expected"

FORMULAS: list[Formula] = [
    # Cost table rows for the modular adder.
    Formula("modadd:CDKPM_ALL", Q, S, P(3, 0, 2), DISCREPANCY, P(3, 0, 3),
            "2n data qubits plus the n+3 ancillas of the CDKPM construction"),
    Formula("modadd:CDKPM_ALL", T, S, P(8)),
    Formula("modadd:CDKPM_ALL", T, E, P(7)),
    Formula("modadd:CDKPM_ALL", C, S, P(16, 2, 4), DISCREPANCY, P(16, 2, 5),
            "the fold CNOT of the sum's top bit into the flag is counted"),
    Formula("modadd:CDKPM_ALL", C, E, P(14, 2, Fraction(7, 2)), DISCREPANCY,
            P(14, 2, Fraction(9, 2)), "same extra fold CNOT"),
    Formula("modadd:CDKPM_ALL", XG, S, P(0, 2, 1)),
    Formula("modadd:CDKPM_ALL", XG, E, P(0, 2, Fraction(3, 2))),
    Formula("modadd:GIDNEY_ALL", Q, S, P(4, 0, 2), DISCREPANCY, P(4, 0, 3),
            "2n data qubits plus 2n+3 ancillas"),
    Formula("modadd:GIDNEY_ALL", T, S, P(4)),
    Formula("modadd:GIDNEY_ALL", T, E, P(Fraction(7, 2))),
    Formula("modadd:GIDNEY_ALL", C, S, P(26, 2, 4), GOLDEN, P(28, 2, -1),
            "erase-AND CZ fixups and block CNOTs follow the text description"),
    Formula("modadd:GIDNEY_ALL", C, E, P(Fraction(91, 4), 2, Fraction(7, 2)), GOLDEN,
            P(Fraction(91, 4), 2, Fraction(-1, 2)), "slope matches; constant differs"),
    Formula("modadd:GIDNEY_ALL", XG, S, P(0, 2, 1), GOLDEN, P(4, 2, -1),
            "each erased AND resets its qubit with a conditional X"),
    Formula("modadd:GIDNEY_ALL", XG, E, P(0, 2, Fraction(3, 2)), GOLDEN,
            P(Fraction(7, 4), 2, Fraction(1, 2)), "conditional reset X gates at weight 1/2"),
    Formula("modadd:HYBRID", Q, S, P(3, 0, 2), DISCREPANCY, P(3, 0, 3),
            "2n data qubits plus n+3 ancillas"),
    Formula("modadd:HYBRID", T, S, P(6)),
    Formula("modadd:HYBRID", T, E, P(Fraction(11, 2))),
    Formula("modadd:HYBRID", C, S, P(21, 2, 4), GOLDEN, P(22, 2, 2),
            "Gidney block constants follow the text description"),
    Formula("modadd:HYBRID", C, E, P(Fraction(71, 4), 2, Fraction(7, 2)), GOLDEN,
            P(Fraction(71, 4), 2, 2), "slope matches; constant differs"),
    Formula("modadd:HYBRID", XG, S, P(0, 2, 1), GOLDEN, P(2, 2, 0),
            "conditional reset X gates of the erased ANDs"),
    Formula("modadd:HYBRID", XG, E, P(0, 2, Fraction(3, 2)), GOLDEN,
            P(Fraction(3, 4), 2, 1), "conditional reset X gates at weight 1/2"),
    Formula("modadd:VBE_ALL", Q, S, P(4, 0, 2), GOLDEN, P(4, 0, 3),
            "built with two-adder comparators; the four-adder layout is not reproduced"),
    Formula("modadd:VBE_ALL", T, S, P(16, 0, 4), GOLDEN, P(24, 0, -12),
            "six VBE adders: add, two per comparator pair, constant subtract"),
    Formula("modadd:VBE_ALL", T, E, P(14, 0, 4), GOLDEN, P(20, 0, -10),
            "the wrapped two-adder comparator holds 8n-4 Toffoli gates"),
    Formula("modadd:VBE_ALL", C, S, P(20, 2, 18), GOLDEN, P(24, 2, 3),
            "six VBE adders instead of the four-adder layout"),
    Formula("modadd:VBE_ALL", C, E, P(17, 2, Fraction(31, 2)), GOLDEN,
            P(20, 2, Fraction(5, 2)), "six VBE adders instead of the four-adder layout"),
    Formula("modadd:VBE_ALL", XG, S, P(0, 2, 1)),
    Formula("modadd:VBE_ALL", XG, E, P(0, 2, Fraction(3, 2))),
    Formula("modadd:DRAPER_BEAUREGARD", Q, S, P(2, 0, 2)),
    Formula("modadd:DRAPER_BEAUREGARD", QFT_BLOCKS, S, P(0, 0, 10), DISCREPANCY, P(0, 0, 6),
            "3 QFT and 3 IQFT blocks per the explicit block sequence"),
    Formula("modadd:DRAPER_BEAUREGARD", QFT_BLOCKS, E, P(0, 0, 8), DISCREPANCY, P(0, 0, 5),
            "one QFT and one IQFT sit in the measurement branch"),
    Formula("modadd:DRAPER_BEAUREGARD", "PCQFT", S, P(0, 0, 1), DISCREPANCY, P(0, 0, 0),
            "no architecture places a PCQFT block"),
    Formula("modadd:DRAPER_BEAUREGARD", "PCQFT", E, P(0, 0, 1), DISCREPANCY, P(0, 0, 0),
            "no architecture places a PCQFT block"),
    # Ancilla claims of the modular constructions.
    Formula("modadd:CDKPM_ALL", A, S, P(1, 0, 3)),
    Formula("modadd:GIDNEY_ALL", A, S, P(2, 0, 3)),
    Formula("modadd:HYBRID", A, S, P(1, 0, 3)),
    Formula("ctrl_modadd:CDKPM_ALL", T, S, P(9, 0, 1)),
    Formula("ctrl_modadd:CDKPM_ALL", T, E, P(8, 0, Fraction(1, 2))),
    Formula("ctrl_modadd:CDKPM_ALL", A, S, P(1, 0, 3)),
    Formula("ctrl_modadd:GIDNEY_ALL", T, S, P(5, 0, 1)),
    Formula("ctrl_modadd:GIDNEY_ALL", T, E, P(Fraction(9, 2), 0, Fraction(1, 2))),
    Formula("ctrl_modadd:GIDNEY_ALL", A, S, P(2, 0, 3)),
    Formula("const_modadd_takahashi:CDKPM_ALL", T, S, P(6)),
    Formula("const_modadd_takahashi:CDKPM_ALL", T, E, P(5)),
    Formula("ctrl_const_modadd_beauregard:DRAPER_BEAUREGARD", QFT_BLOCKS, S, P(0, 0, 6)),
    Formula("ctrl_const_modadd_beauregard:DRAPER_BEAUREGARD", A, S, P(0, 0, 2)),
    Formula("in_range:CDKPM_ALL", T, S, P(6, 0, 1)),
    Formula("in_range:CDKPM_ALL", T, E, P(5, 0, 1)),
    # Plain adders.
    Formula("plain_add:VBE", T, S, P(4), DISCREPANCY, P(4, 0, -2),
            "n CARRY and n-1 inverse CARRY blocks hold 4n-2 Toffoli gates"),
    Formula("plain_add:VBE", A, S, P(1)),
    Formula("plain_add:CDKPM", T, S, P(2)),
    Formula("plain_add:CDKPM", C, S, P(4, 0, 1)),
    Formula("plain_add:CDKPM", A, S, P(0, 0, 1)),
    Formula("plain_add:GIDNEY", T, S, P(1)),
    Formula("plain_add:GIDNEY", C, S, P(6, 0, -1), GOLDEN, P(7, 0, -2),
            "CNOT and CZ fixups merged; the CZ gates sit in measurement branches"),
    Formula("plain_add:GIDNEY", A, S, P(1)),
    Formula("plain_add:DRAPER", A, S, P(0)),
    # Controlled adders.
    Formula("ctrl_add:GENERIC_LOAD:CDKPM", T, S, P(4)),
    Formula("ctrl_add:GENERIC_LOAD:CDKPM", A, S, P(1, 0, 1)),
    Formula("ctrl_add:GENERIC_LOAD_MBU:CDKPM", T, S, P(3)),
    Formula("ctrl_add:GENERIC_LOAD_MBU:CDKPM", A, S, P(1, 0, 1)),
    Formula("ctrl_add:GENERIC_LOAD_MBU:GIDNEY", T, S, P(2)),
    Formula("ctrl_add:GENERIC_LOAD_MBU:GIDNEY", A, S, P(2)),
    Formula("ctrl_add:CDKPM_CUMA:CDKPM", T, S, P(3), DISCREPANCY, P(3, 0, 1),
            "the central carry-out needs one Toffoli controlled on the control qubit"),
    Formula("ctrl_add:CDKPM_CUMA:CDKPM", A, S, P(0, 0, 1)),
    Formula("ctrl_add:GIDNEY_CTRL:CDKPM", T, S, P(2), DISCREPANCY, P(2, 0, 1),
            "the top carry is computed into an extra ancilla, then added under control"),
    Formula("ctrl_add:GIDNEY_CTRL:CDKPM", A, S, P(1, 0, 1)),
    Formula("ctrl_add:DRAPER_1ANC:DRAPER", T, S, P(1)),
    Formula("ctrl_add:DRAPER_1ANC:DRAPER", A, S, P(0, 0, 1)),
    # Comparators.
    Formula("compare:CDKPM_HALF", T, S, P(2)),
    Formula("compare:CDKPM_HALF", A, S, P(0, 0, 1)),
    Formula("compare:GIDNEY_HALF", T, S, P(1)),
    Formula("compare:GIDNEY_HALF", A, S, P(1), DISCREPANCY, P(1, 0, 1),
            "the borrow chain keeps a carry-in ancilla"),
    Formula("compare:DRAPER", A, S, P(0, 0, 1)),
    Formula("ctrl_compare:CDKPM_HALF", T, S, P(2, 0, 1)),
    Formula("ctrl_compare:CDKPM_HALF", A, S, P(0), DISCREPANCY, P(0, 0, 1),
            "the carry-in ancilla of the half subtractor is still needed"),
    Formula("ctrl_compare:GIDNEY_HALF", T, S, P(1, 0, 1)),
    Formula("ctrl_compare:GIDNEY_HALF", A, S, P(1, 0, 1)),
    Formula("const_compare:CDKPM_HALF", T, S, P(2)),
    Formula("ctrl_const_compare:CDKPM_HALF", T, S, P(2)),
    Formula("ctrl_const_compare:CDKPM_HALF", A, S, P(1, 0, 1)),
]


def formulas_for(target: str) -> list[Formula]:
    return [f for f in FORMULAS if f.target == target]


def lookup(target: str, gate: str, column: str = S) -> Formula | None:
    for f in FORMULAS:
        if f.target == target and f.gate == gate and f.column == column:
            return f
    return None


@dataclass(frozen=True)
class Cell:
    target: str
    gate: str
    column: str
    n: int
    p: int
    hamming_p: int
    built: Fraction
    reference: Fraction
    frozen: Fraction | None
    status: str


def classify(f: Formula, built: Fraction, n: int, hp: int) -> str:
    if built == f.reference(n, hp):
        return EXACT
    if f.built is not None and built == f.built(n, hp):
        return f.status
    return DRIFT


def _measure(c_static: Circuit, c_mbu: Circuit | None, f: Formula) -> Fraction:
    if f.column == S:
        return static_counts(c_static).count(f.gate)
    return expected_counts(c_mbu if c_mbu is not None else c_static).count(f.gate, True)


def check_formulas(target: str, ns: Iterable[int], ps: Iterable[int] | None = None,
                   a: int = 1) -> list[Cell]:
    """Compare built circuits with every registered formula of ``target``."""
    if target not in TARGETS:
        raise KeyError(f"unknown target {target!r}")
    fs = formulas_for(target)
    out = []
    for n in ns:
        for p in (ps if ps is not None else [(1 << n) - 1]):
            if not 1 <= p < (1 << n):
                continue
            hp = hamming_weight(p)
            c0 = TARGETS[target](n, p, a % p if p > 1 else 0, False)
            c1 = TARGETS[target](n, p, a % p if p > 1 else 0, True) \
                if target.split(":")[0] in {k.value for k in Kind} else None
            for f in fs:
                v = _measure(c0, c1, f)
                out.append(Cell(target, f.gate, f.column, n, p, hp, v, f.reference(n, hp),
                                f.built(n, hp) if f.built else None, classify(f, v, n, hp)))
    return out


# Cost table ------------------------------------------------------------------

TABLE_ROWS = {
    "vbe": "modadd:VBE_ALL", "cdkpm": "modadd:CDKPM_ALL", "gidney": "modadd:GIDNEY_ALL",
    "hybrid": "modadd:HYBRID", "draper": "modadd:DRAPER_BEAUREGARD",
}
_RIPPLE_GATES = (T, C, XG)
_FOURIER_GATES = (QFT_BLOCKS, "PCQFT")
CSV_HEADER = ["preset", "n", "p", "hamming_p", "gate", "static", "expected_num",
              "expected_den", "status"]


@dataclass(frozen=True)
class TableLine:
    row: str
    n: int
    p: int
    hamming_p: int
    gate: str
    static: Fraction
    expected: Fraction
    status: str
    reference_static: str
    reference_expected: str


def table_lines(rows: Sequence[str], ns: Iterable[int], ps: Iterable[int]) -> list[TableLine]:
    out = []
    ns, ps = list(ns), list(ps)
    for row in rows:
        if row not in TABLE_ROWS:
            raise KeyError(f"unknown table row {row!r}; choose from {sorted(TABLE_ROWS)}")
        target = TABLE_ROWS[row]
        gates = _FOURIER_GATES if row == "draper" else _RIPPLE_GATES
        for n in ns:
            for p in ps:
                if not 1 <= p < (1 << n):
                    continue
                hp = hamming_weight(p)
                r0 = static_counts(TARGETS[target](n, p, 0, False))
                r1 = expected_counts(TARGETS[target](n, p, 0, True))
                for gate in (Q,) + gates:
                    fs = lookup(target, gate, S)
                    fe = lookup(target, gate, E) if gate != Q else fs
                    st = r0.count(gate)
                    ex = r1.count(gate, gate != Q)
                    status = max((classify(f, v, n, hp) for f, v in ((fs, st), (fe, ex)) if f),
                                 key=_SEVERITY.__getitem__, default=EXACT)
                    out.append(TableLine(row, n, p, hp, gate, st, ex, status,
                                         fs.reference.label() if fs else "",
                                         fe.reference.label() if fe else ""))
    return out


def _fmt(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else str(float(v))


def render_table(rows: Sequence[str], ns: Iterable[int], ps: Iterable[int],
                 fmt: str = "md") -> str:
    return render_lines(table_lines(rows, ns, ps), fmt)


def render_lines(lines: Sequence[TableLine], fmt: str = "md") -> str:
    """CSV with one line per (row, n, p, gate), or a Markdown grid in the cost-table layout."""
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for ln in lines:
            w.writerow([ln.row, ln.n, ln.p, ln.hamming_p, ln.gate, _fmt(ln.static),
                        ln.expected.numerator, ln.expected.denominator, ln.status])
        return buf.getvalue()
    if fmt != "md":
        raise ValueError(f"unknown table format {fmt!r}")
    head = ("| row | n | p | Logical Qubits | Toffoli w/o MBU | Toffoli with MBU "
            "| CNOT,CZ w/o MBU | CNOT,CZ with MBU | X w/o MBU | X with MBU |")
    out = [head, "|" + "---|" * 10]
    groups: dict[tuple, dict[str, TableLine]] = {}
    for ln in lines:
        groups.setdefault((ln.row, ln.n, ln.p), {})[ln.gate] = ln
    for (row, n, p), cells in groups.items():
        def cell(gate: str, expected: bool) -> str:
            ln = cells.get(gate)
            if ln is None:
                return "-"
            v = ln.expected if expected else ln.static
            ref = ln.reference_expected if expected else ln.reference_static
            return f"{_fmt(v)} ({ref}; {ln.status})" if ref else _fmt(v)
        if row == "draper":
            cols = [cell(QFT_BLOCKS, False), cell(QFT_BLOCKS, True),
                    cell("PCQFT", False), cell("PCQFT", True), "-", "-"]
        else:
            cols = [cell(g, e) for g in _RIPPLE_GATES for e in (False, True)]
        out.append(f"| {row} | {n} | {p} | {cell(Q, False)} | " + " | ".join(cols) + " |")
    return "\n".join(out) + "\n"
