"""Comparator builders: half-subtractor, Fourier and two-adder forms, with constant and
controlled variants."""

from __future__ import annotations

import enum
from dataclasses import replace
from typing import Sequence

from .adders import (
    AdderVariant, BuildError, Ops, _check_const, _check_n, _seal, adder_ancillas, emit_add,
    emit_iqft, emit_phi_add, emit_phi_add_const, emit_qft, emit_sub,
)
from .bitarith import bits_of
from .circuit import Builder, Circuit, Semantic, cnot, x


class ComparatorVariant(enum.Enum):
    TWO_ADDER = "two_adder"
    CDKPM_HALF = "cdkpm_half"
    GIDNEY_HALF = "gidney_half"
    DRAPER = "draper"


def comparator_ancillas(variant: ComparatorVariant, n: int,
                        adder: AdderVariant = AdderVariant.CDKPM) -> int:
    if variant is ComparatorVariant.TWO_ADDER:
        return 1 + adder_ancillas(adder, n)
    return {ComparatorVariant.CDKPM_HALF: 1, ComparatorVariant.GIDNEY_HALF: n + 1,
            ComparatorVariant.DRAPER: 1}[variant]


def const_comparator_ancillas(variant: ComparatorVariant, n: int,
                              adder: AdderVariant = AdderVariant.CDKPM) -> int:
    if variant is ComparatorVariant.DRAPER:
        return 1
    return n + comparator_ancillas(variant, n, adder)


def _copy(ops: Ops, src: int, t: int, ctrl: int | None) -> None:
    if ctrl is None:
        ops.cnot(src, t)
    else:
        ops.tof(ctrl, src, t)


def _cdkpm_half(ops: Ops, xs, ys, t, anc, ctrl) -> None:
    # Borrow chain of y - x: each x_i wire ends holding borrow b_{i+1}.
    n = len(xs)
    wire = [anc[0]] + list(xs[:-1])
    for i in range(n):
        with ops.block("UMA"):
            ops.cnot(wire[i], ys[i])
            ops.cnot(xs[i], wire[i])
            ops.tof(wire[i], ys[i], xs[i])
    _copy(ops, xs[n - 1], t, ctrl)
    for i in reversed(range(n)):
        with ops.block("UMA"):
            ops.tof(wire[i], ys[i], xs[i])
            ops.cnot(xs[i], wire[i])
            ops.cnot(wire[i], ys[i])


def _gidney_half(ops: Ops, xs, ys, t, anc, ctrl) -> None:
    # c_{i+1} = x_i ^ (x_i ^ c_i)(y_i ^ c_i), the borrow of y - x.
    n = len(xs)
    c = list(anc[:n + 1])
    for i in range(n):
        with ops.block("MAJ"):
            ops.cnot(c[i], ys[i])
            ops.cnot(xs[i], c[i])
            ops.and_(c[i], ys[i], c[i + 1])
            ops.cnot(xs[i], c[i + 1])
    _copy(ops, c[n], t, ctrl)
    for i in reversed(range(n)):
        with ops.block("UMA"):
            ops.cnot(xs[i], c[i + 1])
            ops.unand(c[i], ys[i], c[i + 1])
            ops.cnot(xs[i], c[i])
            ops.cnot(c[i], ys[i])


def _draper_cmp(ops: Ops, xs, ys, t, anc, ctrl) -> None:
    reg = list(ys) + [anc[0]]
    emit_qft(ops, reg)
    emit_phi_add(ops, xs, reg, -1)
    emit_iqft(ops, reg)
    _copy(ops, anc[0], t, ctrl)
    emit_qft(ops, reg)
    emit_phi_add(ops, xs, reg, 1)
    emit_iqft(ops, reg)


def _two_adder(ops: Ops, xs, ys, t, anc, ctrl, adder) -> None:
    reg = list(ys) + [anc[0]]
    emit_sub(ops, adder, xs, reg, anc[1:])
    _copy(ops, anc[0], t, ctrl)
    emit_add(ops, adder, xs, reg, anc[1:])


def emit_compare(ops: Ops, variant: ComparatorVariant, xs: Sequence[int], ys: Sequence[int],
                 t: int, anc: Sequence[int], ctrl: int | None = None,
                 adder: AdderVariant = AdderVariant.CDKPM) -> None:
    """t ^= [ctrl] * 1[x > y], computed as the sign bit of y - x."""
    if len(xs) != len(ys):
        raise BuildError("comparator operands must have equal width")
    need = comparator_ancillas(variant, len(xs), adder)
    if len(anc) < need:
        raise BuildError(f"{variant.name} comparator needs {need} ancillas")
    if variant is ComparatorVariant.CDKPM_HALF:
        _cdkpm_half(ops, xs, ys, t, anc, ctrl)
    elif variant is ComparatorVariant.GIDNEY_HALF:
        _gidney_half(ops, xs, ys, t, anc, ctrl)
    elif variant is ComparatorVariant.DRAPER:
        _draper_cmp(ops, xs, ys, t, anc, ctrl)
    else:
        _two_adder(ops, xs, ys, t, anc, ctrl, adder)


def emit_const_compare(ops: Ops, variant: ComparatorVariant, xs: Sequence[int], a: int,
                       t: int, anc: Sequence[int], ctrl: int | None = None,
                       adder: AdderVariant = AdderVariant.CDKPM) -> None:
    """t ^= [ctrl] * 1[x < a]; the control only gates the loaded constant."""
    n = len(xs)
    _check_const(a, n)
    if variant is ComparatorVariant.DRAPER:
        reg = list(xs) + [anc[0]]
        emit_qft(ops, reg)
        emit_phi_add_const(ops, a, reg, -1, ctrl)
        emit_iqft(ops, reg)
        ops.cnot(anc[0], t)
        emit_qft(ops, reg)
        emit_phi_add_const(ops, a, reg, 1, ctrl)
        emit_iqft(ops, reg)
        return
    load = list(anc[:n])
    ones = [load[j] for j, bit in enumerate(bits_of(a, n)) if bit]

    def put(tag: str) -> None:
        if not ones:
            return
        with ops.block(tag):
            for q in ones:
                if ctrl is None:
                    ops.x(q)
                else:
                    ops.cnot(ctrl, q)

    put("LOAD")
    emit_compare(ops, variant, load, xs, t, anc[n:], adder=adder)
    put("UNLOAD")


def _regs(b: Builder, n: int, controlled: bool, pair: bool):
    k = b.register("c", 1, "control")[0] if controlled else None
    xs = b.register("x", n, "input")
    ys = b.register("y", n, "input") if pair else None
    t = b.register("t", 1, "target-bit")[0]
    return k, xs, ys, t


def build_comparator(variant: ComparatorVariant, n: int,
                     adder: AdderVariant = AdderVariant.CDKPM) -> Circuit:
    """|x>|y>|t> -> |x>|y>|t ^ 1[x > y]>."""
    _check_n(n)
    b = Builder()
    _, xs, ys, t = _regs(b, n, False, True)
    anc = b.register("anc", comparator_ancillas(variant, n, adder), "ancilla")
    ops = Ops()
    emit_compare(ops, variant, xs, ys, t, anc, adder=adder)
    return _seal(b, ops, Semantic("compare_gt", n))


def build_controlled_comparator(variant: ComparatorVariant, n: int,
                                adder: AdderVariant = AdderVariant.CDKPM) -> Circuit:
    """|c>|x>|y>|t> -> |c>|x>|y>|t ^ c*1[x > y]>; only the copy-out is controlled."""
    _check_n(n)
    b = Builder()
    k, xs, ys, t = _regs(b, n, True, True)
    anc = b.register("anc", comparator_ancillas(variant, n, adder), "ancilla")
    ops = Ops()
    emit_compare(ops, variant, xs, ys, t, anc, ctrl=k, adder=adder)
    return _seal(b, ops, Semantic("compare_gt", n, controlled=True))


def build_const_comparator(variant: ComparatorVariant, n: int, a: int,
                           adder: AdderVariant = AdderVariant.CDKPM) -> Circuit:
    """|x>|t> -> |x>|t ^ 1[x < a]>."""
    _check_n(n)
    _check_const(a, n)
    b = Builder()
    _, xs, _, t = _regs(b, n, False, False)
    anc = b.register("anc", const_comparator_ancillas(variant, n, adder), "ancilla")
    ops = Ops()
    emit_const_compare(ops, variant, xs, a, t, anc, adder=adder)
    return _seal(b, ops, Semantic("const_compare_lt", n, a=a))


def build_ctrl_const_comparator(variant: ComparatorVariant, n: int, a: int,
                                adder: AdderVariant = AdderVariant.CDKPM) -> Circuit:
    """|c>|x>|t> -> |c>|x>|t ^ c*1[x < a]>, loading c*a with CNOTs."""
    _check_n(n)
    _check_const(a, n)
    b = Builder()
    k, xs, _, t = _regs(b, n, True, False)
    anc = b.register("anc", const_comparator_ancillas(variant, n, adder), "ancilla")
    ops = Ops()
    emit_const_compare(ops, variant, xs, a, t, anc, ctrl=k, adder=adder)
    return _seal(b, ops, Semantic("const_compare_lt", n, a=a, controlled=True))


_COMPLEMENT = {
    "compare_gt": "compare_le", "compare_le": "compare_gt",
    "const_compare_lt": "const_compare_ge", "const_compare_ge": "const_compare_lt",
}


def invert_comparison(c: Circuit) -> Circuit:
    """Append X on the target bit, turning 1[x>y] into 1[x<=y] and 1[x<a] into 1[x>=a].

    A controlled comparator gets CNOT(c, t) instead, since c*(1-g) = c ^ c*g.
    """
    op = c.semantic.op
    if op not in _COMPLEMENT:
        raise BuildError(f"circuit computes {op!r}, not a comparison")
    t = c.register("t").qubits[0]
    flip = cnot(c.register("c").qubits[0], t) if c.semantic.controlled else x(t)
    return Circuit(c.num_qubits, c.num_cbits, c.registers, c.gates + (flip,),
                   replace(c.semantic, op=_COMPLEMENT[op]))
