"""Ripple-carry and Fourier adders, their controlled and constant forms, and subtractors.

Emitters write into an :class:`Ops` list rather than a builder so that the
same code yields a subroutine, its reversal, or a piece of a larger circuit.
"""

from __future__ import annotations

import enum
from contextlib import contextmanager
from dataclasses import replace
from typing import Iterator, Sequence

from .bitarith import bits_of
from .circuit import (
    CROT, ROT, Builder, Circuit, CircuitError, Gate, Semantic, cnot, crot, cz, dagger,
    dyadic, h, measure, rot, toffoli, x,
)


class AdderVariant(enum.Enum):
    VBE = "vbe"
    CDKPM = "cdkpm"
    GIDNEY = "gidney"
    DRAPER = "draper"


class ControlledStrategy(enum.Enum):
    GENERIC_LOAD = "generic_load"
    GENERIC_LOAD_MBU = "generic_load_mbu"
    CDKPM_CUMA = "cdkpm_cuma"
    GIDNEY_CTRL = "gidney_ctrl"
    DRAPER_CENTRAL = "draper_central"
    DRAPER_1ANC = "draper_1anc"


class SubtractMethod(enum.Enum):
    ADJOINT = "adjoint"
    ONES_COMPLEMENT_WRAP = "ones_complement_wrap"
    TWOS_COMPLEMENT_ADD = "twos_complement_add"


class BuildError(CircuitError):
    """Invalid arithmetic construction request."""


def _check_n(n: int) -> None:
    if n < 1:
        raise BuildError(f"register width must be at least 1, got {n}")


def _check_const(a: int, n: int) -> None:
    if not 0 <= a < (1 << n):
        raise BuildError(f"constant {a} does not fit in {n} bits")


# Op lists --------------------------------------------------------------------

def _inv(g: Gate) -> Gate:
    return replace(g, s=-g.s) if g.kind in (ROT, CROT) else g


class Ops:
    """Replayable list of gates, block markers and temporary-AND markers."""

    def __init__(self) -> None:
        self.items: list[tuple] = []

    def g(self, gate: Gate) -> None:
        self.items.append(("g", gate))

    def x(self, q: int) -> None:
        self.g(x(q))

    def h(self, q: int) -> None:
        self.g(h(q))

    def cnot(self, c: int, t: int) -> None:
        self.g(cnot(c, t))

    def tof(self, a: int, b: int, t: int) -> None:
        self.g(toffoli(a, b, t))

    @contextmanager
    def block(self, tag: str) -> Iterator[None]:
        self.items.append(("open", tag))
        yield
        self.items.append(("close",))

    def and_(self, a: int, b: int, t: int) -> None:
        """Toffoli into a target known to be |0>."""
        self.items.append(("and", a, b, t))

    def unand(self, a: int, b: int, t: int) -> None:
        """Measurement-based erase of t = a AND b."""
        self.items.append(("unand", a, b, t))

    def extend(self, other: "Ops") -> None:
        self.items.extend(other.items)

    def cond(self, cbit: int, gate: Gate) -> None:
        """Gate applied only when classical bit ``cbit`` is 1."""
        self.items.append(("cond", cbit, gate))

    def inverse(self) -> "Ops":
        """Reversed sequence; temporary ANDs and their erasures swap roles."""
        close_tag: dict[int, str] = {}
        stack: list[str] = []
        for i, it in enumerate(self.items):
            if it[0] == "open":
                stack.append(it[1])
            elif it[0] == "close":
                close_tag[i] = stack.pop()
        out = Ops()
        for i in reversed(range(len(self.items))):
            it = self.items[i]
            kind = it[0]
            if kind == "g":
                out.items.append(("g", _inv(it[1])))
            elif kind == "cond":
                out.items.append(("cond", it[1], _inv(it[2])))
            elif kind == "open":
                out.items.append(("close",))
            elif kind == "close":
                out.items.append(("open", close_tag[i]))
            elif kind == "and":
                out.items.append(("unand",) + it[1:])
            else:
                out.items.append(("and",) + it[1:])
        return out

    def emit(self, b: Builder) -> None:
        for it in self.items:
            kind = it[0]
            if kind == "g":
                b.append(it[1])
            elif kind == "open":
                b.open_block(it[1])
            elif kind == "close":
                b.close_block()
            elif kind == "cond":
                with b.cond(it[1]):
                    b.append(it[2])
            elif kind == "and":
                with b.block("AND"):
                    b.append(toffoli(*it[1:]))
            else:
                a, bb, t = it[1:]
                with b.block("UNAND"):
                    b.append(h(t))
                    cb = b.new_cbit()
                    b.append(measure(t, cb))
                    with b.cond(cb):
                        b.append(cz(a, bb))
                        # The measured qubit holds the outcome; reset it to |0>.
                        b.append(x(t))


# Fragments -------------------------------------------------------------------

def emit_maj(ops: Ops, c: int, y: int, xq: int) -> None:
    with ops.block("MAJ"):
        ops.cnot(xq, y)
        ops.cnot(xq, c)
        ops.tof(c, y, xq)


def emit_uma(ops: Ops, c: int, y: int, xq: int) -> None:
    """Two-CNOT UnMajority-and-Add."""
    with ops.block("UMA"):
        ops.tof(c, y, xq)
        ops.cnot(xq, c)
        ops.cnot(c, y)


def emit_uma3(ops: Ops, c: int, y: int, xq: int) -> None:
    """Three-CNOT UnMajority-and-Add with extra NOTs and shallower depth."""
    with ops.block("UMA"):
        ops.x(y)
        ops.cnot(c, y)
        ops.tof(c, y, xq)
        ops.x(y)
        ops.cnot(xq, c)
        ops.cnot(xq, y)


def emit_c_uma(ops: Ops, k: int, c: int, y: int, xq: int) -> None:
    """UMA that adds x into y only when control k is set."""
    with ops.block("C_UMA"):
        ops.tof(c, y, xq)
        ops.tof(k, c, y)
        ops.cnot(xq, y)
        ops.cnot(xq, c)


def emit_carry(ops: Ops, c: int, xq: int, y: int, c_next: int) -> None:
    with ops.block("CARRY"):
        ops.tof(xq, y, c_next)
        ops.cnot(xq, y)
        ops.tof(c, y, c_next)


def emit_carry_dag(ops: Ops, c: int, xq: int, y: int, c_next: int) -> None:
    with ops.block("CARRY"):
        ops.tof(c, y, c_next)
        ops.cnot(xq, y)
        ops.tof(xq, y, c_next)


def emit_sum(ops: Ops, c: int, xq: int, y: int) -> None:
    with ops.block("SUM"):
        ops.cnot(xq, y)
        ops.cnot(c, y)


# Fourier-basis primitives ----------------------------------------------------

def emit_qft(ops: Ops, qs: Sequence[int], tag: str = "QFT") -> None:
    """Swap-free QFT: qubit i ends holding the phase y / 2^(i+1)."""
    with ops.block(tag):
        for i in reversed(range(len(qs))):
            ops.h(qs[i])
            for j in reversed(range(i)):
                ops.g(crot(qs[j], qs[i], i - j + 1))


def emit_iqft(ops: Ops, qs: Sequence[int]) -> None:
    with ops.block("IQFT"):
        for i in range(len(qs)):
            for j in range(i):
                ops.g(crot(qs[j], qs[i], i - j + 1, -1))
            ops.h(qs[i])


def emit_phi_add(ops: Ops, xs: Sequence[int], ys: Sequence[int], sign: int = 1,
            ctrl: int | None = None, anc: int | None = None) -> None:
    """Add (sign=+1) or subtract x from a Fourier-encoded y of any width.

    With ``ctrl`` and no ``anc`` every rotation is doubly controlled via a
    CNOT-based decomposition; with ``anc`` each x bit is first ANDed with the
    control into the ancilla.
    """
    tag = ("Phi_ADD" if sign > 0 else "Phi_SUB")
    if ctrl is not None:
        tag = "C_" + tag
    n = len(xs)
    with ops.block(tag):
        for j in range(n):
            targets = [(i, i - j + 1) for i in range(j, len(ys))]
            if not targets:
                continue
            if ctrl is None:
                for i, k in targets:
                    ops.g(crot(xs[j], ys[i], k, sign))
            elif anc is not None:
                ops.and_(ctrl, xs[j], anc)
                for i, k in targets:
                    ops.g(crot(anc, ys[i], k, sign))
                ops.unand(ctrl, xs[j], anc)
            else:
                for i, k in targets:
                    _cc_phase(ops, ctrl, xs[j], ys[i], k, sign)


def _cc_phase(ops: Ops, c1: int, c2: int, t: int, k: int, sign: int) -> None:
    # theta*c1*c2*t = theta/2 (c1 t + c2 t - (c1 xor c2) t)
    ops.g(crot(c1, t, k + 1, sign))
    ops.g(crot(c2, t, k + 1, sign))
    ops.cnot(c1, c2)
    ops.g(crot(c2, t, k + 1, -sign))
    ops.cnot(c1, c2)


def emit_phi_add_const(ops: Ops, a: int, ys: Sequence[int], sign: int = 1,
                  ctrl: int | None = None) -> None:
    """Add a classical constant to a Fourier-encoded register; zero angles are skipped."""
    tag = ("Phi_ADD_CONST" if sign > 0 else "Phi_SUB_CONST")
    if ctrl is not None:
        tag = "C_" + tag
    with ops.block(tag):
        for i, q in enumerate(ys):
            red = dyadic(a, i + 1)
            if red is None:
                continue
            m, k = red
            ops.g(rot(q, k, sign, m) if ctrl is None else crot(ctrl, q, k, sign, m))


# Plain adders ----------------------------------------------------------------

def adder_ancillas(variant: AdderVariant, n: int) -> int:
    return {AdderVariant.VBE: n, AdderVariant.CDKPM: 1,
            AdderVariant.GIDNEY: n, AdderVariant.DRAPER: 0}[variant]


def _vbe(ops: Ops, xs, ys, anc, top: bool) -> None:
    n = len(xs)
    c = list(anc[:n])
    last = n - 1 if top else n - 2
    for i in range(last + 1):
        emit_carry(ops, c[i], xs[i], ys[i], c[i + 1] if i < n - 1 else ys[n])
    if top:
        ops.cnot(xs[n - 1], ys[n - 1])
    emit_sum(ops, c[n - 1], xs[n - 1], ys[n - 1])
    for i in reversed(range(n - 1)):
        emit_carry_dag(ops, c[i], xs[i], ys[i], c[i + 1])
        emit_sum(ops, c[i], xs[i], ys[i])


def _cdkpm(ops: Ops, xs, ys, anc, top: bool) -> None:
    n = len(xs)
    wire = [anc[0]] + list(xs[:-1])
    for i in range(n):
        emit_maj(ops, wire[i], ys[i], xs[i])
    if top:
        ops.cnot(xs[n - 1], ys[n])
    for i in reversed(range(n)):
        emit_uma(ops, wire[i], ys[i], xs[i])


def _gidney(ops: Ops, xs, ys, anc, top: bool) -> None:
    n = len(xs)
    c = list(anc[:n])
    for i in range(n):
        with ops.block("MAJ"):
            ops.cnot(c[i], xs[i])
            ops.cnot(c[i], ys[i])
            if i < n - 1:
                ops.and_(xs[i], ys[i], c[i + 1])
                ops.cnot(c[i], c[i + 1])
            elif top:
                ops.tof(xs[i], ys[i], ys[n])
                ops.cnot(c[i], ys[n])
    with ops.block("UMA"):
        ops.cnot(c[n - 1], xs[n - 1])
        ops.cnot(xs[n - 1], ys[n - 1])
    for i in reversed(range(n - 1)):
        with ops.block("UMA"):
            ops.cnot(c[i], c[i + 1])
            ops.unand(xs[i], ys[i], c[i + 1])
            ops.cnot(c[i], xs[i])
            ops.cnot(xs[i], ys[i])


def _draper(ops: Ops, xs, ys, top: bool) -> None:
    target = list(ys) if top else list(ys[:len(xs)])
    emit_qft(ops, target)
    emit_phi_add(ops, xs, target)
    emit_iqft(ops, target)


def emit_add(ops: Ops, variant: AdderVariant, xs: Sequence[int], ys: Sequence[int],
             anc: Sequence[int], top: bool = True) -> None:
    """y += x. With ``top`` y has n+1 qubits; without it the sum wraps mod 2^n."""
    n = len(xs)
    if len(ys) != (n + 1 if top else n):
        raise BuildError("target register has the wrong width")
    if len(anc) < adder_ancillas(variant, n):
        raise BuildError(f"{variant.name} adder needs {adder_ancillas(variant, n)} ancillas")
    if variant is AdderVariant.VBE:
        _vbe(ops, xs, ys, anc, top)
    elif variant is AdderVariant.CDKPM:
        _cdkpm(ops, xs, ys, anc, top)
    elif variant is AdderVariant.GIDNEY:
        _gidney(ops, xs, ys, anc, top)
    else:
        _draper(ops, xs, ys, top)


def emit_sub(ops: Ops, variant: AdderVariant, xs, ys, anc, top: bool = True) -> None:
    """y -= x by reversing the adder; for GIDNEY this is the reversed builder."""
    tmp = Ops()
    emit_add(tmp, variant, xs, ys, anc, top)
    ops.extend(tmp.inverse())


# Controlled adders -----------------------------------------------------------

def ctrl_adder_ancillas(strategy: ControlledStrategy, n: int,
                        base: AdderVariant = AdderVariant.CDKPM) -> int:
    if strategy in (ControlledStrategy.GENERIC_LOAD, ControlledStrategy.GENERIC_LOAD_MBU):
        return n + adder_ancillas(base, n)
    return {ControlledStrategy.CDKPM_CUMA: 1, ControlledStrategy.GIDNEY_CTRL: n + 1,
            ControlledStrategy.DRAPER_CENTRAL: 0, ControlledStrategy.DRAPER_1ANC: 1}[strategy]


def _cdkpm_cuma(ops: Ops, k: int, xs, ys, anc) -> None:
    n = len(xs)
    wire = [anc[0]] + list(xs[:-1])
    for i in range(n):
        emit_maj(ops, wire[i], ys[i], xs[i])
    ops.tof(k, xs[n - 1], ys[n])
    for i in reversed(range(n)):
        emit_c_uma(ops, k, wire[i], ys[i], xs[i])


def _gidney_ctrl(ops: Ops, k: int, xs, ys, anc) -> None:
    n = len(xs)
    c = list(anc[:n])
    a = anc[n]
    for i in range(n):
        with ops.block("MAJ"):
            ops.cnot(c[i], xs[i])
            ops.cnot(c[i], ys[i])
            nxt = c[i + 1] if i < n - 1 else a
            ops.and_(xs[i], ys[i], nxt)
            ops.cnot(c[i], nxt)
    ops.tof(k, a, ys[n])
    for i in reversed(range(n)):
        nxt = c[i + 1] if i < n - 1 else a
        with ops.block("UMA"):
            ops.cnot(c[i], nxt)
            ops.unand(xs[i], ys[i], nxt)
            # y' = y^c; adding k*x gives y ^ c ^ kx after removing c.
            ops.tof(k, xs[i], ys[i])
            ops.cnot(c[i], ys[i])
            ops.cnot(c[i], xs[i])


def emit_ctrl_add(ops: Ops, strategy: ControlledStrategy, k: int, xs, ys, anc,
                  base: AdderVariant = AdderVariant.CDKPM) -> None:
    """y += k*x over n+1 output bits."""
    n = len(xs)
    if len(ys) != n + 1:
        raise BuildError("target register must have n+1 qubits")
    need = ctrl_adder_ancillas(strategy, n, base)
    if len(anc) < need:
        raise BuildError(f"{strategy.name} needs {need} ancillas")
    if strategy in (ControlledStrategy.GENERIC_LOAD, ControlledStrategy.GENERIC_LOAD_MBU):
        load = list(anc[:n])
        mbu = strategy is ControlledStrategy.GENERIC_LOAD_MBU
        with ops.block("LOAD"):
            for j in range(n):
                (ops.and_ if mbu else ops.tof)(k, xs[j], load[j])
        emit_add(ops, base, load, ys, anc[n:])
        with ops.block("UNLOAD"):
            for j in range(n):
                (ops.unand if mbu else ops.tof)(k, xs[j], load[j])
    elif strategy is ControlledStrategy.CDKPM_CUMA:
        _cdkpm_cuma(ops, k, xs, ys, anc)
    elif strategy is ControlledStrategy.GIDNEY_CTRL:
        _gidney_ctrl(ops, k, xs, ys, anc)
    elif strategy is ControlledStrategy.DRAPER_CENTRAL:
        emit_qft(ops, ys)
        emit_phi_add(ops, xs, ys, 1, ctrl=k)
        emit_iqft(ops, ys)
    else:
        emit_qft(ops, ys)
        emit_phi_add(ops, xs, ys, 1, ctrl=k, anc=anc[0])
        emit_iqft(ops, ys)


# Constant adders -------------------------------------------------------------

def const_adder_ancillas(variant: AdderVariant, n: int) -> int:
    if variant is AdderVariant.DRAPER:
        return 0
    return n + adder_ancillas(variant, n)


def emit_const_add(ops: Ops, variant: AdderVariant, a: int, ys, anc, sign: int = 1,
                   ctrl: int | None = None, top: bool = True) -> None:
    """y += sign * [ctrl] * a. Ripple variants load a into n ancillas first."""
    n = len(ys) - 1 if top else len(ys)
    _check_const(a, n)
    if variant is AdderVariant.DRAPER:
        emit_qft(ops, ys)
        emit_phi_add_const(ops, a, ys, sign, ctrl)
        emit_iqft(ops, ys)
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
    (emit_add if sign > 0 else emit_sub)(ops, variant, load, ys, anc[n:], top)
    put("UNLOAD")


# Public builders -------------------------------------------------------------

def _seal(b: Builder, ops: Ops, sem: Semantic) -> Circuit:
    ops.emit(b)
    return b.seal(sem)


def build_plain_adder(variant: AdderVariant, n: int) -> Circuit:
    """|x>_n |y>_{n+1} -> |x> |y+x> with an (n+1)-bit target."""
    _check_n(n)
    b = Builder()
    xs = b.register("x", n, "input")
    ys = b.register("y", n + 1, "output")
    anc = b.register("anc", adder_ancillas(variant, n), "ancilla")
    ops = Ops()
    emit_add(ops, variant, xs, ys, anc)
    return _seal(b, ops, Semantic("add", n))


def build_controlled_adder(strategy: ControlledStrategy, n: int,
                           base: AdderVariant = AdderVariant.CDKPM) -> Circuit:
    """|c>|x>|y> -> |c>|x>|y + c*x>."""
    _check_n(n)
    if strategy in (ControlledStrategy.DRAPER_CENTRAL, ControlledStrategy.DRAPER_1ANC):
        base = AdderVariant.DRAPER
    elif strategy in (ControlledStrategy.GENERIC_LOAD, ControlledStrategy.GENERIC_LOAD_MBU):
        if base is AdderVariant.DRAPER:
            raise BuildError("generic load strategies need a ripple-carry base adder")
    b = Builder()
    k = b.register("c", 1, "control")[0]
    xs = b.register("x", n, "input")
    ys = b.register("y", n + 1, "output")
    anc = b.register("anc", ctrl_adder_ancillas(strategy, n, base), "ancilla")
    ops = Ops()
    emit_ctrl_add(ops, strategy, k, xs, ys, anc, base)
    return _seal(b, ops, Semantic("add", n, controlled=True))


def build_const_adder(variant: AdderVariant, n: int, a: int) -> Circuit:
    """|x>_{n+1} -> |x + a mod 2^(n+1)>."""
    _check_n(n)
    _check_const(a, n)
    b = Builder()
    ys = b.register("x", n + 1, "output")
    anc = b.register("anc", const_adder_ancillas(variant, n), "ancilla")
    ops = Ops()
    emit_const_add(ops, variant, a, ys, anc)
    return _seal(b, ops, Semantic("const_add", n, a=a))


def build_ctrl_const_adder(variant: AdderVariant, n: int, a: int) -> Circuit:
    """|c>|x>_{n+1} -> |c>|x + c*a>; the constant is loaded with CNOTs from c."""
    _check_n(n)
    _check_const(a, n)
    b = Builder()
    k = b.register("c", 1, "control")[0]
    ys = b.register("x", n + 1, "output")
    anc = b.register("anc", const_adder_ancillas(variant, n), "ancilla")
    ops = Ops()
    emit_const_add(ops, variant, a, ys, anc, ctrl=k)
    return _seal(b, ops, Semantic("const_add", n, a=a, controlled=True))


def build_subtractor(variant: AdderVariant, n: int,
                     method: SubtractMethod = SubtractMethod.ADJOINT) -> Circuit:
    """|x>_n |y>_{n+1} -> |x> |y - x mod 2^(n+1)>."""
    _check_n(n)
    if method is SubtractMethod.ADJOINT and variant is not AdderVariant.GIDNEY:
        return dagger(build_plain_adder(variant, n))
    b = Builder()
    xs = b.register("x", n, "input")
    ys = b.register("y", n + 1, "output")
    anc = b.register("anc", adder_ancillas(variant, n), "ancilla")
    ops = Ops()
    if method is SubtractMethod.ADJOINT:
        emit_sub(ops, variant, xs, ys, anc)
    elif method is SubtractMethod.ONES_COMPLEMENT_WRAP:
        # y - x = NOT(NOT(y) + x) over n+1 bits.
        for q in ys:
            ops.x(q)
        emit_add(ops, variant, xs, ys, anc)
        for q in ys:
            ops.x(q)
    else:
        # y - x = y + NOT_n(x) + 1 + 2^n over n+1 bits.
        for q in xs:
            ops.x(q)
        if variant is AdderVariant.DRAPER:
            emit_qft(ops, ys)
            emit_phi_add(ops, xs, ys)
            emit_phi_add_const(ops, (1 << n) + 1, ys)
            emit_iqft(ops, ys)
        else:
            ops.x(anc[0])
            emit_add(ops, variant, xs, ys, anc)
            ops.x(anc[0])
            ops.x(ys[n])
        for q in xs:
            ops.x(q)
    return _seal(b, ops, Semantic("sub", n))




# Standalone fragments --------------------------------------------------------

def _fragment(names: Sequence[str], emit, op: str, n: int = 1, width: int = 1,
              scalar: bool = True) -> Circuit:
    b = Builder()
    regs = [b.register(r, width, "input") for r in names]
    ops = Ops()
    emit(ops, *(r[0] if scalar else r for r in regs))
    return _seal(b, ops, Semantic(op, n))


def carry_gate() -> Circuit:
    """|c,x,y,c'> -> |c, x, y^x, c'^maj(x,y,c)>."""
    return _fragment(("c", "x", "y", "c_next"), emit_carry, "fragment_carry")


def sum_gate() -> Circuit:
    """|c,x,y> -> |c, x, y^c^x>."""
    return _fragment(("c", "x", "y"), emit_sum, "fragment_sum")


def maj_gate() -> Circuit:
    """|c,y,x> -> |c^x, y^x, maj(x,y,c)>."""
    return _fragment(("c", "y", "x"), emit_maj, "fragment_maj")


def uma_gate(version: str = "2cnot") -> Circuit:
    """Inverse of MAJ that also leaves the sum bit in y."""
    if version not in ("2cnot", "3cnot"):
        raise BuildError(f"unknown UMA version {version!r}")
    return _fragment(("c", "y", "x"), emit_uma if version == "2cnot" else emit_uma3,
                     "fragment_uma")


def c_uma_gate() -> Circuit:
    """UMA whose addition into y is controlled by k."""
    return _fragment(("k", "c", "y", "x"), emit_c_uma, "fragment_c_uma")


def temp_and() -> Circuit:
    """|a,b,0> -> |a,b,ab> with one Toffoli."""
    return _fragment(("a", "b", "t"), lambda o, a, b, t: o.and_(a, b, t), "fragment_and")


def temp_and_uncompute() -> Circuit:
    """|a,b,ab> -> |a,b,0> by X-basis measurement and a conditional CZ fixup."""
    return _fragment(("a", "b", "t"), lambda o, a, b, t: o.unand(a, b, t), "fragment_unand")


def qft(m: int) -> Circuit:
    _check_n(m)
    return _fragment(("y",), emit_qft, "qft", m, m, scalar=False)


def iqft(m: int) -> Circuit:
    _check_n(m)
    return _fragment(("y",), emit_iqft, "iqft", m, m, scalar=False)


def pcqft(m: int, cbits: Sequence[int] | None = None) -> Circuit:
    """QFT skeleton whose rotations are conditioned on classical bits instead of qubits.

    Without ``cbits`` a source register is measured to supply them; bit j
    replaces qubit j as the control of every rotation it would drive.
    """
    _check_n(m)
    b = Builder()
    src = b.register("src", m, "input")
    ys = b.register("y", m, "output")
    if cbits is None:
        cbits = []
        for q in src:
            cb = b.new_cbit()
            b.append(measure(q, cb))
            cbits.append(cb)
    elif len(cbits) != m:
        raise BuildError("pcqft needs one classical bit per qubit")
    ops = Ops()
    with ops.block("PCQFT"):
        for i in reversed(range(m)):
            ops.h(ys[i])
            for j in reversed(range(i)):
                ops.cond(cbits[j], rot(ys[i], i - j + 1))
    return _seal(b, ops, Semantic("pcqft", m))


def phi_add(n: int) -> Circuit:
    """Fourier-space addition of x (n qubits) into y (n+1 qubits)."""
    _check_n(n)
    b = Builder()
    xs = b.register("x", n, "input")
    ys = b.register("y", n + 1, "output")
    ops = Ops()
    emit_phi_add(ops, xs, ys)
    return _seal(b, ops, Semantic("phi_add", n))


def phi_sub(n: int) -> Circuit:
    _check_n(n)
    b = Builder()
    xs = b.register("x", n, "input")
    ys = b.register("y", n + 1, "output")
    ops = Ops()
    emit_phi_add(ops, xs, ys, -1)
    return _seal(b, ops, Semantic("phi_sub", n))


def phi_add_const(n: int, a: int, sign: int = 1) -> Circuit:
    """Merged single-qubit rotations adding sign*a to a Fourier-encoded (n+1)-qubit register."""
    _check_n(n)
    _check_const(a, n)
    if sign not in (1, -1):
        raise BuildError("sign must be +1 or -1")
    b = Builder()
    ys = b.register("y", n + 1, "output")
    ops = Ops()
    emit_phi_add_const(ops, a, ys, sign)
    return _seal(b, ops, Semantic("phi_add_const" if sign > 0 else "phi_sub_const", n, a=a))
