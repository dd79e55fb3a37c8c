"""Modular adders composed from pluggable adder and comparator subroutines.

The shared pipeline for p-modular addition of s = x + y (or x + a):

1. add into an (n+1)-qubit sum register,
2. flag t = 1[s < p], folding in the sum's top bit,
3. X(t) so t = d = 1[s >= p],
4. subtract d*p,
5. clear t with a comparison that equals d on the result.

Step 5 is the tagged ``MBU_SITE`` block that ``mbu=True`` replaces with
measurement-based uncomputation.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass
from typing import Any

from .adders import (
    AdderVariant, BuildError, ControlledStrategy, Ops, adder_ancillas, const_adder_ancillas,
    ctrl_adder_ancillas, emit_add, emit_const_add, emit_ctrl_add, emit_iqft, emit_phi_add,
    emit_phi_add_const, emit_qft,
)
from .circuit import SITE_PREFIX, Builder, Circuit, Semantic
from .compare import (
    ComparatorVariant, comparator_ancillas, const_comparator_ancillas, emit_compare,
    emit_const_compare,
)
from .mbu import wrap_final_uncompute


class Kind(enum.Enum):
    MODADD = "modadd"
    CTRL_MODADD = "ctrl_modadd"
    CONST_MODADD_VBE = "const_modadd_vbe"
    CONST_MODADD_TAKAHASHI = "const_modadd_takahashi"
    CTRL_CONST_MODADD_VBE = "ctrl_const_modadd_vbe"
    CTRL_CONST_MODADD_BEAUREGARD = "ctrl_const_modadd_beauregard"
    IN_RANGE = "in_range"


NEEDS_A = {Kind.CONST_MODADD_VBE, Kind.CONST_MODADD_TAKAHASHI, Kind.CTRL_CONST_MODADD_VBE,
            Kind.CTRL_CONST_MODADD_BEAUREGARD}
_DRAPER_KINDS = {Kind.MODADD, Kind.CTRL_CONST_MODADD_BEAUREGARD}


@dataclass(frozen=True)
class Slots:
    """Subroutine choice per architecture slot.

    ``adder``: register-register addition. ``const_adder``: every addition or
    subtraction of a classical constant. ``comparator``: the register comparator
    that clears the flag. ``const_comparator``: the comparison against p (and a).
    ``ctrl_strategy``/``ctrl_base``: the controlled first adder.
    ``cmp_adder``: adder used inside TWO_ADDER comparators.
    """

    adder: AdderVariant
    const_adder: AdderVariant
    comparator: ComparatorVariant
    const_comparator: ComparatorVariant
    ctrl_strategy: ControlledStrategy = ControlledStrategy.GENERIC_LOAD_MBU
    ctrl_base: AdderVariant = AdderVariant.CDKPM
    cmp_adder: AdderVariant = AdderVariant.CDKPM

    @property
    def uses_draper(self) -> bool:
        adders = (self.adder, self.const_adder, self.ctrl_base, self.cmp_adder)
        return (AdderVariant.DRAPER in adders
                or ComparatorVariant.DRAPER in (self.comparator, self.const_comparator)
                or self.ctrl_strategy in (ControlledStrategy.DRAPER_CENTRAL,
                                          ControlledStrategy.DRAPER_1ANC))

    @property
    def all_draper(self) -> bool:
        return (self.adder is AdderVariant.DRAPER and self.const_adder is AdderVariant.DRAPER
                and self.comparator is ComparatorVariant.DRAPER
                and self.const_comparator is ComparatorVariant.DRAPER)

    def to_dict(self) -> dict:
        return {k: v.value for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d: dict) -> "Slots":
        kinds = {"adder": AdderVariant, "const_adder": AdderVariant,
                 "comparator": ComparatorVariant, "const_comparator": ComparatorVariant,
                 "ctrl_strategy": ControlledStrategy, "ctrl_base": AdderVariant,
                 "cmp_adder": AdderVariant}
        return cls(**{k: kinds[k](v) for k, v in d.items()})


_A, _C = AdderVariant, ComparatorVariant
PRESETS: dict[str, Slots] = {
    "CDKPM_ALL": Slots(_A.CDKPM, _A.CDKPM, _C.CDKPM_HALF, _C.CDKPM_HALF,
                       ControlledStrategy.GENERIC_LOAD_MBU, _A.CDKPM),
    "GIDNEY_ALL": Slots(_A.GIDNEY, _A.GIDNEY, _C.GIDNEY_HALF, _C.GIDNEY_HALF,
                        ControlledStrategy.GENERIC_LOAD_MBU, _A.GIDNEY),
    "HYBRID": Slots(_A.GIDNEY, _A.CDKPM, _C.GIDNEY_HALF, _C.CDKPM_HALF,
                    ControlledStrategy.GENERIC_LOAD_MBU, _A.GIDNEY),
    "VBE_ALL": Slots(_A.VBE, _A.VBE, _C.TWO_ADDER, _C.TWO_ADDER,
                     ControlledStrategy.GENERIC_LOAD_MBU, _A.VBE, _A.VBE),
    "DRAPER_BEAUREGARD": Slots(_A.DRAPER, _A.DRAPER, _C.DRAPER, _C.DRAPER,
                               ControlledStrategy.DRAPER_CENTRAL, _A.DRAPER, _A.DRAPER),
}


@dataclass(frozen=True)
class ArchitectureSpec:
    kind: Kind
    n: int
    p: int | None = None
    a: int | None = None
    mbu: bool = False
    preset: str | None = "CDKPM_ALL"
    slots: Slots | None = None

    def __post_init__(self) -> None:
        self.validate()

    @property
    def resolved(self) -> Slots:
        if self.slots is not None:
            return self.slots
        if self.preset not in PRESETS:
            raise BuildError(f"unknown preset {self.preset!r}; choose from {sorted(PRESETS)}")
        return PRESETS[self.preset]

    def validate(self) -> None:
        if not isinstance(self.kind, Kind):
            raise BuildError(f"kind must be a Kind, got {self.kind!r}")
        if self.n < 1:
            raise BuildError("n must be at least 1")
        sl = self.resolved
        for name, typ in (("adder", AdderVariant), ("const_adder", AdderVariant),
                          ("comparator", ComparatorVariant),
                          ("const_comparator", ComparatorVariant),
                          ("ctrl_strategy", ControlledStrategy), ("ctrl_base", AdderVariant),
                          ("cmp_adder", AdderVariant)):
            if not isinstance(getattr(sl, name), typ):
                raise BuildError(f"slot {name} needs a {typ.__name__}")
        if sl.uses_draper:
            if not sl.all_draper:
                raise BuildError("Fourier subroutines cannot be mixed with ripple-carry slots")
            if self.kind not in _DRAPER_KINDS:
                raise BuildError(f"the Fourier architecture is defined only for "
                                 f"{', '.join(k.value for k in _DRAPER_KINDS)}")
        elif self.kind is Kind.CTRL_CONST_MODADD_BEAUREGARD:
            raise BuildError("the Beauregard adder needs the DRAPER_BEAUREGARD preset")
        if self.kind is Kind.IN_RANGE:
            return
        if self.p is None or not 1 <= self.p <= (1 << self.n) - 1:
            raise BuildError(f"p must satisfy 1 <= p <= 2^n - 1, got {self.p}")
        if self.kind in NEEDS_A:
            if self.a is None:
                raise BuildError(f"{self.kind.value} needs a constant a")
            if not 0 <= self.a < self.p:
                raise BuildError(f"a must satisfy 0 <= a < p, got {self.a}")

    def build(self) -> Circuit:
        return _BUILDERS[self.kind](self)

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"kind": self.kind.value, "n": self.n, "p": self.p, "a": self.a,
                             "mbu": self.mbu, "preset": self.preset}
        if self.slots is not None:
            d["slots"] = self.slots.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ArchitectureSpec":
        slots = Slots.from_dict(d["slots"]) if d.get("slots") else None
        return cls(Kind(d["kind"]), int(d["n"]), d.get("p"), d.get("a"), bool(d.get("mbu")),
                   d.get("preset"), slots)


def _site(t: int) -> str:
    return f"{SITE_PREFIX}{t}"


def _finish(b: Builder, ops: Ops, sem: Semantic, mbu: bool) -> Circuit:
    ops.emit(b)
    c = b.seal(sem)
    return wrap_final_uncompute(c) if mbu else c


def _reduce(ops: Ops, sl: Slots, p: int, s: list[int], t: int, pool: list[int]) -> None:
    """Steps 2 to 4: flag d = 1[s >= p] into t and subtract d*p from s."""
    n = len(s) - 1
    emit_const_compare(ops, sl.const_comparator, s[:n], p, t, pool, adder=sl.cmp_adder)
    # s_n = 1 implies s >= p and s_low < p, so the XOR fold yields 1[s < p].
    ops.cnot(s[n], t)
    ops.x(t)
    emit_const_add(ops, sl.const_adder, p, s, pool, sign=-1, ctrl=t)


def _reduce_need(sl: Slots, n: int) -> int:
    return max(const_comparator_ancillas(sl.const_comparator, n, sl.cmp_adder),
               const_adder_ancillas(sl.const_adder, n))


def build_modadd(spec: ArchitectureSpec) -> Circuit:
    """|x>|y> -> |x>|x + y mod p> for x, y < p."""
    if spec.resolved.all_draper:
        return _draper_modadd(spec)
    sl, n, p = spec.resolved, spec.n, spec.p
    b = Builder()
    xs = b.register("x", n, "input")
    ys = b.register("y", n, "output")
    top = b.register("y_top", 1, "ancilla")
    t = b.register("flag", 1, "ancilla")[0]
    need = max(adder_ancillas(sl.adder, n), _reduce_need(sl, n),
               comparator_ancillas(sl.comparator, n, sl.cmp_adder))
    pool = b.register("work", need, "ancilla")
    s = ys + top
    ops = Ops()
    emit_add(ops, sl.adder, xs, s, pool)
    _reduce(ops, sl, p, s, t, pool)
    # x + y mod p < x exactly when the reduction happened (needs y < p).
    with ops.block(_site(t)):
        emit_compare(ops, sl.comparator, xs, ys, t, pool, adder=sl.cmp_adder)
    return _finish(b, ops, Semantic("modadd", n, p, mbu=spec.mbu), spec.mbu)


def build_ctrl_modadd(spec: ArchitectureSpec) -> Circuit:
    """|c>|x>|y> -> |c>|x>|c*x + y mod p>.

    Only the first adder and the last comparator are controlled.
    """
    sl, n, p = spec.resolved, spec.n, spec.p
    b = Builder()
    k = b.register("c", 1, "control")[0]
    xs = b.register("x", n, "input")
    ys = b.register("y", n, "output")
    top = b.register("y_top", 1, "ancilla")
    t = b.register("flag", 1, "ancilla")[0]
    need = max(ctrl_adder_ancillas(sl.ctrl_strategy, n, sl.ctrl_base), _reduce_need(sl, n),
               comparator_ancillas(sl.comparator, n, sl.cmp_adder))
    pool = b.register("work", need, "ancilla")
    s = ys + top
    ops = Ops()
    emit_ctrl_add(ops, sl.ctrl_strategy, k, xs, s, pool, sl.ctrl_base)
    _reduce(ops, sl, p, s, t, pool)
    # With c = 0 no reduction happened and the controlled comparison is 0.
    with ops.block(_site(t)):
        emit_compare(ops, sl.comparator, xs, ys, t, pool, ctrl=k, adder=sl.cmp_adder)
    return _finish(b, ops, Semantic("modadd", n, p, controlled=True, mbu=spec.mbu), spec.mbu)


def build_const_modadd(spec: ArchitectureSpec) -> Circuit:
    """|x> -> |x + a mod p> for x < p, by the VBE pipeline or the Takahashi sequence."""
    if spec.kind is Kind.CONST_MODADD_TAKAHASHI:
        return _takahashi(spec)
    sl, n, p, a = spec.resolved, spec.n, spec.p, spec.a
    b = Builder()
    xs = b.register("x", n, "output")
    top = b.register("x_top", 1, "ancilla")
    t = b.register("flag", 1, "ancilla")[0]
    need = max(const_adder_ancillas(sl.const_adder, n), _reduce_need(sl, n))
    pool = b.register("work", need, "ancilla")
    s = xs + top
    ops = Ops()
    emit_const_add(ops, sl.const_adder, a, s, pool)
    _reduce(ops, sl, p, s, t, pool)
    # x + a mod p < a exactly when the reduction happened.
    with ops.block(_site(t)):
        emit_const_compare(ops, sl.const_comparator, xs, a, t, pool, adder=sl.cmp_adder)
    return _finish(b, ops, Semantic("const_modadd", n, p, a, mbu=spec.mbu), spec.mbu)


def _takahashi(spec: ArchitectureSpec) -> Circuit:
    sl, n, p, a = spec.resolved, spec.n, spec.p, spec.a
    b = Builder()
    xs = b.register("x", n, "output")
    top = b.register("x_top", 1, "ancilla")[0]
    need = max(const_adder_ancillas(sl.const_adder, n),
               const_comparator_ancillas(sl.const_comparator, n, sl.cmp_adder))
    pool = b.register("work", need, "ancilla")
    ops = Ops()
    # x - (p - a) over n+1 bits; the top bit is 1 iff x + a < p.
    emit_const_add(ops, sl.const_adder, p - a, xs + [top], pool, sign=-1)
    emit_const_add(ops, sl.const_adder, p, xs, pool, ctrl=top, top=False)
    # Now top = 1[r >= a]; comparing r < a and flipping clears it.
    with ops.block(_site(top)):
        emit_const_compare(ops, sl.const_comparator, xs, a, top, pool, adder=sl.cmp_adder)
        ops.x(top)
    return _finish(b, ops, Semantic("const_modadd", n, p, a, mbu=spec.mbu), spec.mbu)


def build_ctrl_const_modadd(spec: ArchitectureSpec) -> Circuit:
    """|c>|x> -> |c>|x + c*a mod p>."""
    if spec.kind is Kind.CTRL_CONST_MODADD_BEAUREGARD:
        return _beauregard(spec)
    sl, n, p, a = spec.resolved, spec.n, spec.p, spec.a
    b = Builder()
    k = b.register("c", 1, "control")[0]
    xs = b.register("x", n, "output")
    top = b.register("x_top", 1, "ancilla")
    t = b.register("flag", 1, "ancilla")[0]
    need = max(const_adder_ancillas(sl.const_adder, n), _reduce_need(sl, n))
    pool = b.register("work", need, "ancilla")
    s = xs + top
    ops = Ops()
    emit_const_add(ops, sl.const_adder, a, s, pool, ctrl=k)
    _reduce(ops, sl, p, s, t, pool)
    with ops.block(_site(t)):
        emit_const_compare(ops, sl.const_comparator, xs, a, t, pool, ctrl=k, adder=sl.cmp_adder)
    return _finish(b, ops, Semantic("const_modadd", n, p, a, controlled=True, mbu=spec.mbu),
                   spec.mbu)


def _draper_modadd(spec: ArchitectureSpec) -> Circuit:
    n, p = spec.n, spec.p
    b = Builder()
    xs = b.register("x", n, "input")
    ys = b.register("y", n, "output")
    top = b.register("y_top", 1, "ancilla")[0]
    t = b.register("flag", 1, "ancilla")[0]
    s = ys + [top]
    ops = Ops()
    emit_qft(ops, s)
    emit_phi_add(ops, xs, s)
    emit_phi_add_const(ops, p, s, -1)
    emit_iqft(ops, s)
    ops.cnot(top, t)
    emit_qft(ops, s)
    emit_phi_add_const(ops, p, s, 1)
    ops.x(t)
    emit_phi_add_const(ops, p, s, -1, ctrl=t)
    with ops.block(_site(t)):
        emit_phi_add(ops, xs, s, -1)
        emit_iqft(ops, s)
        ops.cnot(top, t)
        emit_qft(ops, s)
        emit_phi_add(ops, xs, s, 1)
    emit_iqft(ops, s)
    return _finish(b, ops, Semantic("modadd", n, p, mbu=spec.mbu), spec.mbu)


def _beauregard(spec: ArchitectureSpec) -> Circuit:
    n, p, a = spec.n, spec.p, spec.a
    b = Builder()
    k = b.register("c", 1, "control")[0]
    xs = b.register("x", n, "output")
    top = b.register("x_top", 1, "ancilla")[0]
    t = b.register("flag", 1, "ancilla")[0]
    s = xs + [top]
    ops = Ops()
    emit_qft(ops, s)
    emit_phi_add_const(ops, a, s, 1, ctrl=k)
    emit_phi_add_const(ops, p, s, -1)
    emit_iqft(ops, s)
    ops.cnot(top, t)
    emit_qft(ops, s)
    emit_phi_add_const(ops, p, s, 1)
    ops.x(t)
    emit_phi_add_const(ops, p, s, -1, ctrl=t)
    # The constant comparison is controlled too: with c = 0 the flag is already 0.
    with ops.block(_site(t)):
        emit_phi_add_const(ops, a, s, -1, ctrl=k)
        emit_iqft(ops, s)
        ops.cnot(top, t)
        emit_qft(ops, s)
        emit_phi_add_const(ops, a, s, 1, ctrl=k)
    emit_iqft(ops, s)
    return _finish(b, ops, Semantic("const_modadd", n, p, a, controlled=True, mbu=spec.mbu),
                   spec.mbu)


def build_in_range(n: int, comparator: ComparatorVariant = ComparatorVariant.CDKPM_HALF,
                   ctrl_comparator: ComparatorVariant | None = None, mbu: bool = False,
                   cmp_adder: AdderVariant = AdderVariant.CDKPM) -> Circuit:
    """|x>|y>|z>|t> -> |x>|y>|z>|t ^ 1[y < x < z]>."""
    if n < 1:
        raise BuildError("n must be at least 1")
    ctrl_comparator = ctrl_comparator or comparator
    b = Builder()
    xs = b.register("x", n, "input")
    ys = b.register("y", n, "input")
    zs = b.register("z", n, "input")
    t = b.register("t", 1, "target-bit")[0]
    g = b.register("g", 1, "ancilla")[0]
    need = max(comparator_ancillas(comparator, n, cmp_adder),
               comparator_ancillas(ctrl_comparator, n, cmp_adder))
    pool = b.register("work", need, "ancilla")
    ops = Ops()
    emit_compare(ops, comparator, xs, ys, g, pool, adder=cmp_adder)
    emit_compare(ops, ctrl_comparator, zs, xs, t, pool, ctrl=g, adder=cmp_adder)
    with ops.block(_site(g)):
        emit_compare(ops, comparator, xs, ys, g, pool, adder=cmp_adder)
    return _finish(b, ops, Semantic("in_range", n, mbu=mbu), mbu)


def _in_range_spec(spec: ArchitectureSpec) -> Circuit:
    sl = spec.resolved
    return build_in_range(spec.n, sl.comparator, sl.comparator, spec.mbu, sl.cmp_adder)


_BUILDERS = {
    Kind.MODADD: build_modadd,
    Kind.CTRL_MODADD: build_ctrl_modadd,
    Kind.CONST_MODADD_VBE: build_const_modadd,
    Kind.CONST_MODADD_TAKAHASHI: build_const_modadd,
    Kind.CTRL_CONST_MODADD_VBE: build_ctrl_const_modadd,
    Kind.CTRL_CONST_MODADD_BEAUREGARD: build_ctrl_const_modadd,
    Kind.IN_RANGE: _in_range_spec,
}
