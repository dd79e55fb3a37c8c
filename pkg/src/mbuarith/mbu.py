"""Measurement-based uncomputation of a single garbage qubit.

If G holds g(x) for a support register x, measuring G in the X basis leaves
a phase (-1)^g(x) on outcome 1. Running U_g between two H gates kicks that
phase back, and a final X returns G to |0>.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

from .circuit import (
    CNOT, CONDBLOCK, CZ, H, MEASURE, SITE_PREFIX, TOFFOLI, X, Builder, Circuit, CircuitError,
    Gate, Semantic, _apply_spans, _spans, condblock, h, measure, x,
)

BRANCH_TAG = "MBU_BRANCH"


class MbuError(CircuitError):
    """The requested site cannot be uncomputed by measurement."""


@dataclass(frozen=True)
class MbuSite:
    """Garbage qubit ``target``, its XOR-uncompute gates ``u_g``, and a fresh classical bit."""

    target: int
    u_g: tuple[Gate, ...]
    cbit: int


def _check_xor_target(gates: Sequence[Gate], target: int) -> None:
    for g in gates:
        if target not in g.touched():
            continue
        if g.kind in (X, CNOT, TOFFOLI) and g.target == target and target not in g.controls:
            continue
        raise MbuError(f"U_g uses qubit {target} other than as an XOR target ({g.kind})")


def _check_phase_exact(gates: Sequence[Gate]) -> None:
    # Only the erase-AND pattern H, MEASURE, CONDBLOCK(CZ, X) is accepted.
    for i, g in enumerate(gates):
        if g.kind == MEASURE:
            q = g.qubits[0]
            prev = gates[i - 1] if i else None
            nxt = gates[i + 1] if i + 1 < len(gates) else None
            ok = (prev is not None and prev.kind == H and prev.qubits == (q,)
                  and nxt is not None and nxt.kind == CONDBLOCK and nxt.cbit == g.cbit
                  and all(b.kind in (CZ, X) for b in nxt.body))
            if not ok:
                raise MbuError("U_g contains a measurement without its phase fixup")
        elif g.kind == CONDBLOCK and any(b.kind in (MEASURE, CONDBLOCK) for b in g.body):
            raise MbuError("U_g contains nested measurements")


def mbu_uncompute(site: MbuSite) -> tuple[Gate, ...]:
    """H(G), MEASURE(G), then on outcome 1: H(G), U_g, H(G), X(G)."""
    gates = tuple(site.u_g)
    _check_xor_target(gates, site.target)
    _check_phase_exact(gates)
    g = site.target
    body = (h(g),) + gates + (h(g), x(g))
    branch = replace(condblock(site.cbit, body), tag_open=(BRANCH_TAG,), tag_close=1)
    return (h(g), measure(g, site.cbit), branch)


def build_mbu_demo(u_g: Sequence[Gate], support: int) -> Circuit:
    """Support register ``x`` (qubits 0..support-1) and garbage qubit ``g`` (qubit support)."""
    b = Builder()
    b.register("x", support, "input")
    target = b.register("g", 1, "ancilla")[0]
    cb = b.new_cbit()
    b.extend(mbu_uncompute(MbuSite(target, tuple(u_g), cb)))
    return b.seal(Semantic("mbu_uncompute", support, mbu=True))


def _site_target(tag: str) -> int:
    return int(tag[len(SITE_PREFIX):])


def _contains_site(gates: Sequence[Gate]) -> bool:
    for g in gates:
        if any(t.startswith(SITE_PREFIX) for t in g.tag_open):
            return True
        if g.body and _contains_site(g.body):
            return True
    return False


def wrap_final_uncompute(c: Circuit, slot: str | None = None) -> Circuit:
    """Replace the block tagged ``MBU_SITE:<q>`` with the MBU fragment on qubit q.

    ``slot`` selects the tag when several sites exist.
    """
    spans = _spans(c.gates)
    sites = [s for s in spans if s[0].startswith(SITE_PREFIX) and (slot is None or s[0] == slot)]
    if not sites:
        if any(g.kind == CONDBLOCK and BRANCH_TAG in g.tag_open and _contains_site(g.body)
               for g in c.gates):
            raise MbuError("the final uncompute is already wrapped")
        raise MbuError("no uncompute slot found")
    if len(sites) > 1:
        raise MbuError("uncompute slot is ambiguous: " + ", ".join(s[0] for s in sites))
    tag, s, e = sites[0]
    target = _site_target(tag)
    cbit = c.num_cbits
    u_g = list(c.gates[s:e + 1])
    # Keep the site tag inside the branch so a second wrap is detected.
    inner = [(t, a - s, b - s) for t, a, b in spans if s <= a and b <= e]
    frag = mbu_uncompute(MbuSite(target, tuple(_apply_spans(u_g, inner)), cbit))
    delta = len(frag) - (e - s + 1)
    outer = []
    for t, a, b in spans:
        if s <= a and b <= e:
            continue
        if b < s:
            outer.append((t, a, b))
        elif a > e:
            outer.append((t, a + delta, b + delta))
        else:
            outer.append((t, a, b + delta))
    stripped = [replace(g, tag_open=(), tag_close=0) for g in c.gates[:s]] + list(frag) + \
        [replace(g, tag_open=(), tag_close=0) for g in c.gates[e + 1:]]
    # The fragment's own branch tag is re-applied after outer spans are merged.
    stripped[s + 2] = replace(stripped[s + 2], tag_open=(), tag_close=0)
    outer.append((BRANCH_TAG, s + 2, s + 2))
    gates = _apply_spans(stripped, outer)
    return Circuit(c.num_qubits, c.num_cbits + 1, c.registers, tuple(gates),
                   replace(c.semantic, mbu=True))
