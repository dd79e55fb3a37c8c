import itertools

import pytest

from mbuarith.adders import AdderVariant, BuildError, build_plain_adder
from mbuarith.bitarith import BitString, sub_bits
from mbuarith.compare import (
    ComparatorVariant, build_comparator, build_const_comparator, build_controlled_comparator,
    build_ctrl_const_comparator, invert_comparison,
)
from mbuarith.resources import static_counts
from mbuarith.sim import Forced, basis_index, exhaustive_verify, run_basis, run_statevector

V = ComparatorVariant
ALL_BUILDERS = (build_comparator, build_controlled_comparator)


def _ns(variant):
    return (1, 2, 3) if variant is V.DRAPER else (1, 2, 3, 4)


@pytest.mark.parametrize("variant", list(V))
@pytest.mark.parametrize("builder", ALL_BUILDERS, ids=lambda f: f.__name__)
def test_register_comparators_functional(variant, builder):
    for n in _ns(variant):
        rep = exhaustive_verify(builder(variant, n))
        assert rep.passed, rep.failures


@pytest.mark.parametrize("variant", list(V))
@pytest.mark.parametrize("builder", (build_const_comparator, build_ctrl_const_comparator),
                         ids=lambda f: f.__name__)
def test_const_comparators_functional(variant, builder):
    for n in _ns(variant)[:3]:
        for a in range(1 << n):
            rep = exhaustive_verify(builder(variant, n, a))
            assert rep.passed, (n, a, rep.failures)


def test_two_adder_accepts_other_adders():
    for adder in (AdderVariant.VBE, AdderVariant.GIDNEY):
        assert exhaustive_verify(build_comparator(V.TWO_ADDER, 3, adder)).passed


def test_equal_inputs_leave_target():
    c = build_comparator(V.CDKPM_HALF, 3)
    for v in range(8):
        assert run_basis(c, {"x": v, "y": v, "t": 0}).registers["t"] == 0


def test_comparator_examples():
    c = build_comparator(V.CDKPM_HALF, 3)
    assert run_basis(c, {"x": 6, "y": 2, "t": 0}).registers["t"] == 1
    r = static_counts(build_comparator(V.CDKPM_HALF, 4))
    assert (r.count("TOFFOLI"), r.ancilla_count) == (8, 1)
    assert static_counts(build_controlled_comparator(V.CDKPM_HALF, 3)).count("TOFFOLI") == 7
    c = build_controlled_comparator(V.CDKPM_HALF, 3)
    assert run_basis(c, {"c": 1, "x": 5, "y": 1, "t": 0}).registers["t"] == 1
    for xv, yv in itertools.product(range(8), repeat=2):
        assert run_basis(c, {"c": 0, "x": xv, "y": yv, "t": 1}).registers["t"] == 1


@pytest.mark.parametrize("n", range(2, 11))
def test_comparator_costs(n):
    def cost(builder, v):
        r = static_counts(builder(v, n))
        return r.count("TOFFOLI"), r.ancilla_count
    assert cost(build_comparator, V.CDKPM_HALF) == (2 * n, 1)
    assert cost(build_comparator, V.GIDNEY_HALF) == (n, n + 1)
    assert cost(build_controlled_comparator, V.CDKPM_HALF)[0] == 2 * n + 1
    assert cost(build_controlled_comparator, V.GIDNEY_HALF)[0] == n + 1
    d = static_counts(build_comparator(V.DRAPER, n))
    assert d.ancilla_count == 1 and d.count("TOFFOLI") == 0


def test_gidney_half_all_branches():
    c = build_comparator(V.GIDNEY_HALF, 3)
    m = sum(1 for g, _ in c.walk() if g.kind == "MEASURE")
    assert m >= 1
    for bits in itertools.product((0, 1), repeat=m):
        for xv, yv in itertools.product(range(8), repeat=2):
            r = run_basis(c, {"x": xv, "y": yv, "t": 0}, Forced(bits)).registers
            assert r["t"] == int(xv > yv) and r["anc"] == 0


def test_const_comparator_examples():
    c = build_const_comparator(V.CDKPM_HALF, 3, 0)
    assert all(run_basis(c, {"x": v, "t": 0}).registers["t"] == 0 for v in range(8))
    r = static_counts(build_const_comparator(V.CDKPM_HALF, 3, 0b110))
    assert r.count("X") == 4
    c = build_const_comparator(V.CDKPM_HALF, 3, 5)
    assert run_basis(c, {"x": 2, "t": 0}).registers["t"] == 1


def test_ctrl_const_comparator_examples():
    c = build_ctrl_const_comparator(V.CDKPM_HALF, 5, 4)
    r = static_counts(c)
    assert (r.count("TOFFOLI"), r.ancilla_count) == (10, 6)
    c = build_ctrl_const_comparator(V.CDKPM_HALF, 3, 4)
    assert run_basis(c, {"c": 1, "x": 1, "t": 0}).registers["t"] == 1
    assert all(run_basis(c, {"c": 0, "x": v, "t": 0}).registers["t"] == 0 for v in range(8))


def test_output_is_msb_of_difference():
    c = build_comparator(V.CDKPM_HALF, 3)
    for xv, yv in itertools.product(range(8), repeat=2):
        msb = sub_bits(BitString.from_int(yv, 3), BitString.from_int(xv, 3)).msb
        assert run_basis(c, {"x": xv, "y": yv, "t": 0}).registers["t"] == msb


def test_draper_agrees_with_cdkpm_half():
    for n in (1, 2, 3):
        d, h = build_comparator(V.DRAPER, n), build_comparator(V.CDKPM_HALF, n)
        for xv, yv in itertools.product(range(1 << n), repeat=2):
            want = run_basis(h, {"x": xv, "y": yv, "t": 0}).registers["t"]
            sv = run_statevector(d, {"x": xv, "y": yv, "t": 0})
            assert abs(sv.amplitudes[basis_index(d, {"x": xv, "y": yv, "t": want})]) > 1 - 1e-9


def test_invert_comparison():
    base = build_comparator(V.CDKPM_HALF, 3)
    inv = invert_comparison(base)
    assert inv.semantic.op == "compare_le"
    assert exhaustive_verify(inv).passed
    twice = invert_comparison(inv)
    assert twice.semantic.op == "compare_gt"
    for xv, yv in itertools.product(range(8), repeat=2):
        assert run_basis(twice, {"x": xv, "y": yv, "t": 0}).registers == \
            run_basis(base, {"x": xv, "y": yv, "t": 0}).registers


def test_invert_controlled_and_constant():
    assert exhaustive_verify(invert_comparison(build_controlled_comparator(V.CDKPM_HALF, 3))).passed
    assert exhaustive_verify(invert_comparison(build_const_comparator(V.CDKPM_HALF, 3, 5))).passed
    assert exhaustive_verify(
        invert_comparison(build_ctrl_const_comparator(V.GIDNEY_HALF, 3, 5))).passed


def test_invert_rejects_adder():
    with pytest.raises(BuildError):
        invert_comparison(build_plain_adder(AdderVariant.CDKPM, 3))


def test_width_errors():
    with pytest.raises(BuildError):
        build_comparator(V.CDKPM_HALF, 0)
    with pytest.raises(BuildError):
        build_const_comparator(V.CDKPM_HALF, 3, 8)
