import csv
import io
from fractions import Fraction

import pytest

from mbuarith.adders import AdderVariant, build_plain_adder
from mbuarith.bitarith import hamming_weight
from mbuarith.circuit import Builder, Semantic
from mbuarith.mbu import BRANCH_TAG
from mbuarith.modular import ArchitectureSpec, Kind
from mbuarith.resources import (
    CNOT_CZ, CSV_HEADER, DISCREPANCY, DRIFT, EXACT, FORMULAS, GOLDEN, TARGETS, ancilla_audit,
    check_formulas, empirical_counts, expected_counts, lookup, render_table, static_counts,
    table_lines,
)
from mbuarith.sim import exhaustive_verify


def test_empty_circuit_counts_zero():
    b = Builder()
    b.register("x", 1, "input")
    r = static_counts(b.seal(Semantic("identity", 1)))
    assert r.static == {} and r.count("TOFFOLI") == 0 and r.count(CNOT_CZ) == 0


def test_plain_adder_examples():
    r = static_counts(build_plain_adder(AdderVariant.CDKPM, 4))
    assert (r.count("TOFFOLI"), r.count("CNOT")) == (8, 17)
    g = static_counts(build_plain_adder(AdderVariant.GIDNEY, 5))
    assert g.count("TOFFOLI") == 5
    # The carry-out AND stays computed, so four of the five ANDs are erased.
    assert g.count("MEASURE") == 4


def test_expected_equals_static_without_measurement():
    r = static_counts(build_plain_adder(AdderVariant.CDKPM, 5))
    assert all(r.count(k, True) == v for k, v in r.static.items())


def test_expected_mbu_examples():
    c = ArchitectureSpec(Kind.MODADD, 4, 11, mbu=True).build()
    assert expected_counts(c).count("TOFFOLI", True) == 28
    c = ArchitectureSpec(Kind.MODADD, 8, 251, mbu=True, preset="GIDNEY_ALL").build()
    assert expected_counts(c).count("TOFFOLI", True) == 28


def _branch_counts(c):
    out = {}
    for g in c.gates:
        if g.kind == "CONDBLOCK" and BRANCH_TAG in g.tag_open:
            for inner, _ in _walk(g.body, 1):
                out[inner.kind] = out.get(inner.kind, Fraction(0)) + 1
    return out


def _walk(gates, depth):
    for g in gates:
        yield g, depth
        if g.body:
            yield from _walk(g.body, depth + 1)


@pytest.mark.parametrize("preset", ["CDKPM_ALL", "VBE_ALL"])
def test_expected_is_static_minus_half_branch(preset):
    # Branch contents carry no further measurements for these presets.
    c = ArchitectureSpec(Kind.MODADD, 5, 19, mbu=True, preset=preset).build()
    r = static_counts(c)
    br = _branch_counts(c)
    for kind, v in r.static.items():
        assert r.count(kind, True) == v - Fraction(br.get(kind, 0), 2)


@pytest.mark.parametrize("preset", ["GIDNEY_ALL", "HYBRID"])
def test_nested_branch_weights(preset):
    c = ArchitectureSpec(Kind.MODADD, 4, 11, mbu=True, preset=preset).build()
    r = static_counts(c)
    want = {}
    for g, d in _walk(c.gates, 0):
        want[g.kind] = want.get(g.kind, Fraction(0)) + Fraction(1, 1 << d)
    assert {k: r.count(k, True) for k in want} == want


@pytest.mark.parametrize("preset,value", [("CDKPM_ALL", 28), ("GIDNEY_ALL", 14), ("HYBRID", 22)])
def test_empirical_mean_within_three_standard_errors(preset, value):
    c = ArchitectureSpec(Kind.MODADD, 4, 13, mbu=True, preset=preset).build()
    e = empirical_counts(c, 10_000, seed=5)["TOFFOLI"]
    assert expected_counts(c).count("TOFFOLI", True) == value
    assert abs(e.mean - value) <= 3 * e.stderr


def test_empirical_runs_are_seeded():
    c = ArchitectureSpec(Kind.MODADD, 3, 5, mbu=True).build()
    assert empirical_counts(c, 500, 3) == empirical_counts(c, 500, 3)


@pytest.mark.parametrize("preset,declared", [("CDKPM_ALL", 6), ("HYBRID", 6), ("GIDNEY_ALL", 9)])
def test_ancilla_audit(preset, declared):
    spec = ArchitectureSpec(Kind.MODADD, 3, 5, preset=preset)
    c = spec.build()
    a = ancilla_audit(c, exhaustive_verify(c))
    assert a == {"declared": declared, "touched": declared, "restored": True}


def test_cdkpm_row_example():
    lines = {(ln.gate): ln for ln in table_lines(["cdkpm"], [4], [11])}
    assert lines["TOFFOLI"].static == 32 and lines["TOFFOLI"].expected == 28
    assert lines["X"].static == 7 and lines["X"].expected == Fraction(15, 2)
    assert lines[CNOT_CZ].static == 16 * 4 + 2 * 3 + 5


def test_csv_header_and_empty_table():
    text = render_table([], [4], [11], "csv")
    assert text.strip() == ",".join(CSV_HEADER)
    assert "| row |" in render_table([], [4], [11], "md")


def test_csv_rows_parse():
    text = render_table(["cdkpm", "gidney", "hybrid"], range(4, 9), [11, 13], "csv")
    rows = list(csv.DictReader(io.StringIO(text)))
    assert rows and set(rows[0]) == set(CSV_HEADER)
    assert {r["status"] for r in rows} <= {EXACT, GOLDEN, DISCREPANCY}
    for r in rows:
        assert int(r["hamming_p"]) == hamming_weight(int(r["p"]))


def test_markdown_layout():
    md = render_table(["cdkpm", "draper"], [4], [11], "md")
    assert md.splitlines()[0].startswith("| row | n | p | Logical Qubits |")
    assert "cdkpm" in md and "draper" in md


def test_unknown_row_and_target():
    with pytest.raises(KeyError):
        table_lines(["nope"], [4], [11])
    with pytest.raises(KeyError):
        check_formulas("nope", [4])


def test_registry_targets_exist():
    for f in FORMULAS:
        assert f.target in TARGETS, f.target
        if f.status != EXACT:
            assert f.built is not None and f.note


@pytest.mark.parametrize("target", sorted({f.target for f in FORMULAS}))
def test_no_formula_drifts(target):
    ns = range(2, 7) if "DRAPER" in target else range(2, 11)
    ps = [3, 5, 11, 13, 21, 31] if target.startswith(("modadd", "ctrl_modadd", "const", "in_"))\
        else None
    cells = check_formulas(target, ns, ps)
    assert cells
    assert all(c.status != DRIFT for c in cells), [c for c in cells if c.status == DRIFT][:3]


def test_lookup():
    f = lookup("modadd:CDKPM_ALL", "TOFFOLI")
    assert f.reference(5, 2) == 40 and f.status == EXACT
    assert lookup("modadd:CDKPM_ALL", "CZ") is None


def test_amortized_draper_tally():
    c = ArchitectureSpec(Kind.MODADD, 3, 5, preset="DRAPER_BEAUREGARD").build()
    r = static_counts(c)
    assert r.amortized_qft_blocks() == r.count("QFT_BLOCKS") - 2


def test_report_to_dict_fractions():
    d = expected_counts(ArchitectureSpec(Kind.MODADD, 3, 5, mbu=True).build()).to_dict()
    assert d["expected"]["TOFFOLI"] == 21
    assert isinstance(d["cnot_cz_expected"], str) and "/" in d["cnot_cz_expected"]
