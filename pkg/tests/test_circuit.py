import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mbuarith.adders import AdderVariant, build_plain_adder, qft
from mbuarith.circuit import (
    Builder, Circuit, CircuitError, CircuitFormatError, Semantic, UnsupportedOperation,
    block_spans, cnot, condblock, crot, dagger, deserialize, h, measure, rot, serialize, toffoli,
    x,
)
from mbuarith.modular import PRESETS, ArchitectureSpec, Kind


def _one_gate() -> Circuit:
    b = Builder()
    b.register("q", 1, "input")
    b.append(x(0))
    return b.seal(Semantic("identity", 1))


def test_single_gate_circuit():
    c = _one_gate()
    assert len(c.gates) == 1
    assert c.num_qubits == 1


def test_dangling_condition_rejected():
    b = Builder()
    b.register("q", 1, "input")
    b.new_cbit()
    with pytest.raises(CircuitError):
        b.append(condblock(0, [x(0)]))


def test_duplicate_index_rejected():
    b = Builder()
    b.register("q", 3, "input")
    with pytest.raises(CircuitError):
        b.append(toffoli(1, 1, 2))


def test_out_of_range_index_rejected():
    b = Builder()
    b.register("q", 2, "input")
    with pytest.raises(CircuitError):
        b.append(cnot(0, 2))


def test_unbalanced_tags_rejected():
    b = Builder()
    b.register("q", 1, "input")
    b.open_block("MAJ")
    b.append(x(0))
    with pytest.raises(CircuitError):
        b.seal(Semantic("identity", 1))


def test_sealed_builder_is_frozen():
    b = Builder()
    b.register("q", 1, "input")
    b.seal(Semantic("identity", 1))
    with pytest.raises(CircuitError):
        b.append(x(0))


@pytest.mark.parametrize("gate", [rot(0, 2, s=2), rot(0, 0), crot(0, 1, 3, s=0)])
def test_rotation_fields_validated(gate):
    b = Builder()
    b.register("q", 2, "input")
    with pytest.raises(CircuitError):
        b.append(gate)


def test_dagger_involution_and_rotation_signs():
    c = qft(3)
    d = dagger(c)
    assert dagger(d).gates == c.gates
    rots = [g for g in d.gates if g.kind in ("ROT", "CROT")]
    assert rots and all(g.s == -1 for g in rots)
    assert block_spans(d)[0][0] == "QFT"


def test_dagger_rejects_measurement():
    b = Builder()
    b.register("q", 1, "input")
    cb = b.new_cbit()
    b.append(h(0))
    b.append(measure(0, cb))
    with pytest.raises(UnsupportedOperation):
        dagger(b.seal(Semantic("identity", 1)))


def test_dagger_preserves_kind_counts():
    from collections import Counter
    c = build_plain_adder(AdderVariant.CDKPM, 4)
    assert Counter(g.kind for g in c.gates) == Counter(g.kind for g in dagger(c).gates)
    assert dagger(c).semantic.op == "sub"


def _all_builder_outputs(n: int):
    yield build_plain_adder(AdderVariant.CDKPM, n)
    yield build_plain_adder(AdderVariant.GIDNEY, n)
    yield build_plain_adder(AdderVariant.DRAPER, n)
    for preset in PRESETS:
        yield ArchitectureSpec(Kind.MODADD, n, 5, mbu=True, preset=preset).build()


@pytest.mark.parametrize("c", list(_all_builder_outputs(3)), ids=lambda c: c.semantic.op)
def test_serialize_roundtrip(c):
    data = serialize(c)
    back = deserialize(data)
    assert back == c
    assert serialize(back) == data


def test_serialized_cdkpm_contains_2n_toffoli():
    doc = json.loads(serialize(build_plain_adder(AdderVariant.CDKPM, 2)))
    assert sum(1 for g in doc["gates"] if g["kind"] == "TOFFOLI") == 4
    assert doc["version"] == 1


def test_truncated_document_reports_offset():
    data = serialize(build_plain_adder(AdderVariant.CDKPM, 2))
    with pytest.raises(CircuitFormatError) as e:
        deserialize(data[:40])
    assert e.value.offset is not None and 0 <= e.value.offset <= 40


def test_version_mismatch_rejected():
    doc = json.loads(serialize(_one_gate()))
    doc["version"] = 2
    with pytest.raises(CircuitFormatError):
        deserialize(json.dumps(doc).encode())


def test_registers_do_not_overlap():
    c = ArchitectureSpec(Kind.MODADD, 3, 5).build()
    seen = [q for r in c.registers for q in r.qubits]
    assert len(seen) == len(set(seen))


_GATE = st.sampled_from(["x", "h", "cnot", "toffoli", "rot", "crot"])


@given(st.lists(st.tuples(_GATE, st.permutations(range(4)), st.integers(1, 6),
                          st.sampled_from([1, -1])), max_size=30))
def test_random_circuit_roundtrip(specs):
    b = Builder()
    b.register("q", 4, "input")
    for kind, qs, k, s in specs:
        g = {"x": lambda: x(qs[0]), "h": lambda: h(qs[0]), "cnot": lambda: cnot(qs[0], qs[1]),
             "toffoli": lambda: toffoli(qs[0], qs[1], qs[2]),
             "rot": lambda: rot(qs[0], k, s), "crot": lambda: crot(qs[0], qs[1], k, s)}[kind]()
        b.append(g)
    c = b.seal(Semantic("identity", 4))
    assert deserialize(serialize(c)) == c
