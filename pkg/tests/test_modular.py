import json
import random

import numpy as np
import pytest

from mbuarith.adders import AdderVariant, BuildError, ControlledStrategy
from mbuarith.compare import ComparatorVariant
from mbuarith.modular import PRESETS, ArchitectureSpec, Kind, Slots, build_in_range
from mbuarith.resources import expected_counts, static_counts
from mbuarith.sim import (
    Forced, basis_index, exhaustive_verify, measurement_count, run_basis, run_statevector,
)

RIPPLE_PRESETS = ("CDKPM_ALL", "GIDNEY_ALL", "HYBRID", "VBE_ALL")
RIPPLE_KINDS = (Kind.MODADD, Kind.CTRL_MODADD, Kind.CONST_MODADD_VBE,
                Kind.CONST_MODADD_TAKAHASHI, Kind.CTRL_CONST_MODADD_VBE)


def specs(kind, n, preset, mbu, ps=None):
    for p in ps or range(1, 1 << n):
        if kind in (Kind.MODADD, Kind.CTRL_MODADD, Kind.IN_RANGE):
            yield ArchitectureSpec(kind, n, p, mbu=mbu, preset=preset)
        else:
            for a in range(p):
                yield ArchitectureSpec(kind, n, p, a, mbu=mbu, preset=preset)


@pytest.mark.parametrize("mbu", [False, True], ids=["static", "mbu"])
@pytest.mark.parametrize("kind", RIPPLE_KINDS, ids=lambda k: k.value)
@pytest.mark.parametrize("preset", RIPPLE_PRESETS)
def test_ripple_architectures_exhaustive(preset, kind, mbu):
    # Every modulus at n = 2 and two at n = 3; the acceptance suite sweeps all of n = 3.
    for n, ps in ((2, None), (3, (5, 7))):
        for spec in specs(kind, n, preset, mbu, ps):
            rep = exhaustive_verify(spec)
            assert rep.passed, (spec.to_dict(), rep.failures[:2])


@pytest.mark.parametrize("kind", [Kind.MODADD, Kind.CTRL_CONST_MODADD_BEAUREGARD],
                         ids=lambda k: k.value)
@pytest.mark.parametrize("mbu", [False, True], ids=["static", "mbu"])
def test_fourier_architectures_exhaustive(kind, mbu):
    for n in (2, 3):
        for spec in specs(kind, n, "DRAPER_BEAUREGARD", mbu):
            rep = exhaustive_verify(spec)
            assert rep.passed, (spec.to_dict(), rep.failures[:2])


@pytest.mark.parametrize("preset", ["CDKPM_ALL", "GIDNEY_ALL", "HYBRID"])
def test_n4_sampled(preset):
    rng = random.Random(4)
    for p in (11, 13, 15):
        for kind in (Kind.MODADD, Kind.CTRL_MODADD):
            c = ArchitectureSpec(kind, 4, p, mbu=True, preset=preset).build()
            m = measurement_count(c)
            for _ in range(60):
                v = {"x": rng.randrange(p), "y": rng.randrange(p)}
                ctrl = rng.randrange(2) if kind is Kind.CTRL_MODADD else 1
                if kind is Kind.CTRL_MODADD:
                    v["c"] = ctrl
                bits = [rng.randrange(2) for _ in range(m)]
                r = run_basis(c, v, Forced(bits)).registers
                assert r["y"] == (ctrl * v["x"] + v["y"]) % p
                assert r["x"] == v["x"]


def test_modadd_examples():
    c = ArchitectureSpec(Kind.MODADD, 3, 7).build()
    assert run_basis(c, {"x": 5, "y": 4}).registers["y"] == 2
    assert run_basis(c, {"x": 0, "y": 0}).registers["y"] == 0
    c = ArchitectureSpec(Kind.MODADD, 4, 11, mbu=True).build()
    assert static_counts(c).count("TOFFOLI") == 32
    assert expected_counts(c).count("TOFFOLI", expected=True) == 28


def test_ctrl_modadd_examples():
    c = ArchitectureSpec(Kind.CTRL_MODADD, 3, 5).build()
    assert run_basis(c, {"c": 1, "x": 4, "y": 3}).registers["y"] == 2
    for xv in range(5):
        for yv in range(5):
            assert run_basis(c, {"c": 0, "x": xv, "y": yv}).registers["y"] == yv
    assert static_counts(ArchitectureSpec(Kind.CTRL_MODADD, 4, 11).build()).count("TOFFOLI") == 37


def test_const_modadd_examples():
    t = ArchitectureSpec(Kind.CONST_MODADD_TAKAHASHI, 4, 13, 6, mbu=True).build()
    assert static_counts(t).count("TOFFOLI") == 24
    assert expected_counts(t).count("TOFFOLI", expected=True) == 20
    c = ArchitectureSpec(Kind.CONST_MODADD_TAKAHASHI, 3, 5, 3).build()
    assert run_basis(c, {"x": 4}).registers["x"] == 2
    z = ArchitectureSpec(Kind.CONST_MODADD_VBE, 3, 5, 0).build()
    assert all(run_basis(z, {"x": v}).registers["x"] == v for v in range(5))


def test_beauregard_examples():
    spec = ArchitectureSpec(Kind.CTRL_CONST_MODADD_BEAUREGARD, 3, 7, 6, preset="DRAPER_BEAUREGARD")
    c = spec.build()
    sv = run_statevector(c, {"c": 1, "x": 6})
    assert abs(sv.amplitudes[basis_index(c, {"c": 1, "x": 5})]) > 1 - 1e-9
    sv = run_statevector(c, {"c": 0, "x": 6})
    assert abs(sv.amplitudes[basis_index(c, {"c": 0, "x": 6})]) > 1 - 1e-9
    r = static_counts(c)
    assert (r.blocks_static["QFT"], r.blocks_static["IQFT"]) == (3, 3)
    assert r.count("CNOT") == 2 and r.ancilla_count == 2


def test_draper_modadd_blocks():
    c = ArchitectureSpec(Kind.MODADD, 3, 5, mbu=True, preset="DRAPER_BEAUREGARD").build()
    e = expected_counts(c)
    assert e.count("QFT", expected=True) == 2.5 and e.count("IQFT", expected=True) == 2.5


def test_in_range():
    c = build_in_range(3)
    for xv, yv, zv in np.ndindex(8, 8, 8):
        r = run_basis(c, {"x": xv, "y": yv, "z": zv, "t": 0}).registers
        assert r["t"] == int(yv < xv < zv)
    assert run_basis(c, {"x": 3, "y": 1, "z": 5, "t": 0}).registers["t"] == 1
    assert exhaustive_verify(build_in_range(2, mbu=True)).passed
    s = static_counts(build_in_range(4)).count("TOFFOLI")
    e = expected_counts(build_in_range(4, mbu=True)).count("TOFFOLI", expected=True)
    assert s - e == 4


def test_mbu_changes_counts_not_behavior():
    for preset in RIPPLE_PRESETS:
        a = ArchitectureSpec(Kind.MODADD, 3, 5, preset=preset)
        b = ArchitectureSpec(Kind.MODADD, 3, 5, mbu=True, preset=preset)
        ra, rb = exhaustive_verify(a), exhaustive_verify(b)
        assert ra.passed and rb.passed and ra.inputs_checked == rb.inputs_checked
        sa = static_counts(a.build()).count("TOFFOLI")
        eb = expected_counts(b.build()).count("TOFFOLI", expected=True)
        assert sa > eb


@pytest.mark.parametrize("kwargs,msg", [
    (dict(kind=Kind.MODADD, n=3, p=0), "p must"),
    (dict(kind=Kind.MODADD, n=3, p=8), "p must"),
    (dict(kind=Kind.CONST_MODADD_VBE, n=3, p=5, a=5), "a must"),
    (dict(kind=Kind.CONST_MODADD_VBE, n=3, p=5), "needs a constant"),
    (dict(kind=Kind.MODADD, n=0, p=1), "n must"),
    (dict(kind=Kind.MODADD, n=3, p=5, preset="NOPE"), "unknown preset"),
    (dict(kind=Kind.CTRL_MODADD, n=3, p=5, preset="DRAPER_BEAUREGARD"), "Fourier"),
    (dict(kind=Kind.CTRL_CONST_MODADD_BEAUREGARD, n=3, p=5, a=1), "Beauregard"),
])
def test_validation_errors(kwargs, msg):
    with pytest.raises(BuildError, match=msg):
        ArchitectureSpec(**kwargs)


def test_mixed_fourier_slots_rejected():
    bad = Slots(AdderVariant.DRAPER, AdderVariant.CDKPM, ComparatorVariant.CDKPM_HALF,
                ComparatorVariant.CDKPM_HALF)
    with pytest.raises(BuildError, match="mixed"):
        ArchitectureSpec(Kind.MODADD, 3, 5, slots=bad)


def test_custom_slots_verify():
    sl = Slots(AdderVariant.CDKPM, AdderVariant.GIDNEY, ComparatorVariant.TWO_ADDER,
               ComparatorVariant.GIDNEY_HALF, ControlledStrategy.CDKPM_CUMA)
    for kind in (Kind.MODADD, Kind.CTRL_MODADD):
        assert exhaustive_verify(ArchitectureSpec(kind, 3, 6, mbu=True, slots=sl)).passed


def test_architecture_json_roundtrip():
    for preset in PRESETS:
        s = ArchitectureSpec(Kind.MODADD, 3, 5, mbu=True, preset=preset)
        assert ArchitectureSpec.from_dict(json.loads(json.dumps(s.to_dict()))) == s
    sl = PRESETS["HYBRID"]
    s = ArchitectureSpec(Kind.CONST_MODADD_VBE, 4, 11, 3, slots=sl, preset=None)
    assert ArchitectureSpec.from_dict(json.loads(json.dumps(s.to_dict()))) == s


def test_result_below_p():
    c = ArchitectureSpec(Kind.MODADD, 3, 6, mbu=True, preset="GIDNEY_ALL").build()
    m = measurement_count(c)
    for xv in range(6):
        for yv in range(6):
            assert run_basis(c, {"x": xv, "y": yv}, Forced([1] * m)).registers["y"] < 6
