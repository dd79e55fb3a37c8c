import subprocess
import sys
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mbuarith.adders import AdderVariant, build_plain_adder, iqft, qft
from mbuarith.circuit import Builder, Circuit, Semantic, cnot, h, measure, rot, x
from mbuarith.modular import ArchitectureSpec, Kind
from mbuarith.sim import (
    BackendUnsupported, BudgetExceeded, Forced, ForcedOutcomeError, SimulationError,
    basis_index, exhaustive_verify, run_basis, run_statevector, supports_basis,
)


def _identity(n: int) -> Circuit:
    b = Builder()
    b.register("x", n, "input")
    return b.seal(Semantic("identity", n))


def test_identity_basis_run():
    r = run_basis(_identity(3), {"x": 5})
    assert r.registers["x"] == 5
    assert r.path_probability == 1


def test_cdkpm_basis_example():
    r = run_basis(build_plain_adder(AdderVariant.CDKPM, 3), {"x": 5, "y": 6})
    assert r.registers["y"] == 11


def test_gidney_branch_independence():
    c = build_plain_adder(AdderVariant.GIDNEY, 3)
    r1 = run_basis(c, {"x": 5, "y": 6}, Forced([1, 1, 1]))
    r0 = run_basis(c, {"x": 5, "y": 6}, Forced([0, 0, 0]))
    assert r1.registers == r0.registers
    assert r0.registers["y"] == 11


def test_forced_list_too_short():
    c = build_plain_adder(AdderVariant.GIDNEY, 3)
    with pytest.raises(ForcedOutcomeError):
        run_basis(c, {"x": 1, "y": 1}, Forced([0]))


def test_unsanctioned_h_rejected():
    b = Builder()
    b.register("x", 1, "input")
    b.append(h(0))
    c = b.seal(Semantic("identity", 1))
    assert not supports_basis(c)
    with pytest.raises(BackendUnsupported, match="statevector"):
        run_basis(c, {"x": 0})


def test_rotation_rejected_by_basis_backend():
    with pytest.raises(BackendUnsupported):
        run_basis(qft(2), {"y": 0})


def test_qft_iqft_identity():
    b = Builder()
    b.register("q", 4, "input")
    for g in qft(4).gates + iqft(4).gates:
        b.append(g)
    c = b.seal(Semantic("identity", 4))
    for y in range(16):
        sv = run_statevector(c, {"q": y})
        assert abs(sv.amplitudes[y]) ** 2 >= 1 - 1e-10


def test_qft_matches_dft_oracle():
    # Without swaps, qubit i of QFT|y> carries phase y / 2^(i+1); the amplitude of |k>
    # is exp(2 pi i y * rev(k) / 2^m) / sqrt(2^m) with rev the bit reversal of k.
    m = 4
    c = qft(m)
    for y in range(1 << m):
        amps = run_statevector(c, {"y": y}).amplitudes
        for k in range(1 << m):
            rev = int(format(k, f"0{m}b")[::-1], 2)
            want = np.exp(2j * np.pi * y * rev / (1 << m)) / np.sqrt(1 << m)
            assert abs(amps[k] - want) < 1e-9


def test_draper_statevector_example():
    c = build_plain_adder(AdderVariant.DRAPER, 3)
    sv = run_statevector(c, {"x": 2, "y": 3})
    idx = basis_index(c, {"x": 2, "y": 5})
    assert abs(sv.amplitudes[idx]) >= 1 - 1e-9


def test_statevector_cap():
    with pytest.raises(SimulationError):
        run_statevector(_identity(30), {"x": 0})


def test_statevector_norm_preserved():
    rng = np.random.default_rng(1)
    b = Builder()
    b.register("q", 5, "input")
    for _ in range(2000):
        kind = rng.integers(0, 4)
        qs = rng.permutation(5)
        g = [h(int(qs[0])), x(int(qs[0])), cnot(int(qs[0]), int(qs[1])),
             rot(int(qs[0]), int(rng.integers(1, 8)))][kind]
        b.append(g)
    c = b.seal(Semantic("identity", 5))
    sv = run_statevector(c, {"q": 3})
    assert abs(sv.norm() - 1) < 1e-12


def test_forced_zero_probability_outcome_is_error():
    b = Builder()
    b.register("q", 1, "input")
    cb = b.new_cbit()
    b.append(measure(0, cb))
    c = b.seal(Semantic("identity", 1))
    with pytest.raises(ForcedOutcomeError):
        run_statevector(c, {"q": 0}, Forced([1]))


def test_seeded_runs_reproducible_across_processes():
    code = ("from mbuarith.modular import *; from mbuarith.sim import *; "
            "c = ArchitectureSpec(Kind.MODADD, 3, 5, mbu=True, preset='GIDNEY_ALL').build(); "
            "print([run_basis(c, {'x': 3, 'y': 4}, Seeded(s)).cbits for s in range(5)])")
    outs = {subprocess.run([sys.executable, "-c", code], capture_output=True, text=True,
                           check=True).stdout for _ in range(2)}
    assert len(outs) == 1


def test_verify_cdkpm_adder_passes():
    rep = exhaustive_verify(build_plain_adder(AdderVariant.CDKPM, 3))
    assert rep.passed and rep.inputs_checked == 64


def test_verify_mbu_modadd_passes_both_branches():
    c = ArchitectureSpec(Kind.MODADD, 3, 7, mbu=True).build()
    rep = exhaustive_verify(c)
    assert rep.passed
    assert rep.inputs_checked == 49 and rep.branches_checked == 2


def test_verify_detects_dropped_cnot():
    c = build_plain_adder(AdderVariant.CDKPM, 3)
    i = next(i for i, g in enumerate(c.gates)
             if g.kind == "CNOT" and not g.tag_open and not g.tag_close)
    bad = replace(c, gates=c.gates[:i] + c.gates[i + 1:])
    rep = exhaustive_verify(bad)
    assert not rep.passed
    f = rep.failures[0]
    assert "inputs" in f and "branch" in f
    assert '"failures"' in rep.to_json()


def test_verify_budget_guard():
    c = ArchitectureSpec(Kind.MODADD, 3, 7, preset="GIDNEY_ALL").build()
    with pytest.raises(BudgetExceeded):
        exhaustive_verify(c, budget=10)


def test_verify_sampled_mode_records_seed():
    c = ArchitectureSpec(Kind.MODADD, 4, 13, mbu=True, preset="GIDNEY_ALL").build()
    rep = exhaustive_verify(c, branches="sampled", seed=7, trials=300)
    assert rep.passed and rep.seed == 7


@given(st.integers(0, 7), st.integers(0, 15))
def test_basis_and_statevector_agree_on_adder(xv, yv):
    c = build_plain_adder(AdderVariant.CDKPM, 3)
    r = run_basis(c, {"x": xv, "y": yv})
    sv = run_statevector(c, {"x": xv, "y": yv})
    assert abs(sv.amplitudes[basis_index(c, r.registers)]) >= 1 - 1e-9
