"""NumPy fallback with the same interface as the compiled ``_kernels`` module."""

from __future__ import annotations

import numpy as np

OP_X, OP_CNOT, OP_TOF, OP_TALLY, OP_MEAS_RAND, OP_MEAS_DET, OP_COND = 1, 2, 3, 4, 5, 6, 7


def basis_sweep(prog, state, cbits, outcomes, out_len, n_rand, tally, status, forced):
    """Run every basis-state row through the program, vectorized across rows."""
    runs = state.shape[0]
    ptr = np.zeros(runs, dtype=np.int64)
    rows = np.arange(runs)
    width = outcomes.shape[1]

    def run(start: int, end: int, act: np.ndarray) -> None:
        pc = start
        while pc < end:
            op, a, b, c, kind = (int(v) for v in prog[pc])
            act = act & (status == 0)
            if op == OP_COND:
                sub = act & (cbits[:, a] == 1)
                if sub.any():
                    run(pc + 1, pc + 1 + b, sub)
                pc += b + 1
                continue
            u = act.view(np.uint8)
            if op == OP_X:
                state[:, a] ^= u
            elif op == OP_CNOT:
                state[:, b] ^= state[:, a] & u
            elif op == OP_TOF:
                state[:, c] ^= state[:, a] & state[:, b] & u
            elif op == OP_MEAS_RAND:
                short = act & (ptr >= out_len)
                status[short] = 1
                ok = act & ~short
                if width:
                    v = outcomes[rows, np.minimum(ptr, width - 1)]
                else:
                    v = np.zeros(runs, np.uint8)
                state[ok, a] = v[ok]
                cbits[ok, b] = v[ok]
                ptr[ok] += 1
                n_rand[ok] += 1
                u = ok.view(np.uint8)
            elif op == OP_MEAS_DET:
                v = state[:, a].copy()
                ok = act
                if forced:
                    short = act & (ptr >= out_len)
                    status[short] = 1
                    f = outcomes[rows, np.minimum(ptr, width - 1)] if width else v
                    bad = act & ~short & (f != v)
                    status[bad] = 2
                    ok = act & ~short & ~bad
                    ptr[ok] += 1
                cbits[ok, b] = v[ok]
                u = ok.view(np.uint8)
            if kind >= 0:
                tally[:, kind] += u
            pc += 1

    run(0, prog.shape[0], np.ones(runs, dtype=bool))


_INDEX_CACHE: dict[int, np.ndarray] = {}


def _index(dim: int) -> np.ndarray:
    idx = _INDEX_CACHE.get(dim)
    if idx is None:
        idx = np.arange(dim, dtype=np.int64)
        _INDEX_CACHE[dim] = idx
    return idx


def sv_xgate(psi, cmask, tbit):
    idx = _index(psi.shape[0])
    lo = idx[(idx & (cmask | tbit)) == cmask]
    hi = lo | tbit
    psi[lo], psi[hi] = psi[hi].copy(), psi[lo].copy()


def sv_phase(psi, mask, phase):
    idx = _index(psi.shape[0])
    psi[(idx & mask) == mask] *= phase


def sv_h(psi, tbit):
    v = psi.reshape(-1, 2, tbit)
    a0 = v[:, 0, :].copy()
    a1 = v[:, 1, :]
    s = 1.0 / np.sqrt(2.0)
    v[:, 0, :] = (a0 + a1) * s
    v[:, 1, :] = (a0 - a1) * s


def sv_prob1(psi, tbit):
    v = psi.reshape(-1, 2, tbit)[:, 1, :]
    return float(np.vdot(v, v).real)


def sv_project(psi, tbit, outcome, scale):
    v = psi.reshape(-1, 2, tbit)
    v[:, outcome, :] *= scale
    v[:, 1 - outcome, :] = 0
