# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops for the basis sweep and statevector gate application."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

cdef enum:
    OP_X = 1
    OP_CNOT = 2
    OP_TOF = 3
    OP_TALLY = 4
    OP_MEAS_RAND = 5
    OP_MEAS_DET = 6
    OP_COND = 7


def basis_sweep(const int[:, ::1] prog, unsigned char[:, ::1] state,
                unsigned char[:, ::1] cbits, const unsigned char[:, ::1] outcomes,
                const int[::1] out_len, int[::1] n_rand, long long[:, ::1] tally,
                signed char[::1] status, bint forced):
    cdef Py_ssize_t runs = state.shape[0]
    cdef Py_ssize_t plen = prog.shape[0]
    cdef Py_ssize_t r, pc
    cdef int op, a, b, c, kind, ptr, v
    for r in range(runs):
        ptr = 0
        pc = 0
        while pc < plen:
            op = prog[pc, 0]
            a = prog[pc, 1]
            b = prog[pc, 2]
            c = prog[pc, 3]
            kind = prog[pc, 4]
            if op == OP_COND:
                if cbits[r, a] == 0:
                    pc += b + 1
                    continue
            elif op == OP_X:
                state[r, a] ^= 1
            elif op == OP_CNOT:
                state[r, b] ^= state[r, a]
            elif op == OP_TOF:
                state[r, c] ^= state[r, a] & state[r, b]
            elif op == OP_MEAS_RAND:
                if ptr >= out_len[r]:
                    status[r] = 1
                    break
                v = outcomes[r, ptr]
                ptr += 1
                n_rand[r] += 1
                state[r, a] = v
                cbits[r, b] = v
            elif op == OP_MEAS_DET:
                v = state[r, a]
                if forced:
                    if ptr >= out_len[r]:
                        status[r] = 1
                        break
                    if outcomes[r, ptr] != v:
                        status[r] = 2
                        break
                    ptr += 1
                cbits[r, b] = v
            if kind >= 0:
                tally[r, kind] += 1
            pc += 1


def sv_xgate(double complex[::1] psi, long long cmask, long long tbit):
    """Flip target bit on basis states where every control in cmask is set."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t i
    cdef double complex tmp
    for i in range(dim):
        if (i & tbit) == 0 and (i & cmask) == cmask:
            tmp = psi[i]
            psi[i] = psi[i | tbit]
            psi[i | tbit] = tmp


def sv_phase(double complex[::1] psi, long long mask, double complex phase):
    """Multiply amplitudes whose index has every bit of mask set."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t i
    for i in range(dim):
        if (i & mask) == mask:
            psi[i] = psi[i] * phase


def sv_h(double complex[::1] psi, long long tbit):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t i
    cdef double complex a0, a1
    cdef double s = 1.0 / sqrt(2.0)
    for i in range(dim):
        if (i & tbit) == 0:
            a0 = psi[i]
            a1 = psi[i | tbit]
            psi[i] = (a0 + a1) * s
            psi[i | tbit] = (a0 - a1) * s


def sv_prob1(const double complex[::1] psi, long long tbit):
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(dim):
        if (i & tbit) != 0:
            acc += psi[i].real * psi[i].real + psi[i].imag * psi[i].imag
    return acc


def sv_project(double complex[::1] psi, long long tbit, int outcome, double scale):
    """Zero the branch that disagrees with outcome and rescale the rest."""
    cdef Py_ssize_t dim = psi.shape[0]
    cdef Py_ssize_t i
    cdef int bit
    for i in range(dim):
        bit = 1 if (i & tbit) != 0 else 0
        if bit == outcome:
            psi[i] = psi[i] * scale
        else:
            psi[i] = 0
