# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: batch token synthesis and joint histograms."""
import numpy as np
cimport numpy as cnp

cnp.import_array()

cdef long long SIZES[9]
SIZES[:] = [12, 3, 3, 28, 28, 2, 2, 2, 2]


def synth_token_ids(long long lo, long long hi,
                    const int[:, :, :, :, ::1] chord_table,
                    const unsigned char[:, ::1] rhythm_masks,
                    int hold_id, int rest_id):
    cdef Py_ssize_t n = hi - lo
    out_arr = np.empty((n, 16), dtype=np.int16)
    cdef short[:, ::1] out = out_arr
    cdef long long digits[9]
    cdef long long i, rem
    cdef Py_ssize_t row, k, bar, s, j, next_note
    cdef short notes[12]
    cdef int chord, arp, t
    cdef bint started
    cdef int chord_of[4]
    chord_of[:] = [0, 1, 2, 0]
    for row in range(n):
        rem = lo + row
        for k in range(8, -1, -1):
            digits[k] = rem % SIZES[k]
            rem = rem // SIZES[k]
        for j in range(4):
            chord = chord_of[j]
            arp = <int>digits[5 + j]
            for t in range(3):
                if arp == 0:
                    notes[3 * j + t] = <short>chord_table[digits[0], digits[1], digits[2], chord, t]
                else:
                    notes[3 * j + t] = <short>chord_table[digits[0], digits[1], digits[2], chord, 2 - t]
        started = False
        next_note = 0
        for bar in range(2):
            for s in range(8):
                if rhythm_masks[digits[3 + bar], s]:
                    out[row, 8 * bar + s] = notes[next_note]
                    next_note += 1
                    started = True
                elif started:
                    out[row, 8 * bar + s] = <short>hold_id
                else:
                    out[row, 8 * bar + s] = <short>rest_id
    return out_arr


def joint_counts(x, y, Py_ssize_t nx, Py_ssize_t ny):
    cdef const long long[::1] xv = np.ascontiguousarray(x, dtype=np.int64)
    cdef const long long[::1] yv = np.ascontiguousarray(y, dtype=np.int64)
    if xv.shape[0] != yv.shape[0]:
        raise ValueError("length mismatch")
    out_arr = np.zeros((nx, ny), dtype=np.int64)
    cdef long long[:, ::1] out = out_arr
    cdef Py_ssize_t i, a, b
    for i in range(xv.shape[0]):
        a = xv[i]
        b = yv[i]
        if a < 0 or a >= nx or b < 0 or b >= ny:
            raise ValueError("value outside histogram range")
        out[a, b] += 1
    return out_arr


from libc.math cimport sqrt


def adam_update(double[::1] p, const double[::1] g, double[::1] m, double[::1] v,
                double beta1, double beta2, double step_size, double inv_sqrt_c2, double eps):
    """Fused in-place ADAM moment and parameter update over flat float64 buffers."""
    cdef Py_ssize_t i, n = p.shape[0]
    cdef double gi
    if g.shape[0] != n or m.shape[0] != n or v.shape[0] != n:
        raise ValueError("buffer length mismatch")
    for i in range(n):
        gi = g[i]
        m[i] = beta1 * m[i] + (1.0 - beta1) * gi
        v[i] = beta2 * v[i] + (1.0 - beta2) * gi * gi
        p[i] -= step_size * m[i] / (sqrt(v[i]) * inv_sqrt_c2 + eps)
