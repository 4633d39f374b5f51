# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Euler-Maruyama stepping for a single chain.

Mirrors the numpy backend: same drift families, same noise consumption
order (one standard-normal vector per step from a pre-drawn block), same
boundary handling. The drift is described by the flat encoding produced by
``driftlab.fields.drift.encode_drift``.
"""
import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, tanh

cnp.import_array()

DEF KIND_LINEAR = 0
DEF KIND_POLY_AXIS = 1
DEF KIND_GAUSS_WELLS = 2
DEF KIND_SOLENOID = 3
DEF KIND_REPLICATOR = 4
DEF KIND_FEEDBACK_TANH = 5

DEF SIMPLEX_FLOOR = 1e-12
DEF MAX_REFLECTIONS = 64

BACKEND_NAME = "compiled"


cdef inline void _eval_drift(
    double* b, const double* x, int d,
    const int* kinds, const int* meta, const double* data,
    const long long* off, int n_terms, double* scratch,
) noexcept nogil:
    cdef int ti, i, j, k, m, ax_i, ax_j
    cdef long long o
    cdef double acc, r2, w, w2, depth, cut, coef, omega, quad, kappa, c1, c2, c3, c4
    for i in range(d):
        b[i] = 0.0
    for ti in range(n_terms):
        o = off[ti]
        if kinds[ti] == KIND_LINEAR:
            for i in range(d):
                acc = data[o + d * d + i]
                for j in range(d):
                    acc += data[o + i * d + j] * x[j]
                b[i] += acc
        elif kinds[ti] == KIND_POLY_AXIS:
            for k in range(d):
                c1 = data[o + 4 * k]
                c2 = data[o + 4 * k + 1]
                c3 = data[o + 4 * k + 2]
                c4 = data[o + 4 * k + 3]
                b[k] -= c1 + x[k] * (2.0 * c2 + x[k] * (3.0 * c3 + x[k] * 4.0 * c4))
        elif kinds[ti] == KIND_GAUSS_WELLS:
            m = meta[2 * ti]
            for k in range(m):
                r2 = 0.0
                for i in range(d):
                    acc = x[i] - data[o + k * (d + 3) + i]
                    r2 += acc * acc
                w = data[o + k * (d + 3) + d]
                depth = data[o + k * (d + 3) + d + 1]
                cut = data[o + k * (d + 3) + d + 2]
                if r2 < cut * cut:
                    w2 = w * w
                    coef = depth / w2 * exp(-r2 / (2.0 * w2))
                    for i in range(d):
                        b[i] -= coef * (x[i] - data[o + k * (d + 3) + i])
        elif kinds[ti] == KIND_SOLENOID:
            ax_i = meta[2 * ti]
            ax_j = meta[2 * ti + 1]
            omega = data[o]
            b[ax_i] += omega * (x[ax_j] - data[o + 1 + ax_j])
            b[ax_j] -= omega * (x[ax_i] - data[o + 1 + ax_i])
        elif kinds[ti] == KIND_REPLICATOR:
            quad = 0.0
            for i in range(d):
                acc = 0.0
                for j in range(d):
                    acc += data[o + i * d + j] * x[j]
                scratch[i] = acc
                quad += x[i] * acc
            for i in range(d):
                b[i] += x[i] * (scratch[i] - quad)
        elif kinds[ti] == KIND_FEEDBACK_TANH:
            m = meta[2 * ti]
            kappa = data[o]
            for k in range(m):
                acc = 0.0
                for j in range(d):
                    acc += data[o + 1 + d * m + k * d + j] * x[j]
                scratch[k] = acc
            for i in range(d):
                acc = 0.0
                for k in range(m):
                    acc += data[o + 1 + i * m + k] * scratch[k]
                b[i] -= kappa * tanh(acc)


def run_chain_block(
    double[::1] x,
    const double[:, ::1] noise,
    const int[::1] kinds,
    const int[:, ::1] meta,
    const long long[::1] offsets,
    const double[::1] data,
    int manifold_kind,
    const double[::1] lo,
    const double[::1] hi,
    double dt,
    double sig,
    int stride,
    double[:, ::1] rec,
):
    """Advance one chain through a noise block. Returns -1, or the failing
    step index (divergence) as a nonnegative int with kind in the sign of
    the second element of the tuple."""
    cdef int block_steps = noise.shape[0]
    cdef int d = noise.shape[1]
    cdef int n_terms = kinds.shape[0]
    cdef int t, i, rfl, nxt
    cdef double incr_mean, total
    cdef int bad_step = -1
    cdef int bad_kind = 0
    cdef cnp.ndarray[cnp.float64_t, ndim=1] bbuf = np.empty(d)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sbuf = np.empty(max(d, 4) * 2)
    cdef double* b = <double*> bbuf.data
    cdef double* scratch = <double*> sbuf.data
    cdef const int* kinds_p = &kinds[0]
    cdef const int* meta_p = &meta[0, 0]
    cdef const double* data_p = NULL
    cdef const long long* off_p = &offsets[0]
    if data.shape[0] > 0:
        data_p = &data[0]

    with nogil:
        for t in range(block_steps):
            _eval_drift(b, &x[0], d, kinds_p, meta_p, data_p, off_p, n_terms,
                        scratch)
            if manifold_kind == 1:
                incr_mean = 0.0
                for i in range(d):
                    b[i] = b[i] * dt + sig * noise[t, i]
                    incr_mean += b[i]
                incr_mean /= d
                total = 0.0
                for i in range(d):
                    x[i] += b[i] - incr_mean
                    if x[i] < SIMPLEX_FLOOR:
                        x[i] = SIMPLEX_FLOOR
                    total += x[i]
                for i in range(d):
                    x[i] /= total
            else:
                for i in range(d):
                    x[i] += b[i] * dt + sig * noise[t, i]
                    if x[i] < lo[i] or x[i] > hi[i]:
                        for rfl in range(MAX_REFLECTIONS):
                            if x[i] > hi[i]:
                                x[i] = 2.0 * hi[i] - x[i]
                            elif x[i] < lo[i]:
                                x[i] = 2.0 * lo[i] - x[i]
                            else:
                                break
                        if x[i] < lo[i] or x[i] > hi[i]:
                            bad_step = t
                            bad_kind = 2
                            break
            if bad_step >= 0:
                break
            for i in range(d):
                if x[i] != x[i] or fabs(x[i]) > 1e300:
                    bad_step = t
                    bad_kind = 1
                    break
            if bad_step >= 0:
                break
            nxt = t + 1
            if nxt % stride == 0:
                for i in range(d):
                    rec[nxt / stride - 1, i] = x[i]
    if bad_step >= 0:
        return bad_step, bad_kind
    return -1, 0
