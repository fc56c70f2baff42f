# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled fold-loss kernel.

Same contract as `_kernel_py.fold_losses`: fit the shrunk-covariance linear
discriminant on each training split and return the K clipped cross-entropy
validation losses.  Runs without the GIL so repetition workers scale across
threads.
"""

import numpy as np

from libc.math cimport exp, log, log1p

from .errors import NumericalError, ValidationError

BACKEND_NAME = "compiled"

# Status codes shared between the nogil body and the raising wrapper.
cdef enum:
    OK = 0
    EMPTY_FOLD = 1
    SINGLE_CLASS = 2
    TOO_SMALL = 3
    CHOL_FAIL = 4
    ILL_CONDITIONED = 5

cdef double COND_LIMIT = 1e12


def fold_losses(x, labels, assignments, int k_folds, double clip_delta, double shrinkage):
    cdef double[:, ::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef signed char[::1] yv = np.ascontiguousarray(labels, dtype=np.int8)
    cdef int[::1] av = np.ascontiguousarray(assignments, dtype=np.int32)
    cdef Py_ssize_t n = xv.shape[0], d = xv.shape[1]
    if yv.shape[0] != n or av.shape[0] != n:
        raise ValidationError("engine: labels/assignments length mismatch")
    losses_arr = np.empty(k_folds, dtype=np.float64)
    cdef double[::1] losses = losses_arr
    scratch = np.zeros(2 * d + 2 * d + d * d, dtype=np.float64)
    cdef double[::1] buf = scratch
    cdef int k, status = OK
    with nogil:
        for k in range(k_folds):
            status = _one_fold(xv, yv, av, k, n, d, clip_delta, shrinkage,
                               &buf[0], &losses[k])
            if status != OK:
                break
    if status == EMPTY_FOLD:
        raise ValidationError(f"folds: fold {k} is empty")
    if status == SINGLE_CLASS:
        raise ValidationError("lda: single-class fold")
    if status == TOO_SMALL:
        raise ValidationError("lda: need more than 2 training samples")
    if status == CHOL_FAIL:
        raise NumericalError("lda: singular covariance (Cholesky factorization failed)")
    if status == ILL_CONDITIONED:
        raise NumericalError("lda: singular covariance (condition estimate above 1e12)")
    return losses_arr


cdef int _one_fold(double[:, ::1] x, signed char[::1] y, int[::1] a,
                   int k, Py_ssize_t n, Py_ssize_t d,
                   double clip_delta, double shrinkage,
                   double* buf, double* loss) noexcept nogil:
    cdef double* mean_pos = buf
    cdef double* mean_neg = buf + d
    cdef double* w = buf + 2 * d
    cdef double* z = buf + 3 * d
    cdef double* cov = buf + 4 * d
    cdef Py_ssize_t i, p, q, m, n_pos = 0, n_neg = 0, n_val = 0
    cdef double va, trace, s, t, prob, acc, dmin, dmax, bias

    for p in range(d):
        mean_pos[p] = 0.0
        mean_neg[p] = 0.0
    for i in range(n):
        if a[i] == k:
            n_val += 1
        elif y[i] == 1:
            n_pos += 1
            for p in range(d):
                mean_pos[p] += x[i, p]
        else:
            n_neg += 1
            for p in range(d):
                mean_neg[p] += x[i, p]
    if n_val == 0:
        return EMPTY_FOLD
    if n_pos == 0 or n_neg == 0:
        return SINGLE_CLASS
    m = n_pos + n_neg
    if m <= 2:
        return TOO_SMALL
    for p in range(d):
        mean_pos[p] /= n_pos
        mean_neg[p] /= n_neg

    # Upper triangle of the pooled within-class scatter.
    for p in range(d * d):
        cov[p] = 0.0
    for i in range(n):
        if a[i] == k:
            continue
        if y[i] == 1:
            for p in range(d):
                z[p] = x[i, p] - mean_pos[p]
        else:
            for p in range(d):
                z[p] = x[i, p] - mean_neg[p]
        for p in range(d):
            va = z[p]
            for q in range(p, d):
                cov[p * d + q] += va * z[q]
    trace = 0.0
    for p in range(d):
        for q in range(p, d):
            cov[p * d + q] /= m - 2
        trace += cov[p * d + p]
    # Shrink toward scaled identity, then mirror into the lower triangle.
    for p in range(d):
        for q in range(p, d):
            cov[p * d + q] *= 1.0 - shrinkage
        cov[p * d + p] += shrinkage * trace / d
        for q in range(p + 1, d):
            cov[q * d + p] = cov[p * d + q]

    # In-place Cholesky, lower triangle.
    dmin = dmax = 0.0
    for p in range(d):
        for q in range(p, d):
            s = cov[q * d + p]
            for i in range(p):
                s -= cov[p * d + i] * cov[q * d + i]
            if p == q:
                if s <= 0.0:
                    return CHOL_FAIL
                cov[p * d + p] = s ** 0.5
                if p == 0:
                    dmin = dmax = cov[0]
                else:
                    if cov[p * d + p] < dmin:
                        dmin = cov[p * d + p]
                    if cov[p * d + p] > dmax:
                        dmax = cov[p * d + p]
            else:
                cov[q * d + p] = s / cov[p * d + p]
    if (dmax / dmin) * (dmax / dmin) > COND_LIMIT:
        return ILL_CONDITIONED

    # Solve Sigma' w = (mean_pos - mean_neg) via the two triangular systems.
    for p in range(d):
        s = mean_pos[p] - mean_neg[p]
        for i in range(p):
            s -= cov[p * d + i] * z[i]
        z[p] = s / cov[p * d + p]
    for p in range(d - 1, -1, -1):
        s = z[p]
        for i in range(p + 1, d):
            s -= cov[i * d + p] * w[i]
        w[p] = s / cov[p * d + p]

    bias = 0.0
    for p in range(d):
        bias += (mean_pos[p] + mean_neg[p]) * w[p]
    bias = -0.5 * bias + log(<double>n_pos / <double>n_neg)

    acc = 0.0
    for i in range(n):
        if a[i] != k:
            continue
        t = bias
        for p in range(d):
            t += w[p] * x[i, p]
        prob = 1.0 / (1.0 + exp(-t))
        if prob < clip_delta:
            prob = clip_delta
        elif prob > 1.0 - clip_delta:
            prob = 1.0 - clip_delta
        if y[i] == 1:
            acc -= log(prob)
        else:
            acc -= log1p(-prob)
    loss[0] = acc / n_val
    return OK
