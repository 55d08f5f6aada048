# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for the statevector simulator and the Wigner grid.

Every function here has a drop-in counterpart in ``_kernels_py`` with the
same signature and semantics; ``_backend`` picks one at import time.

Small target dimensions (qubit and two-qubit gates) run as explicit loops
over the contiguous trailing axis. Larger ones go straight to BLAS
``zgemm`` through scipy's Cython bindings, one call per slice or per
selector group, with no Python-level work in between.
"""

import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_blas cimport zgemm

cnp.import_array()

# target dimensions up to this size use the hand-written loops
cdef Py_ssize_t SMALL = 4


cdef inline void _gemm_rows(int m, int n, int k, double complex *a, int lda,
                            double complex *x, int ldx, double complex *y, int ldy) noexcept nogil:
    """Y (row-major n x m) = X (row-major n x k) @ A^T, A row-major m x k.

    In BLAS (column-major) terms this is Y^T = A @ X^T.
    """
    cdef char ta = b'T'
    cdef char tb = b'N'
    cdef double complex one = 1.0
    cdef double complex zero = 0.0
    zgemm(&ta, &tb, &m, &n, &k, &one, a, &lda, x, &ldx, &zero, y, &ldy)


cdef inline void _gemm_slice(int d, int R, double complex *mat, double complex *x,
                             double complex *y) noexcept nogil:
    """y (row-major d x R) = mat (row-major d x d) @ x (row-major d x R)."""
    cdef char ta = b'N'
    cdef char tb = b'N'
    cdef double complex one = 1.0
    cdef double complex zero = 0.0
    # column-major view: y^T (R x d) = x^T (R x d) @ mat^T (d x d)
    zgemm(&ta, &tb, &R, &d, &d, &one, x, &R, mat, &d, &zero, y, &R)


cdef void _small_apply(const double[:, :, ::1] src, double[:, :, ::1] dst, Py_ssize_t l,
                       const double *m, Py_ssize_t d, Py_ssize_t r0, Py_ssize_t r1) noexcept nogil:
    # src/dst viewed as (L, d, 2R) doubles; m is a d x d complex matrix as 2*d*d doubles
    cdef Py_ssize_t i, j, r
    cdef double mr, mi, xr, xi
    for i in range(d):
        for r in range(r0, r1):
            dst[l, i, 2 * r] = 0.0
            dst[l, i, 2 * r + 1] = 0.0
        for j in range(d):
            mr = m[2 * (i * d + j)]
            mi = m[2 * (i * d + j) + 1]
            if mr == 0.0 and mi == 0.0:
                continue
            for r in range(r0, r1):
                xr = src[l, j, 2 * r]
                xi = src[l, j, 2 * r + 1]
                dst[l, i, 2 * r] += mr * xr - mi * xi
                dst[l, i, 2 * r + 1] += mr * xi + mi * xr


def apply_matrix(psi, mat):
    """out[l, :, r] = mat @ psi[l, :, r] for a state viewed as (L, d, R)."""
    cdef const double complex[:, :, ::1] x = np.ascontiguousarray(psi, dtype=np.complex128)
    cdef const double complex[:, ::1] m = np.ascontiguousarray(mat, dtype=np.complex128)
    cdef Py_ssize_t L = x.shape[0], d = x.shape[1], R = x.shape[2]
    cdef Py_ssize_t l
    if m.shape[0] != d or m.shape[1] != d:
        raise ValueError("matrix does not match target dimension")
    out = np.empty((L, d, R), dtype=np.complex128)
    if L == 0 or d == 0 or R == 0:
        return out
    cdef double complex[:, :, ::1] y = out
    cdef const double[:, :, ::1] xs
    cdef double[:, :, ::1] ys
    if d <= SMALL:
        xs = np.asarray(x).view(np.float64)
        ys = out.view(np.float64)
        with nogil:
            for l in range(L):
                _small_apply(xs, ys, l, <const double *> &m[0, 0], d, 0, R)
    else:
        with nogil:
            for l in range(L):
                _gemm_slice(<int> d, <int> R, <double complex *> &m[0, 0], <double complex *> &x[l, 0, 0], &y[l, 0, 0])
    return out


def apply_selected(psi, sel, mats):
    """out[l, :, r] = mats[sel[l, r]] @ psi[l, :, r].

    ``sel`` picks, column by column, which matrix of the stack acts on the
    target axis; this is how register-controlled operations are applied.
    """
    cdef const double complex[:, :, ::1] x = np.ascontiguousarray(psi, dtype=np.complex128)
    cdef const cnp.intp_t[:, ::1] s = np.ascontiguousarray(sel, dtype=np.intp)
    cdef const double complex[:, :, ::1] ms = np.ascontiguousarray(mats, dtype=np.complex128)
    cdef Py_ssize_t L = x.shape[0], d = x.shape[1], R = x.shape[2], K = ms.shape[0]
    cdef Py_ssize_t l, r, i, j, k, c, n, start
    if s.shape[0] != L or s.shape[1] != R:
        raise ValueError("selector shape does not match state view")
    if ms.shape[1] != d or ms.shape[2] != d:
        raise ValueError("matrix stack does not match target dimension")
    out = np.empty((L, d, R), dtype=np.complex128)
    if L == 0 or d == 0 or R == 0:
        return out
    arr = np.asarray(s)
    if arr.min() < 0 or arr.max() >= K:
        raise ValueError("selector value outside the matrix stack")
    cdef double complex[:, :, ::1] y = out
    cdef double complex acc, v

    if d <= SMALL:
        with nogil:
            for l in range(L):
                for r in range(R):
                    k = s[l, r]
                    for i in range(d):
                        acc = 0
                        for j in range(d):
                            v = ms[k, i, j]
                            acc.real = acc.real + v.real * x[l, j, r].real - v.imag * x[l, j, r].imag
                            acc.imag = acc.imag + v.real * x[l, j, r].imag + v.imag * x[l, j, r].real
                        y[l, i, r] = acc
        return out

    # counting sort of the columns of each slice by selector value, then one
    # gemm per (slice, matrix) group on gathered columns
    cdef cnp.intp_t[::1] counts = np.zeros(K + 1, dtype=np.intp)
    cdef cnp.intp_t[::1] order = np.empty(R, dtype=np.intp)
    cdef cnp.intp_t[::1] fill = np.empty(K, dtype=np.intp)
    cdef double complex[:, ::1] gx = np.empty((R, d), dtype=np.complex128)
    cdef double complex[:, ::1] gy = np.empty((R, d), dtype=np.complex128)
    with nogil:
        for l in range(L):
            for k in range(K + 1):
                counts[k] = 0
            for r in range(R):
                counts[s[l, r] + 1] += 1
            for k in range(K):
                counts[k + 1] += counts[k]
                fill[k] = counts[k]
            for r in range(R):
                k = s[l, r]
                order[fill[k]] = r
                fill[k] += 1
            for c in range(R):
                r = order[c]
                for j in range(d):
                    gx[c, j] = x[l, j, r]
            for k in range(K):
                start = counts[k]
                n = counts[k + 1] - start
                if n == 0:
                    continue
                _gemm_rows(<int> d, <int> n, <int> d, <double complex *> &ms[k, 0, 0], <int> d,
                           &gx[start, 0], <int> d, &gy[start, 0], <int> d)
            for c in range(R):
                r = order[c]
                for i in range(d):
                    y[l, i, r] = gy[c, i]
    return out


def wigner_grid(rho):
    """All 2N x 2N values W(q, p) = Tr[A(q, p) rho] / 2N.

    Closed form: Tr[A rho] = e^{i pi p q / N} sum_m e^{-2 pi i p m / N} rho[m, q - m].
    The sums for all (q, p mod N) are one product of the gathered
    (2N x N) table with the N x N DFT matrix.
    """
    cdef const double complex[:, ::1] a = np.ascontiguousarray(rho, dtype=np.complex128)
    cdef Py_ssize_t N = a.shape[0]
    cdef Py_ssize_t M = 2 * N
    cdef Py_ssize_t q, p, m, col
    if a.shape[1] != N:
        raise ValueError("density matrix must be square")
    g_arr = np.empty((M, N), dtype=np.complex128)
    cdef double complex[:, ::1] g = g_arr
    for q in range(M):
        for m in range(N):
            col = (q - m) % N
            if col < 0:
                col += N
            g[q, m] = a[m, col]
    k = np.arange(N)
    dft_arr = np.ascontiguousarray(np.exp(-2j * np.pi * np.outer(k, k) / N))
    cdef double complex[:, ::1] dft = dft_arr
    s_arr = np.empty((M, N), dtype=np.complex128)
    cdef double complex[:, ::1] sm = s_arr
    # s[q, p] = sum_m g[q, m] dft[p, m]  (dft is symmetric)
    _gemm_rows(<int> N, <int> M, <int> N, &dft[0, 0], <int> N, &g[0, 0], <int> N, &sm[0, 0], <int> N)
    half_arr = np.exp(1j * np.pi * np.arange(M) / N)
    cdef const double complex[::1] half = half_arr
    out = np.empty((M, M), dtype=np.float64)
    cdef double[:, ::1] w = out
    cdef double complex z, h
    for q in range(M):
        for p in range(M):
            z = sm[q, p % N]
            h = half[(p * q) % M]
            w[q, p] = (z.real * h.real - z.imag * h.imag) / M
    return out
