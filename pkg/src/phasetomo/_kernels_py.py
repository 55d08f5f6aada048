"""Pure-numpy implementations of the hot kernels (fallback for ``_ckernels``)."""

import numpy as np


def apply_matrix(psi, mat):
    """out[l, :, r] = mat @ psi[l, :, r] for a state viewed as (L, d, R)."""
    return np.ascontiguousarray(np.matmul(mat, psi))


def apply_selected(psi, sel, mats):
    """out[l, :, r] = mats[sel[l, r]] @ psi[l, :, r]."""
    L, d, R = psi.shape
    if sel.shape != (L, R):
        raise ValueError("selector shape does not match state view")
    if mats.shape[1:] != (d, d):
        raise ValueError("matrix stack does not match target dimension")
    out = np.empty_like(psi)
    for s in np.unique(sel):
        ls, rs = np.nonzero(sel == s)
        # fancy indexing psi[ls, :, rs] -> (K, d)
        out[ls, :, rs] = psi[ls, :, rs] @ mats[s].T
    return out


def wigner_grid(rho):
    """All 2N x 2N values W(q, p) = Tr[A(q, p) rho] / 2N via one FFT per column."""
    N = rho.shape[0]
    M = 2 * N
    q = np.arange(M)
    m = np.arange(N)
    # g[q, m] = rho[m, q - m]
    g = rho[m[None, :], (q[:, None] - m[None, :]) % N]
    s = np.fft.fft(g, axis=1)
    p = np.arange(M)
    tr = s[:, p % N] * np.exp(1j * np.pi * np.outer(q, p) / N)
    return np.ascontiguousarray(tr.real / M)
