"""Vectorised numpy versions of the hot kernels.

These are the reference fallbacks for the compiled ``_kernels`` extension and
share its exact call signatures. All arrays are assumed contiguous:
``y`` complex128 of length N, ``bf`` complex128 (N, N), ``mask`` uint8 (N, N),
``block`` intp indices into ``range(N)``.
"""
import numpy as np


def bispectrum(y):
    n = y.shape[0]
    idx = np.arange(n)
    diff = (idx[:, None] - idx[None, :]) % n
    return y[:, None] * np.conj(y)[None, :] * y[diff]


def objective(y, bf, mask):
    resid = bf - bispectrum(y)
    resid = resid[mask.astype(bool)]
    return float(np.sum(resid.real ** 2 + resid.imag ** 2))


def gradient(y, bf, mask, block):
    n = y.shape[0]
    p = np.arange(n)[:, None]
    k = np.asarray(block, dtype=np.intp)[None, :]
    w = mask.astype(bool)
    yc = np.conj(y)
    a2 = y.real ** 2 + y.imag ** 2

    k_m_p = (k - p) % n
    p_m_k = (p - k) % n
    k_p_p = (k + p) % n

    w_kp = w[k, p]
    w_pk = w[p, k]
    w_k_kmp = w[k, k_m_p]
    w_kpp_k = w[k_p_p, k]

    s1 = np.where(w_kp, y[k] * y[k_m_p] * np.conj(bf[k, p]), 0.0)
    s2 = np.where(w_pk, y[k] * yc[p_m_k] * bf[p, k], 0.0)
    s3 = np.where(w_k_kmp, bf[k, k_m_p] * y[k_m_p] * yc[k], 0.0)
    s4 = a2[k] * (w_pk * a2[p_m_k] + w_kp * a2[k_m_p])
    s5 = w_kpp_k * a2[k_p_p] * a2[k]

    data = (s1 + s2 + s3).sum(axis=1)
    model = (s4 + s5).sum(axis=1)
    return -data + y * model
