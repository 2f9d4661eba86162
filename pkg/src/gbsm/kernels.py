"""Hot inner loops, each in a numpy form and a numba form.

The public names at the bottom dispatch on :data:`gbsm._accel.USE_NUMBA`.
Both forms are importable directly (``*_numpy`` / ``*_numba``) so tests and
the benchmark can compare them.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit

HALF_PI = 0.5 * math.pi
# |1 - |xi|| below this uses the analytic limit of cos(pi xi / 2) / (1 - xi^2)
DIPOLE_LIMIT_BAND = 1e-9
_MC_CHUNK = 65536


# -- dipole element factor -------------------------------------------------

def dipole_factor_numpy(xi):
    xi = np.clip(np.abs(np.asarray(xi, dtype=float)), 0.0, 1.0)
    e = 1.0 - xi
    safe = np.where(e < DIPOLE_LIMIT_BAND, 1.0, e)
    # cos(pi xi/2) = sin(pi e/2) and 1 - xi^2 = e (1 + xi); no cancellation near |xi| = 1
    out = np.sin(HALF_PI * safe) / (safe * (1.0 + xi))
    return np.where(e < DIPOLE_LIMIT_BAND, HALF_PI / (1.0 + xi), out)


@njit
def _dipole_factor_scalar(x):
    a = abs(x)
    if a > 1.0:
        a = 1.0
    e = 1.0 - a
    if e < DIPOLE_LIMIT_BAND:
        return HALF_PI / (1.0 + a)
    return math.sin(HALF_PI * e) / (e * (1.0 + a))


@njit
def _dipole_factor_loop(xi):
    flat = xi.ravel()
    out = np.empty(flat.size)
    for i in range(flat.size):
        out[i] = _dipole_factor_scalar(flat[i])
    return out.reshape(xi.shape)


def dipole_factor_numba(xi):
    return _dipole_factor_loop(np.ascontiguousarray(xi, dtype=np.float64))


# -- weighted Gram sum  sum_k w_k a_km conj(a_kn),  a = amp * exp(j phase) --

def phased_gram_numpy(weights, phase, amp):
    a = amp * np.exp(1j * phase)
    return (a * weights[:, None]).T @ a.conj()


@njit
def _phased_gram_loop(weights, phase, amp):
    n, s = amp.shape
    re = np.empty(s)
    im = np.empty(s)
    acc = np.zeros((s, s), dtype=np.complex128)
    for k in range(n):
        w = weights[k]
        for m in range(s):
            re[m] = amp[k, m] * math.cos(phase[k, m])
            im[m] = amp[k, m] * math.sin(phase[k, m])
        for m in range(s):
            for j in range(s):
                acc[m, j] += w * complex(re[m] * re[j] + im[m] * im[j],
                                         im[m] * re[j] - re[m] * im[j])
    return acc


def phased_gram_numba(weights, phase, amp):
    return _phased_gram_loop(np.ascontiguousarray(weights, dtype=np.float64),
                             np.ascontiguousarray(phase, dtype=np.float64),
                             np.ascontiguousarray(amp, dtype=np.float64))


# -- paired-scatterer Monte Carlo moments ------------------------------------
#
# Sample k contributes Y_k = sum_t w_t v_kt v_kt^H with
# v_kt[m*U + p] = amp_t[k, pol_t[t], m] amp_r[k, pol_r[t], p] exp(j (ph_t[k,m] + ph_r[k,p])).
# Returns the sample mean of Y and the sample variance of the delta-method
# influence of the normalized entry Y_ij / sqrt(Y_ii Y_jj).

def _influence_sq(y, ybar):
    d = np.real(np.diagonal(ybar))
    s = np.sqrt(np.outer(d, d))
    r = ybar / s
    ydiag = np.real(np.diagonal(y, axis1=1, axis2=2)) / d
    z = y / s - 0.5 * r * (ydiag[:, :, None] + ydiag[:, None, :])
    return np.abs(z) ** 2


def _mc_chunks(amp_t, ph_t, amp_r, ph_r, pol_t, pol_r, w):
    n = amp_t.shape[0]
    for lo in range(0, n, _MC_CHUNK):
        hi = min(lo + _MC_CHUNK, n)
        at = amp_t[lo:hi][:, pol_t, :]
        ar = amp_r[lo:hi][:, pol_r, :]
        c = hi - lo
        v = (at[:, :, :, None] * ar[:, :, None, :]).reshape(c, len(w), -1)
        ph = (ph_t[lo:hi, :, None] + ph_r[lo:hi, None, :]).reshape(c, -1)
        v = v * np.exp(1j * ph)[:, None, :]
        yield np.einsum("ctx,t,cty->cxy", v, w, v.conj())


def mc_moments_numpy(amp_t, ph_t, amp_r, ph_r, pol_t, pol_r, w):
    n = amp_t.shape[0]
    d = amp_t.shape[2] * amp_r.shape[2]
    ybar = np.zeros((d, d), dtype=complex)
    for y in _mc_chunks(amp_t, ph_t, amp_r, ph_r, pol_t, pol_r, w):
        ybar += y.sum(axis=0)
    ybar /= n
    ss = np.zeros((d, d))
    for y in _mc_chunks(amp_t, ph_t, amp_r, ph_r, pol_t, pol_r, w):
        ss += _influence_sq(y, ybar).sum(axis=0)
    return ybar, ss / (n - 1)


@njit
def _sample_y(k, amp_t, ph_t, amp_r, ph_r, pol_t, pol_r, w, v, y):
    s = amp_t.shape[2]
    u = amp_r.shape[2]
    dd = s * u
    for i in range(dd):
        for j in range(dd):
            y[i, j] = 0j
    for t in range(w.shape[0]):
        for m in range(s):
            for p in range(u):
                ph = ph_t[k, m] + ph_r[k, p]
                a = amp_t[k, pol_t[t], m] * amp_r[k, pol_r[t], p]
                v[m * u + p] = complex(a * math.cos(ph), a * math.sin(ph))
        for i in range(dd):
            for j in range(dd):
                y[i, j] += w[t] * v[i] * v[j].conjugate()


@njit
def _mc_moments_loop(amp_t, ph_t, amp_r, ph_r, pol_t, pol_r, w):
    n = amp_t.shape[0]
    dd = amp_t.shape[2] * amp_r.shape[2]
    v = np.empty(dd, dtype=np.complex128)
    y = np.empty((dd, dd), dtype=np.complex128)
    ybar = np.zeros((dd, dd), dtype=np.complex128)
    for k in range(n):
        _sample_y(k, amp_t, ph_t, amp_r, ph_r, pol_t, pol_r, w, v, y)
        ybar += y
    ybar /= n
    diag = np.empty(dd)
    for i in range(dd):
        diag[i] = ybar[i, i].real
    ss = np.zeros((dd, dd))
    for k in range(n):
        _sample_y(k, amp_t, ph_t, amp_r, ph_r, pol_t, pol_r, w, v, y)
        for i in range(dd):
            for j in range(dd):
                sij = math.sqrt(diag[i] * diag[j])
                r = ybar[i, j] / sij
                z = y[i, j] / sij - 0.5 * r * (y[i, i].real / diag[i] + y[j, j].real / diag[j])
                ss[i, j] += z.real * z.real + z.imag * z.imag
    return ybar, ss / (n - 1)


def mc_moments_numba(amp_t, ph_t, amp_r, ph_r, pol_t, pol_r, w):
    f64 = np.float64
    return _mc_moments_loop(np.ascontiguousarray(amp_t, dtype=f64), np.ascontiguousarray(ph_t, dtype=f64),
                            np.ascontiguousarray(amp_r, dtype=f64), np.ascontiguousarray(ph_r, dtype=f64),
                            np.ascontiguousarray(pol_t, dtype=np.int64), np.ascontiguousarray(pol_r, dtype=np.int64),
                            np.ascontiguousarray(w, dtype=f64))


# -- batched capacity  log2 det(I + c H H^H) ---------------------------------

def capacity_batch_numpy(h, c):
    u = h.shape[1]
    g = np.eye(u) + c * (h @ np.conj(np.swapaxes(h, 1, 2)))
    chol = np.linalg.cholesky(g)
    diag = np.real(np.diagonal(chol, axis1=1, axis2=2))
    return 2.0 * np.log2(diag).sum(axis=1)


@njit
def _capacity_loop(h, c):
    n, u, s = h.shape
    out = np.empty(n)
    g = np.empty((u, u), dtype=np.complex128)
    for k in range(n):
        for i in range(u):
            for j in range(u):
                acc = 0j
                for m in range(s):
                    acc += h[k, i, m] * h[k, j, m].conjugate()
                g[i, j] = c * acc
            g[i, i] += 1.0
        # in-place Cholesky of a Hermitian positive definite matrix
        logdet = 0.0
        for j in range(u):
            d = g[j, j].real
            for m in range(j):
                d -= g[j, m].real ** 2 + g[j, m].imag ** 2
            d = math.sqrt(d)
            g[j, j] = d
            logdet += math.log(d)
            for i in range(j + 1, u):
                acc = g[i, j]
                for m in range(j):
                    acc -= g[i, m] * g[j, m].conjugate()
                g[i, j] = acc / d
        out[k] = 2.0 * logdet / math.log(2.0)
    return out


def capacity_batch_numba(h, c):
    return _capacity_loop(np.ascontiguousarray(h, dtype=np.complex128), float(c))


if USE_NUMBA:
    dipole_factor = dipole_factor_numba
    phased_gram = phased_gram_numba
    mc_moments = mc_moments_numba
    capacity_batch = capacity_batch_numba
else:
    dipole_factor = dipole_factor_numpy
    phased_gram = phased_gram_numpy
    mc_moments = mc_moments_numpy
    capacity_batch = capacity_batch_numpy
