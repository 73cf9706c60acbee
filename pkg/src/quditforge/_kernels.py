"""Hot loops: circuit and Trotter propagation with exact adjoint gradients.

All synthesis costs reduce to an overlap

    z = Tr(X^dag F_m ... F_1 Y)

with ``Y`` the input columns (computational basis vectors, or the initial
state) and ``X`` the target columns.  Each kernel propagates ``Y`` forward,
``X`` backward, and returns ``z`` plus dz/dp for every parameter.

Derivatives of exp(-i s H) use the Daleckii-Krein formula in the eigenbasis
of H.  For an eigendecomposition H = W diag(l) W^dag,

    Tr(Chi^dag Df(H)[E] Psi) = Tr(E Z),   Z = W (Gam o Q^T)^T W^dag,
    Q = (W^dag Psi)(W^dag Chi)^dag,

where Gam holds the divided differences of f.  One Z serves every
direction E.

Functions decorated with ``njit`` compile under numba and run unchanged as
numpy code when numba is disabled.  The Trotter kernel additionally has a
batched numpy implementation (``trotter_value_grad_numpy``) that is used on
the fallback path because it vectorizes over time steps.
"""

import numpy as np

from ._accel import USE_NUMBA, njit


@njit
def divdiff_expi(lam, scale):
    """Gam_jk = (f(l_j) - f(l_k)) / (l_j - l_k) for f(x) = exp(-i scale x)."""
    n = lam.shape[0]
    lj = lam.reshape((n, 1))
    lk = lam.reshape((1, n))
    h = 0.5 * scale * (lj - lk)
    small = np.abs(h) < 1e-8
    hs = np.where(small, 1.0, h)
    sinc = np.where(small, 1.0 - h * h / 6.0, np.sin(hs) / hs)
    return -1j * scale * np.exp(-0.5j * scale * (lj + lk)) * sinc


@njit
def frechet_Z(W, gam, psi, chi):
    Wh = np.ascontiguousarray(W.conj().T)
    a = Wh @ psi
    b = Wh @ chi
    Q = a @ np.ascontiguousarray(b.conj().T)
    S = gam * np.ascontiguousarray(Q.T)
    return W @ np.ascontiguousarray(S.T) @ Wh


@njit
def trace_with(E, Z):
    """Tr(E Z)."""
    return np.sum(E * np.ascontiguousarray(Z.T))


@njit
def apply_eig(W, phases, psi):
    """W diag(phases) W^dag psi."""
    Wh = np.ascontiguousarray(W.conj().T)
    tmp = Wh @ psi
    for j in range(tmp.shape[0]):
        tmp[j, :] *= phases[j]
    return W @ tmp


# --------------------------------------------------------------------------
# SNAP + displacement, real displacement amplitudes
# --------------------------------------------------------------------------


@njit
def snapd_value_grad(Wd, mu, G1, alphas, thetas, Y, X):
    """Overlap and gradient for  D(a_0) S(t_0) ... D(a_{B-1}) S(t_{B-1}) D(a_B).

    ``Wd, mu`` diagonalize H1 = i (a^dag - a) so D(a) = Wd exp(-i a mu) Wd^dag;
    ``G1 = a^dag - a`` is the generator (dD/da = G1 D).
    Returns z, dz/dalphas, dz/dthetas, final propagated columns.
    """
    B = thetas.shape[0]
    d = thetas.shape[1]
    nf = 2 * B + 1
    N = Y.shape[0]
    r = Y.shape[1]
    psis = np.empty((nf + 1, N, r), dtype=np.complex128)
    psis[0] = Y
    cur = Y.copy()
    for i in range(nf):
        if i % 2 == 0:
            a = alphas[B - i // 2]
            cur = apply_eig(Wd, np.exp(-1j * a * mu), cur)
        else:
            th = thetas[B - 1 - i // 2]
            for k in range(d):
                cur[k, :] *= np.exp(1j * th[k])
        psis[i + 1] = cur
    z = np.sum(np.conj(X) * cur)

    g_alpha = np.zeros(B + 1, dtype=np.complex128)
    g_theta = np.zeros((B, d), dtype=np.complex128)
    chi = X.copy()
    for i in range(nf - 1, -1, -1):
        after = psis[i + 1]
        if i % 2 == 0:
            idx = B - i // 2
            g_alpha[idx] = np.sum(np.conj(chi) * (G1 @ after))
            chi = apply_eig(Wd, np.exp(1j * alphas[idx] * mu), chi)
        else:
            idx = B - 1 - i // 2
            th = thetas[idx]
            for k in range(d):
                g_theta[idx, k] = 1j * np.sum(np.conj(chi[k, :]) * after[k, :])
                chi[k, :] *= np.exp(-1j * th[k])
    return z, g_alpha, g_theta, cur


# --------------------------------------------------------------------------
# ECD + qubit rotations on the joint space (qubit is the slow index)
# --------------------------------------------------------------------------


@njit
def _rotation(theta, phi):
    c = np.cos(0.5 * theta)
    s = np.sin(0.5 * theta)
    R = np.empty((2, 2), dtype=np.complex128)
    R[0, 0] = c
    R[0, 1] = -1j * s * np.exp(1j * phi)
    R[1, 0] = -1j * s * np.exp(-1j * phi)
    R[1, 1] = c
    return R


@njit
def _rotation_grads(theta, phi):
    c = np.cos(0.5 * theta)
    s = np.sin(0.5 * theta)
    dth = np.empty((2, 2), dtype=np.complex128)
    dth[0, 0] = -0.5 * s
    dth[0, 1] = -0.5j * c * np.exp(1j * phi)
    dth[1, 0] = -0.5j * c * np.exp(-1j * phi)
    dth[1, 1] = -0.5 * s
    dph = np.zeros((2, 2), dtype=np.complex128)
    dph[0, 1] = s * np.exp(1j * phi)
    dph[1, 0] = -s * np.exp(-1j * phi)
    return dth, dph


@njit
def _apply_qubit(R, psi, N):
    out = np.empty_like(psi)
    g = psi[:N]
    e = psi[N:]
    out[:N] = R[0, 0] * g + R[0, 1] * e
    out[N:] = R[1, 0] * g + R[1, 1] * e
    return out


@njit
def ecd_value_grad(a, alphas, thetas, phis, Y, X):
    """Overlap and gradient for  R_0 ECD(a_0) R_1 ... ECD(a_{B-1}) R_B.

    ``a`` is the N x N annihilation operator.  Gradients with respect to the
    real and imaginary parts of every ECD amplitude are both returned.
    """
    B = alphas.shape[0]
    N = a.shape[0]
    r = Y.shape[1]
    ad = np.ascontiguousarray(a.conj().T)
    E1 = 1j * (ad - a)
    E2 = -(ad + a)
    nf = 2 * B + 1
    psis = np.empty((nf + 1, 2 * N, r), dtype=np.complex128)
    Ws = np.empty((B, N, N), dtype=np.complex128)
    lams = np.empty((B, N))
    psis[0] = Y
    cur = Y.copy()
    for i in range(nf):
        if i % 2 == 0:
            k = B - i // 2
            cur = _apply_qubit(_rotation(thetas[k], phis[k]), cur, N)
        else:
            k = B - 1 - i // 2
            beta = 0.5 * alphas[k]
            H = 1j * (beta * ad - np.conj(beta) * a)
            lam, W = np.linalg.eigh(H)
            Ws[k] = W
            lams[k] = lam
            nxt = np.empty_like(cur)
            nxt[:N] = apply_eig(W, np.exp(1j * lam), cur[N:])
            nxt[N:] = apply_eig(W, np.exp(-1j * lam), cur[:N])
            cur = nxt
        psis[i + 1] = cur
    z = np.sum(np.conj(X) * cur)

    g_re = np.zeros(B, dtype=np.complex128)
    g_im = np.zeros(B, dtype=np.complex128)
    g_th = np.zeros(B + 1, dtype=np.complex128)
    g_ph = np.zeros(B + 1, dtype=np.complex128)
    chi = X.copy()
    for i in range(nf - 1, -1, -1):
        before = psis[i]
        if i % 2 == 0:
            k = B - i // 2
            O = np.empty((2, 2), dtype=np.complex128)
            for qa in range(2):
                for qb in range(2):
                    O[qa, qb] = np.sum(
                        np.conj(chi[qa * N:(qa + 1) * N]) * before[qb * N:(qb + 1) * N]
                    )
            dth, dph = _rotation_grads(thetas[k], phis[k])
            g_th[k] = np.sum(dth * O)
            g_ph[k] = np.sum(dph * O)
            R = _rotation(thetas[k], phis[k])
            chi = _apply_qubit(np.ascontiguousarray(R.conj().T), chi, N)
        else:
            k = B - 1 - i // 2
            W = Ws[k]
            lam = lams[k]
            # e-block of the output came from D(beta) acting on the g-block input
            Ze = frechet_Z(W, divdiff_expi(lam, 1.0), np.ascontiguousarray(before[:N]),
                           np.ascontiguousarray(chi[N:]))
            Zg = frechet_Z(W, divdiff_expi(-lam, 1.0), np.ascontiguousarray(before[N:]),
                           np.ascontiguousarray(chi[:N]))
            g_re[k] = 0.5 * (trace_with(E1, Ze) - trace_with(E1, Zg))
            g_im[k] = 0.5 * (trace_with(E2, Ze) - trace_with(E2, Zg))
            nxt = np.empty_like(chi)
            nxt[:N] = apply_eig(W, np.exp(1j * lam), chi[N:])
            nxt[N:] = apply_eig(W, np.exp(-1j * lam), chi[:N])
            chi = nxt
    return z, g_re, g_im, g_th, g_ph, cur


# --------------------------------------------------------------------------
# Trotter product for driven evolution
# --------------------------------------------------------------------------


@njit
def _trotter_value_grad_loop(Hd, gens, amps, dt, Y, X, want_grad):
    m = amps.shape[0]
    ng = gens.shape[0]
    n = Hd.shape[0]
    r = Y.shape[1]
    Ws = np.empty((m, n, n), dtype=np.complex128)
    lams = np.empty((m, n))
    psis = np.empty((m + 1, n, r), dtype=np.complex128)
    psis[0] = Y
    cur = Y.copy()
    for s in range(m):
        H = Hd.copy()
        for g in range(ng):
            H += amps[s, g] * gens[g]
        lam, W = np.linalg.eigh(H)
        Ws[s] = W
        lams[s] = lam
        cur = apply_eig(W, np.exp(-1j * dt * lam), cur)
        psis[s + 1] = cur
    z = np.sum(np.conj(X) * cur)
    grad = np.zeros((m, ng), dtype=np.complex128)
    if not want_grad:
        return z, grad, cur
    chi = X.copy()
    for s in range(m - 1, -1, -1):
        W = Ws[s]
        lam = lams[s]
        Z = frechet_Z(W, divdiff_expi(lam, dt), psis[s], chi)
        for g in range(ng):
            grad[s, g] = trace_with(gens[g], Z)
        chi = apply_eig(W, np.exp(1j * dt * lam), chi)
    return z, grad, cur


def trotter_value_grad_numpy(Hd, gens, amps, dt, Y, X, want_grad=True):
    """Batched numpy version of the Trotter kernel (eigh over all steps at once)."""
    m = amps.shape[0]
    H = Hd[None, :, :] + np.tensordot(amps, gens, axes=(1, 0))
    lam, W = np.linalg.eigh(H)
    Wh = np.conj(np.swapaxes(W, 1, 2))
    U = (W * np.exp(-1j * dt * lam)[:, None, :]) @ Wh
    psis = np.empty((m + 1,) + Y.shape, dtype=complex)
    psis[0] = Y
    for s in range(m):
        psis[s + 1] = U[s] @ psis[s]
    cur = psis[m]
    z = np.vdot(X, cur)
    if not want_grad:
        return z, np.zeros((m, gens.shape[0]), dtype=complex), cur
    chis = np.empty_like(psis)
    chis[m] = X
    for s in range(m - 1, -1, -1):
        chis[s] = np.conj(U[s].T) @ chis[s + 1]
    a = Wh @ psis[:m]
    b = Wh @ chis[1:]
    Q = a @ np.conj(np.swapaxes(b, 1, 2))
    h = 0.5 * dt * (lam[:, :, None] - lam[:, None, :])
    gam = -1j * dt * np.exp(-0.5j * dt * (lam[:, :, None] + lam[:, None, :])) * np.sinc(h / np.pi)
    S = gam * np.swapaxes(Q, 1, 2)
    Z = W @ np.swapaxes(S, 1, 2) @ Wh
    grad = np.einsum("gij,nji->ng", gens, Z)
    return z, grad, cur


def trotter_value_grad_numba(Hd, gens, amps, dt, Y, X, want_grad=True):
    return _trotter_value_grad_loop(Hd, gens, amps, float(dt), Y, X, want_grad)


def trotter_value_grad(Hd, gens, amps, dt, Y, X, want_grad=True):
    """z = Tr(X^dag U_m ... U_1 Y) with U_s = exp(-i dt (Hd + sum_g amps[s, g] gens[g])).

    Returns ``(z, dz/damps, U_m ... U_1 Y)``.
    """
    Hd = np.ascontiguousarray(Hd, dtype=np.complex128)
    gens = np.ascontiguousarray(gens, dtype=np.complex128)
    amps = np.ascontiguousarray(amps, dtype=np.float64)
    Y = np.ascontiguousarray(Y, dtype=np.complex128)
    X = np.ascontiguousarray(X, dtype=np.complex128)
    if USE_NUMBA:
        return trotter_value_grad_numba(Hd, gens, amps, dt, Y, X, want_grad)
    return trotter_value_grad_numpy(Hd, gens, amps, dt, Y, X, want_grad)

