"""Pure numpy implementations of the compiled kernels in ``_ckernels.pyx``."""
import numpy as np


def _diagonal(interaction, states, delta):
    n = len(delta)
    bits = (states[:, None] >> np.arange(n)) & 1
    return interaction - bits @ np.asarray(delta, dtype=np.float64)


def _gather_sum(x, flip):
    padded = np.append(x, 0.0)
    # -1 entries index the trailing zero
    return padded[flip].sum(axis=1)


def apply_hamiltonian(psi, interaction, states, flip, omega, delta):
    x = np.asarray(psi, dtype=np.complex128)
    diag = _diagonal(interaction, states, delta)
    return diag * x + 0.5 * omega * _gather_sum(x, flip)


def rk4_evolve(psi, interaction, states, flip, omegas, deltas, dt,
               renorm_threshold, fail_threshold):
    max_drift = 0.0
    n_renorm = 0
    x = psi
    deltas = np.asarray(deltas, dtype=np.float64)
    bits = ((states[:, None] >> np.arange(flip.shape[1])) & 1).astype(np.float64)
    for step, omega in enumerate(omegas):
        diag = interaction - bits @ deltas[step]
        half = 0.5 * omega

        def h(v):
            return diag * v + half * _gather_sum(v, flip)

        k1 = -1j * dt * h(x)
        k2 = -1j * dt * h(x + 0.5 * k1)
        k3 = -1j * dt * h(x + 0.5 * k2)
        k4 = -1j * dt * h(x + k3)
        x += (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        norm = np.sqrt(np.vdot(x, x).real)
        drift = abs(norm - 1.0)
        max_drift = max(max_drift, drift)
        if drift > fail_threshold:
            return max_drift, n_renorm, step
        if drift > renorm_threshold:
            x /= norm
            n_renorm += 1
    return max_drift, n_renorm, -1


def exposed_counts(coords, radii, sphere, indptr, indices):
    coords = np.asarray(coords, dtype=np.float64)
    radii = np.asarray(radii, dtype=np.float64)
    out = np.zeros(len(coords), dtype=np.int64)
    for a in range(len(coords)):
        pts = coords[a] + radii[a] * sphere
        nb = indices[indptr[a]:indptr[a + 1]]
        if len(nb) == 0:
            out[a] = len(sphere)
            continue
        d2 = ((pts[:, None, :] - coords[nb][None, :, :]) ** 2).sum(axis=2)
        buried = (d2 < radii[nb][None, :] ** 2).any(axis=1)
        out[a] = int((~buried).sum())
    return out
