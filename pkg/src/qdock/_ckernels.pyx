# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Signatures mirror ``_pykernels`` exactly."""
from libc.math cimport sqrt, fabs
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline void _apply_h(
    const double complex[::1] x,
    double complex[::1] out,
    const double[::1] diag,
    const int[:, ::1] flip,
    double half_omega,
    Py_ssize_t dim,
    Py_ssize_t n,
) noexcept nogil:
    cdef Py_ssize_t s, i
    cdef int j
    cdef double complex acc
    for s in range(dim):
        acc = 0
        for i in range(n):
            j = flip[s, i]
            if j >= 0:
                acc = acc + x[j]
        out[s] = diag[s] * x[s] + half_omega * acc


def apply_hamiltonian(psi, interaction, states, flip, double omega, delta):
    """Return H psi for a Hamiltonian with drive ``omega`` and per-atom ``delta``."""
    cdef double complex[::1] x = np.ascontiguousarray(psi, dtype=np.complex128)
    cdef double[::1] diag = _diagonal(interaction, states, delta)
    cdef int[:, ::1] fl = np.ascontiguousarray(flip, dtype=np.int32)
    out = np.empty(x.shape[0], dtype=np.complex128)
    cdef double complex[::1] o = out
    _apply_h(x, o, diag, fl, 0.5 * omega, x.shape[0], fl.shape[1])
    return out


cdef double[::1] _diagonal(interaction, states, delta):
    cdef const double[::1] v = np.ascontiguousarray(interaction, dtype=np.float64)
    cdef const long long[::1] st = np.ascontiguousarray(states, dtype=np.int64)
    cdef const double[::1] d = np.ascontiguousarray(delta, dtype=np.float64)
    cdef Py_ssize_t dim = v.shape[0], n = d.shape[0], s, i
    out = np.empty(dim, dtype=np.float64)
    cdef double[::1] o = out
    cdef double acc
    cdef long long b
    for s in range(dim):
        acc = v[s]
        b = st[s]
        for i in range(n):
            if (b >> i) & 1:
                acc -= d[i]
        o[s] = acc
    return o


def rk4_evolve(psi, interaction, states, flip, omegas, deltas, double dt,
               double renorm_threshold, double fail_threshold):
    """Propagate ``psi`` in place through ``len(omegas)`` fixed steps.

    Returns ``(max_drift, n_renorm, failed_step)`` where ``failed_step`` is -1
    unless the norm drift exceeded ``fail_threshold``.
    """
    cdef double complex[::1] x = psi
    cdef const double[::1] v = np.ascontiguousarray(interaction, dtype=np.float64)
    cdef const long long[::1] st = np.ascontiguousarray(states, dtype=np.int64)
    cdef const int[:, ::1] fl = np.ascontiguousarray(flip, dtype=np.int32)
    cdef const double[::1] om = np.ascontiguousarray(omegas, dtype=np.float64)
    cdef const double[:, ::1] de = np.ascontiguousarray(deltas, dtype=np.float64)
    cdef Py_ssize_t dim = x.shape[0], n = fl.shape[1], nsteps = om.shape[0]
    cdef Py_ssize_t step, s, i
    cdef double complex[::1] k1 = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] k2 = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] k3 = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] k4 = np.empty(dim, dtype=np.complex128)
    cdef double complex[::1] tmp = np.empty(dim, dtype=np.complex128)
    cdef double[::1] diag = np.empty(dim, dtype=np.float64)
    cdef double complex mi_dt = -1j * dt
    cdef double half, acc, norm2, drift, max_drift = 0.0, scale
    cdef long long b
    cdef int n_renorm = 0
    cdef Py_ssize_t failed = -1

    with nogil:
        for step in range(nsteps):
            for s in range(dim):
                acc = v[s]
                b = st[s]
                for i in range(n):
                    if (b >> i) & 1:
                        acc -= de[step, i]
                diag[s] = acc
            half = 0.5 * om[step]

            _apply_h(x, k1, diag, fl, half, dim, n)
            for s in range(dim):
                k1[s] = mi_dt * k1[s]
                tmp[s] = x[s] + 0.5 * k1[s]
            _apply_h(tmp, k2, diag, fl, half, dim, n)
            for s in range(dim):
                k2[s] = mi_dt * k2[s]
                tmp[s] = x[s] + 0.5 * k2[s]
            _apply_h(tmp, k3, diag, fl, half, dim, n)
            for s in range(dim):
                k3[s] = mi_dt * k3[s]
                tmp[s] = x[s] + k3[s]
            _apply_h(tmp, k4, diag, fl, half, dim, n)
            norm2 = 0.0
            for s in range(dim):
                x[s] = x[s] + (k1[s] + 2.0 * k2[s] + 2.0 * k3[s] + mi_dt * k4[s]) / 6.0
                norm2 += x[s].real * x[s].real + x[s].imag * x[s].imag

            drift = fabs(sqrt(norm2) - 1.0)
            if drift > max_drift:
                max_drift = drift
            if drift > fail_threshold:
                failed = step
                break
            if drift > renorm_threshold:
                scale = 1.0 / sqrt(norm2)
                for s in range(dim):
                    x[s] = x[s] * scale
                n_renorm += 1
    return max_drift, n_renorm, failed


def exposed_counts(coords, radii, sphere, indptr, indices):
    """Count unoccluded test points per atom.

    ``radii`` already include the probe. Neighbour lists are CSR encoded.
    A test point is occluded when strictly inside another expanded sphere.
    """
    cdef const double[:, ::1] c = np.ascontiguousarray(coords, dtype=np.float64)
    cdef const double[::1] r = np.ascontiguousarray(radii, dtype=np.float64)
    cdef const double[:, ::1] sp = np.ascontiguousarray(sphere, dtype=np.float64)
    cdef const long long[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const long long[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef Py_ssize_t natoms = c.shape[0], npts = sp.shape[0]
    cdef Py_ssize_t a, p, q, jj, j, last
    cdef double px, py, pz, dx, dy, dz, rj2
    cdef bint buried
    out = np.zeros(natoms, dtype=np.int64)
    cdef long long[::1] o = out
    with nogil:
        for a in range(natoms):
            last = ip[a]
            for p in range(npts):
                px = c[a, 0] + r[a] * sp[p, 0]
                py = c[a, 1] + r[a] * sp[p, 1]
                pz = c[a, 2] + r[a] * sp[p, 2]
                buried = False
                # try the last occluder first: neighbouring test points share them
                for q in range(ip[a + 1] - ip[a]):
                    jj = last + q
                    if jj >= ip[a + 1]:
                        jj -= ip[a + 1] - ip[a]
                    j = ix[jj]
                    dx = px - c[j, 0]
                    dy = py - c[j, 1]
                    dz = pz - c[j, 2]
                    rj2 = r[j] * r[j]
                    if dx * dx + dy * dy + dz * dz < rj2:
                        buried = True
                        last = jj
                        break
                if not buried:
                    o[a] += 1
    return out
