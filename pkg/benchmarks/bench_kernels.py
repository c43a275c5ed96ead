"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--qubits 12] [--steps 200] [--atoms 2000]

Both backends are fed identical inputs; the script checks their outputs
agree before reporting timings.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from qdock import _pykernels
from qdock.emulator import EmulatorConfig, Register, full_basis, interaction_diagonal
from qdock.lattice import make_lattice
from qdock.sasa import _neighbor_lists, fibonacci_sphere

try:
    from qdock import _ckernels
except ImportError:
    _ckernels = None


def rk4_inputs(n_qubits: int, steps: int):
    lat = make_lattice("triangular", 7.0, rows=4)
    reg = Register(lat.positions[:n_qubits], 8.4)
    basis = full_basis(n_qubits)
    diag = interaction_diagonal(basis, reg.interactions(EmulatorConfig().c6))
    rng = np.random.default_rng(0)
    omegas = np.full(steps, 2 * np.pi)
    deltas = rng.uniform(-10, 10, size=(steps, n_qubits))
    psi = np.zeros(basis.dim, dtype=np.complex128)
    psi[0] = 1.0
    return psi, diag, basis.states, basis.flip, omegas, deltas, 1e-3, 1e-9, 1e-6


def sasa_inputs(n_atoms: int):
    rng = np.random.default_rng(0)
    side = (n_atoms * 20.0) ** (1 / 3)
    coords = rng.uniform(0, side, size=(n_atoms, 3))
    radii = np.full(n_atoms, 1.7 + 1.4)
    indptr, indices = _neighbor_lists(coords, radii)
    return coords, radii, fibonacci_sphere(960), indptr, indices


def bench(label, fn, args, copy_first=False, repeat=3):
    def call():
        a = list(args)
        if copy_first:
            a[0] = a[0].copy()
        return fn(*a)
    result = call()
    best = min(timeit.repeat(call, number=1, repeat=repeat))
    print(f"  {label:8s} {best * 1e3:10.2f} ms")
    return result, best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", type=int, default=12)
    ap.add_argument("--steps", type=int, default=200)
    ap.add_argument("--atoms", type=int, default=2000)
    a = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not built; only the numpy backend is available")

    print(f"rk4_evolve: {a.qubits} qubits, {a.steps} steps")
    args = rk4_inputs(a.qubits, a.steps)
    backends = [("numpy", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    states, times = {}, {}
    for name, mod in backends:
        psi = args[0].copy()
        mod.rk4_evolve(psi, *args[1:])
        states[name] = psi
        _, times[name] = bench(name, mod.rk4_evolve, args, copy_first=True)
    if _ckernels:
        print(f"  max |diff| {np.abs(states['numpy'] - states['cython']).max():.2e}, "
              f"speedup {times['numpy'] / times['cython']:.1f}x")

    print(f"exposed_counts: {a.atoms} atoms, 960 sphere points")
    args = sasa_inputs(a.atoms)
    out, times = {}, {}
    for name, mod in backends:
        out[name], times[name] = bench(name, mod.exposed_counts, args, repeat=1)
    if _ckernels:
        same = np.array_equal(np.asarray(out["numpy"]), np.asarray(out["cython"]))
        print(f"  identical counts: {same}, speedup {times['numpy'] / times['cython']:.1f}x")


if __name__ == "__main__":
    main()
