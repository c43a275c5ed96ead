"""Statevector emulation of a Rydberg atom register under an annealing schedule.

Basis state ``s`` is an integer whose bit ``i`` is 1 when atom ``i`` is in the
Rydberg state. Bitstrings are written with character ``i`` for atom ``i``.

Hamiltonian (units of rad/us, distances in um)::

    H(t) = sum_i Omega(t)/2 X_i - sum_i delta_i(t) n_i + sum_{i<j} C6 / R_ij^6 n_i n_j
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from . import kernels
from .graph import InteractionGraph

log = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
NORM_TOLERANCE = 1e-6
RENORM_THRESHOLD = 1e-9


class CapacityError(ValueError):
    pass


class IntegrationError(RuntimeError):
    pass


@dataclass
class EmulatorConfig:
    c6: float = 5_420_159.0
    omega_max: float = TWO_PI * 1.0
    delta_initial: float = -TWO_PI * 4.0
    delta_final_max: float = TWO_PI * 2.5
    total_time: float = 4.0
    dt: float | None = None
    n_shots: int = 500
    seed: int = 0
    max_qubits: int = 20
    basis: str = "full"
    ramp_fraction: float = 0.15
    step_factor: float = 0.05

    def __post_init__(self):
        if not self.total_time > 0:
            raise ValueError("total_time must be positive")
        if self.dt is not None and not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n_shots < 1:
            raise ValueError("n_shots must be >= 1")
        if not self.delta_initial < 0 < self.delta_final_max:
            raise ValueError("need delta_initial < 0 < delta_final_max")
        if self.basis not in ("full", "blockade"):
            raise ValueError("basis must be 'full' or 'blockade'")
        if not 0 < self.ramp_fraction < 0.5:
            raise ValueError("ramp_fraction must be in (0, 0.5)")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Register:
    """Atom positions (um) and the blockade radius used to define edges."""

    positions: np.ndarray
    blockade_radius: float

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64).reshape(-1, 2)

    @classmethod
    def from_embedding(cls, emb) -> Register:
        return cls(emb.positions, emb.blockade_radius)

    @property
    def n(self) -> int:
        return len(self.positions)

    def distances(self) -> np.ndarray:
        return np.linalg.norm(self.positions[:, None, :] - self.positions[None, :, :], axis=-1)

    def interactions(self, c6: float) -> np.ndarray:
        d = self.distances()
        with np.errstate(divide="ignore"):
            v = c6 / d ** 6
        np.fill_diagonal(v, 0.0)
        return v

    def blockade_pairs(self) -> np.ndarray:
        adj = self.distances() < self.blockade_radius
        np.fill_diagonal(adj, False)
        return adj


@dataclass
class AnnealSchedule:
    """Piecewise-linear drive and per-atom detuning on shared breakpoints."""

    times: np.ndarray
    omega: np.ndarray
    delta: np.ndarray  # (n_breakpoints, n_atoms)
    weight_factors: np.ndarray | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.omega = np.asarray(self.omega, dtype=np.float64)
        self.delta = np.asarray(self.delta, dtype=np.float64)
        if self.delta.ndim == 1:
            self.delta = self.delta[:, None]
        if len(self.times) < 2 or np.any(np.diff(self.times) < 0) or self.times[0] != 0.0:
            raise ValueError("schedule breakpoints must start at 0 and be non-decreasing")
        if self.omega.shape != self.times.shape or self.delta.shape[0] != len(self.times):
            raise ValueError("waveform arrays must match the breakpoints")

    @property
    def total_time(self) -> float:
        return float(self.times[-1])

    @property
    def n_atoms(self) -> int:
        return self.delta.shape[1]

    def omega_at(self, t) -> np.ndarray:
        return np.interp(t, self.times, self.omega)

    def delta_at(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        out = np.empty((len(t), self.n_atoms))
        for i in range(self.n_atoms):
            out[:, i] = np.interp(t, self.times, self.delta[:, i])
        return out

    @classmethod
    def standard(cls, weights: Sequence[float], cfg: EmulatorConfig | None = None) -> AnnealSchedule:
        """Drive ramps up over the first ramp fraction and down over the last;
        detuning sweeps from ``delta_initial`` to ``delta_final_max * w_i / max w``
        in between.
        """
        cfg = cfg or EmulatorConfig()
        w = np.asarray(weights, dtype=np.float64)
        wmax = float(w.max()) if len(w) else 0.0
        factors = w / wmax if wmax > 0 else np.zeros_like(w)
        T, f = cfg.total_time, cfg.ramp_fraction
        times = np.array([0.0, f * T, (1.0 - f) * T, T])
        omega = np.array([0.0, cfg.omega_max, cfg.omega_max, 0.0])
        d0 = np.full(len(w), cfg.delta_initial)
        d1 = cfg.delta_final_max * factors
        return cls(times, omega, np.vstack([d0, d0, d1, d1]), factors)

    @classmethod
    def constant(cls, omega: float, delta: Sequence[float] | float, duration: float,
                 n_atoms: int = 1) -> AnnealSchedule:
        d = np.broadcast_to(np.asarray(delta, dtype=np.float64), (n_atoms,))
        return cls([0.0, duration], [omega, omega], np.vstack([d, d]))

    def check_anneal(self, cfg: EmulatorConfig) -> None:
        """Raise unless drive vanishes at both ends and detuning starts at ``delta_initial``."""
        if self.omega[0] != 0.0 or self.omega[-1] != 0.0:
            raise ValueError("anneal drive must vanish at t=0 and t=T")
        if not np.allclose(self.delta[0], cfg.delta_initial):
            raise ValueError("anneal detuning must start at delta_initial")

    def to_dict(self) -> dict:
        d = {"times": self.times.tolist(), "omega": self.omega.tolist(), "delta": self.delta.tolist()}
        if self.weight_factors is not None:
            d["weight_factors"] = np.asarray(self.weight_factors).tolist()
        return d

    @classmethod
    def from_dict(cls, data: dict) -> AnnealSchedule:
        return cls(data["times"], data["omega"], data["delta"], data.get("weight_factors"))


@dataclass
class Basis:
    """Computational basis states kept in the simulation and their bit-flip links."""

    n_qubits: int
    states: np.ndarray  # int64 bitmasks, sorted
    flip: np.ndarray  # (dim, n) int32: index of states[s] ^ (1 << i), -1 if excluded
    kind: str

    @property
    def dim(self) -> int:
        return len(self.states)

    def index_of(self, state: int) -> int:
        i = int(np.searchsorted(self.states, state))
        if i < self.dim and self.states[i] == state:
            return i
        raise KeyError(state)


def full_basis(n: int) -> Basis:
    states = np.arange(1 << n, dtype=np.int64)
    flip = (states[:, None] ^ (np.int64(1) << np.arange(n, dtype=np.int64))).astype(np.int32)
    return Basis(n, states, flip.reshape(len(states), n), "full")


def blockade_basis(blockade: np.ndarray) -> Basis:
    """States with no two excited atoms inside the blockade radius."""
    n = len(blockade)
    nbr = [sum(1 << j for j in np.flatnonzero(blockade[i])) for i in range(n)]
    states = [0]
    for i in range(n):
        # extend every state over atoms < i with atom i excited where allowed
        states += [s | (1 << i) for s in states if not (s & nbr[i])]
    states = np.array(sorted(states), dtype=np.int64)
    flipped = states[:, None] ^ (np.int64(1) << np.arange(n, dtype=np.int64))
    pos = np.searchsorted(states, flipped)
    pos_c = np.minimum(pos, len(states) - 1)
    ok = states[pos_c] == flipped
    flip = np.where(ok, pos_c, -1).astype(np.int32)
    return Basis(n, states, flip.reshape(len(states), n), "blockade")


def _bits(states: np.ndarray, n: int) -> np.ndarray:
    return ((states[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(np.float64)


def interaction_diagonal(basis: Basis, pair_energy: np.ndarray) -> np.ndarray:
    bits = _bits(basis.states, basis.n_qubits)
    return 0.5 * np.einsum("si,ij,sj->s", bits, pair_energy, bits, optimize=True)


def make_basis(register: Register, cfg: EmulatorConfig) -> Basis:
    if register.n > cfg.max_qubits:
        raise CapacityError(f"{register.n} atoms exceed the emulator cap of {cfg.max_qubits}")
    if cfg.basis == "full":
        return full_basis(register.n)
    return blockade_basis(register.blockade_pairs())


def build_hamiltonian(register: Register, schedule: AnnealSchedule, t: float,
                      cfg: EmulatorConfig | None = None, basis: Basis | None = None) -> sp.csr_matrix:
    """Sparse Hermitian H(t) in ``basis`` (full 2^N basis by default)."""
    cfg = cfg or EmulatorConfig()
    if register.n > cfg.max_qubits:
        raise CapacityError(f"{register.n} atoms exceed the emulator cap of {cfg.max_qubits}")
    basis = basis or full_basis(register.n)
    diag = interaction_diagonal(basis, register.interactions(cfg.c6))
    diag = diag - _bits(basis.states, basis.n_qubits) @ schedule.delta_at(t)[0]
    rows, cols = np.nonzero(basis.flip >= 0)
    targets = basis.flip[rows, cols]
    half = 0.5 * float(schedule.omega_at(t))
    off = sp.csr_matrix((np.full(len(rows), half), (rows, targets)), shape=(basis.dim, basis.dim))
    return (sp.diags(diag) + off).tocsr()


@dataclass
class Statevector:
    amplitudes: np.ndarray
    basis: Basis
    diagnostics: dict = field(default_factory=dict)

    @property
    def n_qubits(self) -> int:
        return self.basis.n_qubits

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        p = np.abs(self.amplitudes) ** 2
        return p / p.sum()

    def bitstring(self, index: int) -> str:
        return state_to_bitstring(int(self.basis.states[index]), self.n_qubits)

    def probability_of(self, bitstring: str) -> float:
        try:
            return float(self.probabilities()[self.basis.index_of(bitstring_to_state(bitstring))])
        except KeyError:
            return 0.0

    def most_probable(self) -> str:
        return self.bitstring(int(np.argmax(self.probabilities())))


def state_to_bitstring(state: int, n: int) -> str:
    return "".join("1" if (state >> i) & 1 else "0" for i in range(n))


def bitstring_to_state(bits: str) -> int:
    return sum(1 << i for i, c in enumerate(bits) if c == "1")


def initial_state(basis: Basis) -> np.ndarray:
    psi = np.zeros(basis.dim, dtype=np.complex128)
    psi[basis.index_of(0)] = 1.0
    return psi


def choose_dt(register: Register, schedule: AnnealSchedule, cfg: EmulatorConfig,
              basis: Basis, diag_span: float) -> float:
    """Step so that the largest rate times dt is at most ``step_factor``.

    The rate is the largest of the drive, the detuning and any pair
    interaction the basis can populate; the step is also kept inside the RK4
    stability region of the full diagonal.
    """
    v = register.interactions(cfg.c6)
    if basis.kind == "blockade":
        v = np.where(register.blockade_pairs(), 0.0, v)
    rate = max(float(np.abs(schedule.omega).max()), float(np.abs(schedule.delta).max()),
               float(v.max()) if v.size else 0.0, 1e-12)
    dt = cfg.step_factor / rate
    spectral = diag_span + 0.5 * float(np.abs(schedule.omega).max()) * register.n
    if spectral > 0:
        dt = min(dt, 2.0 / spectral)
    return dt


def evolve(register: Register, schedule: AnnealSchedule, cfg: EmulatorConfig | None = None,
           psi0: np.ndarray | None = None) -> Statevector:
    """Integrate the Schrodinger equation from the all-ground state.

    Fixed-step classical RK4 with the Hamiltonian frozen at each step's
    midpoint. The norm is restored whenever it drifts by more than 1e-9;
    a drift above 1e-6 in a single step raises ``IntegrationError``.
    """
    cfg = cfg or EmulatorConfig()
    if schedule.n_atoms != register.n:
        raise ValueError("schedule and register disagree on the number of atoms")
    basis = make_basis(register, cfg)
    if register.n >= 2:
        d = register.distances()
        rmin = float(d[~np.eye(register.n, dtype=bool)].min())
        if cfg.c6 / rmin ** 6 <= cfg.delta_final_max:
            log.warning("nearest-neighbour interaction %.3g does not exceed delta_final_max %.3g",
                        cfg.c6 / rmin ** 6, cfg.delta_final_max)
    interaction = interaction_diagonal(basis, register.interactions(cfg.c6))
    span = float(interaction.max()) + float(np.abs(schedule.delta).max()) * register.n
    T = schedule.total_time
    dt_max = cfg.dt if cfg.dt is not None else choose_dt(register, schedule, cfg, basis, span)
    nsteps = max(1, int(math.ceil(T / dt_max - 1e-12)))
    dt = T / nsteps
    t_mid = (np.arange(nsteps) + 0.5) * dt
    omegas = schedule.omega_at(t_mid)
    deltas = schedule.delta_at(t_mid)
    psi = initial_state(basis) if psi0 is None else np.array(psi0, dtype=np.complex128)
    max_drift, n_renorm, failed = kernels.rk4_evolve(
        psi, interaction, basis.states, basis.flip, omegas, deltas, dt,
        RENORM_THRESHOLD, NORM_TOLERANCE,
    )
    if failed >= 0:
        raise IntegrationError(
            f"norm drift {max_drift:.2e} at step {failed} (dt={dt:.3e}); use a smaller dt"
        )
    if n_renorm:
        log.debug("renormalised the state %d times (max drift %.2e)", n_renorm, max_drift)
    diag = {"dt": dt, "steps": nsteps, "max_norm_drift": float(max_drift),
            "renormalisations": int(n_renorm), "basis": basis.kind, "dim": basis.dim,
            "backend": kernels.BACKEND}
    return Statevector(psi, basis, diag)


def sample(psi: Statevector, n_shots: int, seed: int | None = 0) -> dict[str, int]:
    """Multinomial draw of measurement outcomes; keys sorted for stable output."""
    rng = np.random.default_rng(seed)
    counts = rng.multinomial(n_shots, psi.probabilities())
    hit = np.flatnonzero(counts)
    return dict(sorted((psi.bitstring(int(i)), int(counts[i])) for i in hit))


def cost_of_bitstring(bits: str | Sequence[int], g: InteractionGraph, alpha: float | None = None) -> float:
    """Penalised MWIS cost: minus selected weight plus ``alpha`` per violated edge."""
    x = np.array([int(c) for c in bits], dtype=np.float64)
    if len(x) != g.n:
        raise ValueError("bitstring length must equal the number of vertices")
    if alpha is None:
        alpha = 1.0 + float(g.weights.sum())
    violated = 0.5 * float(x @ g.adjacency.astype(np.float64) @ x)
    return float(-(g.weights @ x) + alpha * violated)


def run_request(request: dict) -> dict:
    """Serve a JSON-style emulation request {embedding, weights, config?, schedule?}."""
    from .lattice import Embedding

    cfg = EmulatorConfig(**request.get("config", {}))
    emb = Embedding.from_dict(request["embedding"])
    reg = Register.from_embedding(emb)
    if "schedule" in request:
        schedule = AnnealSchedule.from_dict(request["schedule"])
    else:
        schedule = AnnealSchedule.standard(request["weights"], cfg)
    psi = evolve(reg, schedule, cfg)
    samples = sample(psi, cfg.n_shots, cfg.seed)
    return {"samples": samples, "diagnostics": psi.diagnostics, "config": cfg.to_dict(),
            "schedule": schedule.to_dict(), "vertices": emb.vertices}
