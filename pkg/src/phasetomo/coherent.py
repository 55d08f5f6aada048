"""Coherent-state preparation by phase-estimation filtering of the kicked Harper map.

The Harper ground state |Phi_0> is (close to) the eigenvector u_0 of the
kicked map ``U(gamma)`` for small gamma. Starting from a cheap "square
state", phase estimation on ``U(gamma)`` followed by post-selection on the
counting outcome of u_0 projects onto a narrow band of eigenphases around
the ground phase. Repeating the filter sharpens the state, and a final
phase-space translation moves it to any lattice point.

Eigenphases follow ``U|u> = exp(2 pi i phi)|u>`` with ``phi`` in [0, 1).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import FilterFailed, InvalidBudget
from .phasespace import (
    HilbertDim,
    build_basic_operators,
    harper_ground,
    kicked_map,
    translation,
    unitary_eig,
    validate_state,
)
from .simulator import (
    Hadamard,
    InverseQFT,
    ProbeCtrl,
    RegisterLayout,
    RegisterUnitary,
    derive_seed,
    init_machine,
    measure_register,
    register_probabilities,
    register_slice,
    run_circuit,
)

COUNT, SYSTEM = "count", "system"
LINEAR_REGIME = 0.6  # N * gamma below this keeps the kicked map regular
POLICIES = ("exact", "semiclassical", "hybrid")


# --- square state ------------------------------------------------------------


@dataclass(frozen=True)
class SquareStateSpec:
    n: int
    w: int
    s: int

    @property
    def support(self) -> list[int]:
        N = 1 << self.n
        return [(self.s + j) % N for j in range(self.w)]


def square_spec(dim: HilbertDim) -> SquareStateSpec:
    if dim.n < 2:
        raise ValueError("square state needs n >= 2")
    w = 1 << (dim.n // 2)
    return SquareStateSpec(dim.n, w, 1 - w // 2)


def square_state(dim: HilbertDim) -> tuple[np.ndarray, SquareStateSpec]:
    """Uniform superposition of the ``w = 2^floor(n/2)`` positions ``s .. s+w-1`` around 0."""
    spec = square_spec(dim)
    psi = np.zeros(dim.N, dtype=complex)
    psi[spec.support] = 1 / math.sqrt(spec.w)
    return psi, spec


def square_state_gates(dim: HilbertDim, register: str = SYSTEM) -> list:
    """Hadamards on the low qubits, then a cyclic shift by ``s``."""
    spec = square_spec(dim)
    U = build_basic_operators(dim).U
    gates = [Hadamard((register, b)) for b in range(dim.n // 2)]
    gates.append(RegisterUnitary(register, np.linalg.matrix_power(U, spec.s % dim.N)))
    return gates


# --- configuration -------------------------------------------------------------


def counting_qubits(n: int, epsilon: float) -> int:
    """``t = ceil(n + log2(2 + 1/(2 eps)))``."""
    return math.ceil(n + math.log2(2 + 1 / (2 * epsilon)) - 1e-12)


def resolution_qubits(delta_phi: float) -> int:
    """Counting qubits needed to resolve an eigenphase gap: ``ceil(log2(1/dphi))``."""
    return math.ceil(math.log2(1 / delta_phi) - 1e-12)


@dataclass(frozen=True)
class PEConfig:
    n: int
    t: int
    epsilon: float
    gamma: float
    power_policy: str = "exact"
    threshold: int | None = None
    linear_regime: bool = True
    n_t: int | None = None

    @property
    def dim(self) -> HilbertDim:
        return HilbertDim(self.n)

    @property
    def hybrid_threshold(self) -> int:
        return self.n - 4 if self.threshold is None else self.threshold


def default_gamma(N: int) -> float:
    return 0.5 / N


def pe_config(
    n: int,
    epsilon: float = 0.25,
    gamma: float | None = None,
    power_policy: str = "exact",
    threshold: int | None = None,
    t: int | None = None,
    gap: float | None = None,
) -> PEConfig:
    """Phase-estimation settings for an n-qubit system.

    Raises
    ------
    InvalidBudget
        ``epsilon`` outside (0, 1), ``gamma <= 0``, an unknown policy, or an
        explicit ``t`` below the budget's requirement.
    """
    if not 0 < epsilon < 1:
        raise InvalidBudget(f"epsilon must lie in (0, 1), got {epsilon}")
    N = 1 << n
    gamma = default_gamma(N) if gamma is None else float(gamma)
    if not gamma > 0:
        raise InvalidBudget(f"gamma must be > 0, got {gamma}")
    if power_policy not in POLICIES:
        raise InvalidBudget(f"unknown power policy {power_policy!r}")
    need = counting_qubits(n, epsilon)
    if t is None:
        t = need
    elif t < need:
        raise InvalidBudget(f"t={t} counting qubits is below the {need} required for epsilon={epsilon}")
    n_t = None if gap is None else resolution_qubits(gap)
    return PEConfig(n, t, float(epsilon), gamma, power_policy, threshold, N * gamma < LINEAR_REGIME, n_t)


# --- powers ------------------------------------------------------------------


@functools.lru_cache(maxsize=64)
def _ladder(n: int, gamma: float, t: int, policy: str, threshold: int) -> tuple:
    dim = HilbertDim(n)
    out = []
    for j in range(t):
        if j == 0:
            P, mode = kicked_map(dim, gamma), "exact"
        elif policy == "exact":
            P, mode = out[-1][0] @ out[-1][0], "exact"
        elif policy == "semiclassical" or j <= threshold:
            P, mode = kicked_map(dim, gamma * 2**j), "semiclassical"
        else:
            P, mode = out[-1][0] @ out[-1][0], "product"
        P.setflags(write=False)
        out.append((P, mode))
    return tuple(out)


def power_ladder(dim: HilbertDim, gamma: float, t: int, policy: str = "exact", threshold: int | None = None):
    """Approximants of ``U(gamma)^(2^j)`` for ``j < t`` with the mode each was built by."""
    if policy not in POLICIES:
        raise InvalidBudget(f"unknown power policy {policy!r}")
    th = dim.n - 4 if threshold is None else threshold
    return _ladder(int(dim.n), float(gamma), int(t), policy, int(th))


def approx_power(dim: HilbertDim, gamma: float, j: int, policy: str = "exact", threshold: int | None = None):
    """``U(gamma)^(2^j)`` under ``policy``; returns ``(matrix, mode)``.

    exact: repeated squaring. semiclassical: ``U(2^j gamma)``. hybrid:
    semiclassical for ``j <= threshold`` (default n - 4), then squares of the
    previous approximant.
    """
    if j < 0:
        raise ValueError("exponent must be >= 0")
    return power_ladder(dim, gamma, j + 1, policy, threshold)[j]


# --- spectra -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpectralDiagnostics:
    phases: np.ndarray
    vectors: np.ndarray
    ground_index: int
    gap: float
    overlaps: np.ndarray  # |c_alpha|^2 of the reference state

    @property
    def ground_phase(self) -> float:
        return float(self.phases[self.ground_index])

    @property
    def ground_vector(self) -> np.ndarray:
        return self.vectors[:, self.ground_index]


@functools.lru_cache(maxsize=256)
def _kicked_spectrum(n: int, gamma: float):
    dim = HilbertDim(n)
    phases, vecs = unitary_eig(kicked_map(dim, gamma))
    i0 = int(np.argmax(np.abs(vecs.conj().T @ harper_ground(dim))))
    d = np.abs(phases - phases[i0])
    d = np.minimum(d, 1 - d)
    d[i0] = np.inf
    return phases, vecs, i0, float(d.min())


def spectral_diagnostics(dim: HilbertDim, gamma: float, reference=None) -> SpectralDiagnostics:
    """Eigenphases of ``U(gamma)``, its ground eigenvector and gap, and the reference's weights.

    The ground eigenvector is the one overlapping most with |Phi_0>; the
    reference defaults to the square state.
    """
    phases, vecs, i0, gap = _kicked_spectrum(int(dim.n), float(gamma))
    ref = square_state(dim)[0] if reference is None else np.asarray(reference, dtype=complex)
    c2 = np.abs(vecs.conj().T @ ref) ** 2
    return SpectralDiagnostics(phases, vecs, i0, gap, c2)


def phase_gap(dim: HilbertDim, gamma: float) -> float:
    return _kicked_spectrum(int(dim.n), float(gamma))[3]


# --- phase estimation ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FilterOutcome:
    k: int
    phase_estimate: float
    success: bool
    output_state: np.ndarray
    outcome_probability: float
    target: int
    target_probability: float


def pe_layout(config: PEConfig) -> RegisterLayout:
    return RegisterLayout([(COUNT, config.t), (SYSTEM, config.n)])


def pe_gates(config: PEConfig, unitary=None) -> list:
    """Hadamards, controlled powers (count qubit j drives the 2^j-th power), inverse QFT."""
    dim = config.dim
    if unitary is None:
        powers = [P for P, _ in power_ladder(dim, config.gamma, config.t, config.power_policy, config.threshold)]
    else:
        powers = [np.asarray(unitary, dtype=complex)]
        for _ in range(1, config.t):
            powers.append(powers[-1] @ powers[-1])
    gates = [Hadamard((COUNT, j)) for j in range(config.t)]
    gates += [ProbeCtrl((COUNT, j), (RegisterUnitary(SYSTEM, P),)) for j, P in enumerate(powers)]
    gates.append(InverseQFT(COUNT))
    return gates


def pe_state(input_state, config: PEConfig, unitary=None):
    """Machine state right before the counting register is measured."""
    psi = validate_state(input_state, 1 << config.n)
    machine = init_machine(pe_layout(config), {SYSTEM: psi})
    return run_circuit(machine, pe_gates(config, unitary))


def target_peak(config: PEConfig, unitary=None, reference=None) -> int:
    """Counting outcome of the ground eigenvector: the most probable one when that eigenvector is the input.

    The ground eigenvector is the eigenvector of the map overlapping most with
    ``reference`` (default |Phi_0>).
    """
    return _target(config, unitary, reference)[0]


def _target(config, unitary, reference):
    dim = config.dim
    if unitary is None and reference is None:
        return _cached_target(config)
    ref = harper_ground(dim) if reference is None else np.asarray(reference, dtype=complex)
    W = kicked_map(dim, config.gamma) if unitary is None else np.asarray(unitary, dtype=complex)
    phases, vecs = unitary_eig(W)
    i0 = int(np.argmax(np.abs(vecs.conj().T @ ref)))
    probs = register_probabilities(pe_state(vecs[:, i0], config, unitary), COUNT)
    return int(np.argmax(probs)), float(phases[i0])


@functools.lru_cache(maxsize=64)
def _cached_target(config: PEConfig):
    sd = spectral_diagnostics(config.dim, config.gamma)
    probs = register_probabilities(pe_state(sd.ground_vector, config), COUNT)
    return int(np.argmax(probs)), sd.ground_phase


def rounded_ground_bin(config: PEConfig) -> int:
    """``round(phi_0 * 2^t) mod 2^t``: the oracle cross-check for :func:`target_peak`."""
    T = 1 << config.t
    return int(round(spectral_diagnostics(config.dim, config.gamma).ground_phase * T)) % T


class _PECache:
    """Pre-measurement states keyed by input bytes; the filter trajectory is deterministic
    along successful rounds, so the same few states recur across retries."""

    def __init__(self, size=16):
        self.size = size
        self.store: dict = {}

    def get(self, psi, config, unitary):
        if unitary is not None:
            return pe_state(psi, config, unitary)
        key = (np.asarray(psi, dtype=complex).tobytes(), config)
        if key not in self.store:
            if len(self.store) >= self.size:
                self.store.pop(next(iter(self.store)))
            self.store[key] = pe_state(psi, config)
        return self.store[key]


_cache = _PECache()


def phase_estimation_filter(
    input_state, config: PEConfig, seed: int, unitary=None, reference=None
) -> FilterOutcome:
    """One phase-estimation run with a measured counting register.

    ``unitary`` replaces the kicked map (its powers are then exact). Success
    means the measured k equals the target peak of the ground eigenvector.
    """
    machine = _cache.get(input_state, config, unitary)
    target = _target(config, unitary, reference)[0]
    probs = register_probabilities(machine, COUNT)
    k, _, prob = measure_register(machine, COUNT, seed)
    out = register_slice(machine, COUNT, k)
    out = out / np.linalg.norm(out)
    T = 1 << config.t
    return FilterOutcome(k, k / T, k == target, out, prob, target, float(probs[target] / probs.sum()))


def success_frequency(input_state, config: PEConfig, runs: int, seed: int) -> tuple[float, float]:
    """Empirical success frequency over ``runs`` seeded filters and the exact success probability."""
    hits = 0
    exact = 0.0
    for i in range(runs):
        out = phase_estimation_filter(input_state, config, derive_seed(seed, i))
        hits += out.success
        exact = out.target_probability
    return hits / runs, exact


# --- preparation ---------------------------------------------------------------


@dataclass
class PrepStats:
    rounds: int
    success_probabilities: list[float] = field(default_factory=list)
    overlaps: list[float] = field(default_factory=list)
    initial_overlap: float = 0.0
    final_overlap: float = 0.0
    attempts: int = 0
    outcomes: list[int] = field(default_factory=list)
    states: list[np.ndarray] = field(default_factory=list, repr=False)

    def as_json(self) -> dict:
        return {
            "rounds": self.rounds,
            "success_probabilities": list(self.success_probabilities),
            "overlaps": list(self.overlaps),
            "initial_overlap": self.initial_overlap,
            "final_overlap": self.final_overlap,
            "attempts": self.attempts,
            "outcomes": list(self.outcomes),
        }


def prepare_coherent(
    dim: HilbertDim, q: int, p: int, config: PEConfig, rounds: int, seed: int, max_attempts: int = 50
) -> tuple[np.ndarray, PrepStats]:
    """Approximate coherent state ``T(q, p)|Phi_0>``.

    Each attempt starts from a fresh square state and applies ``rounds``
    filters, each post-selected on the target peak; a miss abandons the
    attempt. The final state is translated by ``T(q, p)``. Overlaps are
    amplitudes ``|<Phi_0|psi>|`` after each round (before translation, which
    leaves them unchanged).

    Raises
    ------
    FilterFailed
        No attempt succeeded within ``max_attempts``.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    if config.n != dim.n:
        raise ValueError(f"config is for n={config.n}, dimension has n={dim.n}")
    phi0 = harper_ground(dim)
    start = square_state(dim)[0]
    for attempt in range(max_attempts):
        stats = PrepStats(rounds, initial_overlap=float(abs(np.vdot(phi0, start))), attempts=attempt + 1)
        psi = start
        for r in range(rounds):
            out = phase_estimation_filter(psi, config, derive_seed(seed, attempt, r))
            if not out.success:
                break
            psi = out.output_state
            stats.success_probabilities.append(out.target_probability)
            stats.overlaps.append(float(abs(np.vdot(phi0, psi))))
            stats.outcomes.append(out.k)
            stats.states.append(psi)
        else:
            stats.final_overlap = stats.overlaps[-1]
            return translation(dim, q, p) @ psi, stats
    raise FilterFailed(max_attempts)
