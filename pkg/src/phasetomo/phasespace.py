"""Dense N-dimensional operators and direct evaluation of phase-space distributions.

Conventions
-----------
Position states ``|q>`` are the computational basis, ``q = 0..N-1``.
Momentum states are the columns of the Fourier matrix,
``<q|p> = exp(2 pi i p q / N) / sqrt(N)``, so that

* ``U|q> = |q+1>`` and ``U|p> = exp(-2 pi i p / N)|p>``
* ``V|p> = |p+1>`` and ``V|q> = exp(2 pi i q / N)|q>``
* ``R|n> = |-n mod N>``

The Wigner function lives on a ``2N x 2N`` lattice; Kirkwood and Husimi
distributions on the ``N x N`` torus grid.
"""

from __future__ import annotations

import enum
import functools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
import scipy.linalg

from ._backend import kernels
from .errors import (
    DegenerateGround,
    DimensionMismatch,
    NonHermitianInput,
    NonPSDInput,
    PointOutOfRange,
)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
NORM_TOL = 1e-12
COHERENT_TERM_CUTOFF = 1e-18


@dataclass(frozen=True)
class HilbertDim:
    """Qubit count ``n`` and dimension ``N = 2**n`` of a system register."""

    n: int

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ValueError(f"qubit count must be an integer >= 1, got {self.n!r}")

    @property
    def N(self) -> int:
        return 1 << int(self.n)

    @classmethod
    def from_dimension(cls, N: int) -> "HilbertDim":
        N = int(N)
        n = N.bit_length() - 1
        if N < 2 or (1 << n) != N:
            raise DimensionMismatch(f"dimension must be a power of two >= 2, got {N}")
        return cls(n)


class Grid(enum.Enum):
    WIGNER = "wigner"  # 2N x 2N
    TORUS = "torus"  # N x N

    def modulus(self, N: int) -> int:
        return 2 * N if self is Grid.WIGNER else N


@dataclass(frozen=True)
class PhasePoint:
    q: int
    p: int
    grid: Grid = Grid.WIGNER

    def check(self, N: int) -> "PhasePoint":
        m = self.grid.modulus(N)
        if not (0 <= self.q < m and 0 <= self.p < m):
            raise PointOutOfRange(f"({self.q}, {self.p}) is outside the {m}x{m} {self.grid.value} grid")
        return self


@dataclass(frozen=True)
class CatParams:
    """Integers (a, b) of the quantized linear torus map."""

    a: int
    b: int

    def classical_matrix(self) -> np.ndarray:
        m = np.array([[self.b, 1], [self.a * self.b - 1, self.a]], dtype=np.int64)
        assert round(np.linalg.det(m)) == 1
        return m

    def reduced(self, modulus: int) -> "CatParams":
        return CatParams(self.a % modulus, self.b % modulus)


@dataclass(frozen=True)
class LineSpec:
    """The lattice line ``n1*q + n2*p = n3 (mod 2N)``."""

    n1: int
    n2: int
    n3: int

    def __post_init__(self):
        if self.n1 == 0 and self.n2 == 0:
            raise ValueError("line needs (n1, n2) != (0, 0)")

    def reduced(self, modulus: int) -> "LineSpec":
        return LineSpec(self.n1 % modulus, self.n2 % modulus, self.n3 % modulus)

    def points(self, modulus: int) -> list[tuple[int, int]]:
        """Brute-force enumeration of the lattice points on the line."""
        return [
            (q, p)
            for q in range(modulus)
            for p in range(modulus)
            if (self.n1 * q + self.n2 * p - self.n3) % modulus == 0
        ]


class BasicOperators(NamedTuple):
    U: np.ndarray
    V: np.ndarray
    R: np.ndarray
    FT: np.ndarray


class HarperSpectrum(NamedTuple):
    energies: np.ndarray
    vectors: np.ndarray

    @property
    def ground(self) -> np.ndarray:
        return self.vectors[:, 0]

    @property
    def gap(self) -> float:
        return float(self.energies[1] - self.energies[0])


def _frozen(a):
    a.setflags(write=False)
    return a


def fourier_matrix(N: int) -> np.ndarray:
    """``FT[k, q] = exp(2 pi i k q / N) / sqrt(N)``; column q is the momentum state |q>."""
    k = np.arange(N)
    return np.exp(2j * np.pi * np.outer(k, k) / N) / np.sqrt(N)


@functools.lru_cache(maxsize=None)
def _basic(n: int) -> BasicOperators:
    N = 1 << n
    k = np.arange(N)
    U = np.zeros((N, N), dtype=complex)
    U[(k + 1) % N, k] = 1.0
    V = np.diag(np.exp(2j * np.pi * k / N))
    R = np.zeros((N, N), dtype=complex)
    R[(-k) % N, k] = 1.0
    return BasicOperators(*(_frozen(m) for m in (U, V, R, fourier_matrix(N))))


def build_basic_operators(dim: HilbertDim) -> BasicOperators:
    """Translations U, V, reflection R and the Fourier matrix for dimension N.

    The returned arrays are cached and read-only.
    """
    return _basic(int(dim.n))


def translation(dim: HilbertDim, q: int, p: int) -> np.ndarray:
    """Phase-space translation ``T(q, p) = U^q V^p exp(i pi p q / N)``.

    The powers use ``q, p mod N``; the phase uses the representatives as given.
    """
    N = dim.N
    k = np.arange(N)
    T = np.zeros((N, N), dtype=complex)
    T[(k + q) % N, k] = np.exp(2j * np.pi * (p % N) * k / N)
    return T * np.exp(1j * np.pi * p * q / N)


def phase_point(dim: HilbertDim, q: int, p: int) -> np.ndarray:
    """Phase-point operator ``A(q, p) = U^q R V^{-p} exp(i pi p q / N)`` (Hermitian and unitary)."""
    N = dim.N
    PhasePoint(q, p, Grid.WIGNER).check(N)
    k = np.arange(N)
    A = np.zeros((N, N), dtype=complex)
    A[(q - k) % N, k] = np.exp(-2j * np.pi * p * k / N)
    return A * np.exp(1j * np.pi * p * q / N)


def harper_hamiltonian(dim: HilbertDim) -> np.ndarray:
    U, V, _, _ = build_basic_operators(dim)
    return 2 * np.eye(dim.N) - (U + U.conj().T) / 2 - (V + V.conj().T) / 2


@functools.lru_cache(maxsize=None)
def _harper(n: int):
    dim = HilbertDim(n)
    H = harper_hamiltonian(dim)
    energies, vectors = np.linalg.eigh(H)
    for j in range(vectors.shape[1]):
        v = vectors[:, j]
        vectors[:, j] = v * np.exp(-1j * np.angle(v[np.argmax(np.abs(v))]))
    return _frozen(H), HarperSpectrum(_frozen(energies), _frozen(vectors))


def harper_system(dim: HilbertDim) -> tuple[np.ndarray, HarperSpectrum]:
    """Harper Hamiltonian ``2 - (U+U^dag)/2 - (V+V^dag)/2`` and its exact spectrum.

    Each eigenvector has its largest-magnitude amplitude made real and positive.

    Raises
    ------
    DegenerateGround
        If ``E1 - E0 < 1e-12``.
    """
    H, spectrum = _harper(int(dim.n))
    if spectrum.gap < 1e-12:
        raise DegenerateGround(f"Harper ground gap {spectrum.gap:.3e} at N={dim.N}")
    return H, spectrum


def harper_ground(dim: HilbertDim) -> np.ndarray:
    return harper_system(dim)[1].ground


def coherent_state(dim: HilbertDim, q: int, p: int) -> np.ndarray:
    """Discrete coherent state ``T(q, p)|Phi_0>``."""
    return translation(dim, q, p) @ harper_ground(dim)


def kick_phases(dim: HilbertDim, gamma: float) -> np.ndarray:
    x = np.arange(dim.N)
    return np.exp(-1j * gamma * dim.N * np.cos(2 * np.pi * x / dim.N))


def kicked_map(dim: HilbertDim, gamma: float) -> np.ndarray:
    """Kicked Harper map ``M FT^dag K FT`` with equal potential and kinetic kicks."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    FT = build_basic_operators(dim).FT
    kick = kick_phases(dim, gamma)
    return (kick[:, None] * FT.conj().T) @ (kick[:, None] * FT)


def shear_position(dim: HilbertDim, a: int) -> np.ndarray:
    """Diagonal kick ``V_a|n> = exp(-2 pi i n^2 (1-a) / 2N)|n>`` (returned as a vector)."""
    n = np.arange(dim.N)
    return np.exp(-2j * np.pi * n**2 * (1 - a) / (2 * dim.N))


def shear_momentum(dim: HilbertDim) -> np.ndarray:
    """Free evolution ``T|k> = exp(-2 pi i k^2 / 2N)|k>`` in the momentum basis."""
    FT = build_basic_operators(dim).FT
    k = np.arange(dim.N)
    return (FT * np.exp(-2j * np.pi * k**2 / (2 * dim.N))) @ FT.conj().T


def cat_map(dim: HilbertDim, params: CatParams) -> np.ndarray:
    """Quantized cat map transporting the Wigner function along :func:`cat_classical_map`.

    Built as ``V_a T V_b``; with this ordering
    ``W[U rho U^dag](cat_classical_map(x)) = W[rho](x)`` on the whole 2N grid.
    """
    Ta = shear_momentum(dim)
    return shear_position(dim, params.a)[:, None] * Ta * shear_position(dim, params.b)[None, :]


def cat_classical_map(point, params: CatParams, modulus: int) -> tuple[int, int]:
    """``(q', p') -> (b q' + p', (ab - 1) q' + a p') mod modulus``."""
    q, p = point
    a, b = params.a, params.b
    return (b * q + p) % modulus, ((a * b - 1) * q + a * p) % modulus


def harper_classical_map(point, gamma: float) -> tuple[float, float]:
    """One step of the classical kicked Harper map on the unit torus."""
    Q, P = point
    Q2 = (Q - gamma * np.sin(2 * np.pi * P)) % 1.0
    P2 = (P + gamma * np.sin(2 * np.pi * Q2)) % 1.0
    return Q2, P2


def harper_classical_energy(point) -> float:
    Q, P = point
    return 0.5 * (np.sin(np.pi * Q) ** 2 + np.sin(np.pi * P) ** 2)


def coherent_sum_cutoff(N: int, q: int, cutoff: float = COHERENT_TERM_CUTOFF) -> int:
    """Smallest J >= 1 such that every |j| = J + 1 term is below ``cutoff``."""
    n = np.arange(N)
    J = 1
    while True:
        j = J + 1
        worst = max(
            np.exp(-np.pi / N * np.min((N * s * j - q + n) ** 2)) for s in (1, -1)
        )
        if worst < cutoff:
            return J
        J += 1


def continuous_coherent(
    dim: HilbertDim, q: int, p: int, j_max: int | None = None, normalize: bool = True
) -> np.ndarray:
    """Periodized Gaussian coherent state ``|q, p>_c`` (truncated theta-function sum)."""
    N = dim.N
    PhasePoint(q, p, Grid.TORUS).check(N)
    J = coherent_sum_cutoff(N, q) if j_max is None else int(j_max)
    n = np.arange(N)
    amp = np.zeros(N, dtype=complex)
    for j in range(-J, J + 1):
        amp += np.exp(-np.pi / N * (N * j - q + n) ** 2) * np.exp(
            -2j * np.pi / N * p * (N * j + q / 2 - n)
        )
    amp *= (2 / N) ** 0.25 * np.exp(np.pi / (2 * N) * (q * q + p * p))
    if normalize:
        amp /= np.linalg.norm(amp)
    return amp


# --- states and validation -------------------------------------------------


def validate_density(rho, N: int | None = None) -> np.ndarray:
    """Return ``rho`` as a complex array after checking it is a density operator.

    Raises
    ------
    NonHermitianInput
        Wrong shape, not Hermitian within 1e-12, or trace not 1 within 1e-12.
    NonPSDInput
        Smallest eigenvalue below -1e-10.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise NonHermitianInput(f"density operator must be square, got shape {rho.shape}")
    if N is not None and rho.shape[0] != N:
        raise DimensionMismatch(f"expected a {N}x{N} density operator, got {rho.shape}")
    if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
        raise NonHermitianInput("density operator is not Hermitian")
    if abs(np.trace(rho) - 1) > TRACE_TOL:
        raise NonHermitianInput(f"density operator has trace {np.trace(rho).real:.15g}")
    lo = np.linalg.eigvalsh(rho)[0]
    if lo < -PSD_TOL:
        raise NonPSDInput(f"density operator has eigenvalue {lo:.3e}")
    return rho


def validate_state(psi, N: int | None = None) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    if psi.ndim != 1 or (N is not None and psi.shape[0] != N):
        raise DimensionMismatch(f"expected a length-{N} state vector, got shape {psi.shape}")
    norm = np.linalg.norm(psi)
    if abs(norm - 1) > NORM_TOL:
        raise ValueError(f"state has norm {norm:.15g}, expected 1")
    return psi


def pure_density(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def random_density(N: int, rank: int | None = None, rng=None) -> np.ndarray:
    """Random density matrix of the given rank (Ginibre construction)."""
    rng = np.random.default_rng(rng)
    rank = N if rank is None else rank
    X = rng.normal(size=(N, rank)) + 1j * rng.normal(size=(N, rank))
    rho = X @ X.conj().T
    rho = (rho + rho.conj().T) / 2
    return rho / np.trace(rho).real


def random_state(N: int, rng=None) -> np.ndarray:
    rng = np.random.default_rng(rng)
    psi = rng.normal(size=N) + 1j * rng.normal(size=N)
    return psi / np.linalg.norm(psi)


def unitary_eig(W: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenphases in [0, 1) and orthonormal eigenvectors of a unitary matrix.

    Uses the complex Schur form, which is diagonal for normal matrices, so
    degenerate eigenspaces still come back orthonormal.
    """
    T, Z = scipy.linalg.schur(W, output="complex")
    phases = (np.angle(np.diag(T)) / (2 * np.pi)) % 1.0
    phases[phases >= 1.0] = 0.0  # -tiny % 1.0 rounds to 1.0
    return phases, Z


# --- distributions ---------------------------------------------------------


def wigner_direct(rho, q: int, p: int) -> float:
    """``W(q, p) = Tr[A(q, p) rho] / 2N`` by an explicit dense trace."""
    rho = validate_density(rho)
    dim = HilbertDim.from_dimension(rho.shape[0])
    tr = np.trace(phase_point(dim, q, p) @ rho)
    if abs(tr.imag) > 1e-10:
        raise NonHermitianInput(f"Tr[A rho] has imaginary part {tr.imag:.3e}")
    return float(tr.real) / (2 * dim.N)


def wigner_grid(rho) -> np.ndarray:
    """All ``2N x 2N`` Wigner values, indexed ``[q, p]``, via the compiled kernel."""
    rho = np.ascontiguousarray(validate_density(rho))
    return kernels.wigner_grid(rho)


def kirkwood_direct(rho, q: int, p: int) -> complex:
    """``K(q, p) = <q|p><p|rho|q>`` (the ``1/N`` is absorbed since ``|<p|q>|^2 = 1/N``)."""
    rho = np.asarray(rho, dtype=complex)
    dim = HilbertDim.from_dimension(rho.shape[0])
    PhasePoint(q, p, Grid.TORUS).check(dim.N)
    mom = build_basic_operators(dim).FT[:, p]
    return complex(mom[q] * (mom.conj() @ rho[:, q]))


def kirkwood_grid(rho) -> np.ndarray:
    """All ``N x N`` Kirkwood values indexed ``[q, p]``."""
    rho = np.asarray(rho, dtype=complex)
    FT = build_basic_operators(HilbertDim.from_dimension(rho.shape[0])).FT
    # <p|rho|q> for all (p, q) is (FT^dag rho)[p, q]
    return FT * (FT.conj().T @ rho).T


def husimi_direct(rho, alpha) -> float:
    """``H(alpha) = <alpha|rho|alpha> / N``."""
    rho = np.asarray(rho, dtype=complex)
    alpha = validate_state(alpha, rho.shape[0])
    return float(np.real(alpha.conj() @ rho @ alpha)) / rho.shape[0]


def husimi_grid(rho) -> np.ndarray:
    """Husimi values on the ``N x N`` grid of coherent states ``T(q, p)|Phi_0>``."""
    rho = np.asarray(rho, dtype=complex)
    dim = HilbertDim.from_dimension(rho.shape[0])
    out = np.empty((dim.N, dim.N))
    for q in range(dim.N):
        for p in range(dim.N):
            out[q, p] = husimi_direct(rho, coherent_state(dim, q, p))
    return out
