"""Programmable scattering circuits for Wigner, Kirkwood and Husimi values.

Every circuit has the same outer shape: a probe qubit in |0>, a Hadamard,
a probe-controlled operation ``G`` that acts on program registers and the
system, and a final Hadamard. The probe then satisfies
``sz - i sy = Tr[G (program x rho)]``. The program registers only ever act
as controls (or as swap partners), so they select *which* phase-space value
the fixed circuit reports.

Wigner programs live on two registers of dimension 2N (n + 1 qubits each).
A program state with support on K^2 grid points gives
``sz = (2N / K^2) * sum_{support} W``, and every average helper converts the
readout back into the plain sum of W over the support.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyRegion, NoOddCoefficient, NotAxisAligned, PointOutOfRange
from .phasespace import (
    CatParams,
    Grid,
    HilbertDim,
    LineSpec,
    PhasePoint,
    build_basic_operators,
    cat_classical_map,
    cat_map,
    validate_density,
    validate_state,
)
from .simulator import (
    CtrlPhaseBetween,
    CtrlPower,
    Hadamard,
    InverseQFT,
    ProbeCtrl,
    ProbeReadout,
    QFT,
    RegisterLayout,
    RegisterUnitary,
    SwapRegisters,
    derive_seed,
    run_for_density,
)

PROBE, QPROG, PPROG, SYSTEM, PROGRAM = "probe", "qprog", "pprog", "system", "program"


class Evaluation(NamedTuple):
    """A probe readout together with the phase-space value derived from it."""

    readout: ProbeReadout
    value: complex | float
    stderr: float = 0.0


def _dim_of(rho) -> tuple[np.ndarray, HilbertDim]:
    rho = validate_density(rho)
    return rho, HilbertDim.from_dimension(rho.shape[0])


def _scatter(inner: Sequence) -> list:
    return [Hadamard(PROBE), ProbeCtrl(PROBE, tuple(inner)), Hadamard(PROBE)]


def _uniform(d: int, support) -> np.ndarray:
    v = np.zeros(d, dtype=complex)
    idx = list(support)
    v[idx] = 1.0 / math.sqrt(len(idx))
    return v


# --- Wigner -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WignerProgram:
    """Program state for the two 2N-dimensional Wigner program registers.

    Product programs set ``q_state`` and ``p_state``; the diagonal line
    ``q + p = n3`` is entangled and sets ``joint`` (q register most significant).
    """

    kind: str
    N: int
    support: tuple[tuple[int, int], ...]
    q_state: np.ndarray | None = None
    p_state: np.ndarray | None = None
    joint: np.ndarray | None = None

    @property
    def K2(self) -> int:
        return len(self.support)

    def initial(self) -> dict:
        if self.joint is not None:
            return {(QPROG, PPROG): self.joint}
        return {QPROG: self.q_state, PPROG: self.p_state}

    def state(self) -> np.ndarray:
        if self.joint is not None:
            return self.joint
        return np.kron(self.q_state, self.p_state)

    def sum_from_readout(self, sz: float) -> float:
        """Sum of W over the support, from ``sz = (2N / K^2) sum W``."""
        return sz * self.K2 / (2 * self.N)

    def mean_from_readout(self, sz: float) -> float:
        return sz / (2 * self.N)


def point_program(dim: HilbertDim, q: int, p: int) -> WignerProgram:
    M = 2 * dim.N
    PhasePoint(q, p, Grid.WIGNER).check(dim.N)
    return WignerProgram("point", dim.N, ((q, p),), _uniform(M, [q]), _uniform(M, [p]))


def line_program(dim: HilbertDim, spec: LineSpec) -> WignerProgram:
    """Program for a vertical ``q = n3`` or horizontal ``p = n3`` line."""
    M = 2 * dim.N
    s = spec.reduced(M)
    if (s.n1, s.n2) == (1, 0):
        return WignerProgram(
            "vertical", dim.N, tuple((s.n3, p) for p in range(M)), _uniform(M, [s.n3]), _uniform(M, range(M))
        )
    if (s.n1, s.n2) == (0, 1):
        return WignerProgram(
            "horizontal", dim.N, tuple((q, s.n3) for q in range(M)), _uniform(M, range(M)), _uniform(M, [s.n3])
        )
    raise NotAxisAligned(f"line {spec} is neither vertical nor horizontal")


def diagonal_program(dim: HilbertDim, n3: int) -> WignerProgram:
    """Entangled program for the canonical line ``q + p = n3 (mod 2N)``."""
    M = 2 * dim.N
    support = tuple((q, (n3 - q) % M) for q in range(M))
    joint = _uniform(M * M, [q * M + p for q, p in support])
    return WignerProgram("diagonal", dim.N, support, joint=joint)


def rectangle_program(dim: HilbertDim, q1: int, q2: int, p1: int, p2: int) -> WignerProgram:
    M = 2 * dim.N
    for x in (q1, q2, p1, p2):
        if not 0 <= x < M:
            raise PointOutOfRange(f"rectangle bound {x} outside [0, {M})")
    if q1 > q2 or p1 > p2:
        raise EmptyRegion(f"empty rectangle q in [{q1}, {q2}], p in [{p1}, {p2}]")
    support = tuple((q, p) for q in range(q1, q2 + 1) for p in range(p1, p2 + 1))
    return WignerProgram(
        "rectangle", dim.N, support, _uniform(M, range(q1, q2 + 1)), _uniform(M, range(p1, p2 + 1))
    )


def wigner_layout(dim: HilbertDim) -> RegisterLayout:
    return RegisterLayout([(PROBE, 1), (QPROG, dim.n + 1), (PPROG, dim.n + 1), (SYSTEM, dim.n)])


def wigner_gates(dim: HilbertDim, pre: Sequence = ()) -> list:
    """Scattering circuit whose controlled operation is ``sum_x |x><x| (x) A(x)``.

    ``pre`` gates act on the system before the probe interferometer.
    """
    U, V, R, _ = build_basic_operators(dim)
    inner = [
        CtrlPower(PPROG, SYSTEM, V.conj().T),
        RegisterUnitary(SYSTEM, R),
        CtrlPower(QPROG, SYSTEM, U),
        CtrlPhaseBetween(QPROG, PPROG, 2 * math.pi / (2 * dim.N)),
    ]
    return list(pre) + _scatter(inner)


def run_wigner_program(rho, program: WignerProgram, pre: Sequence = (), shots: int = 0, seed: int | None = None):
    rho, dim = _dim_of(rho)
    if program.N != dim.N:
        raise DimensionMismatch(f"program built for N={program.N}, state has N={dim.N}")
    return run_for_density(
        rho, wigner_gates(dim, pre), wigner_layout(dim), SYSTEM, program.initial(), PROBE, shots, seed, "z"
    )


def wigner_point_circuit(rho, q: int, p: int, shots: int = 0, seed: int | None = None) -> Evaluation:
    """``W(q, p)`` from the point program; ``value = sz / 2N``."""
    rho, dim = _dim_of(rho)
    prog = point_program(dim, q, p)
    r = run_wigner_program(rho, prog, shots=shots, seed=seed)
    scale = 1 / (2 * dim.N)
    return Evaluation(r, r.sz * scale, r.standard_error * scale)


@dataclass(frozen=True)
class LineMapping:
    """Cat map taking the canonical line ``q' + p' = n3`` onto ``source``.

    With ``axis_exchange`` the system is first conjugated by the Fourier
    matrix, which sends W(q, p) to W(p, -q); the cat map then targets the
    exchanged line ``-n2 q + n1 p = n3``.
    """

    source: LineSpec
    params: CatParams
    target: LineSpec
    axis_exchange: bool = False

    def mapped_source(self, modulus: int) -> LineSpec:
        s = self.source.reduced(modulus)
        if self.axis_exchange:
            return LineSpec(-s.n2, s.n1, s.n3).reduced(modulus)
        return s

    def verify(self, modulus: int) -> bool:
        """Check that the classical map bijects the target line onto the (exchanged) source line."""
        src = self.mapped_source(modulus)
        image = {cat_classical_map(x, self.params, modulus) for x in self.target.points(modulus)}
        return image == set(src.points(modulus))


def solve_cat_params(spec: LineSpec, N: int) -> LineMapping:
    """Cat parameters mapping ``q' + p' = n3`` onto the line ``n1 q + n2 p = n3 (mod 2N)``.

    ``a = (1 - n1) / n2`` and ``b = 1 + n2`` mod 2N; this needs ``n2`` odd. When
    only ``n1`` is odd the axes are exchanged first.
    """
    M = 2 * N
    s = spec.reduced(M)
    exchange = False
    n1, n2 = s.n1, s.n2
    if n2 % 2 == 0:
        if n1 % 2 == 0:
            raise NoOddCoefficient(f"line {spec}: both n1 and n2 are even")
        n1, n2, exchange = (-n2) % M, n1, True
    a = ((1 - n1) * pow(n2, -1, M)) % M
    b = (1 + n2) % M
    mapping = LineMapping(s, CatParams(a, b), LineSpec(1, 1, s.n3), exchange)
    if not mapping.verify(M):
        raise AssertionError(f"cat parameters {mapping.params} do not map onto {spec}")
    return mapping


def _line_pre(dim: HilbertDim, mapping: LineMapping) -> list:
    """System gates turning rho into the state whose canonical line carries the source-line sum."""
    gates = []
    if mapping.axis_exchange:
        gates.append(QFT(SYSTEM))
    Uc = cat_map(dim, mapping.params)
    gates.append(RegisterUnitary(SYSTEM, Uc.conj().T))
    return gates


def wigner_line_average(rho, spec: LineSpec, shots: int = 0, seed: int | None = None) -> Evaluation:
    """Sum of W over the line ``n1 q + n2 p = n3 (mod 2N)``.

    Axis-aligned lines use their program directly; any other line with an
    odd coefficient is reduced to ``q' + p' = n3`` by a cat map on the system.
    """
    rho, dim = _dim_of(rho)
    M = 2 * dim.N
    s = spec.reduced(M)
    if (s.n1, s.n2) in ((1, 0), (0, 1)):
        prog, pre = line_program(dim, s), []
    else:
        mapping = solve_cat_params(s, dim.N)
        prog, pre = diagonal_program(dim, s.n3), _line_pre(dim, mapping)
    r = run_wigner_program(rho, prog, pre, shots, seed)
    scale = prog.K2 / M
    return Evaluation(r, prog.sum_from_readout(r.sz), r.standard_error * scale)


def region_support(dim: HilbertDim, rect, params: CatParams | None = None) -> list[tuple[int, int]]:
    """Grid points whose W values :func:`wigner_region_average` sums."""
    prog = rectangle_program(dim, *rect)
    if params is None:
        return list(prog.support)
    return [cat_classical_map(x, params, 2 * dim.N) for x in prog.support]


def wigner_region_average(
    rho, rect, params: CatParams | None = None, shots: int = 0, seed: int | None = None
) -> Evaluation:
    """Sum of W over a rectangle ``q1..q2 x p1..p2`` (inclusive).

    With ``params`` the sum runs over the classical cat-map image of the
    rectangle (a tilted region), realized by evolving the system with
    ``U_cat^dag`` before the program circuit.
    """
    rho, dim = _dim_of(rho)
    prog = rectangle_program(dim, *rect)
    pre = [] if params is None else [RegisterUnitary(SYSTEM, cat_map(dim, params).conj().T)]
    r = run_wigner_program(rho, prog, pre, shots, seed)
    return Evaluation(r, prog.sum_from_readout(r.sz), r.standard_error * prog.K2 / (2 * dim.N))


# --- Kirkwood and Husimi -----------------------------------------------------


def kirkwood_layout(dim: HilbertDim) -> RegisterLayout:
    return RegisterLayout([(PROBE, 1), (QPROG, dim.n), (PPROG, dim.n), (SYSTEM, dim.n)])


def kirkwood_gates() -> list:
    return _scatter(
        [InverseQFT(SYSTEM), SwapRegisters(SYSTEM, PPROG), QFT(SYSTEM), SwapRegisters(SYSTEM, QPROG)]
    )


def kirkwood_circuit(rho, q: int, p: int, shots: int = 0, seed: int | None = None) -> Evaluation:
    """``K(q, p) = <q|p><p|rho|q>`` read as ``sz - i sy``.

    Values are of order 1/N, so resolving them by sampling needs a number of
    shots growing like N^2; the exact mode has no such limit.
    """
    rho, dim = _dim_of(rho)
    PhasePoint(q, p, Grid.TORUS).check(dim.N)
    r = run_for_density(
        rho, kirkwood_gates(), kirkwood_layout(dim), SYSTEM, {QPROG: q, PPROG: p}, PROBE, shots, seed, "zy"
    )
    return Evaluation(r, r.value, r.standard_error)


def husimi_layout(dim: HilbertDim) -> RegisterLayout:
    return RegisterLayout([(PROBE, 1), (PROGRAM, dim.n), (SYSTEM, dim.n)])


def husimi_circuit(rho, alpha, shots: int = 0, seed: int | None = None) -> Evaluation:
    """``H(alpha) = <alpha|rho|alpha> / N`` via a probe-controlled swap.

    Both probe components are computed; sy vanishes for Hermitian input.
    """
    rho, dim = _dim_of(rho)
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape != (dim.N,):
        raise DimensionMismatch(f"program state has shape {alpha.shape}, system dimension is {dim.N}")
    validate_state(alpha)
    gates = _scatter([SwapRegisters(PROGRAM, SYSTEM)])
    r = run_for_density(rho, gates, husimi_layout(dim), SYSTEM, {PROGRAM: alpha}, PROBE, shots, seed, "z")
    return Evaluation(r, r.sz / dim.N, r.standard_error / dim.N)


# --- sweeps -----------------------------------------------------------------

GRID_HEADER = ("q", "p", "value_re", "value_im", "stderr")
LINE_HEADER = ("n1", "n2", "n3", "sum", "stderr")
REGION_HEADER = ("q1", "q2", "p1", "p2", "a", "b", "sum", "stderr")


def _seed(seed, i):
    return None if seed is None else derive_seed(seed, i)


def grid_rows(evaluate, points, shots: int = 0, seed: int | None = None) -> list[tuple]:
    """Evaluate ``evaluate(q, p, shots, seed)`` at each point; rows follow :data:`GRID_HEADER`.

    Point ``i`` samples with ``derive_seed(seed, i)``.
    """
    rows = []
    for i, (q, p) in enumerate(points):
        ev = evaluate(q, p, shots, _seed(seed, i) if shots else None)
        v = complex(ev.value)
        rows.append((q, p, v.real, v.imag, ev.stderr))
    return rows


def line_rows(rho, specs, shots: int = 0, seed: int | None = None) -> list[tuple]:
    rows = []
    for i, spec in enumerate(specs):
        ev = wigner_line_average(rho, spec, shots, _seed(seed, i) if shots else None)
        rows.append((spec.n1, spec.n2, spec.n3, ev.value, ev.stderr))
    return rows
