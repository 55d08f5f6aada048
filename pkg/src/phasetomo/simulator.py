"""Exact multi-register statevector simulator.

A machine is an ordered list of named registers; the first register is the
most significant factor of the tensor product. Inside a register the value
``x`` has bit ``b`` equal to ``(x >> b) & 1``, so bit 0 is the least
significant qubit. Qubits are addressed either by the name of a one-qubit
register or by a ``(register, bit)`` pair.

Seeding
-------
All sampling takes an integer seed. Independent sub-tasks (ensemble
members, grid points, repeated runs) use :func:`derive_seed`, which feeds
``(master, *path)`` through :class:`numpy.random.SeedSequence` so child
streams never overlap and do not depend on execution order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from ._backend import kernels
from .errors import DimensionMismatch, NonUnitaryOperand
from .phasespace import fourier_matrix, validate_density, validate_state

MAX_QUBITS = 26
UNITARY_TOL = 1e-8
EIGEN_CUTOFF = 1e-14

QubitRef = Union[str, tuple[str, int]]

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def derive_seed(master: int, *path: int) -> int:
    """64-bit child seed for sub-task ``path`` of a run seeded with ``master``."""
    ss = np.random.SeedSequence(int(master), spawn_key=tuple(int(p) for p in path))
    lo, hi = ss.generate_state(2, dtype=np.uint32)
    return int(lo) | (int(hi) << 32)


@dataclass(frozen=True)
class RegisterLayout:
    registers: tuple[tuple[str, int], ...]

    def __init__(self, registers: Sequence[tuple[str, int]]):
        regs = tuple((str(name), int(q)) for name, q in registers)
        names = [r[0] for r in regs]
        if len(set(names)) != len(names):
            raise ValueError(f"register names must be unique: {names}")
        if any(q < 1 for _, q in regs):
            raise ValueError("every register needs at least one qubit")
        if sum(q for _, q in regs) > MAX_QUBITS:
            raise ValueError(f"layout exceeds the {MAX_QUBITS}-qubit limit")
        object.__setattr__(self, "registers", regs)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r[0] for r in self.registers)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(1 << q for _, q in self.registers)

    @property
    def total_qubits(self) -> int:
        return sum(q for _, q in self.registers)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DimensionMismatch(f"no register named {name!r}") from None

    def qubits(self, name: str) -> int:
        return self.registers[self.index(name)][1]

    def dim(self, name: str) -> int:
        return 1 << self.qubits(name)

    def qubit(self, ref: QubitRef) -> tuple[int, int]:
        """Resolve a qubit reference to (register index, bit)."""
        if isinstance(ref, str):
            i = self.index(ref)
            if self.registers[i][1] != 1:
                raise DimensionMismatch(f"register {ref!r} has more than one qubit; give (name, bit)")
            return i, 0
        name, bit = ref
        i = self.index(name)
        if not 0 <= bit < self.registers[i][1]:
            raise DimensionMismatch(f"bit {bit} out of range for register {name!r}")
        return i, int(bit)


@dataclass(frozen=True, eq=False)
class MachineState:
    layout: RegisterLayout
    amplitudes: np.ndarray

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.layout.dims)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class ProbeReadout:
    """Probe polarizations. ``shots_used == 0`` marks exact expectation values;
    a component that was not sampled is NaN."""

    sz: float
    sy: float
    shots_used: int = 0
    standard_error: float = 0.0

    @property
    def value(self) -> complex:
        """``sz - i sy``, equal to ``Tr[G rho]`` for a scattering circuit."""
        return complex(self.sz, -self.sy)

    def scaled(self, w: float) -> "ProbeReadout":
        return ProbeReadout(self.sz * w, self.sy * w, self.shots_used, self.standard_error * abs(w))


# --- gates -------------------------------------------------------------------


@dataclass(frozen=True)
class Hadamard:
    qubit: QubitRef


@dataclass(frozen=True)
class PhaseShift:
    qubit: QubitRef
    angle: float


@dataclass(frozen=True, eq=False)
class RegisterUnitary:
    register: str
    matrix: np.ndarray


@dataclass(frozen=True)
class QFT:
    register: str


@dataclass(frozen=True)
class InverseQFT:
    register: str


@dataclass(frozen=True, eq=False)
class CtrlPower:
    """``|n>|psi> -> |n> base^n |psi>`` for every basis value n of ``control``."""

    control: str
    target: str
    base: np.ndarray


@dataclass(frozen=True, eq=False)
class ProbeCtrl:
    """Apply ``gates`` only on the branch where ``probe`` is |1>."""

    probe: QubitRef
    gates: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))


@dataclass(frozen=True)
class SwapRegisters:
    a: str
    b: str


@dataclass(frozen=True)
class CtrlPhaseBetween:
    """``|x>_a |y>_b -> exp(i unit x y) |x>_a |y>_b``; unit ``2 pi / 2N`` is ctrl-V_2N."""

    a: str
    b: str
    unit: float


Gate = Union[Hadamard, PhaseShift, RegisterUnitary, QFT, InverseQFT, CtrlPower, ProbeCtrl, SwapRegisters, CtrlPhaseBetween]


# --- machine construction and gate application -------------------------------


def init_machine(layout: RegisterLayout, initial: Mapping | None = None) -> MachineState:
    """Product state in layout order.

    ``initial`` maps a register name to a basis index or a state vector;
    a tuple of consecutive register names may map to one joint state.
    Registers not mentioned start in |0>.
    """
    initial = dict(initial or {})
    factors = []
    names = list(layout.names)
    i = 0
    while i < len(names):
        key = None
        for k in initial:
            group = (k,) if isinstance(k, str) else tuple(k)
            if group[0] == names[i]:
                key = k
                break
        group = (names[i],) if key is None or isinstance(key, str) else tuple(key)
        if list(group) != names[i : i + len(group)]:
            raise DimensionMismatch(f"joint registers {group} are not consecutive in the layout")
        d = int(np.prod([layout.dim(g) for g in group]))
        value = 0 if key is None else initial.pop(key)
        if isinstance(value, (int, np.integer)):
            if not 0 <= value < d:
                raise DimensionMismatch(f"basis index {value} out of range for {group}")
            vec = np.zeros(d, dtype=complex)
            vec[int(value)] = 1.0
        else:
            vec = np.asarray(value, dtype=complex)
            if vec.shape != (d,):
                raise DimensionMismatch(f"state for {group} has shape {vec.shape}, expected ({d},)")
            validate_state(vec)
        factors.append(vec)
        i += len(group)
    if initial:
        raise DimensionMismatch(f"unknown registers in initial state: {list(initial)}")
    amps = factors[0]
    for f in factors[1:]:
        amps = np.kron(amps, f)
    return MachineState(layout, np.ascontiguousarray(amps))


def _axis_values(layout: RegisterLayout, reg: int, values: np.ndarray) -> np.ndarray:
    """Broadcast a per-basis-value array of register ``reg`` over the full tensor shape."""
    shape = [1] * len(layout.dims)
    shape[reg] = layout.dims[reg]
    return values.reshape(shape)


def _bit_mask(layout: RegisterLayout, ref: QubitRef) -> np.ndarray:
    reg, bit = layout.qubit(ref)
    return _axis_values(layout, reg, (np.arange(layout.dims[reg]) >> bit) & 1).astype(bool)


def _view_shape(layout: RegisterLayout, reg: int, bit: int | None) -> tuple[int, int, int]:
    dims = layout.dims
    L = int(np.prod(dims[:reg], dtype=np.int64))
    R = int(np.prod(dims[reg + 1 :], dtype=np.int64))
    if bit is None:
        return L, dims[reg], R
    hi = dims[reg] >> (bit + 1)
    return L * hi, 2, (1 << bit) * R


def _check_unitary(M: np.ndarray, d: int, what: str) -> np.ndarray:
    M = np.asarray(M, dtype=complex)
    if M.shape != (d, d):
        raise DimensionMismatch(f"{what}: operand shape {M.shape} does not match dimension {d}")
    if np.max(np.abs(M.conj().T @ M - np.eye(d))) >= UNITARY_TOL:
        raise NonUnitaryOperand(f"{what}: operand is not unitary")
    return M


def _apply_target(psi, layout, reg, bit, mats, sel_full, cond):
    """Apply ``mats[sel]`` to one register (or one qubit of it), optionally only where ``cond``."""
    L, d, R = _view_shape(layout, reg, bit)
    view = psi.reshape(L, d, R)
    if cond is not None:
        eye = np.eye(d, dtype=complex)[None]
        if sel_full is None:
            mats, sel_full = np.concatenate([eye, mats]), cond.astype(np.intp)
        else:
            mats = np.concatenate([eye, mats])
            sel_full = np.where(cond, sel_full + 1, 0)
    if sel_full is None:
        out = kernels.apply_matrix(view, np.ascontiguousarray(mats[0]))
    else:
        full = np.broadcast_to(sel_full, layout.dims).reshape(L, d, R)
        sel = np.ascontiguousarray(full[:, 0, :], dtype=np.intp)
        out = kernels.apply_selected(view, sel, np.ascontiguousarray(mats))
    return out.reshape(-1)


def _apply(psi: np.ndarray, layout: RegisterLayout, gate, cond) -> np.ndarray:
    if isinstance(gate, ProbeCtrl):
        mask = _bit_mask(layout, gate.probe)
        inner = mask if cond is None else (cond & mask)
        for g in gate.gates:
            _guard_control(layout, gate.probe, g)
            psi = _apply(psi, layout, g, inner)
        return psi

    if isinstance(gate, Hadamard):
        reg, bit = layout.qubit(gate.qubit)
        return _apply_target(psi, layout, reg, bit, _H[None], None, cond)

    if isinstance(gate, PhaseShift):
        phase = np.where(_bit_mask(layout, gate.qubit), np.exp(1j * gate.angle), 1.0)
        return _apply_diagonal(psi, layout, phase, cond)

    if isinstance(gate, (RegisterUnitary, QFT, InverseQFT)):
        reg = layout.index(gate.register)
        d = layout.dims[reg]
        if isinstance(gate, RegisterUnitary):
            M = _check_unitary(gate.matrix, d, f"unitary on {gate.register!r}")
        elif isinstance(gate, QFT):
            M = fourier_matrix(d)
        else:
            M = fourier_matrix(d).conj().T
        return _apply_target(psi, layout, reg, None, M[None], None, cond)

    if isinstance(gate, CtrlPower):
        creg, treg = layout.index(gate.control), layout.index(gate.target)
        if creg == treg:
            raise DimensionMismatch("control and target registers must differ")
        dc, dt = layout.dims[creg], layout.dims[treg]
        base = _check_unitary(gate.base, dt, f"controlled power on {gate.target!r}")
        powers = np.empty((dc, dt, dt), dtype=complex)
        powers[0] = np.eye(dt)
        for k in range(1, dc):
            powers[k] = base @ powers[k - 1]
        sel_full = _axis_values(layout, creg, np.arange(dc))
        return _apply_target(psi, layout, treg, None, powers, sel_full, cond)

    if isinstance(gate, SwapRegisters):
        ia, ib = layout.index(gate.a), layout.index(gate.b)
        if layout.dims[ia] != layout.dims[ib]:
            raise DimensionMismatch(f"cannot swap registers of dimension {layout.dims[ia]} and {layout.dims[ib]}")
        t = psi.reshape(layout.dims)
        swapped = np.swapaxes(t, ia, ib)
        out = swapped if cond is None else np.where(cond, swapped, t)
        return np.ascontiguousarray(out).reshape(-1)

    if isinstance(gate, CtrlPhaseBetween):
        ia, ib = layout.index(gate.a), layout.index(gate.b)
        x = _axis_values(layout, ia, np.arange(layout.dims[ia]))
        y = _axis_values(layout, ib, np.arange(layout.dims[ib]))
        return _apply_diagonal(psi, layout, np.exp(1j * gate.unit * (x * y)), cond)

    raise TypeError(f"unsupported gate {gate!r}")


def _guard_control(layout, probe, gate):
    reg, bit = layout.qubit(probe)
    if isinstance(gate, (Hadamard, PhaseShift)) and layout.qubit(gate.qubit) == (reg, bit):
        raise DimensionMismatch("a gate cannot be controlled by its own qubit")
    name = layout.names[reg]
    touched = {getattr(gate, attr) for attr in ("register", "target", "a", "b") if hasattr(gate, attr)}
    if name in touched:
        raise DimensionMismatch(f"control qubit register {name!r} is also a target")


def _apply_diagonal(psi, layout, phase, cond):
    if cond is not None:
        phase = np.where(cond, phase, 1.0)
    t = psi.reshape(layout.dims) * phase
    return np.ascontiguousarray(t).reshape(-1)


def apply_gate(state: MachineState, gate) -> MachineState:
    """Return the state after ``gate``; the input state is left untouched."""
    amps = _apply(state.amplitudes, state.layout, gate, None)
    return MachineState(state.layout, amps)


def run_circuit(state: MachineState, gates) -> MachineState:
    for g in gates:
        state = apply_gate(state, g)
    return state


# --- readout -----------------------------------------------------------------


def qubit_density(state: MachineState, qubit: QubitRef) -> np.ndarray:
    """Reduced 2x2 density matrix of one qubit."""
    reg, bit = state.layout.qubit(qubit)
    L, _, R = _view_shape(state.layout, reg, bit)
    v = state.amplitudes.reshape(L, 2, R)
    return np.einsum("lar,lbr->ab", v, v.conj())


def probe_readout(state: MachineState, probe: QubitRef = "probe") -> ProbeReadout:
    """Exact <sigma_z> and <sigma_y> of the probe qubit."""
    rho = qubit_density(state, probe)
    return ProbeReadout(sz=float((rho[0, 0] - rho[1, 1]).real), sy=float(2 * rho[1, 0].imag))


def _sample_pm1(expectation: float, shots: int, rng) -> tuple[float, float]:
    p_plus = min(max((1 + expectation) / 2, 0.0), 1.0)
    ups = rng.binomial(shots, p_plus)
    mean = (2 * ups - shots) / shots
    if shots < 2:
        return mean, 0.0
    var = (1 - mean * mean) * shots / (shots - 1)
    return mean, math.sqrt(max(var, 0.0) / shots)


def sample_expectations(exact: ProbeReadout, basis: str, shots: int, seed: int) -> ProbeReadout:
    """Finite-shot estimate of the probe polarizations given their exact values."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if basis not in ("z", "y", "zy"):
        raise ValueError(f"basis must be 'z', 'y' or 'zy', got {basis!r}")
    sz = sy = math.nan
    errs = []
    if "z" in basis:
        sz, e = _sample_pm1(exact.sz, shots, np.random.default_rng(derive_seed(seed, 0)))
        errs.append(e)
    if "y" in basis:
        sy, e = _sample_pm1(exact.sy, shots, np.random.default_rng(derive_seed(seed, 1)))
        errs.append(e)
    return ProbeReadout(sz, sy, shots, math.sqrt(sum(e * e for e in errs)))


def sample_probe(state: MachineState, probe: QubitRef, basis: str, shots: int, seed: int) -> ProbeReadout:
    """Empirical mean of ``shots`` +-1 probe measurements in the z and/or y basis."""
    return sample_expectations(probe_readout(state, probe), basis, shots, seed)


def register_probabilities(state: MachineState, register: str) -> np.ndarray:
    i = state.layout.index(register)
    t = np.abs(state.tensor()) ** 2
    axes = tuple(a for a in range(t.ndim) if a != i)
    return t.sum(axis=axes)


def measure_register(state: MachineState, register: str, seed) -> tuple[int, MachineState, float]:
    """Projective measurement of one register in the computational basis."""
    probs = register_probabilities(state, register)
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    outcome = int(rng.choice(len(probs), p=probs))
    i = state.layout.index(register)
    t = state.tensor().copy()
    keep = np.zeros(state.layout.dims[i], dtype=bool)
    keep[outcome] = True
    t *= _axis_values(state.layout, i, keep)
    amps = t.reshape(-1)
    amps = amps / np.linalg.norm(amps)
    return outcome, MachineState(state.layout, amps), float(probs[outcome])


def register_slice(state: MachineState, register: str, value: int) -> np.ndarray:
    """Unnormalized amplitudes of the other registers on the branch ``register == value``."""
    i = state.layout.index(register)
    return np.take(state.tensor(), value, axis=i).reshape(-1)


def run_for_density(
    rho,
    circuit,
    layout: RegisterLayout,
    system: str,
    initial: Mapping | None = None,
    probe: QubitRef = "probe",
    shots: int = 0,
    seed: int | None = None,
    basis: str = "zy",
) -> ProbeReadout:
    """Probe readout for a mixed system input, by eigen-ensemble averaging.

    ``rho`` is split into its eigenvectors (weights below 1e-14 dropped); the
    circuit runs once per eigenvector and the readouts are combined with the
    eigenvalues as weights. With ``shots > 0`` the probe is then sampled from
    the exact mixed-state distribution.
    """
    rho = validate_density(rho, layout.dim(system))
    weights, vectors = np.linalg.eigh(rho)
    sz = sy = 0.0
    for w, v in zip(weights, vectors.T):
        if w < EIGEN_CUTOFF:
            continue
        init = dict(initial or {})
        init[system] = v / np.linalg.norm(v)
        out = probe_readout(run_circuit(init_machine(layout, init), circuit), probe)
        sz += w * out.sz
        sy += w * out.sy
    total = weights[weights >= EIGEN_CUTOFF].sum()
    exact = ProbeReadout(sz / total, sy / total)
    if shots:
        if seed is None:
            raise ValueError("sampled readout needs a seed")
        return sample_expectations(exact, basis, shots, seed)
    return exact
