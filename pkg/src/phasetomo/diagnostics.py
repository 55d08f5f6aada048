"""Spectral and fidelity sweeps behind the coherent-state preparation.

Each request returns a :class:`Diagnostic`: a CSV-ready table (header plus
rows) and a summary dict with fitted quantities.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coherent import LINEAR_REGIME, phase_gap, spectral_diagnostics, square_state
from .errors import UnknownRequest
from .phasespace import HilbertDim, continuous_coherent, harper_ground, kicked_map

FIDELITY_LEVEL = 0.99
DROP_LEVEL = 0.9


@dataclass
class Diagnostic:
    name: str
    header: tuple[str, ...]
    rows: list[tuple]
    summary: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = self.header.index(name)
        return np.array([r[i] for r in self.rows])


def populations(dim: HilbertDim) -> Diagnostic:
    """Position populations of the Harper ground state and the continuous coherent state."""
    disc = np.abs(harper_ground(dim)) ** 2
    cont = np.abs(continuous_coherent(dim, 0, 0)) ** 2
    rows = [(n, float(disc[n]), float(cont[n])) for n in range(dim.N)]
    overlap = float(abs(np.vdot(harper_ground(dim), continuous_coherent(dim, 0, 0))) ** 2)
    return Diagnostic(
        "populations",
        ("n", "pop_discrete", "pop_continuous"),
        rows,
        {"max_difference": float(np.max(np.abs(disc - cont))), "overlap_probability": overlap},
    )


def eigenconvergence(dim: HilbertDim, gammas=None) -> Diagnostic:
    """``|<Phi_0|u_0(gamma)>|^2`` for each gamma (ground eigenvector of the kicked map)."""
    if gammas is None:
        gammas = np.array([0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.05]) / dim.N
    phi0 = harper_ground(dim)
    rows = []
    for g in gammas:
        u0 = spectral_diagnostics(dim, float(g)).ground_vector
        rows.append((float(g), float(abs(np.vdot(phi0, u0)) ** 2)))
    return Diagnostic("eigenconvergence", ("gamma", "overlap"), rows)


def fidelity_values(dim: HilbertDim, gamma: float, t_max: int, state=None) -> np.ndarray:
    """``F(t) = sqrt|<U(gamma)^(2^t) psi | U(2^t gamma) psi>|`` for ``t = 0..t_max``."""
    psi = square_state(dim)[0] if state is None else np.asarray(state, dtype=complex)
    P = kicked_map(dim, gamma)
    out = []
    for t in range(t_max + 1):
        exact = P @ psi
        approx = kicked_map(dim, gamma * 2**t) @ psi
        out.append(np.sqrt(abs(np.vdot(exact, approx))))
        P = P @ P
    return np.array(out)


def threshold_exponent(F, level: float = FIDELITY_LEVEL) -> int:
    """Largest t with ``F(t') > level`` for every ``t' <= t`` (-1 if F(0) already fails)."""
    ts = -1
    for t, f in enumerate(F):
        if f <= level:
            break
        ts = t
    return ts


def fidelity_curve(dim: HilbertDim, gamma: float | None = None, t_max: int = 12) -> Diagnostic:
    gamma = 0.1 / dim.N if gamma is None else gamma
    F = fidelity_values(dim, gamma, t_max)
    ts = threshold_exponent(F)
    after = F[ts + 2] if ts + 2 < len(F) else float("nan")
    summary = {
        "gamma": gamma,
        "t_s": ts,
        "fidelity_at_t_s": float(F[ts]) if ts >= 0 else float("nan"),
        "fidelity_at_t_s_plus_2": float(after),
        "drops_below": bool(after < DROP_LEVEL),
    }
    return Diagnostic("fidelity_curve", ("t", "fidelity"), [(t, float(f)) for t, f in enumerate(F)], summary)


def origin_fit(x, y) -> tuple[float, float]:
    """Least-squares slope of ``y = s x`` and its R^2 (about the mean of y)."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    s = float(x @ y / (x @ x))
    ss_res = float(((y - s * x) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    return s, 1 - ss_res / ss_tot


def gap_vs_gamma(dim: HilbertDim, gammas=None) -> Diagnostic:
    """Ground-phase gap against gamma, fitted by a line through the origin."""
    if gammas is None:
        gammas = np.linspace(0.02, 0.58, 15) / dim.N
    rows = [(float(g), phase_gap(dim, float(g))) for g in gammas]
    slope, r2 = origin_fit([r[0] for r in rows], [r[1] for r in rows])
    return Diagnostic("gap_vs_gamma", ("gamma", "delta_phi"), rows, {"slope": slope, "r2": r2})


def _bisect_log(pred, lo: float, hi: float, iters: int = 50) -> float:
    """Boundary between ``pred(lo)`` true and ``pred(hi)`` false, bisected geometrically."""
    for _ in range(iters):
        mid = np.sqrt(lo * hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return float(np.sqrt(lo * hi))


def linear_fit(x, y) -> tuple[np.ndarray, np.ndarray]:
    """Ordinary least squares ``y = m x + c``; returns ``[m, c]`` and their standard errors."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    A = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    s2 = resid @ resid / (len(x) - 2)
    return coef, np.sqrt(np.diag(s2 * np.linalg.inv(A.T @ A)))


def parameter_region(dim: HilbertDim, ts=None) -> Diagnostic:
    """Usable gamma window for each counting-register size t.

    ``gamma_fidelity_max(t)``: largest gamma whose semiclassical top power
    (exponent t - 1) still has F >= 0.99. ``gamma_resolution_min(t)``:
    smallest gamma whose ground gap is resolvable with t qubits,
    ``dphi >= 2^-t``. Both are searched inside ``N gamma < 0.6``. The
    offset is how many counting qubits separate the two curves, measured
    along t at fixed gamma.
    """
    ts = list(range(7, 13)) if ts is None else list(ts)
    lo, hi = 1e-7, LINEAR_REGIME / dim.N
    gmax = [_bisect_log(lambda g: fidelity_values(dim, g, t - 1)[-1] >= FIDELITY_LEVEL, lo, hi) for t in ts]
    gmin = [_bisect_log(lambda g: phase_gap(dim, g) < 2.0**-t, lo, hi) for t in ts]
    rows = [(t, a, b) for t, a, b in zip(ts, gmax, gmin)]
    lf, lr = np.log2(gmax), np.log2(gmin)
    (mf, _), (sf, _) = linear_fit(ts, lf)
    (mr, _), (sr, _) = linear_fit(ts, lr)
    slope = (mf + mr) / 2
    # at fixed gamma the resolution curve sits this many qubits above the fidelity curve
    offset = float(np.mean(lr - lf) / abs(slope))
    z = abs(mf - mr) / np.hypot(sf, sr)
    summary = {
        "slope_fidelity": float(mf),
        "slope_fidelity_err": float(sf),
        "slope_resolution": float(mr),
        "slope_resolution_err": float(sr),
        "slope_difference_sigma": float(z),
        "parallel": bool(z <= 3),
        "offset_qubits": offset,
    }
    return Diagnostic("parameter_region", ("t", "gamma_fidelity_max", "gamma_resolution_min"), rows, summary)


REQUESTS = {
    "populations": populations,
    "eigenconvergence": eigenconvergence,
    "fidelity_curve": fidelity_curve,
    "gap_vs_gamma": gap_vs_gamma,
    "parameter_region": parameter_region,
}


def diagnostics_suite(dim: HilbertDim, request: str, **options) -> Diagnostic:
    try:
        fn = REQUESTS[request]
    except KeyError:
        raise UnknownRequest(f"unknown diagnostic {request!r}; choose from {sorted(REQUESTS)}") from None
    return fn(dim, **options)
