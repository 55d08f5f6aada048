import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_line_sum
from phasetomo.circuits import (
    diagonal_program,
    grid_rows,
    husimi_circuit,
    kirkwood_circuit,
    line_program,
    line_rows,
    point_program,
    rectangle_program,
    region_support,
    solve_cat_params,
    wigner_line_average,
    wigner_point_circuit,
    wigner_region_average,
)
from phasetomo.errors import DimensionMismatch, EmptyRegion, NoOddCoefficient, NotAxisAligned, PointOutOfRange
from phasetomo.phasespace import (
    CatParams,
    HilbertDim,
    LineSpec,
    cat_classical_map,
    coherent_state,
    husimi_direct,
    kirkwood_grid,
    pure_density,
    random_density,
    random_state,
    wigner_direct,
    wigner_grid,
)


def basis_rho(N, k):
    rho = np.zeros((N, N), dtype=complex)
    rho[k, k] = 1
    return rho


# --- Wigner points -------------------------------------------------------------------


def test_wigner_point_examples():
    ev = wigner_point_circuit(basis_rho(2, 0), 0, 0)
    assert abs(ev.readout.sz - 1) < 1e-12 and abs(ev.value - 0.25) < 1e-12
    ev = wigner_point_circuit(np.eye(8) / 8, 0, 0)
    assert abs(ev.readout.sz - 0.25) < 1e-12


def test_wigner_point_matches_oracle(rng):
    rho = random_density(8, rng=rng)
    for _ in range(40):
        q, p = rng.integers(0, 16, size=2)
        ev = wigner_point_circuit(rho, q, p)
        assert abs(ev.readout.sz - 16 * wigner_direct(rho, q, p)) < 1e-9
        assert abs(ev.readout.sy) < 1e-10


def test_wigner_point_out_of_range():
    with pytest.raises(PointOutOfRange):
        wigner_point_circuit(np.eye(4) / 4, 8, 0)


# --- programs ----------------------------------------------------------------------------


def test_vertical_program_example():
    prog = line_program(HilbertDim(2), LineSpec(1, 0, 2))
    assert prog.K2 == 8
    want_q = np.zeros(8)
    want_q[2] = 1
    assert np.allclose(prog.q_state, want_q)
    assert np.allclose(prog.p_state, np.full(8, 1 / math.sqrt(8)))


def test_program_normalization():
    dim = HilbertDim(3)
    for prog in [
        point_program(dim, 3, 4),
        line_program(dim, LineSpec(0, 1, 5)),
        diagonal_program(dim, 7),
        rectangle_program(dim, 1, 4, 2, 9),
    ]:
        assert abs(np.linalg.norm(prog.state()) - 1) < 1e-12
        assert prog.K2 == np.count_nonzero(np.abs(prog.state()) > 0)
        sz = 0.37
        assert abs(prog.sum_from_readout(sz) - prog.K2 * prog.mean_from_readout(sz)) < 1e-12


def test_line_program_not_axis_aligned():
    with pytest.raises(NotAxisAligned):
        line_program(HilbertDim(2), LineSpec(1, 1, 0))


def test_vertical_line_marginal():
    ev = wigner_line_average(basis_rho(8, 3), LineSpec(1, 0, 6))
    assert abs(ev.value - 1) < 1e-9
    assert abs(ev.readout.sz - 1) < 1e-9  # K^2 = 2N: sz is the sum itself


def test_horizontal_line(rng):
    rho = random_density(8, rng=rng)
    W = wigner_grid(rho)
    for n3 in range(16):
        ev = wigner_line_average(rho, LineSpec(0, 1, n3))
        assert abs(ev.value - W[:, n3].sum()) < 1e-9


# --- cat parameters ------------------------------------------------------------------------


def test_solve_cat_examples():
    for N in (2, 4, 8):
        m = solve_cat_params(LineSpec(1, 1, 3), N)
        assert (m.params.a, m.params.b) == (0, 2) and not m.axis_exchange
    m = solve_cat_params(LineSpec(3, 1, 0), 4)
    assert (m.params.a, m.params.b) == (6, 2)
    assert m.verify(8)
    with pytest.raises(NoOddCoefficient):
        solve_cat_params(LineSpec(2, 2, 1), 4)


def test_solve_cat_axis_exchange():
    m = solve_cat_params(LineSpec(3, 2, 1), 4)
    assert m.axis_exchange
    assert m.verify(8)


@given(st.integers(1, 4), st.integers(0, 10**6), st.integers(0, 10**6), st.integers(0, 10**6))
def test_solve_cat_bijection(n, n1, n2, n3):
    N = 1 << n
    M = 2 * N
    spec = LineSpec(n1 % M, n2 % M, n3 % M) if (n1 % M, n2 % M) != (0, 0) else LineSpec(1, 0, n3 % M)
    if spec.n1 % 2 == 0 and spec.n2 % 2 == 0:
        with pytest.raises(NoOddCoefficient):
            solve_cat_params(spec, N)
        return
    m = solve_cat_params(spec, N)
    src = set(m.mapped_source(M).points(M))
    image = [cat_classical_map(x, m.params, M) for x in m.target.points(M)]
    assert len(set(image)) == len(image) == len(src) and set(image) == src


# --- line and region sums ------------------------------------------------------------------


def test_canonical_line_self_map(rng):
    rho = random_density(8, rng=rng)
    W = wigner_grid(rho)
    for n3 in (0, 3, 11):
        ev = wigner_line_average(rho, LineSpec(1, 1, n3))
        direct = sum(W[q, (n3 - q) % 16] for q in range(16))
        assert abs(ev.value - direct) < 1e-9


@pytest.mark.parametrize("spec", [LineSpec(1, 1, 3), LineSpec(3, 1, 5), LineSpec(1, 3, 2), LineSpec(4, 3, 1), LineSpec(5, 2, 7)])
def test_tilted_lines_match_oracle(spec, rng):
    rho = random_density(8, rng=rng)
    ev = wigner_line_average(rho, spec)
    assert abs(ev.value - brute_line_sum(wigner_grid(rho), spec, 16)) < 1e-9


def test_line_maximally_mixed():
    rho = np.eye(8) / 8
    W = wigner_grid(rho)
    for spec in [LineSpec(1, 1, 3), LineSpec(3, 1, 5), LineSpec(1, 3, 2)]:
        assert abs(wigner_line_average(rho, spec).value - brute_line_sum(W, spec, 16)) < 1e-9


def test_all_odd_lines_n4():
    rho = random_density(4, rng=8)
    W = wigner_grid(rho)
    for n1 in range(8):
        for n2 in range(8):
            if n1 % 2 == 0 and n2 % 2 == 0:
                continue
            for n3 in range(8):
                spec = LineSpec(n1, n2, n3)
                assert abs(wigner_line_average(rho, spec).value - brute_line_sum(W, spec, 8)) < 1e-9


def test_region_examples(rng):
    dim = HilbertDim(3)
    rho = random_density(8, rng=rng)
    W = wigner_grid(rho)
    full = wigner_region_average(rho, (0, 15, 0, 15))
    assert abs(full.value - W.sum()) < 1e-9
    one = wigner_region_average(rho, (5, 5, 9, 9))
    assert abs(one.value - W[5, 9]) < 1e-9
    params = CatParams(0, 2)
    tilted = wigner_region_average(rho, (2, 5, 3, 6), params)
    support = region_support(dim, (2, 5, 3, 6), params)
    assert len(set(support)) == 16
    assert abs(tilted.value - sum(W[x] for x in support)) < 1e-9


def test_region_errors():
    rho = np.eye(4) / 4
    with pytest.raises(EmptyRegion):
        wigner_region_average(rho, (3, 2, 0, 0))
    with pytest.raises(PointOutOfRange):
        wigner_region_average(rho, (0, 8, 0, 0))


# --- Kirkwood --------------------------------------------------------------------------------


def test_kirkwood_examples():
    for q0 in range(4):
        for q in range(4):
            for p in range(4):
                ev = kirkwood_circuit(basis_rho(4, q0), q, p)
                assert abs(ev.value - (q == q0) / 4) < 1e-12
    plus = pure_density(np.array([1, 1]) / math.sqrt(2))
    assert abs(kirkwood_circuit(plus, 0, 0).value - 0.5) < 1e-12
    assert abs(kirkwood_circuit(plus, 1, 0).value - 0.5) < 1e-12
    assert abs(kirkwood_circuit(plus, 0, 1).value) < 1e-12
    assert abs(kirkwood_circuit(plus, 1, 1).value) < 1e-12


def test_kirkwood_grid_matches_oracle(rng):
    rho = random_density(8, rng=rng)
    K = kirkwood_grid(rho)
    total = 0
    for q in range(8):
        for p in range(8):
            v = kirkwood_circuit(rho, q, p).value
            assert abs(v - K[q, p]) < 1e-9
            total += v
    assert abs(total - 1) < 1e-9


def test_kirkwood_out_of_range():
    with pytest.raises(PointOutOfRange):
        kirkwood_circuit(np.eye(4) / 4, 0, 4)


def test_kirkwood_values_are_exponentially_small():
    """For a random pure state at N=64 the typical |K| is a product of three
    1/sqrt(N) amplitudes, below 1/N: resolving it by sampling needs shots
    growing polynomially in N, i.e. exponentially in the qubit count."""
    N = 64
    rho = pure_density(random_state(N, 5))
    K = np.abs(kirkwood_grid(rho))
    med = np.median(K)
    assert med < 1 / N
    assert 0.1 * N**-1.5 < med < 10 * N**-1.5
    ev = kirkwood_circuit(rho, 3, 7)
    assert abs(ev.value - kirkwood_grid(rho)[3, 7]) < 1e-9


# --- Husimi -------------------------------------------------------------------------------------


def test_husimi_examples():
    dim = HilbertDim(3)
    alpha = coherent_state(dim, 3, 1)
    ev = husimi_circuit(pure_density(alpha), alpha)
    assert abs(ev.readout.sz - 1) < 1e-12
    for q in range(8):
        ev = husimi_circuit(np.eye(8) / 8, coherent_state(dim, q, 2))
        assert abs(ev.readout.sz - 1 / 8) < 1e-12


def test_husimi_grid_matches_oracle(rng):
    dim = HilbertDim(3)
    rho = random_density(8, rng=rng)
    total = 0
    for q in range(8):
        for p in range(8):
            alpha = coherent_state(dim, q, p)
            ev = husimi_circuit(rho, alpha)
            assert abs(ev.value - husimi_direct(rho, alpha)) < 1e-9
            assert abs(ev.readout.sy) < 1e-10
            total += ev.value
    assert abs(total - 1) < 1e-9


def test_husimi_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        husimi_circuit(np.eye(4) / 4, np.ones(8) / math.sqrt(8))


# --- sampling -----------------------------------------------------------------------------------


def test_sampled_mode_converges():
    rho = random_density(4, rng=2)
    exact = wigner_point_circuit(rho, 3, 5)
    bad = 0
    for seed in range(200):
        ev = wigner_point_circuit(rho, 3, 5, shots=10**5, seed=seed)
        if abs(ev.value - exact.value) >= 5 * ev.stderr:
            bad += 1
    assert bad <= 2


def test_sampled_kirkwood_and_husimi():
    rho = random_density(4, rng=3)
    ex = kirkwood_circuit(rho, 1, 2)
    s = kirkwood_circuit(rho, 1, 2, shots=10**5, seed=4)
    assert abs(s.value - ex.value) < 6 * s.stderr
    alpha = coherent_state(HilbertDim(2), 1, 1)
    ex = husimi_circuit(rho, alpha)
    s = husimi_circuit(rho, alpha, shots=10**5, seed=4)
    assert abs(s.value - ex.value) < 6 * s.stderr + 1e-12


def test_sweeps_are_seeded():
    rho = random_density(4, rng=3)
    ev = lambda q, p, shots, seed: wigner_point_circuit(rho, q, p, shots, seed)  # noqa: E731
    pts = [(0, 0), (1, 2), (3, 3)]
    a = grid_rows(ev, pts, 1000, 11)
    b = grid_rows(ev, pts, 1000, 11)
    assert a == b
    assert grid_rows(ev, pts, 1000, 12) != a
    exact = grid_rows(ev, pts)
    assert all(r[4] == 0 for r in exact)
    rows = line_rows(rho, [LineSpec(1, 0, 2), LineSpec(1, 1, 0)])
    assert [r[:3] for r in rows] == [(1, 0, 2), (1, 1, 0)]
