"""One test per acceptance criterion; the terminal summary prints PASS/FAIL per criterion."""

import json
import math

import numpy as np
import pytest

import oracles
from phasetomo.circuits import (
    husimi_circuit,
    kirkwood_circuit,
    solve_cat_params,
    wigner_line_average,
    wigner_point_circuit,
)
from phasetomo.cli import main
from phasetomo.coherent import pe_config, prepare_coherent, square_state, success_frequency
from phasetomo.diagnostics import diagnostics_suite
from phasetomo.phasespace import (
    CatParams,
    HilbertDim,
    LineSpec,
    cat_classical_map,
    cat_map,
    coherent_state,
    continuous_coherent,
    harper_ground,
    husimi_direct,
    husimi_grid,
    kirkwood_direct,
    kirkwood_grid,
    random_density,
    wigner_direct,
    wigner_grid,
)

N64 = HilbertDim(6)
ORACLE_TOL = 1e-9


@pytest.mark.criterion(1, "circuits match direct-trace oracles (N=4,8; 20 mixed states)")
def test_oracle_equivalence():
    rng = np.random.default_rng(101)
    worst = 0.0
    for n in (2, 3):
        dim = HilbertDim(n)
        N, M = dim.N, 2 * dim.N
        alphas = {(q, p): coherent_state(dim, q, p) for q in range(N) for p in range(N)}
        for _ in range(20):
            rho = random_density(N, rng=rng)
            for _ in range(40):
                q, p = (int(x) for x in rng.integers(0, M, 2))
                worst = max(worst, abs(wigner_point_circuit(rho, q, p).value - wigner_direct(rho, q, p)))
            for (q, p), alpha in alphas.items():
                worst = max(worst, abs(kirkwood_circuit(rho, q, p).value - kirkwood_direct(rho, q, p)))
                worst = max(worst, abs(husimi_circuit(rho, alpha).value - husimi_direct(rho, alpha)))
    assert worst < ORACLE_TOL, worst


@pytest.mark.criterion(2, "Kirkwood, Husimi and Wigner distribution identities")
def test_distribution_identities():
    rng = np.random.default_rng(202)
    for n in (2, 3, 4):
        dim = HilbertDim(n)
        for _ in range(5):
            rho = random_density(dim.N, rng=rng)
            K = kirkwood_grid(rho)
            assert abs(K.sum() - 1) < 1e-10
            F = np.fft.ifft(np.eye(dim.N), norm="ortho")  # columns are momentum states
            assert np.max(np.abs(K.sum(axis=1) - np.diag(rho))) < 1e-10
            pdiag = np.einsum("ip,ij,jp->p", F.conj(), rho, F)
            assert np.max(np.abs(K.sum(axis=0) - pdiag)) < 1e-10
            H = husimi_grid(rho)
            assert abs(H.sum() - 1) < 1e-9 and H.min() >= -1e-12
            W = wigner_grid(rho)
            assert np.max(np.abs(np.imag(W))) < 1e-10
    # circuit readouts carry the same identities
    for n in (2, 3):
        dim = HilbertDim(n)
        rho = random_density(dim.N, rng=rng)
        total_k = sum(kirkwood_circuit(rho, q, p).value for q in range(dim.N) for p in range(dim.N))
        assert abs(total_k - 1) < 1e-10
        imag = max(abs(wigner_point_circuit(rho, q, p).readout.sy) for q in range(2 * dim.N) for p in range(2 * dim.N))
        assert imag < 1e-10


def _check_line(rho, W, spec, M):
    mapping = solve_cat_params(spec, M // 2)
    assert mapping.verify(M)
    src = set(mapping.mapped_source(M).points(M))
    image = [cat_classical_map(x, mapping.params, M) for x in mapping.target.points(M)]
    assert len(set(image)) == len(image) and set(image) == src
    brute = sum(W[q, p] for q, p in spec.points(M))
    return abs(wigner_line_average(rho, spec).value - brute)


@pytest.mark.criterion(3, "line averages equal brute-force sums; cat solver is a bijection")
def test_line_averaging():
    rng = np.random.default_rng(303)
    worst = 0.0
    rho = random_density(4, rng=rng)
    W = wigner_grid(rho)
    for n1 in range(8):
        for n2 in range(8):
            if n1 % 2 == 0 and n2 % 2 == 0:
                continue
            for n3 in range(8):
                worst = max(worst, _check_line(rho, W, LineSpec(n1, n2, n3), 8))
    rho = random_density(8, rng=rng)
    W = wigner_grid(rho)
    count = 0
    while count < 30:
        n1, n2, n3 = (int(x) for x in rng.integers(0, 16, 3))
        if n1 % 2 == 0 and n2 % 2 == 0:
            continue
        worst = max(worst, _check_line(rho, W, LineSpec(n1, n2, n3), 16))
        count += 1
    assert worst < ORACLE_TOL, worst


@pytest.mark.criterion(4, "cat map transports W along the classical map")
def test_cat_transport():
    rng = np.random.default_rng(404)
    cases = [(n, CatParams(0, 2)) for n in (2, 3)] + [(n, CatParams(1, 1)) for n in (2, 3)] + [(2, CatParams(6, 2))]
    for n, params in cases:
        dim = HilbertDim(n)
        M = 2 * dim.N
        C = cat_map(dim, params)
        for _ in range(5):
            rho = random_density(dim.N, rng=rng)
            W0 = wigner_grid(rho)
            W1 = wigner_grid(C @ rho @ C.conj().T)
            err = max(abs(W1[cat_classical_map((q, p), params, M)] - W0[q, p]) for q in range(M) for p in range(M))
            assert err < 1e-9, (n, params, err)


@pytest.mark.criterion(5, "square-state overlap with the Harper ground state is 0.94 +- 0.02 at N=64")
def test_square_overlap():
    psi, _ = square_state(N64)
    amp = abs(np.vdot(harper_ground(N64), psi))
    print(f"\nsquare-state overlap |<Phi0|sq>| = {amp:.6f} (probability {amp**2:.6f})")
    assert abs(amp - 0.94) <= 0.02


@pytest.mark.criterion(6, "filter success frequency >= 0.70 - 3 sigma over 2000 runs, t = n + 2")
def test_filter_success():
    cfg = pe_config(6, epsilon=0.25)
    assert cfg.t == 6 + 2 and cfg.power_policy == "exact"
    sq, _ = square_state(N64)
    runs = 2000
    freq, exact = success_frequency(sq, cfg, runs, seed=1)
    sigma = math.sqrt(0.70 * 0.30 / runs)
    print(f"\nsuccess frequency {freq:.4f} (exact {exact:.4f}, bound {0.70 - 3 * sigma:.4f})")
    assert freq >= 0.70 - 3 * sigma


@pytest.mark.criterion(7, "ground-phase gap is linear in gamma (R^2 > 0.99) at N=32,64")
def test_gap_linearity():
    for n in (5, 6):
        d = diagnostics_suite(HilbertDim(n), "gap_vs_gamma")
        g = d.column("gamma") * 2**n
        assert g.min() > 0 and g.max() < 0.6
        print(f"\nN={2**n}: slope {d.summary['slope']:.4f}, R^2 {d.summary['r2']:.6f}")
        assert d.summary["r2"] > 0.99


@pytest.mark.criterion(8, "semiclassical fidelity threshold: F > 0.99 to t_s, F < 0.9 by t_s + 2 (N=64, N gamma=0.1)")
def test_semiclassical_threshold():
    d = diagnostics_suite(N64, "fidelity_curve", gamma=0.1 / 64, t_max=12)
    F = d.column("fidelity")
    ts = d.summary["t_s"]
    print(f"\nt_s = {ts}; F = {np.round(F, 4).tolist()}")
    assert ts >= 0 and np.all(F[: ts + 1] > 0.99)
    assert F[ts + 2] < 0.9, f"F(t_s+2) = {F[ts + 2]:.4f}"


@pytest.mark.criterion(9, "parameter-region curves parallel within fit error and 3 +- 1 qubits apart (N=64)")
def test_parameter_region():
    s = diagnostics_suite(N64, "parameter_region").summary
    print("\n" + json.dumps(s, indent=1))
    assert abs(s["offset_qubits"] - 3) <= 1
    assert s["slope_difference_sigma"] <= 3, f"slopes differ by {s['slope_difference_sigma']:.2f} sigma"


@pytest.mark.criterion(10, "three filter rounds at N=64: nondecreasing overlap, final > 0.99")
def test_iterative_filtering():
    cfg = pe_config(6)
    for seed in range(5):
        _, stats = prepare_coherent(N64, 0, 0, cfg, 3, seed)
        ov = [stats.initial_overlap, *stats.overlaps]
        assert all(b >= a for a, b in zip(ov, ov[1:])), ov
        assert stats.final_overlap > 0.99
        assert stats.final_overlap >= oracles.FINAL_OVERLAP_REGRESSION_BOUND


@pytest.mark.criterion(11, "continuous and discrete coherent states agree: |<.|.>|^2 > 0.999 at N=64")
def test_continuous_discrete():
    ov = abs(np.vdot(harper_ground(N64), continuous_coherent(N64, 0, 0))) ** 2
    print(f"\n|<Phi0|0,0>_c|^2 = {ov:.8f}")
    assert ov > 0.999


@pytest.mark.criterion(12, "repeated seeded CLI runs are byte-identical")
def test_cli_determinism(tmp_path):
    commands = [
        ["wigner", "--n", "3", "--shots", "500", "--seed", "42", "--state", "pure:basis:3"],
        ["husimi", "--n", "2", "--shots", "100", "--seed", "42"],
        ["wigner-line", "--n", "2", "--shots", "100", "--seed", "42", "--line", "1,1,3"],
        ["figures", "--which", "filter", "--rounds", "3", "--n", "6", "--seed", "7"],
        ["figures", "--which", "fidelity", "--n", "6"],
    ]
    for i, argv in enumerate(commands):
        outs = []
        for rep in range(2):
            d = tmp_path / f"{i}_{rep}"
            assert main([*argv, "--out", str(d)]) == 0
            outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.name != "manifest.json"})
        assert outs[0] == outs[1], argv
