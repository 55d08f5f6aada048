"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel is timed on both backends with identical inputs; results are
checked to agree before timings are printed.
"""

import argparse
import timeit

import numpy as np

from phasetomo._backend import available, load


def _state(rng, L, d, R):
    psi = rng.standard_normal((L, d, R)) + 1j * rng.standard_normal((L, d, R))
    return np.ascontiguousarray(psi / np.linalg.norm(psi))


def _unitary(rng, d):
    z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, _ = np.linalg.qr(z)
    return np.ascontiguousarray(q)


def cases(rng):
    # (name, kernel, args)
    out = []
    for L, d, R in [(1, 64, 1 << 10), (1 << 6, 8, 1 << 8), (1 << 10, 2, 1 << 4)]:
        out.append((f"apply_matrix L={L} d={d} R={R}", "apply_matrix", (_state(rng, L, d, R), _unitary(rng, d))))
    for L, d, R, k in [(1 << 7, 16, 1 << 3, 16), (1 << 9, 8, 1 << 2, 2), (1 << 4, 64, 1 << 4, 4)]:
        sel = rng.integers(0, k, (L, R)).astype(np.intp)
        mats = np.ascontiguousarray(np.stack([_unitary(rng, d) for _ in range(k)]))
        out.append((f"apply_selected L={L} d={d} R={R} k={k}", "apply_selected", (_state(rng, L, d, R), sel, mats)))
    for N in (16, 64, 256):
        a = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
        rho = a @ a.conj().T
        out.append((f"wigner_grid N={N}", "wigner_grid", (np.ascontiguousarray(rho / np.trace(rho)),)))
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    backends = {name: load(name) for name in available()}
    if "cython" not in backends:
        print("compiled kernels not built; only the numpy fallback is available")
    rng = np.random.default_rng(args.seed)

    names = list(backends)
    print(f"{'case':42s}" + "".join(f"{n + ' (ms)':>15s}" for n in names) + ("    speedup" if len(names) == 2 else ""))
    for label, kernel, call_args in cases(rng):
        results, times = [], []
        for name in names:
            fn = getattr(backends[name], kernel)
            results.append(fn(*call_args))
            number = 3
            t = min(timeit.repeat(lambda: fn(*call_args), number=number, repeat=args.repeat)) / number
            times.append(t * 1e3)
        for r in results[1:]:
            assert np.allclose(r, results[0], atol=1e-10), label
        line = f"{label:42s}" + "".join(f"{t:15.3f}" for t in times)
        if len(times) == 2:
            line += f"{times[1] / times[0]:10.1f}x"
        print(line)


if __name__ == "__main__":
    main()
