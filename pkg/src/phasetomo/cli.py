"""Command-line front end.

Every subcommand writes its tables (CSV) and a ``manifest.json`` into the
output directory. Exit codes: 0 success, 1 usage error, 2 numeric or
validation failure (the error class name is printed).

Settings come from, in increasing priority: built-in defaults, a JSON file
given with ``--config``, and command-line flags.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import __version__  # noqa: F401
from . import circuits, coherent, diagnostics, stateio
from .errors import PhaseTomoError, UnknownFigure
from .phasespace import CatParams, HilbertDim, LineSpec, coherent_state, validate_density

DEFAULTS = {
    "n": 6,
    "seed": 0,
    "shots": 0,
    "gamma": None,  # 0.5 / N for filtering, per-figure defaults otherwise
    "epsilon": 0.25,
    "rounds": 1,
    "state": "mixed:maximally",
    "out": "out",
    "policy": "exact",
}

FIGURES = {
    "populations": ("populations", "populations"),
    "eigen": ("eigenconvergence", "eigen"),
    "fidelity": ("fidelity_curve", "fidelity"),
    "gap": ("gap_vs_gamma", "gap"),
    "region": ("parameter_region", "region"),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    n: int
    seed: int
    shots: int
    gamma: float | None
    epsilon: float
    rounds: int
    state: str
    out: str
    policy: str


def _ints(text: str, count: int, flag: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"{flag}: expected {count} comma-separated integers, got {text!r}") from None
    if len(vals) != count:
        raise UsageError(f"{flag}: expected {count} comma-separated integers, got {text!r}")
    return vals


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--n", type=int, help="system qubits (N = 2^n)")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--shots", type=int, help="probe shots per value (0 = exact)")
    common.add_argument("--gamma", type=float, help="kick strength")
    common.add_argument("--epsilon", type=float, help="phase-estimation failure budget")
    common.add_argument("--rounds", type=int, help="filter rounds")
    common.add_argument("--state", help="state file, mixed:maximally or pure:basis:<k>")
    common.add_argument("--policy", choices=coherent.POLICIES, help="controlled-power policy")
    common.add_argument("--out", help="output directory")
    common.add_argument("--config", help="JSON file with any of the settings above")

    parser = _Parser(prog="phasetomo", description="Phase-space tomography circuits and coherent-state preparation.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    for name in ("wigner", "kirkwood", "husimi"):
        p = sub.add_parser(name, parents=[common], help=f"{name} values at one point or over the whole grid")
        p.add_argument("--point", help="q,p (default: every grid point)")
    p = sub.add_parser("wigner-line", parents=[common], help="sum of W along lines n1 q + n2 p = n3")
    p.add_argument("--line", action="append", help="n1,n2,n3 (repeatable; default: all vertical lines)")
    p = sub.add_parser("wigner-region", parents=[common], help="sum of W over a (tilted) rectangle")
    p.add_argument("--rect", required=True, help="q1,q2,p1,p2 (inclusive)")
    p.add_argument("--cat", help="a,b cat-map parameters tilting the region")
    p = sub.add_parser("prep-coherent", parents=[common], help="prepare a coherent state by filtering")
    p.add_argument("--point", help="q,p target (default 0,0)")
    p = sub.add_parser("diagnostics", parents=[common], help="one spectral diagnostic table")
    p.add_argument("--request", required=True, help=", ".join(diagnostics.REQUESTS))
    p = sub.add_parser("figures", parents=[common], help="data behind one figure")
    p.add_argument("--which", required=True, help=", ".join([*FIGURES, "filter"]))
    return parser


def resolve_config(args) -> RunConfig:
    values = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"--config: cannot read {args.config}: {exc}") from None
        unknown = set(loaded) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"--config: unknown keys {sorted(unknown)}")
        values.update(loaded)
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    cfg = RunConfig(**values)
    if not isinstance(cfg.n, int) or cfg.n < 2:
        raise UsageError(f"--n must be an integer >= 2, got {cfg.n!r}")
    if cfg.n > 8:
        raise UsageError(f"--n {cfg.n} is beyond desk scale (max 8)")
    if not 0 < cfg.epsilon < 1:
        raise UsageError(f"--epsilon must lie in (0, 1), got {cfg.epsilon}")
    if cfg.shots < 0 or cfg.rounds < 1:
        raise UsageError("--shots must be >= 0 and --rounds >= 1")
    if cfg.gamma is not None and not cfg.gamma > 0:
        raise UsageError(f"--gamma must be > 0, got {cfg.gamma}")
    return cfg


def load_state(spec: str, N: int) -> np.ndarray:
    """Density matrix from a file path, ``mixed:maximally`` or ``pure:basis:<k>``."""
    if spec == "mixed:maximally":
        return np.eye(N, dtype=complex) / N
    if spec.startswith("pure:basis:"):
        try:
            k = int(spec.split(":")[2])
        except ValueError:
            raise UsageError(f"--state: bad basis index in {spec!r}") from None
        if not 0 <= k < N:
            raise UsageError(f"--state: basis index {k} outside [0, {N})")
        rho = np.zeros((N, N), dtype=complex)
        rho[k, k] = 1
        return rho
    if not os.path.isfile(spec):
        raise UsageError(f"--state: no such file {spec!r}")
    a = stateio.load(spec)
    if a.ndim == 1:
        a = np.outer(a, a.conj())
    return validate_density(a, N)


class Outputs:
    def __init__(self, directory: str):
        self.dir = directory
        self.files: list[dict] = []
        os.makedirs(directory, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.dir, name)

    def table(self, name: str, header, rows) -> None:
        count = stateio.write_csv(self.path(name), header, rows)
        self.files.append({"path": name, "rows": count})

    def json(self, name: str, data) -> None:
        with open(self.path(name), "w", encoding="utf-8", newline="\n") as fh:
            json.dump(data, fh, indent=2, sort_keys=True)
            fh.write("\n")
        self.files.append({"path": name, "rows": None})

    def state(self, name: str, psi) -> None:
        stateio.save(self.path(name), psi)
        self.files.append({"path": name, "rows": 1})


def _grid(evaluate, modulus, point, cfg):
    if point is not None:
        q, p = _ints(point, 2, "--point")
        pts = [(q, p)]
    else:
        pts = [(q, p) for q in range(modulus) for p in range(modulus)]
    return circuits.grid_rows(evaluate, pts, cfg.shots, cfg.seed)


def _pe(cfg: RunConfig, dim: HilbertDim):
    return coherent.pe_config(dim.n, cfg.epsilon, cfg.gamma, cfg.policy)


def run_command(args, cfg: RunConfig, out: Outputs) -> None:
    dim = HilbertDim(cfg.n)
    N = dim.N
    cmd = args.command

    if cmd in ("wigner", "kirkwood", "husimi"):
        rho = load_state(cfg.state, N)
        if cmd == "wigner":
            ev = lambda q, p, shots, seed: circuits.wigner_point_circuit(rho, q, p, shots, seed)  # noqa: E731
            modulus = 2 * N
        elif cmd == "kirkwood":
            ev = lambda q, p, shots, seed: circuits.kirkwood_circuit(rho, q, p, shots, seed)  # noqa: E731
            modulus = N
        else:
            ev = lambda q, p, shots, seed: circuits.husimi_circuit(rho, coherent_state(dim, q, p), shots, seed)  # noqa: E731
            modulus = N
        out.table(f"{cmd}.csv", circuits.GRID_HEADER, _grid(ev, modulus, args.point, cfg))

    elif cmd == "wigner-line":
        rho = load_state(cfg.state, N)
        if args.line:
            specs = [LineSpec(*_ints(s, 3, "--line")) for s in args.line]
        else:
            specs = [LineSpec(1, 0, n3) for n3 in range(2 * N)]
        out.table("wigner_line.csv", circuits.LINE_HEADER, circuits.line_rows(rho, specs, cfg.shots, cfg.seed))

    elif cmd == "wigner-region":
        rho = load_state(cfg.state, N)
        rect = _ints(args.rect, 4, "--rect")
        params = CatParams(*_ints(args.cat, 2, "--cat")) if args.cat else None
        ev = circuits.wigner_region_average(rho, rect, params, cfg.shots, cfg.seed if cfg.shots else None)
        a, b = (params.a, params.b) if params else ("", "")
        out.table("wigner_region.csv", circuits.REGION_HEADER, [(*rect, a, b, ev.value, ev.stderr)])

    elif cmd == "prep-coherent":
        q, p = _ints(args.point, 2, "--point") if args.point else (0, 0)
        psi, stats = coherent.prepare_coherent(dim, q, p, _pe(cfg, dim), cfg.rounds, cfg.seed)
        out.state("coherent_state.txt", psi)
        out.table("prep_rounds.csv", ROUND_HEADER, _round_rows(stats))
        out.json("prep_stats.json", stats.as_json())

    elif cmd == "diagnostics":
        d = _diagnostic(args.request, dim, cfg)
        out.table(f"{args.request}.csv", d.header, d.rows)
        out.json(f"{args.request}_summary.json", d.summary)

    elif cmd == "figures":
        _figure(args.which, dim, cfg, out)


ROUND_HEADER = ("round", "success_probability", "overlap")


def _round_rows(stats) -> list[tuple]:
    return [(r + 1, sp, ov) for r, (sp, ov) in enumerate(zip(stats.success_probabilities, stats.overlaps))]


def _diagnostic(request: str, dim: HilbertDim, cfg: RunConfig):
    opts = {}
    if cfg.gamma is not None and request == "fidelity_curve":
        opts["gamma"] = cfg.gamma
    return diagnostics.diagnostics_suite(dim, request, **opts)


def _figure(which: str, dim: HilbertDim, cfg: RunConfig, out: Outputs) -> None:
    if which == "filter":
        _, stats = coherent.prepare_coherent(dim, 0, 0, _pe(cfg, dim), cfg.rounds, cfg.seed)
        pops = [
            (r + 1, n, float(abs(psi[n]) ** 2)) for r, psi in enumerate(stats.states) for n in range(dim.N)
        ]
        out.table("filter_populations.csv", ("round", "n", "population"), pops)
        out.table("filter_rounds.csv", ROUND_HEADER, _round_rows(stats))
        out.json("filter_stats.json", stats.as_json())
        return
    if which not in FIGURES:
        raise UnknownFigure(f"unknown figure {which!r}; choose from {[*FIGURES, 'filter']}")
    request, stem = FIGURES[which]
    d = _diagnostic(request, dim, cfg)
    out.table(f"{stem}.csv", d.header, d.rows)
    out.json(f"{stem}_summary.json", d.summary)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = resolve_config(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    start = time.perf_counter()
    out = Outputs(cfg.out)
    try:
        run_command(args, cfg, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (PhaseTomoError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    manifest = {
        "command": args.command,
        "argv": argv,
        "config": asdict(cfg),
        "version": __version__,
        "wall_time_s": round(time.perf_counter() - start, 6),
        "files": out.files,
    }
    with open(out.path("manifest.json"), "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
