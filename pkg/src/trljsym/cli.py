"""Command-line interface.

Subcommands mirror the experiment axes: ``gen`` writes matrices, ``solve``
runs one algorithm on one matrix, ``compare`` runs the paired study, and
``verify`` cross-checks a solve against the dense oracle.  Every flag can
also come from a flat key=value manifest via --config; flags override the
file.  Exit status is 0 only if all requested runs converged and all
verdicts passed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .cg import CGConfig
from .harness import (
    ExperimentSpec,
    build_problem,
    emit_convergence_csv,
    load_manifest,
    run_experiment,
    verify_against_oracle,
)
from .mmio import save_planted, save_matrix
from .randmat import gen_random_hjs
from .solver import SolverConfig, trlan_jsym, trlan_standard
from .tek import random_tek_operator


def _add_common(p):
    p.add_argument("--config", help="flat key=value manifest; flags override it")
    p.add_argument("--matrix", default=None,
                   help="random | tek | file:PATH (default random)")
    p.add_argument("--n-half", type=int, default=None,
                   help="half dimension for random matrices (default 100)")
    p.add_argument("--d", type=int, default=None, help="color dimension for tek")
    p.add_argument("--su-n", type=int, default=None,
                   help="SU(N) sizing for tek (d = N^2 - 1)")
    p.add_argument("--kappa", type=float, default=None,
                   help="hopping parameter for tek (default 0.19)")
    p.add_argument("--seed", type=int, default=None, help="base seed (default 0)")
    p.add_argument("--out", default=None, help="output directory (default ./out)")


def _add_solver(p):
    p.add_argument("--mode", choices=["normal", "invert"], default=None)
    p.add_argument("--nev", type=int, default=None)
    p.add_argument("--mwin", type=int, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--cg-tol", type=float, default=None)
    p.add_argument("--max-restarts", type=int, default=None)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="trljsym",
        description="Thick-restart Lanczos eigensolvers for Hermitian "
                    "J-symmetric matrices")
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate matrices and write them out")
    _add_common(p_gen)
    p_gen.add_argument("--seeds", type=int, default=None,
                       help="number of consecutive seeds (default 1)")

    p_solve = sub.add_parser("solve", help="run one algorithm on one matrix")
    _add_common(p_solve)
    _add_solver(p_solve)
    p_solve.add_argument("--algo", choices=["jsym", "standard"], default=None)

    p_cmp = sub.add_parser("compare", help="paired study of both algorithms")
    _add_common(p_cmp)
    _add_solver(p_cmp)
    p_cmp.add_argument("--seeds", type=int, default=None,
                       help="number of consecutive seeds (default 1)")

    p_ver = sub.add_parser("verify", help="solve and check against the dense oracle")
    _add_common(p_ver)
    _add_solver(p_ver)
    p_ver.add_argument("--algo", choices=["jsym", "standard"], default=None)
    return parser


_DEFAULTS = {
    "matrix": "random", "n_half": 100, "d": None, "su_n": None,
    "kappa": 0.19, "seed": 0, "seeds": 1, "out": "out",
    "mode": "normal", "nev": 5, "mwin": 10, "m": 50, "tol": 1e-13,
    "cg_tol": None, "max_restarts": 10000, "algo": "jsym",
}

_INT_KEYS = {"n_half", "d", "su_n", "seed", "seeds", "nev", "mwin", "m",
             "max_restarts"}
_FLOAT_KEYS = {"kappa", "tol", "cg_tol"}


def _merge_options(args) -> dict:
    """Defaults, then manifest values, then explicit flags."""
    opts = dict(_DEFAULTS)
    if getattr(args, "config", None):
        for key, value in load_manifest(args.config).items():
            if key not in opts:
                raise ValueError(f"unknown manifest key: {key}")
            if value == "":
                opts[key] = None
            elif key in _INT_KEYS:
                opts[key] = int(value)
            elif key in _FLOAT_KEYS:
                opts[key] = float(value)
            else:
                opts[key] = value
    for key in opts:
        flag = getattr(args, key, None)
        if flag is not None:
            opts[key] = flag
    return opts


def _solver_config(opts) -> SolverConfig:
    cg = CGConfig(tol=opts["cg_tol"]) if opts["cg_tol"] else None
    return SolverConfig(
        nev=opts["nev"], mwin=opts["mwin"], m=opts["m"], mode=opts["mode"],
        tol=opts["tol"], max_restarts=opts["max_restarts"], cg=cg,
        seed=opts["seed"])


def _experiment_spec(opts, seeds, algos) -> ExperimentSpec:
    matrix = opts["matrix"]
    if matrix.startswith("file:"):
        return ExperimentSpec(
            source="file", path=matrix[5:], jsym=_solver_config(opts),
            out_dir=opts["out"], seeds=tuple(seeds), algos=algos)
    if matrix == "tek":
        return ExperimentSpec(
            source="tek", d=opts["d"], su_n=opts["su_n"], kappa=opts["kappa"],
            jsym=_solver_config(opts), out_dir=opts["out"],
            seeds=tuple(seeds), algos=algos)
    if matrix == "random":
        return ExperimentSpec(
            source="random", n_half=opts["n_half"], jsym=_solver_config(opts),
            out_dir=opts["out"], seeds=tuple(seeds), algos=algos)
    raise SystemExit(f"unknown matrix source: {matrix}")


def _seed_range(opts):
    return range(opts["seed"], opts["seed"] + opts["seeds"])


def cmd_gen(opts) -> int:
    out = Path(opts["out"])
    out.mkdir(parents=True, exist_ok=True)
    for seed in _seed_range(opts):
        if opts["matrix"] == "random":
            planted = gen_random_hjs(opts["n_half"], seed)
            path = save_planted(out / f"random_n{planted.dim}_seed{seed}.mtx", planted)
        elif opts["matrix"] == "tek":
            a_op, _, _ = random_tek_operator(
                d=opts["d"], su_n=opts["su_n"], kappa=opts["kappa"], seed=seed)
            path = save_matrix(
                out / f"tek_dim{a_op.dim}_seed{seed}.mtx", a_op.as_matrix(),
                j_realization="spin-tensor", seed=seed,
                extra={"kappa": opts["kappa"]})
        else:
            raise SystemExit("gen supports --matrix random or tek")
        print(f"wrote {path}")
    return 0


def cmd_solve(opts) -> int:
    spec = _experiment_spec(opts, [opts["seed"]], (opts["algo"],))
    report = run_experiment(spec)
    return 0 if report.all_converged else 1


def cmd_compare(opts) -> int:
    spec = _experiment_spec(opts, _seed_range(opts), ("jsym", "standard"))
    report = run_experiment(spec)
    for v in report.violations:
        print(f"violation: {v}")
    return 0 if report.all_converged else 1


def cmd_verify(opts) -> int:
    spec = _experiment_spec(opts, [opts["seed"]], (opts["algo"],))
    op, j_op, _ = build_problem(spec, opts["seed"])
    cfg = spec.jsym if opts["algo"] == "jsym" else spec.resolved_baseline()
    if opts["algo"] == "jsym":
        result = trlan_jsym(op, j_op, cfg)
    else:
        result = trlan_standard(op, cfg)
    out = Path(opts["out"])
    out.mkdir(parents=True, exist_ok=True)
    emit_convergence_csv(result.records,
                         out / f"{opts['algo']}_seed{opts['seed']}.csv")
    which = "smallest" if opts["mode"] == "invert" else "largest"
    verdict = verify_against_oracle(
        op, result, which, cfg.nev if opts["algo"] == "jsym" else cfg.nev // 2,
        result_multiplicity=1 if opts["algo"] == "jsym" else 2)
    for line in verdict.details:
        print(line)
    print(f"verdict: {'pass' if verdict.passed else 'fail'}")
    return 0 if (result.converged and verdict.passed) else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"gen": cmd_gen, "solve": cmd_solve,
                "compare": cmd_compare, "verify": cmd_verify}
    try:
        opts = _merge_options(args)
        return handlers[args.command](opts)
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
