"""Experiment harness: paired solver runs, cost accounting, CSV reports.

Reproduces the two shipped studies at configurable scale: random planted
matrices solved in normal mode for the largest eigenvalues, and the
spin-tensor operator solved in either mode.  Every run is checked against
an independent matvec tally and the restart-count cost bounds; results
land in per-run convergence CSVs plus a deterministic summary CSV
(wall-clock timing is reported on stdout only, never in the CSVs).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .linalg import hermitian_eig
from .randmat import gen_random_hjs
from .solver import EigenResult, SolverConfig, doubled_config, trlan_jsym, trlan_standard
from .tek import random_tek_operator
from . import mmio

CSV_HEADER = "restart,cum_matvec,target_index,eig_estimate,res_estimate,res_true,converged"

ORACLE_DIM_LIMIT = 1000
ORACLE_MATCH_TOL = 1e-9
ORACLE_PAIR_TOL = 1e-10


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def emit_convergence_csv(records, path):
    """Write convergence records as CSV (LF endings, 17 significant digits).

    ``res_true`` is left empty for restarts where it was not computed.
    """
    records = list(records)
    if not records:
        raise ValueError("no records to emit")
    path = Path(path)
    lines = [CSV_HEADER]
    for r in records:
        res_true = "" if r.res_true is None else _fmt(r.res_true)
        lines.append(
            f"{r.restart},{r.cum_matvec},{r.target_index},"
            f"{_fmt(r.eig_estimate)},{_fmt(r.res_estimate)},{res_true},"
            f"{'true' if r.converged else 'false'}"
        )
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def read_convergence_csv(path):
    """Parse a convergence CSV back into records (bit-exact round trip)."""
    from .solver import ConvergenceRecord

    with open(path, newline="\n") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError(f"unexpected CSV header in {path}")
    out = []
    for line in lines[1:]:
        restart, cum, target, eig, res_est, res_true, conv = line.split(",")
        out.append(ConvergenceRecord(
            restart=int(restart),
            cum_matvec=int(cum),
            target_index=int(target),
            eig_estimate=float(eig),
            res_estimate=float(res_est),
            res_true=None if res_true == "" else float(res_true),
            converged={"true": True, "false": False}[conv],
        ))
    return out


def nmv_bounds(cfg: SolverConfig, n_conv: int):
    """Open-interval bounds on the matvec count after ``n_conv`` cycles."""
    lower = cfg.m + (cfg.m - cfg.mwin - cfg.nev) * (n_conv - 1)
    upper = cfg.m + (cfg.m - cfg.mwin) * (n_conv - 1)
    return lower, upper


def check_nmv_bounds(cfg: SolverConfig, result: EigenResult):
    """Strict bound check; None when only one cycle ran.

    In invert mode the reported count includes one boundary-norm
    recomputation per cycle, subtracted before checking.
    """
    if result.n_restarts <= 1:
        return None
    offset = result.n_restarts if cfg.mode == "invert" else 0
    adjusted = result.n_mv - offset
    lower, upper = nmv_bounds(cfg, result.n_restarts)
    return lower < adjusted < upper


@dataclass(frozen=True)
class ExperimentSpec:
    """One paired study: a matrix source, solver configs, seeds, output dir.

    ``baseline`` defaults to the doubled variant of ``jsym`` (both members
    of every degenerate pair must be found without the dual basis).
    """

    source: str                    # "random" | "tek" | "file"
    jsym: SolverConfig
    out_dir: str | Path
    seeds: tuple = (0,)
    algos: tuple = ("jsym", "standard")
    baseline: SolverConfig | None = None
    n_half: int | None = None      # random source
    d: int | None = None           # tek source
    su_n: int | None = None
    kappa: float = 0.19
    path: str | None = None        # file source

    def resolved_baseline(self) -> SolverConfig:
        return self.baseline if self.baseline is not None else doubled_config(self.jsym)


@dataclass
class RunStats:
    seed: int
    algo: str
    converged: bool
    n_restarts: int
    n_mv: int
    bound_ok: bool | None
    tally_ok: bool
    wall_time: float
    eigenvalues: tuple
    error: str | None = None


@dataclass
class ComparisonReport:
    runs: list = field(default_factory=list)
    aggregates: dict = field(default_factory=dict)
    cost_ratio: float | None = None
    all_converged: bool = False
    violations: list = field(default_factory=list)

    def stats_for(self, algo):
        return [r for r in self.runs if r.algo == algo]


def build_problem(spec: ExperimentSpec, seed: int):
    """Returns (operator, j_operator, planted-or-None) for one seed."""
    if spec.source == "random":
        if spec.n_half is None:
            raise ValueError("random source needs n_half")
        planted = gen_random_hjs(spec.n_half, seed)
        return planted.operator(), planted.j_operator(), planted
    if spec.source == "tek":
        a_op, j_op, _ = random_tek_operator(
            d=spec.d, su_n=spec.su_n, kappa=spec.kappa, seed=seed)
        return a_op, j_op, None
    if spec.source == "file":
        if spec.path is None:
            raise ValueError("file source needs path")
        op, j_op, _ = mmio.load_dense_operator(spec.path)
        if j_op is None:
            raise ValueError("matrix file has no J realization in its sidecar")
        return op, j_op, None
    raise ValueError(f"unknown source {spec.source!r}")


def run_experiment(spec: ExperimentSpec, log=print) -> ComparisonReport:
    """Run the paired study and write per-run CSVs plus summary.csv.

    Deterministic for a fixed ``spec`` (timings go to ``log`` only).  A
    solver failure is recorded for its run and does not abort the batch.
    """
    out = Path(spec.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = ComparisonReport()
    configs = {"jsym": spec.jsym, "standard": spec.resolved_baseline()}
    for seed in spec.seeds:
        try:
            op, j_op, _ = build_problem(spec, seed)
        except Exception as err:  # noqa: BLE001 - batch keeps going
            for algo in spec.algos:
                report.runs.append(RunStats(
                    seed=seed, algo=algo, converged=False, n_restarts=0,
                    n_mv=0, bound_ok=None, tally_ok=True, wall_time=0.0,
                    eigenvalues=(), error=f"matrix build failed: {err}"))
            log(f"seed {seed}: matrix build FAILED ({err})")
            continue
        # tolerances are absolute; a large operator norm means the caller
        # should rescale the input
        norm_est = op.norm_estimate()
        if norm_est > 10.0:
            log(f"seed {seed}: warning: operator norm estimate {norm_est:.3g} "
                "exceeds 10; absolute tolerances may be inappropriate, "
                "consider rescaling")
        for algo in spec.algos:
            cfg = configs[algo]
            before = op.n_matvec
            t0 = time.perf_counter()
            try:
                if algo == "jsym":
                    result = trlan_jsym(op, j_op, cfg)
                else:
                    result = trlan_standard(op, cfg)
            except Exception as err:  # noqa: BLE001 - batch keeps going
                wall = time.perf_counter() - t0
                report.runs.append(RunStats(
                    seed=seed, algo=algo, converged=False, n_restarts=0,
                    n_mv=op.n_matvec - before, bound_ok=None, tally_ok=True,
                    wall_time=wall, eigenvalues=(), error=str(err)))
                log(f"seed {seed} {algo}: FAILED ({err})")
                continue
            wall = time.perf_counter() - t0
            tally_ok = (op.n_matvec - before) == result.n_mv
            # cost bounds are stated for completed runs only
            bound_ok = check_nmv_bounds(cfg, result) if result.converged else None
            stats = RunStats(
                seed=seed, algo=algo, converged=result.converged,
                n_restarts=result.n_restarts, n_mv=result.n_mv,
                bound_ok=bound_ok, tally_ok=tally_ok, wall_time=wall,
                eigenvalues=tuple(float(x) for x in result.eigenvalues))
            report.runs.append(stats)
            if not tally_ok:
                report.violations.append(
                    f"seed {seed} {algo}: matvec tally mismatch "
                    f"({op.n_matvec - before} counted vs {result.n_mv} reported)")
            if bound_ok is False:
                lo, up = nmv_bounds(cfg, result.n_restarts)
                report.violations.append(
                    f"seed {seed} {algo}: N_MV {result.n_mv} outside ({lo}, {up})")
            log(f"seed {seed} {algo}: converged={result.converged} "
                f"N_conv={result.n_restarts} N_MV={result.n_mv} "
                f"time={wall:.2f}s")
            emit_convergence_csv(result.records, out / f"{algo}_seed{seed}.csv")

    for algo in spec.algos:
        done = [r for r in report.stats_for(algo) if r.converged]
        if done:
            nmv = [r.n_mv for r in done]
            ncv = [r.n_restarts for r in done]
            report.aggregates[algo] = {
                "runs": len(done),
                "n_mv": (min(nmv), sum(nmv) / len(nmv), max(nmv)),
                "n_conv": (min(ncv), sum(ncv) / len(ncv), max(ncv)),
            }
    # ratio restricted to seeds where both runs converged
    if "jsym" in spec.algos and "standard" in spec.algos:
        paired = {}
        for r in report.runs:
            if r.converged:
                paired.setdefault(r.seed, {})[r.algo] = r.n_mv
        both = [v for v in paired.values() if len(v) == 2]
        if both:
            avg_std = sum(v["standard"] for v in both) / len(both)
            avg_jsym = sum(v["jsym"] for v in both) / len(both)
            report.cost_ratio = avg_std / avg_jsym
    report.all_converged = bool(report.runs) and all(
        r.converged for r in report.runs)

    _write_summary(report, out / "summary.csv")
    for algo, agg in sorted(report.aggregates.items()):
        lo, avg, hi = agg["n_mv"]
        log(f"{algo}: N_MV [min {lo}, avg {avg:.1f}, max {hi}] over {agg['runs']} runs")
    if report.cost_ratio is not None:
        log(f"cost ratio (standard/jsym, avg N_MV): {report.cost_ratio:.3f}")
    elif len(spec.algos) < 2:
        log("cost ratio: undefined (single-algorithm study)")
    return report


def _write_summary(report: ComparisonReport, path):
    lines = ["seed,algo,converged,n_conv,n_mv,bound_ok,tally_ok,error"]
    for r in report.runs:
        bound = "" if r.bound_ok is None else ("true" if r.bound_ok else "false")
        err = r.error.replace(",", ";").replace("\n", " ") if r.error else ""
        lines.append(
            f"{r.seed},{r.algo},{'true' if r.converged else 'false'},"
            f"{r.n_restarts},{r.n_mv},{bound},"
            f"{'true' if r.tally_ok else 'false'},{err}")
    if report.cost_ratio is not None:
        lines.append(f"ratio,,,,{_fmt(report.cost_ratio)},,,")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


@dataclass(frozen=True)
class OracleVerdict:
    passed: bool
    details: tuple

    def __bool__(self):
        return self.passed


def cluster_eigenvalues(values, gap):
    """Group sorted values into clusters separated by more than ``gap``."""
    values = np.sort(np.asarray(values, dtype=float))
    groups = [[values[0]]]
    for x in values[1:]:
        if x - groups[-1][-1] <= gap:
            groups[-1].append(x)
        else:
            groups.append([x])
    return [(float(np.mean(g)), len(g)) for g in groups]


def verify_against_oracle(op, result: EigenResult, which: str, count: int,
                          result_multiplicity: int = 1,
                          expect_pairs: bool = True,
                          match_tol: float = ORACLE_MATCH_TOL,
                          pair_tol: float = ORACLE_PAIR_TOL) -> OracleVerdict:
    """Check solver eigenvalues against the dense Jacobi oracle.

    Materializes the operator (dimension capped), extracts the ``count``
    extreme distinct eigenvalues at the requested end, and verifies each
    solver value sits within ``match_tol`` of its oracle partner with the
    expected multiplicity.  With ``expect_pairs`` every relevant oracle
    cluster must have size exactly two (degenerate pairing within
    ``pair_tol``).
    """
    if which not in ("largest", "smallest"):
        raise ValueError("which must be 'largest' or 'smallest'")
    if op.dim > ORACLE_DIM_LIMIT:
        raise ValueError(f"dimension {op.dim} too large to materialize")
    dense = op.as_matrix()
    oracle, _ = hermitian_eig(dense)
    clusters = cluster_eigenvalues(oracle, pair_tol)
    if which == "largest":
        clusters = clusters[::-1]
    chosen = clusters[:count]
    details = []
    passed = True
    if len(chosen) < count:
        passed = False
        details.append(f"oracle found only {len(chosen)} distinct values")
    if expect_pairs:
        for value, mult in chosen:
            if mult != 2:
                passed = False
                details.append(
                    f"oracle multiplicity {mult} != 2 at eigenvalue {value:.12g}")
    got = cluster_eigenvalues(result.eigenvalues, pair_tol)
    if which == "largest":
        got = got[::-1]
    if len(got) != len(chosen):
        passed = False
        details.append(f"{len(got)} distinct solver values vs {len(chosen)} expected")
    for (ov, _), (sv, sm) in zip(chosen, got):
        gap = abs(ov - sv)
        if gap > match_tol:
            passed = False
            details.append(f"solver {sv:.15g} vs oracle {ov:.15g} (gap {gap:.3e})")
        else:
            details.append(f"match {ov:.15g} (gap {gap:.3e})")
        if sm != result_multiplicity:
            passed = False
            details.append(
                f"solver multiplicity {sm} != {result_multiplicity} at {sv:.15g}")
    return OracleVerdict(passed=passed, details=tuple(details))


def load_manifest(path) -> dict:
    """Parse a flat key=value manifest (blank lines and # comments skipped)."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out
