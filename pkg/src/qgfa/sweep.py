"""(t, p) grids for the gradient-flow solver and p grids for the inverse baseline."""
from __future__ import annotations

import csv
import functools
import json
import logging
import math
import multiprocessing
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .approx import TargetFunction, chebyshev_fit
from .errors import ParameterError
from .fem import FemProblem, SpdSystem, cantilever_problem, pad_to_power_of_two, tensile_problem
from .flow import relative_error, solve_direct
from .qcirc import run_qgfa
from .qmia import relative_error_inv, run_qmia
from .qsp import ResponseReport, find_phases, response_report
from .softabs import solve_epsilon_pair

log = logging.getLogger(__name__)

DEFAULT_T = (100.0, 300.0, 500.0, 1000.0, 2000.0, 3000.0)
DEFAULT_P = (500, 1000, 2000, 3000, 4000)
CSV_HEADER = ("t", "p", "R", "success_prob", "sup_err_g1", "sup_err_g2")
QMIA_HEADER = ("p", "R_inv")
RESPONSE_HEADER = ("x", "target", "response", "abs_error")


@dataclass
class SweepConfig:
    """Grid definition.  ``p`` counts phases over both branches, so each
    branch gets ``p/2`` phases, i.e. a fit of degree ``p/2 - 1``."""

    problem: str = "tensile"
    t_values: list = field(default_factory=lambda: list(DEFAULT_T))
    p_values: list = field(default_factory=lambda: list(DEFAULT_P))
    mode: str = "ideal_polynomial"
    eta: float = 1e-6
    epsilon_apx: float = 1e-3
    output: str | None = None
    seed: int = 0
    workers: int = 1
    timeout: float | None = 300.0
    phase_degree_cap: int = 1024
    qmia: bool = True
    response: dict | None = None  # {"kind", "degree", "grid", optional "t"}

    def __post_init__(self):
        self.t_values = [float(t) for t in self.t_values]
        self.p_values = [int(p) for p in self.p_values]
        if not self.t_values or not self.p_values:
            raise ParameterError("t_values and p_values must be non-empty")
        if any(t < 0 for t in self.t_values):
            raise ParameterError("t values must be nonnegative")
        if any(p < 2 or p % 2 for p in self.p_values):
            raise ParameterError("p values must be even and >= 2")
        if self.mode not in ("circuit", "ideal_polynomial"):
            raise ParameterError(f"unknown mode {self.mode!r}")
        if not 0 < self.eta < 1 or not 0 < self.epsilon_apx < 1:
            raise ParameterError("eta and epsilon_apx must lie in (0, 1)")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")

    @classmethod
    def from_json(cls, doc: dict) -> "SweepConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(doc) - known
        if extra:
            raise ParameterError(f"unknown config keys: {sorted(extra)}")
        return cls(**doc)

    @classmethod
    def load(cls, path) -> "SweepConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class SweepRow:
    t: float
    p: int
    R: float
    success_prob: float
    sup_err_g1: float
    sup_err_g2: float
    error: str | None = None

    def values(self):
        return (self.t, self.p, self.R, self.success_prob, self.sup_err_g1, self.sup_err_g2)


@dataclass
class QmiaRow:
    p: int
    R_inv: float
    error: str | None = None


@dataclass
class SweepResult:
    rows: list
    qmia_rows: list
    metadata: dict
    response: ResponseReport | None = None


def load_problem(spec: str) -> SpdSystem:
    """Built-in problem name, a mesh JSON file, or an assembled-system JSON file."""
    if spec == "tensile":
        return tensile_problem().build()
    if spec == "cantilever":
        return cantilever_problem().build()
    path = Path(spec)
    if not path.exists():
        raise ParameterError(f"unknown problem {spec!r} (not a built-in name or a file)")
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return SpdSystem.from_json(doc) if "matrix" in doc else FemProblem.from_json(doc).build()


@functools.lru_cache(maxsize=256)
def _fits(kappa: float, t: float, eta: float, degree: int):
    if t == 0:
        one = TargetFunction.constant(1.0)
        return chebyshev_fit(one, degree), chebyshev_fit(one, degree), None
    eps = solve_epsilon_pair(kappa, t, eta)
    return (chebyshev_fit(TargetFunction.g1(t, eps), degree),
            chebyshev_fit(TargetFunction.g2tilde(t, eps), degree), eps)


@functools.lru_cache(maxsize=64)
def _inverse_fit(kappa: float, epsilon_apx: float, degree: int):
    return chebyshev_fit(TargetFunction.ginv(kappa, epsilon_apx), degree)


def _check_cap(degree, cfg):
    if cfg["mode"] == "circuit" and degree > cfg["phase_degree_cap"]:
        raise ParameterError(
            f"degree {degree} exceeds the phase-solver cap {cfg['phase_degree_cap']}; "
            "use ideal_polynomial mode")


def _qgfa_cell(system: SpdSystem, u_star, t: float, p: int, cfg: dict):
    degree = p // 2 - 1
    _check_cap(degree, cfg)
    fit1, fit2, _ = _fits(system.kappa, t, cfg["eta"], degree)
    if cfg["mode"] == "circuit":
        b1, b2 = find_phases(fit1), find_phases(fit2)
    else:
        b1, b2 = fit1, fit2
    out = run_qgfa(system, b1, b2, t, cfg["mode"])
    return (relative_error(out.u_qc, u_star), out.success_probability,
            fit1.sup_error, fit2.sup_error)


def _qmia_cell(system: SpdSystem, u_star, p: int, cfg: dict):
    degree = p - 1
    _check_cap(degree, cfg)
    fit = _inverse_fit(system.kappa, cfg["epsilon_apx"], degree)
    branch = find_phases(fit) if cfg["mode"] == "circuit" else fit
    return relative_error_inv(run_qmia(system, branch, cfg["mode"]).u_inv, u_star)


def _run_task(task):
    kind, system, u_star, args, cfg = task
    t0 = time.perf_counter()
    try:
        fn = _qgfa_cell if kind == "qgfa" else _qmia_cell
        return fn(system, u_star, *args, cfg), None, time.perf_counter() - t0
    except Exception as exc:  # noqa: BLE001  (a failed cell becomes an error row)
        return None, f"{type(exc).__name__}: {exc}", time.perf_counter() - t0


def _execute(tasks, cfg: SweepConfig):
    """Run tasks and return results in task order."""
    if cfg.workers == 1 and cfg.timeout is None:
        return [_run_task(task) for task in tasks]
    results = []
    pool = multiprocessing.get_context("fork").Pool(cfg.workers)
    try:
        pending = [pool.apply_async(_run_task, (task,)) for task in tasks]
        for job in pending:
            try:
                results.append(job.get(timeout=cfg.timeout))
            except multiprocessing.TimeoutError:
                results.append((None, f"timeout after {cfg.timeout} s", cfg.timeout))
    finally:
        pool.terminate()
        pool.join()
    return results


def run_sweep(config: SweepConfig) -> SweepResult:
    """Evaluate every (t, p) cell and, if enabled, the inverse baseline per p."""
    started = time.perf_counter()
    system = load_problem(config.problem)
    if config.mode == "circuit":
        system = pad_to_power_of_two(system)
    u_star = solve_direct(system)
    cfg = {k: getattr(config, k) for k in ("mode", "eta", "epsilon_apx", "phase_degree_cap")}

    cells = [(t, p) for t in config.t_values for p in config.p_values]
    tasks = [("qgfa", system, u_star, cell, cfg) for cell in cells]
    if config.qmia:
        tasks += [("qmia", system, u_star, (p,), cfg) for p in config.p_values]
    results = _execute(tasks, config)

    rows, qmia_rows, timings, errors = [], [], [], []
    nan = float("nan")
    for task, (value, err, elapsed) in zip(tasks, results):
        args = task[3]
        timings.append({"kind": task[0], "cell": list(args), "seconds": elapsed})
        if err is not None:
            errors.append({"kind": task[0], "cell": list(args), "error": err})
            log.warning("cell %s %s failed: %s", task[0], args, err)
        if task[0] == "qgfa":
            rows.append(SweepRow(args[0], args[1], *(value if err is None else (nan,) * 4), err))
        else:
            qmia_rows.append(QmiaRow(args[0], value if err is None else nan, err))

    eps = {}
    for t in config.t_values:
        try:
            eps[str(t)] = None if t == 0 else solve_epsilon_pair(system.kappa, t, config.eta)
        except Exception as exc:  # noqa: BLE001
            eps[str(t)] = f"{type(exc).__name__}: {exc}"

    response = None
    if config.response:
        try:
            response = _response(system, config)
        except Exception as exc:  # noqa: BLE001
            errors.append({"kind": "response", "cell": [], "error": f"{type(exc).__name__}: {exc}"})

    metadata = {
        "problem": config.problem, "dim": system.dim, "kappa": system.kappa,
        "spectral_norm": system.spectral_norm, "mode": config.mode, "eta": config.eta,
        "epsilon_apx": config.epsilon_apx, "epsilon_smooth": eps, "seed": config.seed,
        "timings": timings, "errors": errors, "seconds": time.perf_counter() - started,
    }
    return SweepResult(rows, qmia_rows, metadata, response)


def _response(system: SpdSystem, config: SweepConfig) -> ResponseReport:
    spec = dict(config.response)
    kind = spec.get("kind", "g2tilde")
    degree = int(spec.get("degree", 200))
    grid = int(spec.get("grid", 2000))
    if kind == "ginv":
        target = TargetFunction.ginv(system.kappa, config.epsilon_apx)
    else:
        t = float(spec.get("t", 10.0 * system.kappa))
        eps = solve_epsilon_pair(system.kappa, t, config.eta)
        target = TargetFunction.g1(t, eps) if kind == "g1" else TargetFunction.g2tilde(t, eps)
    return response_report(find_phases(chebyshev_fit(target, degree)), target, grid)


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    v = float(v)
    return "nan" if math.isnan(v) else f"{v:.17g}"


def _write_rows(path: Path, header, rows):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def sibling(path, suffix: str) -> Path:
    """``out.csv`` -> ``out<suffix>``."""
    path = Path(path)
    return path.with_name(path.stem + suffix)


def emit_csv(result: SweepResult, path) -> list[Path]:
    """Write the grid CSV plus ``_qmia.csv``, ``_meta.json`` and, when present,
    ``_response.csv``.  Returns the paths written."""
    path = Path(path)
    written = [path]
    _write_rows(path, CSV_HEADER, (r.values() for r in result.rows))
    qpath = sibling(path, "_qmia.csv")
    _write_rows(qpath, QMIA_HEADER, ((q.p, q.R_inv) for q in result.qmia_rows))
    written.append(qpath)
    if result.response is not None:
        rpath = sibling(path, "_response.csv")
        _write_rows(rpath, RESPONSE_HEADER, result.response.rows())
        written.append(rpath)
    mpath = sibling(path, "_meta.json")
    try:
        with open(mpath, "w", encoding="utf-8") as fh:
            json.dump(result.metadata, fh, indent=2, default=str)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write {mpath}: {exc}") from exc
    written.append(mpath)
    return written


def read_csv(path) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]
