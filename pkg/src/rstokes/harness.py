"""Experiment driver: sweeps over (h, tau, alpha, t), empirical rates, reports.

A study is one of
  temporal: fixed mesh, sweep the step count N at each observation time,
  spatial:  fixed step count, sweep the mesh over K = 2^k (or explicit K),
  blowup:   fixed mesh and N with tau = t/N, sweep t toward zero.

Errors are measured against the spectral solution; reported values are
normalized by ||v||_L2 except for Dirac data, whose errors are absolute.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .fem import InitialDatum, assemble, error_norms, l2_project, ritz_project
from .mesh import build_interval_mesh, build_square_mesh
from .oracle import ModalSolution, build_modal_solution
from .stepper import SchemeConfig, run_scheme

__all__ = [
    "ExperimentConfig",
    "ReportRow",
    "Family",
    "ErrorReport",
    "ExperimentError",
    "run_experiment",
    "blowup_study",
    "emit_report",
    "read_report_csv",
    "pair_rates",
    "fitted_rate",
    "loglog_slope",
]

_CSV_HEADER = ["example", "scheme", "alpha", "h", "tau", "t", "l2_error", "h1_error", "rate"]


class ExperimentError(RuntimeError):
    def __init__(self, point: dict, cause: Exception):
        where = ", ".join(f"{k}={v}" for k, v in point.items())
        super().__init__(f"grid point ({where}) failed: {cause}")
        self.point = point


@dataclass(frozen=True)
class ExperimentConfig:
    example: str
    scheme: str = "sbd"
    study: str = "temporal"
    alphas: tuple[float, ...] = (0.5,)
    gamma: float = 1.0
    ks: tuple[int, ...] = ()
    Ks: tuple[int, ...] = ()
    Ns: tuple[int, ...] = ()
    ts: tuple[float, ...] = ()
    projection: str = "l2"
    include_history_origin: bool = False
    oracle_tol: float = 1e-6
    oracle_max_modes: int | None = None
    solver_tol: float = 1e-13
    out: str | None = None
    fmt: str = "csv"

    def __post_init__(self):
        if self.example not in ("a", "b", "c", "d"):
            raise ValueError(f"example must be one of a,b,c,d, got {self.example!r}")
        if self.scheme not in ("be", "sbd"):
            raise ValueError(f"scheme must be be or sbd, got {self.scheme!r}")
        if self.study not in ("temporal", "spatial", "blowup"):
            raise ValueError(f"unknown study {self.study!r}")
        if not self.alphas:
            raise ValueError("alpha list must be nonempty")
        if any(t <= 0 for t in self.ts):
            raise ValueError("observation times must be positive")
        if self.projection not in ("l2", "ritz"):
            raise ValueError(f"projection must be l2 or ritz, got {self.projection!r}")
        if self.projection == "ritz" and self.example != "a":
            raise ValueError(f"example ({self.example}) has no H1 datum; Ritz projection unavailable")
        if self.fmt not in ("csv", "text"):
            raise ValueError(f"format must be csv or text, got {self.fmt!r}")


def _with_defaults(cfg: ExperimentConfig) -> ExperimentConfig:
    ks, Ns, ts = cfg.ks, cfg.Ns, cfg.ts
    if not ks and not cfg.Ks:
        if cfg.study == "temporal":
            ks = (6,) if cfg.example == "d" else (11,)
        elif cfg.study == "spatial":
            ks = (3, 4, 5, 6) if cfg.example == "d" else (3, 4, 5, 6, 7)
        else:
            ks = (6,)
    if not Ns:
        if cfg.study == "temporal":
            Ns = (5, 10, 20, 40, 80)
        elif cfg.study == "spatial":
            defaults = {"a": 2000, "d": 200}
            Ns = (defaults.get(cfg.example, 1000),)
        else:
            Ns = (1000,)
    if not ts:
        ts = tuple(10.0 ** (-e) for e in range(3, 9)) if cfg.study == "blowup" else (0.1,)
    return replace(cfg, ks=ks, Ns=Ns, ts=ts)


@dataclass(frozen=True)
class ReportRow:
    example: str
    scheme: str
    alpha: float
    h: float
    tau: float
    t: float
    l2_error: float
    h1_error: float
    rate: float | None
    family: str
    normalized: bool


@dataclass(frozen=True)
class Family:
    key: str
    x_name: str                 # sweep variable: tau, h, or t
    xs: tuple[float, ...]
    l2_errors: tuple[float, ...]
    h1_errors: tuple[float, ...]
    l2_rate: float
    h1_rate: float


@dataclass
class ErrorReport:
    config: ExperimentConfig
    rows: list[ReportRow] = field(default_factory=list)
    families: list[Family] = field(default_factory=list)


def pair_rates(xs, errors) -> list[float | None]:
    """Per-pair empirical rates log(e_i-1/e_i) / log(x_i-1/x_i); None for row 0."""
    out: list[float | None] = [None]
    for i in range(1, len(xs)):
        out.append(math.log(errors[i - 1] / errors[i]) / math.log(xs[i - 1] / xs[i]))
    return out

def fitted_rate(xs, errors) -> float:
    """Family rate: mean of successive-pair rates, dropping the preasymptotic
    first pair when three or more pairs are available."""
    pr = [r for r in pair_rates(xs, errors) if r is not None]
    if not pr:
        return float("nan")
    if len(pr) >= 3:
        pr = pr[1:]
    return float(np.mean(pr))

def loglog_slope(xs, errors) -> float:
    """Least-squares slope of log e against log x (blowup studies)."""
    return float(np.polyfit(np.log(np.asarray(xs)), np.log(np.asarray(errors)), 1)[0])


_DATA = {
    "a": InitialDatum("smooth_sine", frequency=2),
    "b": InitialDatum("step", location=0.5),
    "c": InitialDatum("dirac", location=0.5),
    "d": InitialDatum("step2d", location=0.5),
}


def _mesh_list(cfg: ExperimentConfig) -> list[int]:
    return [2**k for k in cfg.ks] + list(cfg.Ks)


def _oracle(cfg: ExperimentConfig, alpha: float, t_min: float) -> ModalSolution:
    kwargs = {}
    if cfg.oracle_max_modes is not None:
        kwargs["max_modes"] = cfg.oracle_max_modes
    return build_modal_solution(
        _DATA[cfg.example], alpha, cfg.gamma, tol=cfg.oracle_tol, t_min=t_min, **kwargs
    )


class _Runner:
    """Caches meshes, projections and modal solutions across grid points."""

    def __init__(self, cfg: ExperimentConfig):
        self.cfg = cfg
        self.datum = _DATA[cfg.example]
        self._spaces: dict[int, object] = {}
        self._initial: dict[int, np.ndarray] = {}
        self._oracles: dict[float, ModalSolution] = {}
        self.t_min = min(cfg.ts)

    def space(self, K: int):
        if K not in self._spaces:
            mesh = build_square_mesh(K) if self.cfg.example == "d" else build_interval_mesh(K)
            self._spaces[K] = assemble(mesh)
        return self._spaces[K]

    def initial(self, K: int) -> np.ndarray:
        if K not in self._initial:
            project = ritz_project if self.cfg.projection == "ritz" else l2_project
            self._initial[K] = project(self.space(K), self.datum, tol=self.cfg.solver_tol)
        return self._initial[K]

    def oracle(self, alpha: float) -> ModalSolution:
        if alpha not in self._oracles:
            self._oracles[alpha] = _oracle(self.cfg, alpha, self.t_min)
        return self._oracles[alpha]

    def solve_point(self, alpha: float, K: int, N: int, t: float):
        space = self.space(K)
        scfg = SchemeConfig(
            scheme=self.cfg.scheme,
            alpha=alpha,
            gamma=self.cfg.gamma,
            tau=t / N,
            n_steps=N,
            include_history_origin=self.cfg.include_history_origin,
            initial_projection=self.cfg.projection,
        )
        traj = run_scheme(space, scfg, self.initial(K))
        return error_norms(space, traj.final, self.oracle(alpha), t)


def _norm_pair(cfg: ExperimentConfig, en) -> tuple[float, float, bool]:
    if cfg.example == "c":
        return en.l2, en.h1, False
    return en.l2_normalized, en.h1_normalized, True


def _families_from_groups(report: ErrorReport, groups, x_name: str, blowup: bool = False):
    for key, pts in groups.items():
        xs = tuple(p[0] for p in pts)
        l2s = tuple(p[1] for p in pts)
        h1s = tuple(p[2] for p in pts)
        fit = loglog_slope if blowup else fitted_rate
        report.families.append(
            Family(
                key=key,
                x_name=x_name,
                xs=xs,
                l2_errors=l2s,
                h1_errors=h1s,
                l2_rate=fit(xs, l2s),
                h1_rate=fit(xs, h1s),
            )
        )


def run_experiment(cfg: ExperimentConfig) -> ErrorReport:
    """Sweep the configured grid; one row per (alpha, mesh, step count, time)."""
    cfg = _with_defaults(cfg)
    if cfg.study == "blowup":
        return blowup_study(cfg)
    runner = _Runner(cfg)
    report = ErrorReport(config=cfg)
    groups: dict[str, list] = {}

    meshes = _mesh_list(cfg)
    for alpha in cfg.alphas:
        for t in cfg.ts:
            if cfg.study == "temporal":
                K = meshes[0]
                sweep = [(K, N, t / N) for N in cfg.Ns]
                x_name = "tau"
            else:
                N = cfg.Ns[0]
                sweep = [(K, N, 1.0 / K) for K in meshes]
                x_name = "h"
            fam_key = f"{cfg.example}/{cfg.scheme}/alpha={alpha:g}/t={t:g}/{cfg.study}"
            pts = []
            prev = None
            for K, N, x in sweep:
                try:
                    en = runner.solve_point(alpha, K, N, t)
                except Exception as exc:
                    raise ExperimentError(
                        {"example": cfg.example, "alpha": alpha, "K": K, "N": N, "t": t}, exc
                    ) from exc
                l2, h1, normed = _norm_pair(cfg, en)
                rate = None
                if prev is not None:
                    rate = math.log(prev[1] / l2) / math.log(prev[0] / x)
                prev = (x, l2)
                report.rows.append(
                    ReportRow(cfg.example, cfg.scheme, alpha, 1.0 / K, t / N, t, l2, h1, rate, fam_key, normed)
                )
                pts.append((x, l2, h1))
            groups[fam_key] = pts
    _families_from_groups(report, groups, x_name)
    return report


def blowup_study(cfg: ExperimentConfig) -> ErrorReport:
    """L2 error against t -> 0 at fixed mesh with tau = t/N; log-log slope."""
    cfg = _with_defaults(cfg)
    if cfg.scheme != "sbd":
        raise ValueError("blowup study requires the second-order scheme (sbd)")
    runner = _Runner(cfg)
    report = ErrorReport(config=cfg)
    groups: dict[str, list] = {}
    K = _mesh_list(cfg)[0]
    N = cfg.Ns[0]
    for alpha in cfg.alphas:
        fam_key = f"{cfg.example}/{cfg.scheme}/alpha={alpha:g}/blowup"
        pts = []
        prev = None
        for t in sorted(cfg.ts, reverse=True):
            try:
                en = runner.solve_point(alpha, K, N, t)
            except Exception as exc:
                raise ExperimentError(
                    {"example": cfg.example, "alpha": alpha, "K": K, "N": N, "t": t}, exc
                ) from exc
            l2, h1, normed = _norm_pair(cfg, en)
            rate = None
            if prev is not None:
                rate = math.log(prev[1] / l2) / math.log(prev[0] / t)
            prev = (t, l2)
            report.rows.append(
                ReportRow(cfg.example, cfg.scheme, alpha, 1.0 / K, t / N, t, l2, h1, rate, fam_key, normed)
            )
            pts.append((t, l2, h1))
        groups[fam_key] = pts
    _families_from_groups(report, groups, "t", blowup=True)
    return report


# ---------------------------------------------------------------------------
# report emission

def _fmt(x: float) -> str:
    return format(x, ".17g")


def _emit_csv(report: ErrorReport, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(_CSV_HEADER)
    for r in report.rows:
        writer.writerow(
            [
                r.example,
                r.scheme,
                _fmt(r.alpha),
                _fmt(r.h),
                _fmt(r.tau),
                _fmt(r.t),
                _fmt(r.l2_error),
                _fmt(r.h1_error),
                "" if r.rate is None else _fmt(r.rate),
            ]
        )


def _emit_text(report: ErrorReport, stream) -> None:
    by_family: dict[str, list[ReportRow]] = {}
    for r in report.rows:
        by_family.setdefault(r.family, []).append(r)
    fams = {f.key: f for f in report.families}
    for key, rows in by_family.items():
        fam = fams[key]
        label = "absolute" if not rows[0].normalized else "normalized"
        stream.write(f"# {key}  ({label} errors)\n")
        stream.write(f"{fam.x_name:>12s} {'l2_error':>14s} {'h1_error':>14s} {'rate':>8s}\n")
        for x, r in zip(fam.xs, rows):
            rate = "" if r.rate is None else f"{r.rate:8.3f}"
            stream.write(f"{x:12.6g} {r.l2_error:14.6e} {r.h1_error:14.6e} {rate:>8s}\n")
        stream.write(f"fitted: l2 rate {fam.l2_rate:.3f}, h1 rate {fam.h1_rate:.3f}\n\n")


def emit_report(report: ErrorReport, fmt: str | None = None, path: str | None = None) -> str:
    """Write the report; returns the emitted text (also written to path if given)."""
    fmt = fmt or report.config.fmt
    if fmt not in ("csv", "text"):
        raise ValueError(f"format must be csv or text, got {fmt!r}")
    buf = io.StringIO()
    (_emit_csv if fmt == "csv" else _emit_text)(report, buf)
    text = buf.getvalue()
    target = path or report.config.out
    if target:
        Path(target).write_text(text)
    return text


def read_report_csv(path: str) -> list[dict]:
    """Parse an emitted CSV back into typed row dictionaries."""
    out = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            row = dict(rec)
            for k in ("alpha", "h", "tau", "t", "l2_error", "h1_error"):
                row[k] = float(row[k])
            row["rate"] = float(row["rate"]) if row["rate"] else None
            out.append(row)
    return out
