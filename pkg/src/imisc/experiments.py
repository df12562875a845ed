"""Sweeps over sensor count, coupling and scenario parameters, plus the
closed-form verification suite. Everything emits plot-ready CSV text."""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Optional, Sequence

import numpy as np

from . import appendix
from .coarray import (
    CouplingModel,
    coupling_leakage,
    difference_coarray,
    first_weights,
    imisc_consecutive_segment,
    imisc_udof_by_residue,
    imisc_udof_closed_form,
    imisc_weights_closed_form,
    misc_udof_closed_form,
)
from .estimation import (
    IdentifiabilityError,
    RmseResult,
    SourceScene,
    coarray_music,
    rmse,
    sample_covariance,
    synthesize_snapshots,
    uniform_angles,
)
from .geometry import ArrayGeometry, UnsupportedSensorCount, build, imisc_geometry, imisc_ies

KINDS = ("udof", "leakage", "rmse-snr", "rmse-a1", "rmse-snapshots", "verify-appendix", "verify-formulas")
ARRAYS = ("imisc", "misc", "nested", "coprime")
RMSE_AXES = {"rmse-snr": "snr_db", "rmse-a1": "a1_mag", "rmse-snapshots": "snapshots"}


@dataclass
class Scenario:
    """Fixed parameters of one DOA experiment."""

    Q: int = 34
    R: int = 39
    angle_range: tuple = (-60.0, 60.0)
    snr_db: float = 0.0
    snapshots: int = 1000
    a1_mag: float = 0.3
    a1_phase: float = math.pi / 3
    band: int = 100
    trials: int = 500
    grid_step: float = 0.02
    scan_range: tuple = (-60.0, 60.0)
    refine: bool = False
    positions: Optional[list] = None

    def coupling(self) -> CouplingModel:
        return CouplingModel.polar(self.a1_mag, self.a1_phase, band=self.band)

    def angles(self) -> np.ndarray:
        return uniform_angles(self.R, *self.angle_range)


@dataclass
class SweepConfig:
    kind: str
    arrays: list = field(default_factory=lambda: ["imisc"])
    values: list = field(default_factory=list)
    scenario: Scenario = field(default_factory=Scenario)
    seed: int = 0
    workers: int = 1
    output: Optional[str] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if isinstance(self.scenario, dict):
            self.scenario = Scenario(**self.scenario)
        bad = [a for a in self.arrays if a not in ARRAYS + ("custom",)]
        if bad:
            raise ValueError(f"unrecognized array labels {bad}")
        if not self.kind.startswith("verify") and not self.values:
            raise ValueError("sweep range is empty")


def _rmse_preset(kind, Q, R, values, scale, **kw):
    trials = 500 if scale == "paper" else 50
    scen = Scenario(Q=Q, R=R, trials=trials, **kw)
    return SweepConfig(kind, arrays=["imisc", "misc"], values=list(values), scenario=scen)


def preset(name: str, scale: str = "desk") -> SweepConfig:
    """Named sweeps mirroring the published experiments.

    ``scale="desk"`` keeps paper scenarios but uses 50 trials instead of 500.
    """
    if scale not in ("desk", "paper"):
        raise ValueError("scale must be 'desk' or 'paper'")
    qs = list(range(20, 101))
    table = {
        "udof-vs-q": lambda: SweepConfig("udof", arrays=list(ARRAYS), values=qs),
        "leakage-vs-q": lambda: SweepConfig("leakage", arrays=list(ARRAYS), values=qs),
        "snr": lambda: _rmse_preset("rmse-snr", 34, 39, [-10, -5, 0, 5, 10], scale, a1_mag=0.3),
        "coupling": lambda: _rmse_preset("rmse-a1", 35, 50, [0.0, 0.1, 0.2, 0.3, 0.4, 0.5], scale, snr_db=0.0),
        "snapshots": lambda: _rmse_preset("rmse-snapshots", 37, 45, [100, 200, 500, 1000, 2000], scale,
                                      snr_db=0.0, a1_mag=0.3),
    }
    if name not in table:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(table)}")
    return table[name]()


def config_from_dict(d: dict) -> SweepConfig:
    d = dict(d)
    scen_keys = {f.name for f in fields(Scenario)}
    scen = dict(d.pop("scenario", {}) or {})
    for k in list(d):
        if k in scen_keys:
            scen[k] = d.pop(k)
    for k in ("angle_range", "scan_range"):
        if k in scen:
            scen[k] = tuple(float(v) for v in scen[k])
    return SweepConfig(scenario=Scenario(**scen), **d)


def config_to_dict(cfg: SweepConfig) -> dict:
    return asdict(cfg)


# -- CSV helpers ---------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def to_csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


UDOF_HEADER = ("array", "Q", "params", "udof", "udof_closed_form")
LEAKAGE_HEADER = ("array", "Q", "params", "a1_mag", "a1_phase", "leakage")
RMSE_HEADER = ("array", "sweep", "sweep_value", "rmse_deg", "rmse_se", "failed_trials", "trials")


@dataclass
class SweepResult:
    header: tuple
    rows: list
    complete: bool = True

    def csv(self) -> str:
        return to_csv(self.header, self.rows)


def _closed_form_udof(label: str, Q: int):
    try:
        if label == "imisc":
            return imisc_udof_closed_form(Q)
        if label == "misc":
            return misc_udof_closed_form(Q)
    except UnsupportedSensorCount:
        pass
    return None


def run_udof_sweep(cfg: SweepConfig) -> SweepResult:
    """Brute-force uDOF for each array and Q; closed form alongside where one exists."""
    rows, complete = [], True
    for Q in sorted(int(q) for q in cfg.values):
        if not 10 <= Q <= 200:
            raise ValueError(f"Q={Q} outside the supported sweep range [10, 200]")
        for label in cfg.arrays:
            try:
                g = build(label, Q)
            except (UnsupportedSensorCount, ValueError):
                rows.append((label, Q, "", "unavailable", None))
                complete = False
                continue
            rows.append((label, Q, g.describe_params(), difference_coarray(g).udof, _closed_form_udof(label, Q)))
    return SweepResult(UDOF_HEADER, rows, complete)


def run_leakage_sweep(cfg: SweepConfig) -> SweepResult:
    s = cfg.scenario
    model = s.coupling()
    rows, complete = [], True
    for Q in sorted(int(q) for q in cfg.values):
        for label in cfg.arrays:
            try:
                g = build(label, Q)
            except (UnsupportedSensorCount, ValueError):
                rows.append((label, Q, "", float(s.a1_mag), float(s.a1_phase), "unavailable"))
                complete = False
                continue
            rows.append((label, Q, g.describe_params(), float(s.a1_mag), float(s.a1_phase),
                         coupling_leakage(g, model)))
    return SweepResult(LEAKAGE_HEADER, rows, complete)


# -- Monte Carlo -----------------------------------------------------------------


def run_trial(positions, profile, scene: SourceScene, coupling: CouplingModel, T: int, seed,
              grid_step: float, scan_range, refine: bool = False):
    """One simulated trial; returns sorted estimates or None if MUSIC found too few peaks."""
    geom = ArrayGeometry(tuple(positions))
    snaps = synthesize_snapshots(geom, scene, coupling, T, seed)
    res = coarray_music(sample_covariance(snaps), geom, scene.R, profile=profile,
                        grid_step=grid_step, scan_range=scan_range, refine=refine)
    return res.estimates if res.resolved else None


def _trial_task(args):
    return run_trial(*args)


def trial_seed(master_seed: int, point: int, trial: int) -> np.random.SeedSequence:
    """Independent stream per (sweep point, trial); independent of scheduling."""
    return np.random.SeedSequence([int(master_seed), int(point), int(trial)])


def monte_carlo(geom: ArrayGeometry, scene: SourceScene, coupling: CouplingModel, T: int, trials: int,
                master_seed: int, point: int = 0, grid_step: float = 0.02,
                scan_range=(-60.0, 60.0), refine: bool = False, workers: int = 1) -> RmseResult:
    profile = difference_coarray(geom)
    if scene.R > profile.consecutive_bound:
        raise IdentifiabilityError(
            f"R={scene.R} sources exceed the consecutive coarray bound L={profile.consecutive_bound} "
            f"of this {geom.label} array; reduce R or use more sensors")
    tasks = [(geom.positions, profile, scene, coupling, T, trial_seed(master_seed, point, k),
              grid_step, tuple(scan_range), refine) for k in range(trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            ests = list(ex.map(_trial_task, tasks, chunksize=max(1, trials // (4 * workers))))
    else:
        ests = [_trial_task(t) for t in tasks]
    return rmse(ests, scene.angles)


def _geometry_for(label: str, s: Scenario) -> ArrayGeometry:
    if label == "custom":
        if not s.positions:
            raise ValueError("custom array needs explicit positions")
        return ArrayGeometry(tuple(s.positions))
    return build(label, s.Q)


def run_rmse_sweep(cfg: SweepConfig) -> SweepResult:
    """RMSE per array and sweep value; rows sorted by sweep value then array."""
    axis = RMSE_AXES.get(cfg.kind)
    if axis is None:
        raise ValueError(f"{cfg.kind!r} is not an RMSE sweep")
    if cfg.scenario.trials < 1:
        raise ValueError("need at least one trial")
    values = sorted(cfg.values)
    rows, complete = [], True
    cast = type(getattr(cfg.scenario, axis))
    for point, v in enumerate(values):
        v = cast(v)
        s = replace(cfg.scenario, **{axis: v})
        scene = SourceScene.from_snr(s.angles(), s.snr_db)
        for label in cfg.arrays:
            geom = _geometry_for(label, s)
            res = monte_carlo(geom, scene, s.coupling(), s.snapshots, s.trials, cfg.seed, point,
                              s.grid_step, s.scan_range, s.refine, cfg.workers)
            complete &= res.ok
            rows.append((label, axis, v, res.value, res.se, res.failed, res.trials))
    return SweepResult(RMSE_HEADER, rows, complete)


def rmse_is_non_increasing(rmse_values, se_values) -> bool:
    """Non-increasing within one standard error: consecutive +-1 SE intervals overlap."""
    r = np.asarray(rmse_values, float)
    se = np.asarray(se_values, float)
    return bool(np.all(r[1:] - se[1:] <= r[:-1] + se[:-1]))


# -- verification suite ------------------------------------------------------------


@dataclass
class VerificationReport:
    lines: list

    @property
    def failures(self) -> int:
        return sum(not ln.passed for ln in self.lines)

    @property
    def ok(self) -> bool:
        return self.failures == 0

    def text(self) -> str:
        head = [f"# {appendix.NOTATION_NOTE}",
                f"# checks={len(self.lines)} failures={self.failures}"]
        return "\n".join(head + [ln.text() for ln in self.lines]) + "\n"

    def csv(self) -> str:
        return to_csv(("check", "Q", "passed", "detail"),
                      [(ln.check, ln.Q, "pass" if ln.passed else "fail", ln.detail) for ln in self.lines])


def formula_checks(Q: int) -> list:
    """Brute force vs closed forms for one IMISC sensor count."""
    C = appendix.CheckLine
    g = imisc_geometry(Q)
    prof = difference_coarray(g)
    M = g.max_ies
    out = []
    ud, ud15, ud17 = prof.udof, imisc_udof_closed_form(Q), imisc_udof_by_residue(Q)
    out.append(C("udof brute == 2MQ-3M^2/2-M+3", Q, ud == ud15, f"{ud} vs {ud15}"))
    out.append(C("udof brute == Q mod 6 branch", Q, ud == ud17, f"{ud} vs {ud17}"))
    seg = imisc_consecutive_segment(Q)
    out.append(C("consecutive segment", Q, (-prof.consecutive_bound, prof.consecutive_bound) == seg,
                 f"L={prof.consecutive_bound} vs {seg[1]}"))
    w, wc = first_weights(prof), imisc_weights_closed_form(Q)
    out.append(C("w(1..3) brute == closed form", Q, w == wc, f"{w} vs {wc}"))
    out.append(C("IES sequence", Q, list(g.ies()) == imisc_ies(Q) and len(g.ies()) == Q - 1))
    out.append(C("aperture == MQ-3M^2/4-1", Q, g.positions[-1] == M * Q - 3 * M * M // 4 - 1,
                 f"{g.positions[-1]}"))
    return out


def run_verifications(formula_qs: Sequence[int] = range(10, 201),
                      appendix_qs: Sequence[int] = (10, 16, 22, 28, 34),
                      drop_sensor: Optional[int] = None) -> VerificationReport:
    """Run the closed-form suite and the proof checks.

    ``drop_sensor`` removes that sensor index from each IMISC array before the
    coverage checks, which must then report failures.
    """
    lines = []
    for Q in formula_qs:
        lines += formula_checks(Q)
    for Q in appendix_qs:
        if drop_sensor is None:
            lines += appendix.appendix_checks(Q)
            continue
        pos = list(imisc_geometry(Q).positions)
        del pos[drop_sensor]
        cov = appendix.verify_coverage(Q, positions=pos)
        lines.append(appendix.CheckLine(f"coverage without sensor {drop_sensor}", Q, cov.ok,
                                        f"uncovered {cov.uncovered[:5]}" if cov.uncovered else ""))
    return VerificationReport(lines)


def run(cfg: SweepConfig) -> SweepResult:
    if cfg.kind == "udof":
        return run_udof_sweep(cfg)
    if cfg.kind == "leakage":
        return run_leakage_sweep(cfg)
    if cfg.kind in RMSE_AXES:
        return run_rmse_sweep(cfg)
    raise ValueError(f"{cfg.kind!r} is a verification, use run_verifications")
