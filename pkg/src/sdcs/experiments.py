"""Sweep orchestration, aggregation, and the CSV/report contracts.

A sweep runs the full recovery pipeline over a grid of measurement
counts with several trials per grid point, each trial on its own derived
random substream, so results are reproducible and independent of
execution order.  Aggregation reports per-m medians and quartiles over
the support-correct trials, the support recovery rate, the fitted
log-log decay slope of median error against the oversampling ratio
lambda = m/s, and the worst observed ratio of error to the theoretical
decay shape delta * (m/ell)^(1/2 - r).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from .linalg import least_squares
from .measurement import Ensemble
from .quantizer import msq_quantize
from .recovery import (
    BpdnConfig,
    DegenerateDrawError,
    bpdn_solve,
    draw_instance,
    full_pipeline,
    projection_dim,
    support_from,
)
from .rng import RngStream, derive_seed

SWEEP_CSV_COLUMNS = (
    "ensemble", "n", "s", "m", "r", "delta", "alpha", "ell",
    "trial", "seed", "support_correct", "err_l2", "bound_eq3", "sigma_min_proj",
)


@dataclass(frozen=True)
class SweepConfig:
    """Parameters of one decay sweep."""

    ensemble: str
    n: int
    s: int
    r: int
    delta: float
    alpha: float
    m_grid: tuple[int, ...]
    trials: int
    seed: int
    output: str | None = None

    def __post_init__(self):
        Ensemble(self.ensemble)  # validates the kind
        if not 1 <= self.s <= self.n:
            raise ValueError("need 1 <= s <= n")
        if self.r < 1:
            raise ValueError("r must be >= 1")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        if len(self.m_grid) < 1:
            raise ValueError("m_grid must be nonempty")
        if any(b <= a for a, b in zip(self.m_grid, self.m_grid[1:])):
            raise ValueError("m_grid must be strictly increasing")
        if self.m_grid[0] < self.s:
            raise ValueError("every m must be >= s")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


@dataclass(frozen=True)
class SweepRecord:
    """One (m, trial) outcome; the first 14 fields are the CSV contract."""

    ensemble: str
    n: int
    s: int
    m: int
    r: int
    delta: float
    alpha: float
    ell: int
    trial: int
    seed: int
    support_correct: bool
    err_l2: float
    bound_eq3: float
    sigma_min_proj: float
    # diagnostics beyond the CSV contract
    bpdn_l1_slack: float = math.nan
    bpdn_violation: float = math.nan
    bpdn_converged: bool = True
    support_tie_flag: bool = False
    failed: bool = False


def trial_seed(base_seed: int, m: int, trial: int) -> int:
    """Derived seed for one sweep trial; feeds RngStream directly."""
    return derive_seed(base_seed, ("sweep", m, trial))


def run_decay_sweep(cfg: SweepConfig, *, k_floor: float = 1.0) -> list[SweepRecord]:
    """Run the pipeline over the m-grid; records come back in (m, trial) order.

    Per-trial failures (degenerate draws) are recorded with failed=True
    and infinite error rather than aborting the sweep.
    """
    ens = Ensemble(cfg.ensemble)
    records: list[SweepRecord] = []
    for m in cfg.m_grid:
        for trial in range(cfg.trials):
            seed = trial_seed(cfg.seed, m, trial)
            base = dict(
                ensemble=cfg.ensemble, n=cfg.n, s=cfg.s, m=m, r=cfg.r,
                delta=cfg.delta, alpha=cfg.alpha, trial=trial, seed=seed,
            )
            try:
                rep = full_pipeline(
                    ens, cfg.n, cfg.s, m, cfg.r, cfg.delta, cfg.alpha,
                    RngStream(seed), k_floor=k_floor,
                )
            except DegenerateDrawError:
                records.append(SweepRecord(
                    **base, ell=projection_dim(m, cfg.s, cfg.alpha),
                    support_correct=False, err_l2=math.inf, bound_eq3=math.inf,
                    sigma_min_proj=math.nan, failed=True,
                ))
                continue
            records.append(SweepRecord(
                **base, ell=rep.ell, support_correct=rep.support_correct,
                err_l2=rep.err_l2, bound_eq3=rep.err_bound,
                sigma_min_proj=rep.sigma_min_proj,
                bpdn_l1_slack=rep.bpdn_l1_slack,
                bpdn_violation=rep.bpdn_violation,
                bpdn_converged=rep.bpdn_converged,
                support_tie_flag=rep.support_tie_flag,
            ))
    return records


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def sweep_records_to_csv(records: list[SweepRecord]) -> str:
    """Render records under the fixed sweep CSV contract."""
    lines = [",".join(SWEEP_CSV_COLUMNS)]
    for rec in records:
        lines.append(",".join(_fmt(getattr(rec, c)) for c in SWEEP_CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def read_sweep_csv(text: str) -> list[SweepRecord]:
    """Parse a sweep CSV back into records (diagnostic fields default)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or tuple(lines[0].split(",")) != SWEEP_CSV_COLUMNS:
        raise ValueError("not a sweep CSV: bad or missing header")
    records = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != len(SWEEP_CSV_COLUMNS):
            raise ValueError(f"bad sweep CSV row: {ln!r}")
        d = dict(zip(SWEEP_CSV_COLUMNS, parts))
        records.append(SweepRecord(
            ensemble=d["ensemble"], n=int(d["n"]), s=int(d["s"]), m=int(d["m"]),
            r=int(d["r"]), delta=float(d["delta"]), alpha=float(d["alpha"]),
            ell=int(d["ell"]), trial=int(d["trial"]), seed=int(d["seed"]),
            support_correct=d["support_correct"] == "1",
            err_l2=float(d["err_l2"]), bound_eq3=float(d["bound_eq3"]),
            sigma_min_proj=float(d["sigma_min_proj"]),
        ))
    return records


def fit_loglog_slope(points: list[tuple[float, float]]) -> float:
    """Least-squares slope of log(err) against log(lambda)."""
    if len(points) < 2:
        raise ValueError("need at least two points")
    lam = np.array([p[0] for p in points], dtype=np.float64)
    err = np.array([p[1] for p in points], dtype=np.float64)
    if np.any(lam <= 0) or np.any(err <= 0):
        raise ValueError("lambda and err must be positive")
    ll = np.log(lam)
    if np.all(ll == ll[0]):
        raise ValueError("degenerate fit: all lambda values equal")
    le = np.log(err)
    ll_c = ll - ll.mean()
    return float((ll_c @ (le - le.mean())) / (ll_c @ ll_c))


@dataclass(frozen=True)
class SummaryRow:
    """Aggregates for one grid point, computed over support-correct trials."""

    m: int
    lam: float
    trials: int
    recovered: int
    recovery_rate: float
    err_median: float | None
    err_q1: float | None
    err_q3: float | None
    bound_median: float | None
    bound_ok_rate: float | None
    decay_ratio_max: float | None


@dataclass(frozen=True)
class SweepSummary:
    rows: tuple[SummaryRow, ...]
    slope: float | None
    decay_constant: float | None
    bound_ok_rate: float | None


def summarize(records: list[SweepRecord]) -> SweepSummary:
    """Aggregate sweep records per measurement count.

    Support-incorrect trials count toward the recovery rate but are
    excluded from the error statistics and the slope fit; the error
    bound is only guaranteed on the correct support.
    """
    if not records:
        raise ValueError("no records to summarize")
    scalars = {(r.ensemble, r.n, r.s, r.r, r.delta, r.alpha) for r in records}
    if len(scalars) > 1:
        raise ValueError("records mix different sweep configurations")
    rows = []
    all_ok_flags: list[bool] = []
    decay_all: list[float] = []
    for m in sorted({r.m for r in records}):
        group = [r for r in records if r.m == m]
        good = [r for r in group if r.support_correct and not r.failed]
        lam = m / group[0].s
        if good:
            errs = np.array([r.err_l2 for r in good])
            bounds = np.array([r.bound_eq3 for r in good])
            ok = [bool(r.err_l2 <= r.bound_eq3) for r in good]
            all_ok_flags.extend(ok)
            decay = [
                r.err_l2 / (r.delta * (r.m / r.ell) ** (0.5 - r.r)) for r in good
            ]
            decay_all.extend(decay)
            rows.append(SummaryRow(
                m=m, lam=lam, trials=len(group), recovered=len(good),
                recovery_rate=len(good) / len(group),
                err_median=float(np.median(errs)),
                err_q1=float(np.quantile(errs, 0.25)),
                err_q3=float(np.quantile(errs, 0.75)),
                bound_median=float(np.median(bounds)),
                bound_ok_rate=sum(ok) / len(ok),
                decay_ratio_max=max(decay),
            ))
        else:
            rows.append(SummaryRow(
                m=m, lam=lam, trials=len(group), recovered=0, recovery_rate=0.0,
                err_median=None, err_q1=None, err_q3=None, bound_median=None,
                bound_ok_rate=None, decay_ratio_max=None,
            ))
    fit_points = [(row.lam, row.err_median) for row in rows
                  if row.err_median is not None and row.err_median > 0]
    slope = fit_loglog_slope(fit_points) if len(fit_points) >= 2 else None
    return SweepSummary(
        rows=tuple(rows),
        slope=slope,
        decay_constant=max(decay_all) if decay_all else None,
        bound_ok_rate=(sum(all_ok_flags) / len(all_ok_flags)) if all_ok_flags else None,
    )


SUMMARY_CSV_COLUMNS = (
    "m", "lambda", "trials", "recovered", "recovery_rate", "median_err",
    "q1_err", "q3_err", "median_bound", "bound_ok_rate", "max_err_over_decay",
)


def _opt(value) -> str:
    return "" if value is None else _fmt(value)


def summary_to_csv(summary: SweepSummary) -> str:
    lines = [",".join(SUMMARY_CSV_COLUMNS)]
    for row in summary.rows:
        lines.append(",".join([
            str(row.m), repr(row.lam), str(row.trials), str(row.recovered),
            repr(row.recovery_rate), _opt(row.err_median), _opt(row.err_q1),
            _opt(row.err_q3), _opt(row.bound_median), _opt(row.bound_ok_rate),
            _opt(row.decay_ratio_max),
        ]))
    return "\n".join(lines) + "\n"


def summary_to_text(summary: SweepSummary) -> str:
    out = ["decay sweep summary", ""]
    out.append(f"{'m':>6} {'lambda':>9} {'recov':>7} {'median_err':>13} "
               f"{'q1':>11} {'q3':>11} {'median_bound':>13}")
    for row in summary.rows:
        med = f"{row.err_median:.6g}" if row.err_median is not None else "-"
        q1 = f"{row.err_q1:.6g}" if row.err_q1 is not None else "-"
        q3 = f"{row.err_q3:.6g}" if row.err_q3 is not None else "-"
        bnd = f"{row.bound_median:.6g}" if row.bound_median is not None else "-"
        out.append(f"{row.m:>6} {row.lam:>9.4g} {row.recovered:>3}/{row.trials:<3} "
                   f"{med:>13} {q1:>11} {q3:>11} {bnd:>13}")
    out.append("")
    slope = f"{summary.slope:.4f}" if summary.slope is not None else "undefined"
    out.append(f"log-log slope of median error vs lambda: {slope}")
    if summary.decay_constant is not None:
        out.append(f"max err / (delta * (m/ell)^(1/2 - r)): {summary.decay_constant:.6g}")
    if summary.bound_ok_rate is not None:
        out.append(f"bound satisfaction rate (support-correct trials): {summary.bound_ok_rate:.4f}")
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class MsqTrialResult:
    err_l2: float
    support_correct: bool


def msq_trial(
    ensemble: Ensemble,
    n: int,
    s: int,
    m: int,
    r: int,
    delta: float,
    rng: RngStream,
    *,
    k_floor: float = 1.0,
    magnitude_cap_ratio: float = 10.0,
) -> MsqTrialResult:
    """Round-each-entry baseline on the identical instance.

    Draws the same (signal, matrix) pair as full_pipeline for the same
    stream, quantizes memorylessly, recovers the support with the
    matching noise radius delta*sqrt(m)/2, and reconstructs by least
    squares on the recovered support.  The r argument only fixes the
    amplitude floor so instances match the feedback-quantizer runs.
    """
    floor = k_floor * (2.0 ** (r - 0.5)) * delta
    signal, phi = draw_instance(ensemble, n, s, m, floor, magnitude_cap_ratio * floor, rng)
    x = signal.to_dense()
    q = msq_quantize(phi @ x, delta)
    eps = delta * math.sqrt(m) / 2.0
    result = bpdn_solve(phi, q, BpdnConfig(epsilon=eps))
    t_hat = support_from(result.x, s)
    x_hat = np.zeros(n)
    x_hat[t_hat] = least_squares(phi[:, t_hat], q)
    return MsqTrialResult(
        err_l2=float(np.linalg.norm(x - x_hat)),
        support_correct=bool(np.array_equal(t_hat, signal.support)),
    )


def run_msq_baseline(cfg: SweepConfig, m: int, *, k_floor: float = 1.0) -> list[MsqTrialResult]:
    """MSQ baseline over the same derived seeds as the sweep at grid point m."""
    ens = Ensemble(cfg.ensemble)
    out = []
    for trial in range(cfg.trials):
        rng = RngStream(trial_seed(cfg.seed, m, trial))
        out.append(msq_trial(ens, cfg.n, cfg.s, m, cfg.r, cfg.delta, rng, k_floor=k_floor))
    return out


_CONFIG_FIELDS = {f.name for f in fields(SweepConfig)}


def parse_config_text(text: str) -> dict[str, str]:
    """Parse the flat key = value sweep config format."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value, got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if key not in _CONFIG_FIELDS:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
        values[key] = val.strip()
    return values


def build_sweep_config(values: dict[str, str]) -> SweepConfig:
    """Construct a SweepConfig from string values (config file or CLI)."""
    required = {"ensemble", "n", "s", "r", "delta", "alpha", "m_grid", "trials", "seed"}
    missing = sorted(required - values.keys())
    if missing:
        raise ValueError(f"missing sweep parameters: {', '.join(missing)}")
    return SweepConfig(
        ensemble=values["ensemble"],
        n=int(values["n"]),
        s=int(values["s"]),
        r=int(values["r"]),
        delta=float(values["delta"]),
        alpha=float(values["alpha"]),
        m_grid=tuple(int(p) for p in values["m_grid"].split(",") if p.strip()),
        trials=int(values["trials"]),
        seed=int(values["seed"]),
        output=values.get("output"),
    )
