"""Monte Carlo harness: path ensembles, summaries, and limit-law checks.

Replications are evolved in lockstep as numpy vectors, but each replication
consumes exactly one uniform per step from its own counter-based stream
(Philox keyed by master_seed and the replication index), so results are
bit-identical no matter how the ensemble is batched or threaded.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Sequence

import numpy as np
from scipy.special import ndtr

from .group import MemoryParams
from .moments import r_norm, t2

DEFAULT_LIL_START = 100

# asymptotic two-sided Kolmogorov critical constants c(alpha): threshold c/sqrt(R)
KS_CRITICAL = {0.01: 1.628, 0.05: 1.358, 0.10: 1.224}
KS_MIN_SAMPLES = 100


def worker_count(default: int = 1) -> int:
    """Worker cap from the ERW_THREADS environment variable (default 1)."""
    raw = os.environ.get("ERW_THREADS", "")
    if not raw:
        return default
    try:
        n = int(raw)
    except ValueError:
        return default
    return max(1, n)


def replication_stream(master_seed: int, index: int) -> np.random.Generator:
    """Independent reproducible stream for one replication.

    Philox is counter-based, and the spawn-key derivation keeps streams
    independent across indices while staying a pure function of
    (master_seed, index).
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=(index,))
    return np.random.Generator(np.random.Philox(ss))


@dataclass
class PathStats:
    """Terminal and running statistics for an ensemble of paths."""

    q: float
    steps: int
    reps: int
    master_seed: int
    W: np.ndarray = None
    S: np.ndarray = None
    Xi: np.ndarray = None
    Ztilde: np.ndarray = None
    QV: np.ndarray = None
    qsl_sum: Optional[np.ndarray] = None       # sum over k of S_k^2/k^2
    lil_pos: Optional[np.ndarray] = None       # running max of S_k/sqrt(2k lnln k)
    lil_neg: Optional[np.ndarray] = None       # same for -S_k
    doob_resid_max: Optional[np.ndarray] = None
    qv_resid_max: Optional[np.ndarray] = None
    snapshots: Dict[int, np.ndarray] = field(default_factory=dict)

    def qsl(self) -> np.ndarray:
        if self.qsl_sum is None:
            raise ValueError("qsl was not collected for this ensemble")
        return self.qsl_sum / math.log(self.steps)


def sample_paths(
    q: float,
    steps: int,
    reps: int,
    master_seed: int,
    *,
    collect: Sequence[str] = (),
    snapshot_steps: Sequence[int] = (),
    lil_start: int = DEFAULT_LIL_START,
    workers: Optional[int] = None,
) -> PathStats:
    """Evolve an ensemble of coupled-walk paths.

    collect may contain "qsl", "lil", "doob"; terminal values of W, S, Xi,
    Ztilde and QV are always recorded, as are S-snapshots at the requested
    steps.  Replications split across threads write disjoint slices of the
    output arrays, so the result does not depend on the split.
    """
    if steps < 1 or reps < 1:
        raise ValueError("steps and reps must be at least 1")
    if not -1.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [-1, 1], got {q}")
    bad = set(collect) - {"qsl", "lil", "doob"}
    if bad:
        raise ValueError(f"unknown collectors: {sorted(bad)}")
    snapshot_steps = sorted(set(int(s) for s in snapshot_steps))
    if snapshot_steps and not (1 <= snapshot_steps[0] and snapshot_steps[-1] <= steps):
        raise ValueError("snapshot steps must lie in [1, steps]")

    out = PathStats(q=q, steps=steps, reps=reps, master_seed=master_seed)
    out.W = np.empty(reps, dtype=np.int64)
    out.S = np.empty(reps, dtype=np.int64)
    out.Xi = np.empty(reps)
    out.Ztilde = np.empty(reps)
    out.QV = np.empty(reps)
    if "qsl" in collect:
        out.qsl_sum = np.empty(reps)
    if "lil" in collect:
        if steps < lil_start:
            raise ValueError("lil collection needs steps >= lil_start")
        out.lil_pos = np.empty(reps)
        out.lil_neg = np.empty(reps)
    if "doob" in collect:
        out.doob_resid_max = np.empty(reps)
        out.qv_resid_max = np.empty(reps)
    out.snapshots = {m: np.empty(reps, dtype=np.int64) for m in snapshot_steps}

    nworkers = worker_count() if workers is None else max(1, workers)
    blocks = _split_blocks(reps, nworkers)
    if len(blocks) == 1:
        _run_block(q, steps, master_seed, 0, reps, collect, snapshot_steps,
                   lil_start, out)
    else:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            futs = [
                pool.submit(_run_block, q, steps, master_seed, lo, hi, collect,
                            snapshot_steps, lil_start, out)
                for lo, hi in blocks
            ]
            for f in futs:
                f.result()
    return out


def _split_blocks(reps: int, nworkers: int):
    nblocks = min(nworkers, reps)
    size = (reps + nblocks - 1) // nblocks
    return [(lo, min(lo + size, reps)) for lo in range(0, reps, size)]


def _run_block(q, steps, master_seed, rep_lo, rep_hi, collect, snapshot_steps,
               lil_start, out: PathStats):
    B = rep_hi - rep_lo
    streams = [replication_stream(master_seed, i) for i in range(rep_lo, rep_hi)]
    qsl_on = "qsl" in collect
    lil_on = "lil" in collect
    doob_on = "doob" in collect
    snap_set = set(snapshot_steps)

    W = np.zeros(B)
    S = np.zeros(B)
    Xi = np.zeros(B)
    xi_c = np.zeros(B)
    Zt = np.zeros(B)
    zt_c = np.zeros(B)
    qv_corr = np.zeros(B)
    qv_c = np.zeros(B)
    wsq = np.zeros(B) if doob_on else None
    wsq_c = np.zeros(B) if doob_on else None
    qsl = np.zeros(B) if qsl_on else None
    lil_pos = np.full(B, -np.inf) if lil_on else None
    lil_neg = np.full(B, -np.inf) if lil_on else None
    dmax = np.zeros(B) if doob_on else None
    qmax = np.zeros(B) if doob_on else None

    chunk = int(max(64, min(8192, (1 << 22) // max(B, 1))))
    u_buf = np.empty((chunk, B))
    qq = q * q

    for m0 in range(0, steps, chunk):
        c_eff = min(chunk, steps - m0)
        for i, st in enumerate(streams):
            u_buf[:c_eff, i] = st.random(c_eff)
        for j in range(c_eff):
            m = m0 + j + 1          # step being taken
            n = m - 1               # time before the step
            u = u_buf[j]
            if n == 0:
                dw = np.where(u < 0.5, 1.0, -1.0)
                ds = dw
                xi_inc = ds
            else:
                w_over = W / n
                pa = 0.5 + (0.5 * q) * w_over
                dw = np.where(u < pa, 1.0, -1.0)
                sgn = 1.0 if n % 2 == 0 else -1.0
                ds = sgn * dw
                # Ztilde gains (-1)^n W_n/n before the step lands
                y = sgn * w_over - zt_c
                t = Zt + y
                zt_c = (t - Zt) - y
                Zt = t
                xi_inc = ds - (sgn * q) * w_over
                # Neumaier sums: the correction is folded in at read time,
                # so the QV identity is not limited by accumulator error
                x = qq * (w_over * w_over)
                t = qv_corr + x
                qv_c = qv_c + np.where(np.abs(qv_corr) >= np.abs(x),
                                       (qv_corr - t) + x, (x - t) + qv_corr)
                qv_corr = t
                if doob_on:
                    x = w_over * w_over
                    t = wsq + x
                    wsq_c = wsq_c + np.where(np.abs(wsq) >= np.abs(x),
                                             (wsq - t) + x, (x - t) + wsq)
                    wsq = t
            y = xi_inc - xi_c
            t = Xi + y
            xi_c = (t - Xi) - y
            Xi = t
            W = W + dw
            S = S + ds
            if qsl_on:
                qsl = qsl + (S / m) ** 2
            if lil_on and m >= lil_start:
                scale = 1.0 / math.sqrt(2.0 * m * math.log(math.log(m)))
                ratio = S * scale
                np.maximum(lil_pos, ratio, out=lil_pos)
                np.maximum(lil_neg, -ratio, out=lil_neg)
            if doob_on:
                resid = np.abs(S - Xi - q * Zt)
                np.maximum(dmax, resid, out=dmax)
                resid = np.abs((qv_corr + qv_c) - qq * (wsq + wsq_c))
                np.maximum(qmax, resid, out=qmax)
            if m in snap_set:
                out.snapshots[m][rep_lo:rep_hi] = S.astype(np.int64)

    out.W[rep_lo:rep_hi] = W.astype(np.int64)
    out.S[rep_lo:rep_hi] = S.astype(np.int64)
    out.Xi[rep_lo:rep_hi] = Xi
    out.Ztilde[rep_lo:rep_hi] = Zt
    out.QV[rep_lo:rep_hi] = steps - (qv_corr + qv_c)
    if qsl_on:
        out.qsl_sum[rep_lo:rep_hi] = qsl
    if lil_on:
        out.lil_pos[rep_lo:rep_hi] = lil_pos
        out.lil_neg[rep_lo:rep_hi] = lil_neg
    if doob_on:
        out.doob_resid_max[rep_lo:rep_hi] = dmax
        out.qv_resid_max[rep_lo:rep_hi] = qmax


@dataclass(frozen=True)
class ExperimentConfig:
    """Reproducible experiment description; same config means same bits out."""

    params: MemoryParams
    steps: int
    reps: int
    master_seed: int
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")

    def to_dict(self) -> dict:
        return {
            "p": self.params.p,
            "q": self.params.q,
            "steps": self.steps,
            "reps": self.reps,
            "master_seed": self.master_seed,
        }


@dataclass(frozen=True)
class StatSummary:
    mean: float
    variance: float
    stderr: float
    min: float
    max: float

    @classmethod
    def from_samples(cls, x: np.ndarray) -> "StatSummary":
        x = np.asarray(x, dtype=float)
        var = float(np.var(x, ddof=1)) if x.size > 1 else 0.0
        return cls(
            mean=float(np.mean(x)),
            variance=var,
            stderr=math.sqrt(var / x.size),
            min=float(np.min(x)),
            max=float(np.max(x)),
        )

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "variance": self.variance,
            "stderr": self.stderr,
            "min": self.min,
            "max": self.max,
        }


@dataclass
class ReplicationSummary:
    config: ExperimentConfig
    stats: Dict[str, StatSummary]

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "per_statistic": {k: v.to_dict() for k, v in self.stats.items()},
        }


def mc_terminal_stats(config: ExperimentConfig, workers: Optional[int] = None) -> ReplicationSummary:
    """Summaries of the terminal normalised statistics over the ensemble."""
    q = config.params.q
    n = config.steps
    ens = sample_paths(q, n, config.reps, config.master_seed,
                       collect=("qsl", "lil", "doob") if n >= DEFAULT_LIL_START else ("qsl", "doob"),
                       workers=workers)
    sq = math.sqrt(n)
    stats = {
        "S_over_sqrt_n": StatSummary.from_samples(ens.S / sq),
        "W_over_r_n": StatSummary.from_samples(ens.W / r_norm(n, config.params.p)),
        "Ztilde": StatSummary.from_samples(ens.Ztilde),
        "Xi_over_sqrt_n": StatSummary.from_samples(ens.Xi / sq),
        "QV_over_n": StatSummary.from_samples(ens.QV / n),
        "abs_S_over_n": StatSummary.from_samples(np.abs(ens.S) / n),
    }
    if n >= 2:
        stats["qsl"] = StatSummary.from_samples(ens.qsl())
    if ens.lil_pos is not None:
        stats["lil_pos"] = StatSummary.from_samples(ens.lil_pos)
        stats["lil_neg"] = StatSummary.from_samples(ens.lil_neg)
    return ReplicationSummary(config=config, stats=stats)


@dataclass(frozen=True)
class KSResult:
    statistic: float
    threshold: float
    passed: bool

    def to_dict(self) -> dict:
        return {"statistic": self.statistic, "threshold": self.threshold, "pass": self.passed}


def ks_normal_test(samples, alpha: float = 0.01) -> KSResult:
    """Two-sided Kolmogorov-Smirnov test against the standard normal.

    Uses the asymptotic critical value c(alpha)/sqrt(R); small samples
    (R < 100) are refused because the asymptotic constant is not valid
    there and the exact table is out of scope.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    if x.size == 0:
        raise ValueError("empty sample set")
    if x.size < KS_MIN_SAMPLES:
        raise ValueError(f"need at least {KS_MIN_SAMPLES} samples for the asymptotic threshold")
    if alpha not in KS_CRITICAL:
        raise ValueError(f"alpha must be one of {sorted(KS_CRITICAL)}")
    r = x.size
    cdf = ndtr(x)
    i = np.arange(1, r + 1)
    d_plus = np.max(i / r - cdf)
    d_minus = np.max(cdf - (i - 1) / r)
    stat = float(max(d_plus, d_minus))
    threshold = KS_CRITICAL[alpha] / math.sqrt(r)
    return KSResult(statistic=stat, threshold=threshold, passed=stat < threshold)


def qsl_statistic(s_path) -> float:
    """(1/log n) * sum_k S_k^2 / k^2 along one path (S_1..S_n)."""
    s = np.asarray(s_path, dtype=float)
    n = s.size
    if n < 2:
        raise ValueError("need a path of length at least 2")
    k = np.arange(1, n + 1, dtype=float)
    return float(np.sum((s / k) ** 2) / math.log(n))


def lil_scan(config: ExperimentConfig, n_max: int,
             workers: Optional[int] = None) -> ReplicationSummary:
    """Running iterated-logarithm envelope statistic over an ensemble.

    Tracks the per-path running max of +-S_k / sqrt(2 k lnln k) for
    k >= 100.  This is a loose qualitative check: the statistic converges
    at iterated-log speed, so only broad-band sanity is claimed.
    """
    if n_max < 1000:
        raise ValueError("n_max must be at least 1000")
    ens = sample_paths(config.params.q, n_max, config.reps, config.master_seed,
                       collect=("lil",), workers=workers)
    return ReplicationSummary(
        config=config,
        stats={
            "lil_pos": StatSummary.from_samples(ens.lil_pos),
            "lil_neg": StatSummary.from_samples(ens.lil_neg),
        },
    )


@dataclass(frozen=True)
class SlopeFit:
    fitted_slope: float
    intercept: float
    theoretical_slope: float
    residual: float
    dropped: tuple = ()

    def to_dict(self) -> dict:
        return {
            "fitted_slope": self.fitted_slope,
            "intercept": self.intercept,
            "theoretical_slope": self.theoretical_slope,
            "residual": self.residual,
            "dropped": list(self.dropped),
        }


def t2_rate_fit(q: float, n_list: Sequence[int], tol: float = 1e-10) -> SlopeFit:
    """Least-squares slope of log|T2(n, q)| against log n.

    The theoretical decay is n^(q-1) for q > 0 and n^(-1) for q < 0; at
    q = 0 the bound carries an extra log factor, and T2 vanishes
    identically at even n (the alternating a_k sum telescopes to 0), so
    exact zeros and underflows are dropped from the fit and reported.
    """
    ns = [int(n) for n in n_list]
    if len(ns) < 4 or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("need an increasing n list with at least 4 points")
    if ns[-1] < 100 * ns[0]:
        raise ValueError("n list should span at least two decades")
    kept, logs, dropped = [], [], []
    for n in ns:
        val = t2(n, q, tol=tol)
        if val == 0.0 or not math.isfinite(math.log(abs(val)) if val != 0.0 else -math.inf):
            dropped.append(n)
            continue
        kept.append(math.log(n))
        logs.append(math.log(abs(val)))
    if len(kept) < 2:
        raise ValueError(f"too few usable points after dropping {dropped}")
    slope, intercept = np.polyfit(kept, logs, 1)
    resid = float(np.sum((np.polyval([slope, intercept], kept) - np.array(logs)) ** 2))
    theoretical = q - 1.0 if q > 0.0 else -1.0
    return SlopeFit(
        fitted_slope=float(slope),
        intercept=float(intercept),
        theoretical_slope=theoretical,
        residual=resid,
        dropped=tuple(dropped),
    )


@dataclass(frozen=True)
class WRegimeRow:
    p: float
    summary: StatSummary         # |W_n| / r_n
    summary_scaled: StatSummary  # |W_n| / (n / r_n), the a.s. scale of W_n


def w_regime_scan(p_list: Sequence[float], n: int, reps: int,
                  master_seed: int, workers: Optional[int] = None):
    """|W_n| summaries across memory parameters; qualitative only.

    Each row reports |W_n|/r_n and |W_n|/(n/r_n).  The second quotient
    divides by the almost-sure scale of W_n (sqrt(n) in the diffusive
    regime, n^q above it, where the two normalisations differ).
    """
    rows = []
    for p in p_list:
        params = MemoryParams.from_p(p)
        ens = sample_paths(params.q, n, reps, master_seed, workers=workers)
        r = r_norm(n, p)
        w_abs = np.abs(ens.W)
        rows.append(WRegimeRow(
            p=float(p),
            summary=StatSummary.from_samples(w_abs / r),
            summary_scaled=StatSummary.from_samples(w_abs / (n / r)),
        ))
    return rows


def summary_json(config: ExperimentConfig, summary: ReplicationSummary,
                 tests: Iterable = ()) -> dict:
    """Machine-readable experiment record: config, per-statistic, tests.

    tests is an iterable of (name, KSResult) pairs.
    """
    return {
        "config": config.to_dict(),
        "per_statistic": {k: v.to_dict() for k, v in summary.stats.items()},
        "tests": [{"name": name, **res.to_dict()} for name, res in tests],
    }
