"""Monte-Carlo SNR sweeps: simulated CER per detector, union bound, mutual information.

Randomness is organised in blocks of trials.  Block ``b`` at SNR index ``i``
draws everything (receiver placements, messages, noise) from
``SeedSequence(seed, spawn_key=(0, i, b))`` and each linear detector's
fallback draws from its own child key, so a sweep's output depends only on
the plan and never on how points are scheduled across threads.  Detectors
at one SNR point share channel, message and noise realisations.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import binomtest

from . import __version__
from .analysis import BoundConfig, cer_union_bound, mutual_information
from .channel import ChannelModel
from .codebook import CodebookSpec, encode_batch
from .detection import Detector, LinkConfig, detect_batch
from .errors import InvalidParameter

__all__ = [
    "COLUMNS",
    "SweepPlan",
    "SweepResult",
    "run_cer_sweep",
    "run_bound_sweep",
    "run_mi_sweep",
    "merge_results",
    "binomial_se",
]

COLUMNS = (
    "snr_db", "detector", "trials", "errors", "cer", "ci_lo", "ci_hi", "fallbacks",
    "bound_raw", "bound_clamped", "mi", "mi_se",
)

_CER_KEY = 0


@dataclass(frozen=True)
class SweepPlan:
    spec: CodebookSpec
    channel: ChannelModel
    snr_grid_db: Sequence[float]
    detectors: Sequence[Detector] = (Detector.ML,)
    trials_per_point: int = 100_000
    min_errors: int = 200
    seed: int = 0
    n0: float = 1.0
    block_size: int = 4096
    channel_hold: int = 1
    bound_samples: int = 1000
    mi_samples: int = 20000
    mi_estimator: str = "paired"
    workers: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "snr_grid_db", tuple(float(s) for s in self.snr_grid_db))
        object.__setattr__(self, "detectors", tuple(Detector(d) for d in self.detectors))
        if not self.snr_grid_db:
            raise InvalidParameter("SNR grid is empty")
        if self.trials_per_point < 1 or self.min_errors < 1:
            raise InvalidParameter("trials_per_point and min_errors must be >= 1")
        if self.block_size < 1 or self.channel_hold < 1:
            raise InvalidParameter("block_size and channel_hold must be >= 1")
        if self.channel.n_t != self.spec.n_t:
            raise InvalidParameter(f"channel has {self.channel.n_t} LEDs but the code needs {self.spec.n_t}")
        if len(set(self.detectors)) != len(self.detectors):
            raise InvalidParameter("duplicate detectors")
        if not 0 <= self.seed < 2**64:
            raise InvalidParameter("seed must be a 64-bit unsigned integer")

    @property
    def bound_config(self) -> BoundConfig:
        return BoundConfig(self.bound_samples, self.mi_samples, self.seed)

    def describe(self) -> dict:
        """JSON-ready echo of the full configuration."""
        ch = self.channel
        return {
            "n_t": self.spec.n_t,
            "gamma": f"{self.spec.weight}/{self.spec.n_t}",
            "method": self.spec.method.value,
            "k": self.spec.k,
            "n_r": ch.n_r,
            "geometry": asdict(ch.geometry),
            "optics": {**asdict(ch.optics), "semi_angle_deg": math.degrees(ch.optics.phi_half),
                       "fov_deg": math.degrees(ch.optics.psi_fov)},
            "fov_cutoff": ch.fov_cutoff,
            "gain_unit": ch.gain_unit,
            "snr_grid_db": list(self.snr_grid_db),
            "detectors": [d.value for d in self.detectors],
            "trials_per_point": self.trials_per_point,
            "min_errors": self.min_errors,
            "seed": self.seed,
            "n0": self.n0,
            "block_size": self.block_size,
            "channel_hold": self.channel_hold,
            "bound_samples": self.bound_samples,
            "mi_samples": self.mi_samples,
            "mi_estimator": self.mi_estimator,
        }


@dataclass
class SweepResult:
    rows: list[dict]
    metadata: dict = field(default_factory=dict)

    def select(self, detector: Detector | str | None = None) -> list[dict]:
        if detector is None:
            return list(self.rows)
        name = Detector(detector).value
        return [r for r in self.rows if r["detector"] == name]

    def column(self, name: str, detector: Detector | str | None = None) -> np.ndarray:
        return np.array([np.nan if r[name] is None else r[name] for r in self.select(detector)], dtype=float)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(COLUMNS)
        for row in self.rows:
            writer.writerow(["" if row.get(c) is None else row[c] for c in COLUMNS])
        return buf.getvalue()

    def to_json(self, manifest: dict | None = None) -> str:
        doc = {"columns": list(COLUMNS), "rows": [{c: row.get(c) for c in COLUMNS} for row in self.rows],
               "metadata": self.metadata}
        if manifest is not None:
            doc["manifest"] = manifest
        return json.dumps(doc, indent=2)


def binomial_se(errors, trials):
    p = np.asarray(errors, float) / np.asarray(trials, float)
    return np.sqrt(p * (1 - p) / np.asarray(trials, float))


def _empty_row(snr_db: float, detector: str = "") -> dict:
    row = dict.fromkeys(COLUMNS)
    row["snr_db"] = snr_db
    row["detector"] = detector
    return row


def _workers(plan: SweepPlan) -> int:
    limit = os.environ.get("VLCMIMO_THREADS")
    n = plan.workers if plan.workers is not None else 1
    if limit:
        n = min(n, max(1, int(limit)))
    return max(1, n)


def _map_points(plan: SweepPlan, func) -> list:
    items = list(enumerate(plan.snr_grid_db))
    workers = _workers(plan)
    if workers == 1 or len(items) == 1:
        return [func(i, s) for i, s in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda item: func(*item), items))


def _metadata(plan: SweepPlan, kind: str) -> dict:
    return {"sweep": kind, "config": plan.describe(), "seed": plan.seed, "version": __version__}


def _block_channels(plan: SweepPlan, rng: np.random.Generator, n: int) -> np.ndarray:
    hold = plan.channel_hold
    h = plan.channel.sample(rng, -(-n // hold))
    return np.repeat(h, hold, axis=0)[:n]


def _cer_point(plan: SweepPlan, snr_index: int, snr_db: float) -> list[dict]:
    spec = plan.spec
    cfg = LinkConfig.from_snr_db(snr_db, spec, plan.n0)
    # blocks hold whole channel-hold groups
    block = -(-plan.block_size // plan.channel_hold) * plan.channel_hold
    stats = {d: {"trials": 0, "errors": 0, "fallbacks": 0} for d in plan.detectors}
    active = list(plan.detectors)
    done = 0
    b = 0
    while active:
        n = min(block, plan.trials_per_point - done)
        seq = np.random.SeedSequence(plan.seed, spawn_key=(_CER_KEY, snr_index, b))
        rng = np.random.default_rng(seq)
        h = _block_channels(plan, rng, n)
        msgs = rng.integers(0, spec.size, size=n)
        x = encode_batch(spec, msgs).astype(float)
        y = cfg.e_s * (h @ x) + rng.normal(0.0, math.sqrt(cfg.sigma2), size=(n, h.shape[1], spec.n_t))
        for det in active:
            det_index = plan.detectors.index(det)
            fb_rng = np.random.default_rng(
                np.random.SeedSequence(plan.seed, spawn_key=(_CER_KEY, snr_index, b, 1 + det_index)))
            decided, fallback = detect_batch(det, y, h, spec, cfg, fb_rng)
            s = stats[det]
            s["trials"] += n
            s["errors"] += int(np.count_nonzero(decided != msgs))
            s["fallbacks"] += int(np.count_nonzero(fallback))
        done += n
        b += 1
        active = [d for d in active if stats[d]["errors"] < plan.min_errors and done < plan.trials_per_point]

    rows = []
    for det in plan.detectors:
        s = stats[det]
        ci = binomtest(s["errors"], s["trials"]).proportion_ci(0.95, method="exact")
        row = _empty_row(snr_db, det.value)
        row.update(s, cer=s["errors"] / s["trials"], ci_lo=float(ci.low), ci_hi=float(ci.high))
        rows.append(row)
    return rows


def run_cer_sweep(plan: SweepPlan) -> SweepResult:
    """Simulated codeword error rate per SNR point and detector.

    Every trial draws a fresh receiver placement (or reuses one for
    ``channel_hold`` trials), a uniform message and Gaussian noise; a point
    stops after ``min_errors`` errors or ``trials_per_point`` trials.
    """
    if not plan.detectors:
        raise InvalidParameter("CER sweep needs at least one detector")
    points = _map_points(plan, lambda i, s: _cer_point(plan, i, s))
    return SweepResult([row for rows in points for row in rows], _metadata(plan, "cer"))


def run_bound_sweep(plan: SweepPlan) -> SweepResult:
    """Union bound at every SNR point over one shared channel sample set."""
    def point(i, snr_db):
        cfg = LinkConfig.from_snr_db(snr_db, plan.spec, plan.n0)
        res = cer_union_bound(plan.spec, plan.channel, cfg, plan.bound_config)
        row = _empty_row(snr_db)
        row.update(bound_raw=res.raw, bound_clamped=res.clamped, bound_se=res.se)
        return row

    return SweepResult(_map_points(plan, point), _metadata(plan, "bound"))


def run_mi_sweep(plan: SweepPlan) -> SweepResult:
    """Mutual information estimate and its standard error at every SNR point."""
    def point(i, snr_db):
        cfg = LinkConfig.from_snr_db(snr_db, plan.spec, plan.n0)
        res = mutual_information(plan.spec, plan.channel, cfg, plan.bound_config, plan.mi_estimator)
        row = _empty_row(snr_db)
        row.update(mi=res.value, mi_se=res.se)
        return row

    return SweepResult(_map_points(plan, point), _metadata(plan, "mi"))


def merge_results(cer: SweepResult | None = None, bound: SweepResult | None = None,
                  mi: SweepResult | None = None) -> SweepResult:
    """Fold bound and MI columns into the CER rows (or into bare per-SNR rows)."""
    extras = {}
    for part, cols in ((bound, ("bound_raw", "bound_clamped")), (mi, ("mi", "mi_se"))):
        if part is None:
            continue
        for row in part.rows:
            extras.setdefault(row["snr_db"], {}).update({c: row[c] for c in cols})
    if cer is not None:
        rows = [dict(r) for r in cer.rows]
    else:
        base = bound or mi
        if base is None:
            raise InvalidParameter("nothing to merge")
        rows = [_empty_row(r["snr_db"]) for r in base.rows]
    for row in rows:
        row.update(extras.get(row["snr_db"], {}))
    meta = {}
    for name, part in (("cer", cer), ("bound", bound), ("mi", mi)):
        if part is not None:
            meta = {**part.metadata, **meta}
            meta.setdefault("sweeps", []).append(name)
    meta.pop("sweep", None)
    return SweepResult(rows, meta)
