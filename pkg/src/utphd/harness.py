"""Monte Carlo benchmark runner, configuration and result files."""
from __future__ import annotations

import configparser
import csv
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.optimize import linear_sum_assignment

from .core import MixtureState
from .estimation import estimate_count_tcphd, estimate_count_tphd, extract
from .filter_tcphd import gm_tcphd_predict, gm_tcphd_update, tcphd_predict, tcphd_update
from .filter_tphd import DEFAULT_GATE, gm_tphd_predict, gm_tphd_update, tphd_predict, tphd_update
from .metric import trajectory_metric
from .models import BetaTransition
from .reduction import reduce_mixture
from .sim import (DetectionProfile, Scenario, generate_measurements, generate_truth,
                  make_scenario, truth_trajectories)

log = logging.getLogger(__name__)

FILTER_NAMES = ("bgu-tphd", "bgu-tcphd", "gm-tphd", "gm-tcphd")


class ConfigError(ValueError):
    """Invalid benchmark configuration; the message names the offending field."""


@dataclass(frozen=True)
class BenchmarkConfig:
    scenario: str = "scenario1"
    n_scans: int = 100
    birth_u: float = 8.0
    birth_v: float = 2.0
    p_d: float | None = None
    filters: tuple = ("bgu-tphd", "bgu-tcphd")
    lscan: tuple = (5,)
    k_beta: float = 1.05
    n_max: int = 100
    gate: float | None = DEFAULT_GATE
    T_p: float = 1e-5
    T_a: float = 4.0
    J_max: int = 100
    p: float = 2.0
    c: float = 10.0
    gamma: float = 1.0
    mc: int = 1
    seed: int = 0
    workers: int = 1

    def validate(self) -> BenchmarkConfig:
        def bad(section, key, msg):
            raise ConfigError(f"[{section}] {key}: {msg}")

        try:
            make_scenario(self.scenario)
        except ValueError as e:
            bad("scenario", "name", str(e))
        if self.n_scans < 1:
            bad("scenario", "n_scans", "must be >= 1")
        if self.birth_u <= 0 or self.birth_v <= 0:
            bad("scenario", "birth_u/birth_v", "Beta parameters must be positive")
        if self.p_d is not None and not 0.0 <= self.p_d <= 1.0:
            bad("scenario", "p_d", "must lie in [0, 1]")
        if not self.filters:
            bad("filter", "filters", "at least one filter required")
        for f in self.filters:
            if f not in FILTER_NAMES:
                bad("filter", "filters", f"unknown filter {f!r}; choose from {', '.join(FILTER_NAMES)}")
        if not self.lscan or any(L < 1 for L in self.lscan):
            bad("filter", "lscan", "window lengths must be >= 1")
        if abs(self.k_beta) < 1.0:
            bad("filter", "k_beta", "|k_beta| must be >= 1")
        if self.n_max < 1:
            bad("filter", "n_max", "must be >= 1")
        if self.gate is not None and self.gate <= 0:
            bad("filter", "gate", "must be positive or 'none'")
        if self.T_p < 0:
            bad("reduction", "T_p", "must be >= 0")
        if self.T_a <= 0:
            bad("reduction", "T_a", "must be > 0")
        if self.J_max < 1:
            bad("reduction", "J_max", "must be >= 1")
        if self.p < 1 or self.c <= 0 or self.gamma <= 0:
            bad("metric", "p/c/gamma", "need p >= 1, c > 0, gamma > 0")
        if self.mc < 1:
            bad("run", "mc", "must be >= 1")
        if self.workers < 1:
            bad("run", "workers", "must be >= 1")
        return self


# (section, key, field, parser)
_KEYS = [
    ("scenario", "name", "scenario", str),
    ("scenario", "n_scans", "n_scans", int),
    ("scenario", "birth_u", "birth_u", float),
    ("scenario", "birth_v", "birth_v", float),
    ("scenario", "p_d", "p_d", float),
    ("filter", "filters", "filters", lambda s: tuple(x.strip() for x in s.split(",") if x.strip())),
    ("filter", "lscan", "lscan", lambda s: tuple(int(x) for x in s.split(",") if x.strip())),
    ("filter", "k_beta", "k_beta", float),
    ("filter", "n_max", "n_max", int),
    ("filter", "gate", "gate", lambda s: None if s.strip().lower() == "none" else float(s)),
    ("reduction", "T_p", "T_p", float),
    ("reduction", "T_a", "T_a", float),
    ("reduction", "J_max", "J_max", int),
    ("metric", "p", "p", float),
    ("metric", "c", "c", float),
    ("metric", "gamma", "gamma", float),
    ("run", "mc", "mc", int),
    ("run", "seed", "seed", int),
    ("run", "workers", "workers", int),
]


def load_config(path: str | None = None, **overrides) -> BenchmarkConfig:
    """Read an INI config (sections scenario/filter/reduction/metric/run), then apply overrides."""
    cfg = BenchmarkConfig()
    if path is not None:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        if not cp.read(path):
            raise ConfigError(f"cannot read config file {path}")
        known = {(s, k) for s, k, _, _ in _KEYS}
        for section in cp.sections():
            for key in cp[section]:
                if (section, key) not in known:
                    raise ConfigError(f"[{section}] {key}: unknown key")
        values = {}
        for section, key, name, parse in _KEYS:
            if cp.has_option(section, key):
                raw = cp.get(section, key)
                try:
                    values[name] = parse(raw)
                except ValueError as e:
                    raise ConfigError(f"[{section}] {key}: cannot parse {raw!r} ({e})") from None
        cfg = replace(cfg, **values)
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    return cfg.validate()


def build_scenario(cfg: BenchmarkConfig) -> Scenario:
    sc = make_scenario(cfg.scenario, u=cfg.birth_u, v=cfg.birth_v)
    if cfg.p_d is not None:
        sc.profile = DetectionProfile(cfg.p_d)
    sc.n_scans = cfg.n_scans
    return sc


@dataclass
class RunResult:
    """Per-run, per-filter traces; arrays are indexed by scan - 1."""

    d_pow: dict = field(default_factory=dict)       # label -> (K, 5): total, loc, miss, false, switch (p-th powers)
    count: dict = field(default_factory=dict)       # label -> (K,)
    detection: dict = field(default_factory=dict)   # label -> (n_targets, K), NaN when unassociated
    seconds: dict = field(default_factory=dict)     # label -> float


def filter_label(name: str, L: int, cfg: BenchmarkConfig) -> str:
    return name if len(cfg.lscan) == 1 else f"{name}:L={L}"


def run_filter(name: str, L: int, sc: Scenario, scans: list, cfg: BenchmarkConfig):
    """Run one filter over a measurement sequence; returns per-scan estimate lists and counts."""
    beta = name.startswith("bgu")
    cphd = name.endswith("tcphd")
    bt = BetaTransition(cfg.k_beta)
    p_D = sc.profile.constant
    mix = MixtureState.empty(sc.model.n_x, 0, beta=beta, window=L,
                             n_max=cfg.n_max if cphd else None)
    estimates, counts = [], []
    for Z in scans:
        if name == "bgu-tphd":
            mix = tphd_update(tphd_predict(mix, sc.model, sc.birth, bt), Z, sc.model, sc.clutter,
                              cfg.gate)
        elif name == "bgu-tcphd":
            mix = tcphd_update(tcphd_predict(mix, sc.model, sc.birth, bt), Z, sc.model,
                               sc.clutter, cfg.gate)
        elif name == "gm-tphd":
            mix = gm_tphd_update(gm_tphd_predict(mix, sc.model, sc.birth), Z, sc.model,
                                 sc.clutter, p_D, cfg.gate)
        else:
            mix = gm_tcphd_update(gm_tcphd_predict(mix, sc.model, sc.birth), Z, sc.model,
                                  sc.clutter, p_D, cfg.gate)
        mix = reduce_mixture(mix, cfg.T_p, cfg.T_a, cfg.J_max)
        n = estimate_count_tcphd(mix) if cphd else estimate_count_tphd(mix)
        estimates.append(extract(mix, n))
        counts.append(n)
    return estimates, np.array(counts)


def _detection_trace(sc, truth_states, estimates, c):
    K = len(estimates)
    out = np.full((len(sc.targets), K), np.nan)
    for t, ests in enumerate(estimates):
        k = t + 1
        alive = [i for i, tg in enumerate(sc.targets) if tg.alive(k)]
        if not alive or not ests:
            continue
        tpos = np.array([truth_states[sc.targets[i].id][k - sc.targets[i].birth_time][:2]
                         for i in alive])
        epos = np.array([e.states[-1][:2] for e in ests])
        d = np.linalg.norm(epos[:, None] - tpos[None], axis=-1)
        r, cidx = linear_sum_assignment(np.minimum(d, c))
        for a, b in zip(r, cidx):
            if d[a, b] < c:
                out[alive[b], t] = ests[a].detection_prob
    return out


def run_single(cfg: BenchmarkConfig, run: int) -> RunResult:
    """One Monte Carlo run: shared truth and measurements, every configured filter."""
    sc = build_scenario(cfg)
    rng = np.random.default_rng(cfg.seed + run)
    truth = generate_truth(sc)
    scans = [generate_measurements(sc, truth, k, rng) for k in range(1, cfg.n_scans + 1)]
    res = RunResult()
    for name in cfg.filters:
        for L in cfg.lscan:
            label = filter_label(name, L, cfg)
            t0 = time.perf_counter()
            estimates, counts = run_filter(name, L, sc, scans, cfg)
            res.seconds[label] = time.perf_counter() - t0
            rows = np.zeros((cfg.n_scans, 5))
            for t, ests in enumerate(estimates):
                k = t + 1
                rep = trajectory_metric(ests, truth_trajectories(sc, truth, k), cfg.p, cfg.c,
                                        cfg.gamma, k)
                rows[t] = np.array([rep.total, rep.localization, rep.missed, rep.false_,
                                    rep.switch_]) ** cfg.p
            res.d_pow[label] = rows
            res.count[label] = counts
            res.detection[label] = _detection_trace(sc, truth, estimates, cfg.c)
    return res


@dataclass
class BenchmarkReport:
    config: BenchmarkConfig
    labels: list
    runs: list  # RunResult per Monte Carlo run, in run-index order

    def stacked(self, attr: str, label: str) -> np.ndarray:
        return np.stack([getattr(r, attr)[label] for r in self.runs])

    def rms(self, label: str) -> np.ndarray:
        """Per-scan RMS values, (K, 5): total then the four channels."""
        d = self.stacked("d_pow", label)
        k = np.arange(1, d.shape[1] + 1)[:, None]
        return (d.mean(axis=0) / k) ** (1.0 / self.config.p)

    def average_tm(self, label: str) -> float:
        """Time average of the per-scan RMS trajectory-metric error."""
        return float(self.rms(label)[:, 0].mean())

    def tm_standard_error(self, label: str) -> float:
        """Monte Carlo standard error of :meth:`average_tm` (delta method per run)."""
        d = self.stacked("d_pow", label)[:, :, 0]
        k = np.arange(1, d.shape[1] + 1)
        mean = d.mean(axis=0)
        p = self.config.p
        grad = (1.0 / p) * (mean / k) ** (1.0 / p - 1.0) / k
        per_run = (d * grad).mean(axis=1)
        return float(per_run.std(ddof=1) / np.sqrt(len(d))) if len(d) > 1 else float("nan")

    def mean_seconds(self, label: str) -> float:
        return float(np.mean([r.seconds[label] for r in self.runs]))


def run_benchmark(cfg: BenchmarkConfig) -> BenchmarkReport:
    """Run ``cfg.mc`` Monte Carlo realizations (seed = base seed + run index)."""
    cfg.validate()
    labels = [filter_label(n, L, cfg) for n in cfg.filters for L in cfg.lscan]
    if cfg.workers > 1 and cfg.mc > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            runs = list(pool.map(run_single, [cfg] * cfg.mc, range(cfg.mc)))
    else:
        runs = []
        for i in range(cfg.mc):
            runs.append(run_single(cfg, i))
            log.info("run %d/%d done", i + 1, cfg.mc)
    return BenchmarkReport(cfg, labels, runs)


def _fmt(x) -> str:
    return "nan" if x is None or not np.isfinite(x) else repr(float(x))


def emit_outputs(report: BenchmarkReport, out_dir: str) -> list[str]:
    """Write rms_tm.csv, cardinality.csv, detection.csv, runtime.csv and summary.json."""
    cfg = report.config
    os.makedirs(out_dir, exist_ok=True)
    sc = build_scenario(cfg)
    truth_count = [sum(tg.alive(k) for tg in sc.targets) for k in range(1, cfg.n_scans + 1)]
    paths = []

    def open_csv(name):
        path = os.path.join(out_dir, name)
        paths.append(path)
        return open(path, "w", newline="")

    with open_csv("rms_tm.csv") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time", "filter", "total", "loc", "miss", "false", "switch"])
        for label in report.labels:
            for t, row in enumerate(report.rms(label)):
                w.writerow([t + 1, label] + [_fmt(x) for x in row])

    with open_csv("cardinality.csv") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time", "filter", "truth", "mean", "mean_minus_std", "mean_plus_std"])
        for label in report.labels:
            n = report.stacked("count", label).astype(float)
            mean, std = n.mean(axis=0), n.std(axis=0)
            for t in range(cfg.n_scans):
                w.writerow([t + 1, label, truth_count[t], _fmt(mean[t]), _fmt(mean[t] - std[t]),
                            _fmt(mean[t] + std[t])])

    with open_csv("detection.csv") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time", "filter", "target", "truth_pd", "mean_estimate"])
        for label in report.labels:
            det = report.stacked("detection", label)
            for i, tg in enumerate(sc.targets):
                for k in range(tg.birth_time, min(tg.death_time, cfg.n_scans) + 1):
                    vals = det[:, i, k - 1]
                    est = float(np.nanmean(vals)) if np.isfinite(vals).any() else float("nan")
                    w.writerow([k, label, tg.id, _fmt(sc.profile(tg.id, k)), _fmt(est)])

    with open_csv("runtime.csv") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["filter", "L", "mean_seconds"])
        for name in cfg.filters:
            for L in cfg.lscan:
                w.writerow([name, L, _fmt(report.mean_seconds(filter_label(name, L, cfg)))])

    summary = {
        "config": {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(cfg).items()},
        "base_seed": cfg.seed,
        "seeds": [cfg.seed + i for i in range(cfg.mc)],
        "average_tm": {label: report.average_tm(label) for label in report.labels},
    }
    path = os.path.join(out_dir, "summary.json")
    with open(path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths.append(path)
    return paths
