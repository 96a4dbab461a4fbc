"""Experiment configuration, replication orchestration, JSONL persistence,
and summary statistics.

Every replication is deterministic given (master_seed, rep_index): reruns
produce byte-identical JSONL and interrupted runs resume by skipping the
rep indices already on disk.  Records pass through a single ordered sink,
so the file contents do not depend on the number of workers.  Wall-clock
timing is opt-in (`timing=True`) because a measured elapsed_ms field would
break byte-level reproducibility.
"""

import csv
import hashlib
import io
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict, field, fields

import numpy as np

from . import analysis, observables
from .geometry import cutoff_radius
from .pointprocess import Window, sample_poisson
from .abgraph import build_ab_continuum

KINDS = ("isolated", "mn", "connectivity", "percolation", "lattice", "word", "sweep")


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    d: int = 2
    n: float = None            # vertex-process intensity (unit torus kinds)
    c: float = None            # witness intensity ratio
    beta: float = 1.0
    r: float = None            # radius override / model radius
    lam: float = None          # vertex intensity (planar kinds)
    mu: float = None           # witness intensity (planar kinds)
    p: float = None            # site-open probability (lattice kind)
    L: float = None            # window side (planar / word kinds)
    size: int = None           # lattice sites per side
    lattice: str = "triangular"
    lambdas: tuple = None      # word kind: one intensity per process
    radii: tuple = None        # word kind: one radius per process
    prefix_len: int = 20       # word kind: symbols to realise
    reps: int = 200
    master_seed: int = 0
    tol: float = 1e-3

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.lambdas is not None:
            object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        if self.radii is not None:
            object.__setattr__(self, "radii", tuple(float(v) for v in self.radii))
        need = {
            "isolated": ("n", "c"), "mn": ("n", "c"),
            "connectivity": ("n", "c"),
            "percolation": ("lam", "mu", "r", "L"),
            "lattice": ("p", "size"),
            "word": ("lambdas", "radii", "L"),
            "sweep": (),
        }[self.kind]
        missing = [k for k in need if getattr(self, k) is None]
        if missing:
            raise ValueError(f"{self.kind} config missing fields: {missing}")

    def to_dict(self):
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out

    @property
    def config_hash(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:12]

    def radius(self):
        """Witness radius of the torus kinds: explicit r or r_n(c, beta)."""
        if self.r is not None:
            return self.r
        return cutoff_radius(self.n, self.c, self.beta, self.d)


RECORD_FIELDS = ("config_hash", "rep", "seed", "n_points_1", "n_points_2",
                 "W", "W_tilde", "W_bar", "W_hat", "W0", "M_n", "alpha_star",
                 "crossed", "elapsed_ms")


@dataclass
class TrialRecord:
    config_hash: str
    rep: int
    seed: list
    n_points_1: int = None
    n_points_2: int = None
    W: int = None
    W_tilde: int = None
    W_bar: int = None
    W_hat: int = None
    W0: int = None
    M_n: float = None
    alpha_star: float = None
    crossed: bool = None
    elapsed_ms: int = None

    def to_json_line(self):
        obj = {k: getattr(self, k) for k in RECORD_FIELDS}
        if obj["alpha_star"] is not None and math.isinf(obj["alpha_star"]):
            obj["alpha_star"] = "inf"
        return json.dumps(obj, separators=(",", ":"))

    @classmethod
    def from_json_line(cls, line):
        obj = json.loads(line)
        if obj.get("alpha_star") == "inf":
            obj["alpha_star"] = math.inf
        return cls(**{k: obj.get(k) for k in RECORD_FIELDS})


def run_replication(config, rep, timing=False):
    """One deterministic replication of the configured experiment."""
    t0 = time.perf_counter()
    seed = [int(config.master_seed), int(rep)]
    rec = TrialRecord(config_hash=config.config_hash, rep=int(rep), seed=seed)
    kind = config.kind
    if kind in ("isolated", "mn", "connectivity"):
        win = Window.unit_torus(config.d)
        p1 = sample_poisson(win, config.n, seed + [0])
        p2 = sample_poisson(win, config.c * config.n, seed + [1])
        rec.n_points_1, rec.n_points_2 = len(p1), len(p2)
        r = config.radius()
        rep_report = observables.auxiliary_counts(p1, p2, r)
        rec.W, rec.W_tilde, rec.W_bar = rep_report.W, rep_report.W_tilde, rep_report.W_bar
        rec.W_hat, rec.W0 = rep_report.W_hat, rep_report.W0
        if kind in ("mn", "connectivity") and len(p1) >= 2 and len(p2) >= 1:
            rec.M_n = observables.largest_nn_radius(p1, p2)
        if kind == "connectivity":
            rec.alpha_star = observables.connectivity_threshold(
                p1, p2, config.c, tol=config.tol)
    elif kind == "percolation":
        win = Window.cube(config.L, config.d)
        p1 = sample_poisson(win, config.lam, seed + [0])
        p2 = sample_poisson(win.dilate(2.0 * config.r), config.mu, seed + [1])
        rec.n_points_1, rec.n_points_2 = len(p1), len(p2)
        g = build_ab_continuum(p1, p2, config.r)
        rec.crossed = bool(observables.crossing_exists(g).crossed)
    elif kind == "lattice":
        spec = analysis.LatticeSpec(kind=config.lattice, scale=1.0,
                                    size=config.size,
                                    d=config.d if config.lattice == "z_star" else 2)
        rec.crossed = analysis.site_percolation_crossing(spec, config.p, seed)
    elif kind == "word":
        win = Window.cube(config.L, 2 if config.d is None else config.d)
        processes = [sample_poisson(win, lam_i, seed + [i])
                     for i, lam_i in enumerate(config.lambdas)]
        rec.n_points_1 = len(processes[0])
        if len(processes) > 1:
            rec.n_points_2 = len(processes[1])
        k = len(processes)
        word = [1 + (i % k) for i in range(config.prefix_len)]
        occ = analysis.find_word_occurrence(processes, config.radii, word)
        rec.crossed = bool(occ.complete)
    else:
        raise ValueError(f"kind {kind!r} is not replicable")
    if timing:
        rec.elapsed_ms = int(round((time.perf_counter() - t0) * 1000))
    return rec


def _worker(args):
    config_dict, rep, timing = args
    cfg = ExperimentConfig(**config_dict)
    return run_replication(cfg, rep, timing=timing)


def read_jsonl(path):
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(TrialRecord.from_json_line(line))
    return records


def run_experiment(config, out=None, resume=False, parallel=1, timing=False,
                   fmt="jsonl"):
    """Run all replications, return (records, summary).

    With `out`, records stream to the file through a single ordered sink
    (ascending rep).  With `resume`, reps already present in the file are
    kept and skipped; the config hash must match.
    """
    existing = []
    if resume and out and os.path.exists(out) and fmt == "jsonl":
        existing = read_jsonl(out)
        for rec in existing:
            if rec.config_hash != config.config_hash:
                raise ValueError("resume file was written by a different config")
    have = {rec.rep for rec in existing}
    todo = [rep for rep in range(config.reps) if rep not in have]

    new_records = []
    if todo:
        if parallel > 1:
            args = [(config.to_dict(), rep, timing) for rep in todo]
            with ProcessPoolExecutor(max_workers=parallel) as pool:
                new_records = list(pool.map(_worker, args, chunksize=8))
        else:
            new_records = [run_replication(config, rep, timing=timing)
                           for rep in todo]

    records = sorted(existing + new_records, key=lambda rec: rec.rep)
    if out:
        if fmt == "jsonl":
            mode = "a" if (resume and existing) else "w"
            with open(out, mode) as fh:
                for rec in sorted(new_records, key=lambda r: r.rep):
                    fh.write(rec.to_json_line() + "\n")
        elif fmt == "csv":
            with open(out, "w", newline="") as fh:
                records_to_csv(records, fh)
        else:
            raise ValueError(f"unknown format {fmt!r}")
    beta = config.beta if config.kind in ("isolated", "mn") else None
    r_threshold = config.radius() if config.kind in ("mn",) else None
    summary = summarize(records, beta=beta, r_threshold=r_threshold)
    return records, summary


def records_to_csv(records, fh):
    w = csv.writer(fh)
    w.writerow(RECORD_FIELDS)
    for rec in records:
        row = []
        for k in RECORD_FIELDS:
            v = getattr(rec, k)
            if k == "seed" and v is not None:
                v = ":".join(str(s) for s in v)
            row.append("" if v is None else v)
        w.writerow(row)


# ---------------------------------------------------------------------------
# summaries
# ---------------------------------------------------------------------------

_NUMERIC = ("W", "W_tilde", "W_bar", "W_hat", "W0", "M_n", "alpha_star",
            "n_points_1", "n_points_2")


@dataclass
class SummaryAccumulator:
    """Associative, order-independent merge of trial records."""

    count: int = 0
    config_hash: str = None
    sums: dict = field(default_factory=dict)      # field -> (n, sum, sumsq)
    w_table: dict = field(default_factory=dict)   # W value -> count
    mn_values: list = field(default_factory=list)
    crossed_n: int = 0
    crossed_k: int = 0

    def add(self, rec):
        if self.config_hash is None:
            self.config_hash = rec.config_hash
        elif rec.config_hash != self.config_hash:
            raise ValueError("mixed config hashes in one summary")
        self.count += 1
        for name in _NUMERIC:
            v = getattr(rec, name)
            if v is None or (isinstance(v, float) and math.isinf(v)):
                continue
            n, s, s2 = self.sums.get(name, (0, 0.0, 0.0))
            self.sums[name] = (n + 1, s + v, s2 + v * v)
        if rec.W is not None:
            self.w_table[int(rec.W)] = self.w_table.get(int(rec.W), 0) + 1
        if rec.M_n is not None and not math.isinf(rec.M_n):
            self.mn_values.append(rec.M_n)
        if rec.crossed is not None:
            self.crossed_n += 1
            self.crossed_k += bool(rec.crossed)

    def merge(self, other):
        out = SummaryAccumulator()
        for src in (self, other):
            if src.count == 0:
                continue
            if out.config_hash is None:
                out.config_hash = src.config_hash
            elif src.config_hash != out.config_hash:
                raise ValueError("mixed config hashes in one summary")
            out.count += src.count
            for k, (n, s, s2) in src.sums.items():
                n0, s0, s20 = out.sums.get(k, (0, 0.0, 0.0))
                out.sums[k] = (n0 + n, s0 + s, s20 + s2)
            for k, v in src.w_table.items():
                out.w_table[k] = out.w_table.get(k, 0) + v
            out.mn_values.extend(src.mn_values)
            out.crossed_n += src.crossed_n
            out.crossed_k += src.crossed_k
        out.mn_values.sort()
        return out

    def finalize(self, beta=None, r_threshold=None):
        stats = {}
        for name, (n, s, s2) in sorted(self.sums.items()):
            mean = s / n
            var = max(0.0, s2 / n - mean * mean) * (n / (n - 1) if n > 1 else 0.0)
            stats[name] = {"n": n, "mean": mean, "variance": var,
                           "se": math.sqrt(var / n) if n > 1 else 0.0}
        out = {"count": self.count, "config_hash": self.config_hash,
               "fields": stats}
        if self.w_table:
            out["w_distribution"] = {str(k): v for k, v in sorted(self.w_table.items())}
            if beta is not None:
                samples = np.repeat(list(self.w_table.keys()),
                                    list(self.w_table.values()))
                out["dtv_poisson"] = observables.dtv_poisson(samples, beta)
                out["beta"] = beta
        if self.crossed_n:
            lo, hi = observables.wilson_interval(self.crossed_k, self.crossed_n)
            out["crossed"] = {"n": self.crossed_n, "k": self.crossed_k,
                              "p_hat": self.crossed_k / self.crossed_n,
                              "wilson95": [lo, hi]}
        if r_threshold is not None and self.mn_values:
            k = sum(1 for v in self.mn_values if v <= r_threshold)
            n = len(self.mn_values)
            lo, hi = observables.wilson_interval(k, n)
            out["p_mn_le_threshold"] = {"threshold": r_threshold, "n": n, "k": k,
                                        "p_hat": k / n, "wilson95": [lo, hi]}
        return out


def summarize(records, beta=None, r_threshold=None):
    """Order-independent summary of records (all from one config)."""
    acc = SummaryAccumulator()
    for rec in records:
        acc.add(rec)
    return acc.finalize(beta=beta, r_threshold=r_threshold)


def run_sweep(base_config, param, values, out_prefix=None, parallel=1,
              timing=False):
    """Run the base experiment at each value of one parameter; one output
    file (suffix `_<param>_<value>`) and one summary per value."""
    results = []
    for v in values:
        d = base_config.to_dict()
        d[param] = v
        d["kind"] = base_config.kind
        cfg = ExperimentConfig(**d)
        out = None
        if out_prefix:
            tag = str(v).replace(".", "p")
            out = f"{out_prefix}_{param}_{tag}.jsonl"
        _, summary = run_experiment(cfg, out=out, parallel=parallel, timing=timing)
        results.append({"value": v, "summary": summary})
    return results
