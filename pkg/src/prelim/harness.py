"""Benchmark harness: split, scale, run both arms, evaluate, aggregate.

Each experiment is one (dataset, N, split) triple. Within it the black box is
fitted once per kind and shared by every generator, and every augmented run is
paired with the baseline white box trained on the same scaled split.
"""
from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .core import (Dataset, accuracy, apply_scaler, balanced_accuracy, compare, fidelity,
                   fit_scaler, make_splits, naive_class, preprocess, read_csv, wracc_of_cover)
from .errors import PrelimError, TooSmall
from .generators import KINDS as GEN_KINDS
from .pipeline import PrelimConfig, fit_bb, run_baseline, run_prelim
from .synthetic import make_synthetic
from .whitebox import WhiteBoxConfig, complexity
from .whitebox.trees import TREE_VARIANTS

log = logging.getLogger(__name__)

BASELINE = "NO"
DRAW_TOL = 1e-9
METRICS = ("rel_acc", "rel_ba", "rel_fid", "wracc", "complexity", "quality")
METRIC_ALIASES = {"accuracy": "rel_acc", "ba": "rel_ba", "balanced_accuracy": "rel_ba",
                  "fidelity": "rel_fid"}
LOWER_IS_BETTER = ("complexity",)
# errors that fail one experiment instead of the whole matrix; PrelimError and
# numpy's LinAlgError are ValueErrors
EXPERIMENT_ERRORS = (ValueError, ArithmeticError)
MEASURES = ("complexity", "accuracy", "balanced_accuracy", "fidelity", "wracc", "rel_acc",
            "rel_ba", "rel_fid", "quality")


def sig9(v: float) -> float:
    """Round to the 9 significant digits the reports carry."""
    return float(f"{v:.9g}")


@dataclass
class ExperimentMatrix:
    datasets: list
    n_train: list = field(default_factory=lambda: [100])
    k: int = 25
    bb_kinds: list = field(default_factory=lambda: ["RF"])
    wb_variants: list = field(default_factory=lambda: ["DTcomp"])
    gen_kinds: list = field(default_factory=lambda: ["kde"])
    metrics: list = field(default_factory=lambda: ["rel_acc"])
    seed: int = 0
    weight_minority: bool = False
    L: int | None = None
    bb_params: dict = field(default_factory=dict)
    wdl_generator: str = "kde"
    base_dir: str = "."
    share: bool = False

    def __post_init__(self):
        self.metrics = [METRIC_ALIASES.get(m, m) for m in self.metrics]
        for m in self.metrics:
            if m not in METRICS:
                raise PrelimError(f"unknown metric {m!r}; choose from {METRICS}")
        for v in self.wb_variants:
            WhiteBoxConfig(v)
        for g in self.gen_kinds:
            if g not in GEN_KINDS:
                raise PrelimError(f"unknown generator {g!r}")
        for b in self.bb_kinds:
            if b.upper() not in ("RF", "BT"):
                raise PrelimError(f"unknown black box {b!r}")

    @classmethod
    def from_file(cls, path, **overrides):
        path = Path(path)
        cfg = json.loads(path.read_text(encoding="utf-8"))
        cfg.setdefault("base_dir", str(path.parent))
        cfg.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**cfg)

    def bb_options(self, kind):
        p = self.bb_params
        if kind.upper() == "RF":
            return {"n_trees": int(p.get("rf_trees", 100))}
        return {"budget": int(p.get("bt_budget", 25))}


def dataset_label(spec, i):
    return spec.get("name") or spec.get("synthetic") or Path(spec.get("csv", f"d{i}")).stem


def load_dataset(spec, base_dir=".") -> Dataset:
    if "synthetic" in spec:
        return make_synthetic(spec["synthetic"], spec.get("size", 2000), spec.get("noise", 0.0),
                              spec.get("seed", 0))
    path = Path(spec["csv"])
    if not path.is_absolute():
        path = Path(base_dir) / path
    if spec.get("preprocess"):
        return preprocess(pd.read_csv(path), spec.get("target", "y"), spec.get("positive"))
    return read_csv(path)


def derive_seed(*parts) -> int:
    # the length prefix keeps (a, b) and (a, b, 0) apart; SeedSequence
    # ignores trailing zero words
    words = [len(parts)] + [int(p) for p in parts]
    return int(np.random.SeedSequence(words).generate_state(1)[0])


# --- evaluation -------------------------------------------------------------

def evaluate(model, bb_pred, X, y, naive, subgroup: bool) -> dict:
    pred = np.asarray(model.predict(X), dtype=np.int64)
    base = np.full(y.size, naive, dtype=np.int64)
    out = {
        "complexity": complexity(model),
        "accuracy": accuracy(pred, y),
        "balanced_accuracy": balanced_accuracy(pred, y),
        "fidelity": fidelity(pred, bb_pred),
        "wracc": wracc_of_cover(pred == 1, y),
    }
    out["rel_acc"] = out["accuracy"] - accuracy(base, y)
    out["rel_ba"] = out["balanced_accuracy"] - balanced_accuracy(base, y)
    out["rel_fid"] = out["fidelity"] - fidelity(base, bb_pred)
    out["quality"] = out["wracc"] if subgroup else out["rel_acc"]
    return {k: (int(v) if k == "complexity" else sig9(v)) for k, v in out.items()}


def _experiment(task):
    """All cells of one (dataset, N, split); returns a list of rows."""
    m, di, name, d, n, s, train, test = task
    split_seed = derive_seed(m.seed, di, n)
    cell_seed = derive_seed(m.seed, di, n, s)
    scaler = fit_scaler(d.X[train])
    d_tr = apply_scaler(scaler, d.subset(train))
    d_te = apply_scaler(scaler, d.subset(test))
    naive = naive_class(d_tr.y)
    common = {"dataset": name, "n_train": n, "split": s, "split_seed": split_seed,
              "scaler": scaler.digest(), "seed": cell_seed}
    rows = []
    bbs = {}
    for bi, kind in enumerate(m.bb_kinds):
        cfg = PrelimConfig(kind, m.wb_variants[0], "dummy", weight_minority=m.weight_minority,
                           seed=derive_seed(cell_seed, bi), bb_params=m.bb_options(kind))
        try:
            bbs[kind] = fit_bb(d_tr, cfg)
        except EXPERIMENT_ERRORS as err:
            bbs[kind] = err
    baselines = {}
    for wb in m.wb_variants:
        try:
            baselines[wb] = run_baseline(d_tr, wb, weight_minority=m.weight_minority,
                                         seed=cell_seed)
        except EXPERIMENT_ERRORS as err:
            baselines[wb] = err
    for kind in m.bb_kinds:
        bb = bbs[kind]
        for wb in m.wb_variants:
            wcfg = WhiteBoxConfig(wb)
            for gen in [BASELINE] + list(m.gen_kinds):
                row = dict(common, bb=kind, wb=wb, gen=gen)
                try:
                    if isinstance(bb, Exception):
                        raise bb
                    if isinstance(baselines[wb], Exception):
                        raise baselines[wb]
                    row.update(_run_cell(m, d_tr, d_te, bb, wcfg, gen, baselines[wb], naive,
                                         cell_seed, kind))
                    row["status"] = "ok"
                except EXPERIMENT_ERRORS as err:
                    log.warning("experiment %s failed: %s", row, err)
                    row["status"] = f"failed: {type(err).__name__}"
                rows.append(row)
    return rows


def _run_cell(m, d_tr, d_te, bb, wcfg, gen, baseline, naive, seed, kind, share=None):
    base_model, base_info = baseline
    eval_mask = np.ones(d_te.n, dtype=bool)
    out = {"L": 0, "fallback": ""}
    share = m.share if share is None else share
    if gen == BASELINE:
        model = base_model
    else:
        cfg = PrelimConfig(kind, wcfg, gen, L=m.L, weight_minority=m.weight_minority, seed=seed,
                           bb_params=m.bb_options(kind))
        res = run_prelim(d_tr, cfg, bb=bb, baseline_cap=base_info.get("cap"), pool=d_te.X)
        model = res.wb
        out["L"] = res.L
        out["fallback"] = res.provenance.get("fallback") or ""
        gen_obj = res.generator
        if getattr(gen_obj, "indices_", None) is not None:
            eval_mask[gen_obj.indices_[:res.L]] = False
        if share and wcfg.is_tree:
            scfg = PrelimConfig(kind, wcfg, gen, L=m.L, weight_minority=m.weight_minority,
                                seed=seed, bb_params=m.bb_options(kind), share=True)
            shared = run_prelim(d_tr, scfg, bb=bb, baseline_cap=base_info.get("cap"),
                                pool=d_te.X)
    X, y = d_te.X[eval_mask], d_te.y[eval_mask]
    bb_pred = np.asarray(bb.predict(X), dtype=np.int64)
    sub = wcfg.is_subgroup
    cur = evaluate(model, bb_pred, X, y, naive, sub)
    ref = evaluate(base_model, bb_pred, X, y, naive, sub)
    out.update(cur)
    out.update({f"base_{k}": v for k, v in ref.items()})
    out["bb_rel_acc"] = sig9(accuracy(bb_pred, y) - accuracy(np.full(y.size, naive), y))
    out["n_eval"] = int(y.size)
    if share and wcfg.is_tree:
        if gen == BASELINE:
            sh = cur
        else:
            sh = evaluate(shared.wb, bb_pred, X, y, naive, sub)
        out["share_accuracy"] = sh["accuracy"]
        out["gap"] = sig9(cur["accuracy"] - sh["accuracy"])
    return out


# --- matrix -----------------------------------------------------------------

def _tasks(m: ExperimentMatrix):
    for di, spec in enumerate(m.datasets):
        d = load_dataset(spec, m.base_dir)
        name = dataset_label(spec, di)
        for n in m.n_train:
            if n >= d.n:
                raise TooSmall(f"{name}: n_train={n} not below |D|={d.n}")
            plan = make_splits(d, n, m.k, derive_seed(m.seed, di, n))
            for s, (train, test) in enumerate(plan):
                yield (m, di, name, d, n, s, train, test)


def run_matrix(m: ExperimentMatrix, jobs: int = 1):
    """Every experiment row plus the aggregate tables."""
    tasks = list(_tasks(m))
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            chunks = list(ex.map(_experiment, tasks))
    else:
        chunks = [_experiment(t) for t in tasks]
    rows = [r for chunk in chunks for r in chunk]
    return rows, aggregate(rows, m)


def private_sharing_run(m: ExperimentMatrix, jobs: int = 1):
    """Same as run_matrix, but each tree is also trained on D^new alone;
    rows carry the accuracy gap between the two."""
    bad = [v for v in m.wb_variants if v not in TREE_VARIANTS]
    if bad:
        raise PrelimError(f"private sharing applies to decision trees only, not {bad}")
    m.share = True
    try:
        return run_matrix(m, jobs)
    finally:
        m.share = False


# --- aggregation ------------------------------------------------------------

def _outcome(metric, value, base):
    if metric in LOWER_IS_BETTER:
        value, base = -value, -base
    return compare(value, base, DRAW_TOL)


def aggregate(rows, m: ExperimentMatrix):
    """Per (metric, N, bb, wb, gen): pooled mean and win/draw/loss vs NO."""
    ok = [r for r in rows if r.get("status") == "ok"]
    cells = {}
    for r in ok:
        for metric in m.metrics:
            key = (metric, r["n_train"], r["bb"], r["wb"], r["gen"])
            c = cells.setdefault(key, {"values": [], "win": 0, "draw": 0, "loss": 0,
                                       "bb_rel_acc": []})
            c["values"].append(r[metric])
            c["bb_rel_acc"].append(r["bb_rel_acc"])
            c[_outcome(metric, r[metric], r[f"base_{metric}"])] += 1
    for c in cells.values():
        c["mean"] = math.fsum(c["values"]) / len(c["values"])
        c["count"] = len(c["values"])
        c["bb_mean"] = math.fsum(c["bb_rel_acc"]) / len(c["bb_rel_acc"])
    return cells


# --- reports ----------------------------------------------------------------

class Exact(float):
    """A float written in shortest round-trip form instead of 9 digits."""


def _fmt(v):
    if isinstance(v, Exact):
        return repr(float(v))
    if isinstance(v, float):
        return f"{v:.9g}"
    return "" if v is None else str(v)


def _write(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(_fmt(v) for v in r) + "\n")


EXPERIMENT_COLUMNS = (["dataset", "n_train", "split", "split_seed", "scaler", "seed", "bb", "wb",
                       "gen", "status", "L", "fallback", "n_eval"] + list(MEASURES)
                      + [f"base_{k}" for k in MEASURES] + ["bb_rel_acc"])
SHARE_COLUMNS = ["share_accuracy", "gap"]


def emit_reports(rows, cells, m: ExperimentMatrix, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cols = list(EXPERIMENT_COLUMNS)
    if any("gap" in r for r in rows):
        cols += SHARE_COLUMNS
    _write(out / "experiments.csv", cols, [[r.get(c) for c in cols] for r in rows])
    written = ["experiments.csv"]
    gens = [BASELINE] + list(m.gen_kinds)
    groups = [(wb, bb) for wb in m.wb_variants for bb in m.bb_kinds]
    for metric in m.metrics:
        for n in m.n_train:
            body = []
            for g in gens:
                line = [g]
                for wb, bb in groups:
                    c = cells.get((metric, n, bb, wb, g))
                    # exact so the cell recomputes from experiments.csv
                    line.append(Exact(c["mean"]) if c else None)
                body.append(line)
            name = f"heatmap_{metric}_{n}.csv"
            _write(out / name, ["gen"] + [f"{wb}|{bb}" for wb, bb in groups], body)
            written.append(name)
        body, by_gen = [], []
        for bb in m.bb_kinds:
            for n in m.n_train:
                bb_vals = [cells[k]["bb_mean"] for k in cells
                           if k[0] == metric and k[1] == n and k[2] == bb and k[4] == BASELINE]
                line = [bb, n, float(np.mean(bb_vals)) if bb_vals else None]
                for wb in m.wb_variants:
                    line.append(_wdl(cells.get((metric, n, bb, wb, m.wdl_generator))))
                body.append(line)
                for g in gens:
                    by_gen.append([bb, n, g] + [_wdl(cells.get((metric, n, bb, wb, g)))
                                                for wb in m.wb_variants])
        _write(out / f"wdl_{metric}.csv", ["BB", "N", "bb"] + list(m.wb_variants), body)
        _write(out / f"wdl_{metric}_by_gen.csv", ["BB", "N", "gen"] + list(m.wb_variants), by_gen)
        written += [f"wdl_{metric}.csv", f"wdl_{metric}_by_gen.csv"]
    if any("gap" in r for r in rows):
        body = []
        for bb in m.bb_kinds:
            for wb in m.wb_variants:
                for g in gens:
                    gaps = [r["gap"] for r in rows if r.get("status") == "ok" and r["bb"] == bb
                            and r["wb"] == wb and r["gen"] == g and "gap" in r]
                    if gaps:
                        body.append([bb, wb, g, len(gaps), math.fsum(gaps) / len(gaps),
                                     math.fsum(abs(x) for x in gaps) / len(gaps)])
        _write(out / "share_gap.csv", ["BB", "wb", "gen", "count", "mean_gap", "mean_abs_gap"],
               body)
        written.append("share_gap.csv")
    return written


def _wdl(c):
    return "" if c is None else f"{c['win']}/{c['draw']}/{c['loss']}"
