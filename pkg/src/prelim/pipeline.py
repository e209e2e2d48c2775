"""The augmentation pipeline: fit a black box and a generator on D^tr, label
generated points with the black box, and train a white box on the union."""
from __future__ import annotations

import json
import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .blackbox import fit_blackbox, rf_fit
from .core import Dataset, accuracy, balanced_accuracy, class_weights, kfold_indices, write_table
from .errors import DegenerateTraining, InvalidHyperparameter
from .generators import GeneratorSpec, fit_generator, ssl_size
from .whitebox import WhiteBoxConfig, box_wracc, complexity, fit_whitebox, to_text
from .whitebox.trees import TREE_VARIANTS

log = logging.getLogger(__name__)

TREE_TOTAL = 100_000
OTHER_TOTAL = 10_000
VVA_RATIOS = (0.0, 0.5, 1.0, 1.5, 2.0, 2.5)
LABEL_MODES = ("auto", "hard", "probability")


def choose_L(wb_variant: str, n: int, dataset_size: int | None = None, gen_kind: str = "kde"):
    """Number of points to generate; None for vva, whose ratio is tuned later."""
    if n < 1:
        raise ValueError("N must be at least 1")
    if gen_kind == "dummy":
        return n
    if gen_kind == "rerx":
        return n  # upper bound; the fitted subset decides
    if gen_kind == "ssl":
        if dataset_size is None:
            raise ValueError("ssl needs the dataset size")
        return ssl_size(n, dataset_size)
    if gen_kind == "vva":
        return None
    total = TREE_TOTAL if wb_variant in TREE_VARIANTS else OTHER_TOTAL
    return max(total - n, 0)


@dataclass(frozen=True)
class PrelimConfig:
    bb_kind: str = "RF"
    wb: WhiteBoxConfig = field(default_factory=lambda: WhiteBoxConfig("DTcomp"))
    gen: GeneratorSpec = field(default_factory=lambda: GeneratorSpec("kde"))
    L: int | None = None
    label_mode: str = "auto"
    weight_minority: bool = False
    seed: int = 0
    bb_params: dict = field(default_factory=dict)
    share: bool = False

    def __post_init__(self):
        if isinstance(self.wb, str):
            object.__setattr__(self, "wb", WhiteBoxConfig(self.wb))
        if isinstance(self.gen, str):
            object.__setattr__(self, "gen", GeneratorSpec(self.gen))
        if self.label_mode not in LABEL_MODES:
            raise InvalidHyperparameter(f"label_mode must be one of {LABEL_MODES}")
        if self.label_mode == "probability" and not self.wb.is_subgroup:
            raise InvalidHyperparameter("probability labels are only used with PRIM and BI")
        if self.L is not None and self.L < 0:
            raise InvalidHyperparameter("L must be non-negative")

    @property
    def probability_labels(self) -> bool:
        if self.label_mode == "auto":
            return self.wb.is_subgroup
        return self.label_mode == "probability"

    def to_dict(self):
        d = asdict(self)
        d["gen"] = {"kind": self.gen.kind, "params": dict(self.gen.params)}
        return d


def _seeds(seed):
    """Independent child seeds for black box, generator, white box and tuning."""
    return [int(c.generate_state(1)[0]) for c in np.random.SeedSequence(seed).spawn(4)]


@dataclass
class PrelimResult:
    wb: object
    bb: object
    d_new: np.ndarray
    new_targets: np.ndarray
    wb_info: dict
    provenance: dict
    feature_names: tuple = ()
    generator: object = None

    @property
    def L(self) -> int:
        return self.d_new.shape[0]

    def save(self, out_dir):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        names = self.feature_names or tuple(f"x{j}" for j in range(self.d_new.shape[1]))
        (out / "model.txt").write_text(to_text(self.wb, names), encoding="utf-8")
        write_table(out / "dnew.csv", self.d_new, self.new_targets, names)
        (out / "provenance.json").write_text(
            json.dumps(self.provenance, indent=2, sort_keys=True, default=_jsonable) + "\n",
            encoding="utf-8")
        return out


def _jsonable(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return str(v)


def check_training(d: Dataset):
    if np.unique(d.y).size < 2:
        raise DegenerateTraining("training data contains a single class")


def fit_bb(d_tr: Dataset, cfg: PrelimConfig):
    w = class_weights(d_tr.y) if cfg.weight_minority else None
    return fit_blackbox(cfg.bb_kind, d_tr.X, d_tr.y, w, seed=_seeds(cfg.seed)[0], **cfg.bb_params)


def run_baseline(d_tr: Dataset, wb_config, *, weight_minority=False, seed=0, cap=None):
    """White box on D^tr alone with the same caps and tuning as the augmented arm."""
    check_training(d_tr)
    if isinstance(wb_config, str):
        wb_config = WhiteBoxConfig(wb_config)
    w = class_weights(d_tr.y) if weight_minority and not wb_config.is_subgroup else None
    targets = d_tr.y.astype(np.float64) if wb_config.is_subgroup else d_tr.y
    return fit_whitebox(wb_config, d_tr.X, targets, w, cap=cap, seed=_seeds(seed)[2])


def _label(bb, X, probability):
    return np.asarray(bb.predict_proba(X), dtype=np.float64) if probability \
        else np.asarray(bb.predict(X), dtype=np.int64)


def _fit_on(cfg, X_tr, t_tr, X_new, t_new, cap, seed):
    X = X_new if cfg.share else np.vstack([X_tr, X_new])
    t = t_new if cfg.share else np.concatenate([t_tr, t_new])
    w = None
    if cfg.weight_minority and not cfg.wb.is_subgroup and t.size:
        w = class_weights(t)
    return fit_whitebox(cfg.wb, X, t, w, cap=cap, seed=seed)


def _wb_score(cfg, model, X, y):
    if cfg.wb.is_subgroup:
        return box_wracc(model, X, y)
    pred = model.predict(X)
    return balanced_accuracy(pred, y) if cfg.weight_minority else accuracy(pred, y)


def tune_vva_ratio(d_tr, cfg, bb, cap, seed, ratios=VVA_RATIOS, folds=5):
    """Pick L/N for vva by k-fold CV of the downstream white box on D^tr."""
    rng = np.random.default_rng(seed)
    prob = cfg.probability_labels
    means = {}
    splits = list(kfold_indices(d_tr.n, folds, rng, labels=d_tr.y))
    for r in ratios:
        scores = []
        for tr, te in splits:
            Xf = d_tr.X[tr]
            gen = fit_generator(cfg.gen, Xf, d_tr.y[tr], bb=bb, seed=seed)
            Xn = gen.sample(int(round(r * tr.size)))
            tt = _label(bb, Xf, True) if prob else d_tr.y[tr]
            model, _ = _fit_on(cfg, Xf, tt, Xn, _label(bb, Xn, prob), cap, seed)
            scores.append(_wb_score(cfg, model, d_tr.X[te], d_tr.y[te]))
        means[r] = float(np.mean(scores))
    best = ratios[0]
    for r in ratios[1:]:
        if means[r] > means[best]:
            best = r
    return best, means


def run_prelim(d_tr: Dataset, cfg: PrelimConfig, *, bb=None, baseline_cap=None, pool=None,
               forest=None) -> PrelimResult:
    """Black box, generator, L labeled points, white box on D^tr plus D^new.

    A pre-fitted ``bb`` (and ``forest`` for cmm) may be passed to share one
    hyperparameter search across generators. ``pool`` supplies the unlabeled
    rows the ssl generator draws from.
    """
    check_training(d_tr)
    bb_seed, gen_seed, wb_seed, tune_seed = _seeds(cfg.seed)
    timings = {}
    t0 = time.perf_counter()
    if bb is None:
        bb = fit_bb(d_tr, cfg)
    timings["bb"] = time.perf_counter() - t0
    kind = cfg.gen.kind
    notes = {}
    if kind == "cmm" and forest is None:
        if cfg.bb_kind.upper() == "RF":
            forest = bb
        else:
            forest = rf_fit(d_tr.X, d_tr.y, seed=bb_seed, **_rf_options(cfg.bb_params))
            notes["cmm_forest"] = "random forest fitted for the region sampler"

    t0 = time.perf_counter()
    gen = fit_generator(cfg.gen, d_tr.X, d_tr.y, bb=bb, forest=forest, pool=pool, seed=gen_seed)
    timings["gen"] = time.perf_counter() - t0

    if gen.fixed_size is not None:
        # replaying generators never cycle; an explicit L can only shorten them
        L = gen.fixed_size if cfg.L is None else min(int(cfg.L), gen.fixed_size)
    elif cfg.L is not None:
        L = int(cfg.L)
    elif kind == "vva":
        ratio, cv = tune_vva_ratio(d_tr, cfg, bb, baseline_cap, tune_seed)
        notes["vva_ratio"] = ratio
        notes["vva_cv"] = cv
        L = int(round(ratio * d_tr.n))
    else:
        L = choose_L(cfg.wb.variant, d_tr.n, None, kind)

    t0 = time.perf_counter()
    X_new = gen.sample(L)
    prob = cfg.probability_labels
    t_new = _label(bb, X_new, prob)
    t_tr = _label(bb, d_tr.X, True) if prob else d_tr.y
    timings["sample_and_label"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    wb, info = _fit_on(cfg, d_tr.X, t_tr, X_new, t_new, baseline_cap, wb_seed)
    timings["wb"] = time.perf_counter() - t0

    gen_info = gen.describe()
    if hasattr(gen, "indices_"):
        notes["ssl_rows"] = len(gen.indices_)
    provenance = {
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "n_train": d_tr.n,
        "L": L,
        "label_mode": "probability" if prob else "hard",
        "generator": gen_info,
        "fallback": gen_info.get("fallback"),
        "whitebox": {"complexity": complexity(wb), **_plain(info)},
        "baseline_cap": baseline_cap,
        "notes": _plain(notes),
        "timings": timings,
    }
    return PrelimResult(wb, bb, X_new, t_new, info, provenance, d_tr.feature_names, gen)


def _rf_options(bb_params):
    return {k: v for k, v in bb_params.items() if k in ("n_trees", "max_features", "folds")}


def _plain(d):
    out = {}
    for k, v in d.items():
        if isinstance(v, dict):
            v = {str(a): b for a, b in v.items()}
        out[k] = v
    return out
