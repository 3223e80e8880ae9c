"""k-fold link-prediction evaluation at user (seller) and item level."""
from __future__ import annotations

import csv
import io
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

from .config import RunConfig, rng_for, derive_seed
from .graph import CommercialGraph, Transaction, build_graph
from .items import build_recommendations, mine_rules
from .scoring import check_coefficients, rank_candidates
from .similarity import SimilarityTable, candidate_sellers, compute_simrank, top_n_similar

_log = logging.getLogger(__name__)

ITEM_METHODS = ("best_selling", "random", "rules")

# Maximum precision/recall/F-measure (percent) per item-selection method as
# reported for the original marketplace data; kept for side-by-side reading.
REFERENCE_ITEM_MAXIMA = {
    "best_selling": {"precision": 10.79, "recall": 25.34, "f": 10.44},
    "rules": {"precision": 0.15, "recall": 0.49, "f": 0.21},
    "random": {"precision": 0.29, "recall": 0.458, "f": 0.33},
}


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: dict[str, int]
    seed: int

    def sizes(self) -> list[int]:
        out = [0] * self.k
        for f in self.assignments.values():
            out[f] += 1
        return out

    def split(self, transactions: Iterable[Transaction], fold: int):
        """``(training, validation)`` transaction lists for held-out ``fold``."""
        train, valid = [], []
        for t in transactions:
            (valid if self.assignments[t.id] == fold else train).append(t)
        return train, valid


def make_folds(transactions: Sequence[Transaction], k: int = 10, seed: int = 0) -> FoldPlan:
    """Seeded permutation dealt round-robin into ``k`` folds (sizes differ by at most 1)."""
    if k < 2:
        raise ValueError("k must be >= 2")
    ids = sorted(t.id for t in transactions)
    if len(set(ids)) != len(ids):
        raise ValueError("transaction ids must be unique")
    if len(ids) < k:
        raise ValueError(f"need at least k={k} transactions, got {len(ids)}")
    perm = rng_for(seed, "folds").permutation(len(ids))
    return FoldPlan(k, {ids[p]: i % k for i, p in enumerate(perm)}, seed)


def sample_targets(
    validation: Sequence[Transaction],
    training_graph: CommercialGraph | None,
    count: int,
    seed: int,
    max_links: int = 0,
) -> list[str]:
    """Up to ``count`` distinct buyers with at least one held-out purchase.

    With ``max_links > 0`` only buyers with at most that many distinct held-out
    sellers are eligible. ``training_graph`` is accepted for symmetry with the
    other fold helpers; eligibility depends on the validation fold alone.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    links: dict[str, set] = {}
    for t in validation:
        links.setdefault(t.buyer, set()).add(t.seller)
    eligible = sorted(u for u, s in links.items() if not max_links or len(s) <= max_links)
    if not eligible:
        _log.warning("no eligible targets in validation fold; fold skipped")
        return []
    if len(eligible) <= count:
        if len(eligible) < count:
            _log.info("target shortfall: %d eligible, %d requested", len(eligible), count)
        return eligible
    picks = rng_for(seed, "targets").choice(len(eligible), size=count, replace=False)
    return sorted(eligible[i] for i in picks)


class MetricPoint(NamedTuple):
    size: int
    precision: float
    recall: float
    f_measure: float


def f_measure(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r > 0 else 0.0


def _points(predictions: dict, truth: dict, sizes: Sequence[int]) -> list[MetricPoint]:
    """Precision/recall/F over all targets for each prediction-list size.

    ``predictions[u]`` is an ordered list of keys; ``truth[u]`` the set of
    keys held out for ``u``.
    """
    relevant = sum(len(truth[u]) for u in truth)
    out = []
    for s in sizes:
        issued = hits = 0
        for u, preds in predictions.items():
            top = preds[:s]
            issued += len(top)
            hits += sum(1 for p in top if p in truth[u])
        p = hits / issued if issued else 0.0
        r = hits / relevant if relevant else 0.0
        out.append(MetricPoint(s, p, r, f_measure(p, r)))
    return out


@dataclass
class FoldContext:
    """Training-side artifacts for one fold, built lazily and shared by all series."""

    graph: CommercialGraph
    validation: Sequence[Transaction]
    targets: Sequence[str]
    config: RunConfig
    fold: int = 0
    table: SimilarityTable | None = None
    _ranked: dict = field(default_factory=dict)
    _rules: list | None = None

    def similarity(self) -> SimilarityTable:
        if self.table is None:
            c = self.config
            self.table = compute_simrank(self.graph, c.damping, c.max_iters, c.tol)
        return self.table

    def rules(self):
        if self._rules is None:
            c = self.config
            self._rules = mine_rules(self.graph, c.min_support, c.min_confidence, c.min_count)
        return self._rules

    def task_seed(self, u: str) -> int:
        return int(derive_seed(self.config.seed, "task", self.fold, u).generate_state(1)[0])

    def ranked(self, u: str):
        """Full fused ranking of candidate sellers for ``u``."""
        if u not in self._ranked:
            c = self.config
            if u in self.graph:
                self._ranked[u] = rank_candidates(
                    self.graph, self.similarity(), u, c.n_similar, c.alpha, c.beta, c.gamma
                )
            else:
                self._ranked[u] = []
        return self._ranked[u]

    def random_order(self, u: str) -> list[str]:
        """Stage-1 candidates in a seeded uniformly random order."""
        if u not in self.graph:
            return []
        similar = top_n_similar(self.similarity(), u, self.config.n_similar)
        cands = candidate_sellers(self.graph, u, similar).sorted()
        perm = rng_for(self.config.seed, "m2", self.fold, u).permutation(len(cands))
        return [cands[i] for i in perm]


def _context(training_graph, validation, targets, config, table=None, fold=0) -> FoldContext:
    if isinstance(training_graph, FoldContext):
        return training_graph
    return FoldContext(training_graph, validation, targets, config or RunConfig(), fold, table)


def evaluate_user_level(
    training_graph,
    validation: Sequence[Transaction] = (),
    targets: Sequence[str] = (),
    mode: str = "M1",
    list_sizes: Sequence[int] = range(1, 26),
    config: RunConfig | None = None,
    table: SimilarityTable | None = None,
    fold: int = 0,
) -> list[MetricPoint]:
    """Seller-level metrics: a prediction is a hit if (seller, target) is a held-out link.

    ``M1`` ranks candidates with the fused scores; ``M2`` shuffles the same
    candidates with a seeded permutation. ``training_graph`` may also be a
    prepared :class:`FoldContext`.
    """
    ctx = _context(training_graph, validation, targets, config, table, fold)
    if mode not in ("M1", "M2"):
        raise ValueError(f"mode must be M1 or M2, got {mode!r}")
    truth = {u: set() for u in ctx.targets}
    for t in ctx.validation:
        if t.buyer in truth:
            truth[t.buyer].add(t.seller)
    if mode == "M1":
        preds = {u: [c.seller for c in ctx.ranked(u)] for u in ctx.targets}
    else:
        preds = {u: ctx.random_order(u) for u in ctx.targets}
    return _points(preds, truth, list_sizes)


def evaluate_item_level(
    training_graph,
    validation: Sequence[Transaction] = (),
    targets: Sequence[str] = (),
    item_method: str = "best_selling",
    list_sizes: Sequence[int] = range(1, 26),
    config: RunConfig | None = None,
    table: SimilarityTable | None = None,
    fold: int = 0,
) -> list[MetricPoint]:
    """Item-level metrics over the M1 ranking: hits need (seller, target, item) to match."""
    ctx = _context(training_graph, validation, targets, config, table, fold)
    if item_method not in ITEM_METHODS:
        raise ValueError(f"unknown item method {item_method!r}")
    truth = {u: set() for u in ctx.targets}
    for t in ctx.validation:
        if t.buyer in truth:
            truth[t.buyer].add((t.seller, t.item))
    rules = ctx.rules() if item_method == "rules" else None
    preds = {}
    for u in ctx.targets:
        rec = build_recommendations(
            ctx.graph, ctx.ranked(u), u, item_method, ctx.task_seed(u), rules
        )
        preds[u] = [(e.seller, e.item) for e in rec.entries]
    return _points(preds, truth, list_sizes)


def maxima(points: Sequence[MetricPoint]) -> dict[str, float]:
    """Largest precision, recall and F-measure over list sizes, each taken separately."""
    return {
        "precision": max((p.precision for p in points), default=0.0),
        "recall": max((p.recall for p in points), default=0.0),
        "f": max((p.f_measure for p in points), default=0.0),
    }


@dataclass
class EvaluationReport:
    mode: str
    level: str
    method: str | None
    per_fold: list[tuple[int, list[MetricPoint]]]
    aggregate: list[MetricPoint]
    config: dict

    @property
    def name(self) -> str:
        return f"{self.mode}/{self.level}" + (f"/{self.method}" if self.method else "")

    def at(self, size: int) -> MetricPoint:
        for p in self.aggregate:
            if p.size == size:
                return p
        raise KeyError(size)

    def maxima(self) -> dict[str, float]:
        return maxima(self.aggregate)

    def to_dict(self) -> dict:
        pts = lambda ps: [
            {"size": p.size, "precision": p.precision, "recall": p.recall, "f": p.f_measure}
            for p in ps
        ]
        return {
            "mode": self.mode,
            "level": self.level,
            "method": self.method,
            "aggregate": pts(self.aggregate),
            "maximum": self.maxima(),
            "per_fold": [{"fold": f, "points": pts(ps)} for f, ps in self.per_fold],
        }


def _mean_points(per_fold: list[tuple[int, list[MetricPoint]]], sizes) -> list[MetricPoint]:
    if not per_fold:
        return [MetricPoint(s, 0.0, 0.0, 0.0) for s in sizes]
    n = len(per_fold)
    out = []
    for i, s in enumerate(sizes):
        p = sum(ps[i].precision for _, ps in per_fold) / n
        r = sum(ps[i].recall for _, ps in per_fold) / n
        f = sum(ps[i].f_measure for _, ps in per_fold) / n
        out.append(MetricPoint(s, p, r, f))
    return out


@dataclass
class ExperimentReport:
    config: dict
    series: dict[str, EvaluationReport]
    folds: list[dict]

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "reference_item_maxima_percent": REFERENCE_ITEM_MAXIMA,
            "folds": self.folds,
            "series": {name: rep.to_dict() for name, rep in self.series.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["series", "fold", "size", "precision", "recall", "f"])
        for name, rep in self.series.items():
            for p in rep.aggregate:
                w.writerow([name, "mean", p.size, repr(p.precision), repr(p.recall), repr(p.f_measure)])
            for f, ps in rep.per_fold:
                for p in ps:
                    w.writerow([name, f, p.size, repr(p.precision), repr(p.recall), repr(p.f_measure)])
        return buf.getvalue()

    def table(self) -> str:
        """Aggregate F-measure (percent) per series and list size, as plain text."""
        names = list(self.series)
        sizes = [p.size for p in next(iter(self.series.values())).aggregate] if names else []
        lines = ["size  " + "  ".join(f"{n:>22}" for n in names)]
        for i, s in enumerate(sizes):
            cells = []
            for n in names:
                p = self.series[n].aggregate[i]
                cells.append(f"{100 * p.precision:6.2f}/{100 * p.recall:6.2f}/{100 * p.f_measure:6.2f}")
            lines.append(f"{s:>4}  " + "  ".join(f"{c:>22}" for c in cells))
        lines.append("(cells: precision/recall/F-measure, percent)")
        return "\n".join(lines)


class LevelDominanceError(AssertionError):
    pass


def check_level_dominance(user: Sequence[MetricPoint], item: Sequence[MetricPoint], where="") -> None:
    """Item-level P/R/F must never exceed user-level P/R/F at the same list size."""
    for a, b in zip(user, item):
        if a.size != b.size:
            raise ValueError("series are not aligned on list size")
        for name in ("precision", "recall", "f_measure"):
            if getattr(b, name) > getattr(a, name) + 1e-12:
                raise LevelDominanceError(
                    f"{where} size {a.size}: item {name} {getattr(b, name)} > user {getattr(a, name)}"
                )


def _run_fold(transactions, plan: FoldPlan, fold: int, config: RunConfig) -> dict:
    train, valid = plan.split(transactions, fold)
    g = build_graph(train)
    seed = int(derive_seed(config.seed, "sample", fold).generate_state(1)[0])
    targets = sample_targets(valid, g, config.samples, seed, config.max_target_links)
    info = {"fold": fold, "train": len(train), "validation": len(valid), "targets": len(targets)}
    if not targets:
        return {"info": info, "series": None}
    ctx = FoldContext(g, valid, targets, config, fold)
    sizes = config.list_sizes
    series = {}
    m1 = None
    if config.mode in ("both", "M1"):
        m1 = series["M1/user"] = evaluate_user_level(ctx, list_sizes=sizes, mode="M1")
    if config.mode in ("both", "M2"):
        series["M2/user"] = evaluate_user_level(ctx, list_sizes=sizes, mode="M2")
    if m1 is None:
        m1 = evaluate_user_level(ctx, list_sizes=sizes, mode="M1")
    for method in ITEM_METHODS:
        pts = evaluate_item_level(ctx, item_method=method, list_sizes=sizes)
        check_level_dominance(m1, pts, f"fold {fold} {method}")
        series[f"M1/item/{method}"] = pts
    sim = ctx.similarity()
    info["simrank_iterations"] = sim.iterations_run
    info["simrank_converged"] = sim.converged
    return {"info": info, "series": series}


def run_experiment(transactions: Sequence[Transaction], config: RunConfig | None = None) -> ExperimentReport:
    """Cross-validated M1/M2 user-level and M1 item-level curves.

    Output depends only on ``(transactions, config)``; ``config.threads``
    changes scheduling, never results.
    """
    config = config or RunConfig()
    config.validate()
    check_coefficients(config.alpha, config.beta, config.gamma)
    transactions = sorted(transactions, key=lambda t: t.id)
    plan = make_folds(transactions, config.folds, config.seed)

    work = lambda f: _run_fold(transactions, plan, f, config)
    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(pool.map(work, range(config.folds)))
    else:
        results = [work(f) for f in range(config.folds)]

    names = []
    if config.mode in ("both", "M1"):
        names.append("M1/user")
    if config.mode in ("both", "M2"):
        names.append("M2/user")
    names += [f"M1/item/{m}" for m in ITEM_METHODS]

    series = {}
    for name in names:
        per_fold = [(r["info"]["fold"], r["series"][name]) for r in results if r["series"]]
        mode, level, *method = name.split("/")
        series[name] = EvaluationReport(
            mode=mode,
            level=level,
            method=method[0] if method else None,
            per_fold=per_fold,
            aggregate=_mean_points(per_fold, config.list_sizes),
            config=config.to_dict(),
        )
    if "M1/user" in series:
        for m in ITEM_METHODS:
            check_level_dominance(series["M1/user"].aggregate, series[f"M1/item/{m}"].aggregate, m)
    return ExperimentReport(config.to_dict(), series, [r["info"] for r in results])
