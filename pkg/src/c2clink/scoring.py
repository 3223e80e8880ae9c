"""Category, reputation and rating scores for candidate sellers, and their fusion."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from .config import ConfigError
from .graph import CommercialGraph
from .similarity import SimilarityTable, candidate_sellers, top_n_similar


def local_category_importance(g: CommercialGraph, u: str, a: str) -> float:
    """Number of ``u``'s neighbours that share category ``a`` with ``u``, at least 1."""
    if a not in g.categories(u):
        return 1.0
    count = sum(1 for v in g.neighbors(u) if a in g.categories(v))
    return float(max(count, 1))


def category_weight(g: CommercialGraph, u: str, a: str) -> float:
    """Local importance of ``a`` times the traded value (qty x price) of ``u`` in ``a``."""
    traded = sum(t.value for t in g.purchases(u) if t.category == a)
    traded += sum(t.value for t in g.sales(u) if t.category == a)
    return local_category_importance(g, u, a) * traded


@dataclass(frozen=True)
class CategoryProfile:
    owner: str
    weights: dict[str, float]
    local_importance: dict[str, float]


def category_profile(g: CommercialGraph, u: str) -> CategoryProfile:
    cats = sorted(g.categories(u))
    local = {a: local_category_importance(g, u, a) for a in cats}
    traded = dict.fromkeys(cats, 0.0)
    for t in g.purchases(u) + g.sales(u):
        traded[t.category] += t.value
    return CategoryProfile(u, {a: local[a] * traded[a] for a in cats}, local)


def category_score(profiles: tuple[CategoryProfile, CategoryProfile]) -> float:
    """Weighted Jaccard overlap of two category profiles, in [0, 1]."""
    pu, pv = profiles
    wu, wv = pu.weights, pv.weights
    denom = sum(wu.values()) + sum(wv.values())
    if denom <= 0:
        return 0.0
    shared = wu.keys() & wv.keys()
    num = sum(wu[c] + wv[c] for c in shared)
    return min(1.0, num / denom)


def reputation_score(g: CommercialGraph, u: str, v: str) -> float:
    """Reputation of seller ``v`` as seen by ``u``.

    Mean over v's sales of (mean rating) x (trade value) x (importance to ``u``
    of the sale's category).
    """
    sales = g.sales(v)
    if not sales:
        raise ValueError(f"reputation of {v!r} requested but it has no sales")
    local: dict[str, float] = {}
    total = 0.0
    for t in sales:
        L = local.get(t.category)
        if L is None:
            L = local[t.category] = local_category_importance(g, u, t.category)
        total += t.ratings.mean() * t.value * L
    return total / len(sales)


def mean_ratings(g: CommercialGraph, x: str) -> np.ndarray:
    """Average received rating per component over all of ``x``'s sales."""
    sales = g.sales(x)
    if not sales:
        return np.zeros(4)
    return np.mean([t.ratings.as_tuple() for t in sales], axis=0)


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = math.sqrt(float(a @ a)), math.sqrt(float(b @ b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return max(-1.0, min(1.0, float(a @ b) / (na * nb)))


def rating_score(g: CommercialGraph, u: str, v: str) -> float:
    """Mean cosine between v's rating profile and those of u's past sellers."""
    prior = sorted(g.sellers_of(u))
    if not prior:
        return 0.0
    mv = mean_ratings(g, v)
    return sum(_cosine(mv, mean_ratings(g, w)) for w in prior) / len(prior)


class Normalized(NamedTuple):
    cat: float
    rep: float
    rat: float


@dataclass(frozen=True)
class ScoredCandidate:
    seller: str
    category_score: float
    reputation_score: float
    rating_score: float
    normalized: Normalized | None = None
    total: float | None = None


def score_candidate(g: CommercialGraph, u: str, v: str, profile_u=None) -> ScoredCandidate:
    if profile_u is None:
        profile_u = category_profile(g, u)
    return ScoredCandidate(
        seller=v,
        category_score=category_score((profile_u, category_profile(g, v))),
        reputation_score=reputation_score(g, u, v),
        rating_score=rating_score(g, u, v),
    )


def _minmax(values: Sequence[float]) -> list[float]:
    lo, hi = min(values), max(values)
    if hi == lo:
        return [0.5] * len(values)
    span = hi - lo
    return [(x - lo) / span for x in values]


def normalize_scores(candidates: Sequence[ScoredCandidate]) -> list[ScoredCandidate]:
    """Min-max scale each raw score across the candidate set (flat range -> 0.5)."""
    if not candidates:
        return []
    cat = _minmax([c.category_score for c in candidates])
    rep = _minmax([c.reputation_score for c in candidates])
    rat = _minmax([c.rating_score for c in candidates])
    return [
        replace(c, normalized=Normalized(cat[i], rep[i], rat[i]))
        for i, c in enumerate(candidates)
    ]


def check_coefficients(alpha: float, beta: float, gamma: float) -> None:
    for name, x in (("alpha", alpha), ("beta", beta), ("gamma", gamma)):
        if not 0.0 <= x <= 1.0:
            raise ConfigError(f"{name}={x} must lie in [0, 1]")
    if abs(alpha + beta + gamma - 1.0) > 1e-9:
        raise ConfigError(f"alpha + beta + gamma must equal 1, got {alpha + beta + gamma:.12g}")


def total_score(candidate: ScoredCandidate, alpha: float, beta: float, gamma: float) -> float:
    check_coefficients(alpha, beta, gamma)
    if candidate.normalized is None:
        raise ValueError("candidate must be normalized before fusion")
    n = candidate.normalized
    return min(1.0, max(0.0, alpha * n.cat + beta * n.rat + gamma * n.rep))


def rank_scored(
    scored: Sequence[ScoredCandidate], alpha: float, beta: float, gamma: float, k: int | None = None
) -> list[ScoredCandidate]:
    """Normalize, fuse and sort raw-scored candidates (ties by seller id)."""
    fused = [
        replace(c, total=total_score(c, alpha, beta, gamma)) for c in normalize_scores(scored)
    ]
    fused.sort(key=lambda c: (-round(c.total, 12), c.seller))
    return fused if k is None else fused[:k]


def rank_candidates(
    g: CommercialGraph,
    table: SimilarityTable,
    u: str,
    n: int = 10,
    alpha: float = 1 / 3,
    beta: float = 1 / 3,
    gamma: float = 1 / 3,
    k: int | None = None,
) -> list[ScoredCandidate]:
    """Best sellers for ``u``: similar users -> candidates -> scores -> fused ranking."""
    check_coefficients(alpha, beta, gamma)
    if k is not None and k < 1:
        raise ValueError("k must be >= 1")
    cands = candidate_sellers(g, u, top_n_similar(table, u, n))
    if not cands.candidates:
        return []
    profile_u = category_profile(g, u)
    scored = [score_candidate(g, u, v, profile_u) for v in cands.sorted()]
    return rank_scored(scored, alpha, beta, gamma, k)


def cold_start_candidates(g: CommercialGraph, u: str, k: int) -> list[str]:
    """Highest-volume sellers in the network that ``u`` has not bought from."""
    exclude = g.sellers_of(u) | {u}
    pool = [v for v in g.sellers() if v not in exclude]
    pool.sort(key=lambda v: (-g.sales_count(v), v))
    return pool[:k]
