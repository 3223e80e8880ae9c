"""Choosing one item per recommended seller, including apriori rule mining."""
from __future__ import annotations

import json
import logging
import math
from collections import Counter
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .config import rng_for
from .graph import CommercialGraph

_log = logging.getLogger(__name__)

# Slack for threshold comparisons on float ratios.
_EPS = 1e-12


def seller_inventory(g: CommercialGraph, v: str) -> frozenset[str]:
    """Items ``v`` has sold before (stand-in for a listings table)."""
    return frozenset(t.item for t in g.sales(v))


def select_best_selling(g: CommercialGraph, v: str) -> str:
    sold = Counter()
    for t in g.sales(v):
        sold[t.item] += t.quantity
    if not sold:
        raise ValueError(f"seller {v!r} has an empty inventory")
    return min(sold, key=lambda item: (-sold[item], item))


def _pick(inventory: Iterable[str], seed: int, seller: str) -> str:
    items = sorted(inventory)
    if not items:
        raise ValueError(f"seller {seller!r} has an empty inventory")
    return items[int(rng_for(seed, "item", seller).integers(len(items)))]


def select_random(g: CommercialGraph, v: str, rng_seed: int) -> str:
    """Uniform draw from v's inventory, reproducible from ``(rng_seed, v)``."""
    return _pick(seller_inventory(g, v), rng_seed, v)


@dataclass(frozen=True)
class AssociationRule:
    antecedent: frozenset[str]
    consequent: str
    support: float
    confidence: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "antecedent": sorted(self.antecedent),
                "consequent": self.consequent,
                "support": self.support,
                "confidence": self.confidence,
            }
        )


def purchase_baskets(g: CommercialGraph) -> list[frozenset[str]]:
    """One basket per buyer: the set of items it has purchased, ordered by buyer id."""
    return [frozenset(t.item for t in g.purchases(u)) for u in g.buyers()]


def support_threshold(n_baskets: int, min_support: float, min_count: int = 1) -> int:
    """Smallest basket count that is both >= ``min_count`` and a fraction >= ``min_support``."""
    need = math.ceil(min_support * n_baskets - _EPS * n_baskets)
    return max(need, min_count, 1)


def frequent_itemsets(
    baskets: Sequence[frozenset[str]], min_support: float, min_count: int = 1
) -> dict[frozenset[str], int]:
    """Level-wise apriori. Returns every frequent itemset with its basket count."""
    if not baskets:
        return {}
    threshold = support_threshold(len(baskets), min_support, min_count)

    counts = Counter(item for b in baskets for item in b)
    level = {frozenset([i]): c for i, c in counts.items() if c >= threshold}
    found = dict(level)
    k = 2
    while level:
        prev = sorted(level, key=sorted)
        candidates = set()
        for a, b in combinations(prev, 2):
            union = a | b
            if len(union) != k:
                continue
            # downward closure: every (k-1)-subset must itself be frequent
            if all(union - {x} in level for x in union):
                candidates.add(union)
        if not candidates:
            break
        tally = Counter()
        for basket in baskets:
            if len(basket) < k:
                continue
            for cand in candidates:
                if cand <= basket:
                    tally[cand] += 1
        level = {c: n for c, n in tally.items() if n >= threshold}
        found.update(level)
        k += 1
    return found


def association_rules(
    itemsets: dict[frozenset[str], int], n_baskets: int, min_confidence: float
) -> list[AssociationRule]:
    """Single-consequent rules X -> y from frequent itemsets.

    Sorted by confidence, then support (both descending), then consequent and
    antecedent ids.
    """
    rules = []
    for itemset, count in itemsets.items():
        if len(itemset) < 2:
            continue
        for y in itemset:
            x = itemset - {y}
            conf = count / itemsets[x]
            if conf >= min_confidence - _EPS:
                rules.append(AssociationRule(x, y, count / n_baskets, conf))
    rules.sort(key=lambda r: (-r.confidence, -r.support, r.consequent, sorted(r.antecedent)))
    return rules


def mine_rules(
    g: CommercialGraph, min_support: float = 0.01, min_confidence: float = 0.5, min_count: int = 2
) -> list[AssociationRule]:
    if not 0 < min_support <= 1 or not 0 < min_confidence <= 1:
        raise ValueError("min_support and min_confidence must lie in (0, 1]")
    baskets = purchase_baskets(g)
    itemsets = frequent_itemsets(baskets, min_support, min_count)
    return association_rules(itemsets, len(baskets), min_confidence)


def write_rules(rules: Iterable[AssociationRule], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in rules:
            fh.write(r.to_json() + "\n")


def select_by_rules(
    rules: Sequence[AssociationRule],
    u_history: set[str] | frozenset[str],
    inventory: set[str] | frozenset[str],
    rng_seed: int,
    seller: str = "",
) -> tuple[str, str]:
    """Consequent of the strongest applicable rule, else a seeded random item.

    A rule applies when its antecedent is within ``u_history`` and its
    consequent is in ``inventory``. Returns ``(item, "rule")`` or
    ``(item, "random_fallback")``.
    """
    if not inventory:
        raise ValueError(f"seller {seller!r} has an empty inventory")
    best = None
    for r in rules:
        if r.consequent in inventory and r.antecedent <= u_history:
            key = (-r.confidence, -r.support, r.consequent)
            if best is None or key < best[0]:
                best = (key, r)
    if best is not None:
        return best[1].consequent, "rule"
    return _pick(inventory, rng_seed, seller), "random_fallback"


@dataclass(frozen=True)
class RecommendationEntry:
    seller: str
    item: str
    total_score: float | None
    selection_method: str


@dataclass(frozen=True)
class Recommendation:
    target: str
    entries: tuple[RecommendationEntry, ...]
    source: str = "ranked"


def build_recommendations(
    g: CommercialGraph,
    ranked: Sequence,
    u: str,
    method: str = "best_selling",
    seed: int = 0,
    rules: Sequence[AssociationRule] | None = None,
    source: str = "ranked",
) -> Recommendation:
    """One item from each ranked seller, keeping the ranking order.

    ``ranked`` holds scored candidates (anything with ``.seller`` and
    ``.total``) or bare seller ids.
    """
    if method not in ("best_selling", "random", "rules"):
        raise ValueError(f"unknown item selection method {method!r}")
    history = frozenset(t.item for t in g.purchases(u))
    rules = rules or ()
    entries, skipped = [], 0
    for cand in ranked:
        if isinstance(cand, str):
            seller, total = cand, None
        else:
            seller, total = cand.seller, cand.total
        inventory = seller_inventory(g, seller)
        if not inventory:
            skipped += 1
            continue
        if method == "best_selling":
            item, tag = select_best_selling(g, seller), "best_selling"
        elif method == "random":
            item, tag = _pick(inventory, seed, seller), "random"
        else:
            item, tag = select_by_rules(rules, history, inventory, seed, seller)
        entries.append(RecommendationEntry(seller, item, total, tag))
    if skipped:
        _log.info("skipped %d sellers with empty inventories for %s", skipped, u)
    return Recommendation(u, tuple(entries), source)
