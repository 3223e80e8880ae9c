from collections import Counter
from itertools import combinations

import numpy as np
import pytest

from c2clink.graph import build_graph
from c2clink.items import (
    AssociationRule,
    association_rules,
    build_recommendations,
    frequent_itemsets,
    mine_rules,
    purchase_baskets,
    select_best_selling,
    select_by_rules,
    select_random,
    seller_inventory,
    write_rules,
)
from c2clink.scoring import ScoredCandidate

from conftest import txn


def brute_force(baskets, min_support, min_confidence, min_count=1):
    """Enumerate every itemset over the item universe and every X -> y split."""
    n = len(baskets)
    items = sorted(set().union(*baskets)) if baskets else []
    frequent = {}
    for k in range(1, len(items) + 1):
        for combo in combinations(items, k):
            s = frozenset(combo)
            c = sum(1 for b in baskets if s <= b)
            if c >= min_count and c / n >= min_support - 1e-12:
                frequent[s] = c
    rules = set()
    for s, c in frequent.items():
        for y in s:
            x = s - {y}
            if not x:
                continue
            cx = sum(1 for b in baskets if x <= b)
            if c / cx >= min_confidence - 1e-12:
                rules.add((x, y, c / n, c / cx))
    return frequent, rules


def random_baskets(rng, n_items, n_baskets):
    items = [f"i{j:02d}" for j in range(n_items)]
    pop = rng.dirichlet(np.ones(n_items) * 0.5)
    out = []
    for _ in range(n_baskets):
        size = int(rng.integers(1, min(6, n_items) + 1))
        out.append(frozenset(rng.choice(items, size=size, replace=False, p=pop).tolist()))
    return out


def test_inventory():
    g = build_graph([txn("v", "a", item="x"), txn("v", "b", item="x"), txn("v", "c", item="y")])
    assert seller_inventory(g, "v") == {"x", "y"}
    assert seller_inventory(g, "a") == frozenset()


def test_best_selling():
    g = build_graph(
        [txn("v", f"b{i}", item="x") for i in range(3)] + [txn("v", "b9", item="y"), txn("w", "b1", item="q")]
    )
    assert select_best_selling(g, "v") == "x"
    assert select_best_selling(g, "w") == "q"
    with pytest.raises(ValueError):
        select_best_selling(g, "b1")


def test_best_selling_counts_quantity_and_breaks_ties_by_id():
    g = build_graph([txn("v", "a", item="y", quantity=2), txn("v", "b", item="x", quantity=2)])
    assert select_best_selling(g, "v") == "x"
    g = build_graph([txn("v", "a", item="y", quantity=3), txn("v", "b", item="x"), txn("v", "c", item="x")])
    assert select_best_selling(g, "v") == "y"


def test_random_selection_is_reproducible():
    g = build_graph([txn("v", f"b{i}", item=f"i{i}") for i in range(6)] + [txn("w", "b0", item="only")])
    assert select_random(g, "w", 123) == "only"
    assert len({select_random(g, "v", 42) for _ in range(20)}) == 1
    with pytest.raises(ValueError):
        select_random(g, "b0", 1)


def test_random_selection_is_uniform():
    g = build_graph([txn("v", f"b{i}", item=f"i{i}") for i in range(4)])
    draws = Counter(select_random(g, "v", seed) for seed in range(10_000))
    assert set(draws) == {"i0", "i1", "i2", "i3"}
    for c in draws.values():
        assert 0.22 <= c / 10_000 <= 0.28


def small_basket_graph():
    # buyer 1: {a, b}; buyer 2: {a, b}; buyer 3: {a, c}
    return build_graph([
        txn("s", "1", item="a"), txn("s", "1", item="b"),
        txn("s", "2", item="a"), txn("t", "2", item="b"),
        txn("s", "3", item="a"), txn("t", "3", item="c"),
    ])


def test_mine_rules_example():
    g = small_basket_graph()
    assert purchase_baskets(g) == [{"a", "b"}, {"a", "b"}, {"a", "c"}]
    rules = mine_rules(g, min_support=0.6, min_confidence=0.9, min_count=1)
    assert [(set(r.antecedent), r.consequent) for r in rules] == [({"b"}, "a")]
    assert rules[0].support == pytest.approx(2 / 3)
    assert rules[0].confidence == 1.0
    weaker = mine_rules(g, min_support=0.6, min_confidence=0.6, min_count=1)
    assert any(r.antecedent == {"a"} and r.consequent == "b" and r.confidence == pytest.approx(2 / 3)
               for r in weaker)


def test_full_support_on_mixed_baskets():
    assert mine_rules(small_basket_graph(), min_support=1.0, min_confidence=0.1, min_count=1) == []


def test_absolute_support_floor():
    g = build_graph([txn("s", "1", item="a"), txn("s", "1", item="b")])
    assert mine_rules(g, min_support=0.01, min_confidence=0.5, min_count=2) == []
    assert len(mine_rules(g, min_support=0.01, min_confidence=0.5, min_count=1)) == 2


@pytest.mark.parametrize("seed", range(15))
def test_apriori_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    baskets = random_baskets(rng, int(rng.integers(3, 13)), int(rng.integers(5, 31)))
    ms, mc = float(rng.uniform(0.05, 0.4)), float(rng.uniform(0.2, 0.9))
    want_sets, want_rules = brute_force(baskets, ms, mc)
    got_sets = frequent_itemsets(baskets, ms)
    assert got_sets == want_sets
    got = association_rules(got_sets, len(baskets), mc)
    assert {(r.antecedent, r.consequent) for r in got} == {(x, y) for x, y, _, _ in want_rules}
    # downward closure and metric recomputation from raw baskets
    for s in got_sets:
        for k in range(1, len(s)):
            for sub in combinations(s, k):
                assert frozenset(sub) in got_sets
    for r in got:
        both = sum(1 for b in baskets if r.antecedent | {r.consequent} <= b)
        ante = sum(1 for b in baskets if r.antecedent <= b)
        assert r.support == pytest.approx(both / len(baskets), abs=1e-12)
        assert r.confidence == pytest.approx(both / ante, abs=1e-12)


def rule(x, y, conf, sup=0.5):
    return AssociationRule(frozenset(x), y, sup, conf)


def test_select_by_rules():
    rules = [rule("b", "a", 1.0)]
    assert select_by_rules(rules, {"b"}, {"a", "z"}, 0) == ("a", "rule")
    item, tag = select_by_rules(rules, {"q"}, {"a", "z"}, 0, "s")
    assert tag == "random_fallback" and item in {"a", "z"}
    two = [rule("b", "y", 0.8), rule("b", "x", 0.9)]
    assert select_by_rules(two, {"b", "c"}, {"x", "y"}, 0)[0] == "x"
    tie = [rule("b", "y", 0.9, 0.2), rule("b", "x", 0.9, 0.3)]
    assert select_by_rules(tie, {"b"}, {"x", "y"}, 0)[0] == "x"
    with pytest.raises(ValueError):
        select_by_rules(rules, {"b"}, set(), 0)


def ranked(*sellers):
    return [ScoredCandidate(s, 0, 0, 0, total=1.0 - i / 10) for i, s in enumerate(sellers)]


def rec_graph():
    txns = []
    for s, items in {"s1": "aab", "s2": "ccd", "s3": "eff"}.items():
        txns += [txn(s, f"{s}-b{i}", item=it) for i, it in enumerate(items)]
    return build_graph(txns + [txn("s1", "u", item="a")])


def test_build_recommendations_best_selling():
    g = rec_graph()
    rec = build_recommendations(g, ranked("s1", "s2", "s3"), "u", "best_selling")
    assert [(e.seller, e.item) for e in rec.entries] == [("s1", "a"), ("s2", "c"), ("s3", "f")]
    assert [e.total_score for e in rec.entries] == [1.0, 0.9, 0.8]
    assert build_recommendations(g, [], "u").entries == ()


def test_build_recommendations_skips_empty_inventory():
    g = rec_graph()
    rec = build_recommendations(g, ranked("s1", "u", "s3"), "u", "random", seed=4)
    assert [e.seller for e in rec.entries] == ["s1", "s3"]


def test_rules_without_rules_equals_random():
    g = rec_graph()
    r1 = build_recommendations(g, ranked("s1", "s2", "s3"), "u", "rules", seed=11, rules=[])
    r2 = build_recommendations(g, ranked("s1", "s2", "s3"), "u", "random", seed=11)
    assert [e.item for e in r1.entries] == [e.item for e in r2.entries]
    assert {e.selection_method for e in r1.entries} == {"random_fallback"}


def test_rules_export(tmp_path):
    path = tmp_path / "rules.jsonl"
    write_rules([rule("ba", "c", 0.75, 0.25)], path)
    assert path.read_text() == '{"antecedent": ["a", "b"], "consequent": "c", "support": 0.25, "confidence": 0.75}\n'
