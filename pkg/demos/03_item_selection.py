# coding: utf-8

# # From sellers to items
#
# Once the seller list exists, each seller contributes one item. Three
# policies are available: the seller's best-selling item, a seeded random
# item, or an item picked by association rules mined over everyone's
# purchase baskets (falling back to random when no rule applies).

# %%

from collections import Counter

from c2clink import GeneratorSpec, build_graph, generate_synthetic
from c2clink.items import build_recommendations, mine_rules, purchase_baskets
from c2clink.scoring import rank_candidates
from c2clink.similarity import compute_simrank

g = build_graph(generate_synthetic(GeneratorSpec(), seed=3))
table = compute_simrank(g)
target = max(g.buyers(), key=lambda u: len(g.sellers_of(u)))
ranked = rank_candidates(g, table, target, k=5)

# %%

rules = mine_rules(g, min_support=0.01, min_confidence=0.5, min_count=2)
baskets = purchase_baskets(g)
print(f"{len(baskets)} baskets, {len(rules)} rules")
for r in rules[:5]:
    print(sorted(r.antecedent), "->", r.consequent, f"conf={r.confidence:.2f} sup={r.support:.3f}")

# %%

for method in ("best_selling", "random", "rules"):
    rec = build_recommendations(g, ranked, target, method, seed=0, rules=rules)
    print(method)
    for e in rec.entries:
        print(f"   {e.seller:>6} {e.item:>10}  {e.selection_method}")

# %%
# How often does the rule policy actually find a rule?

tags = Counter()
for u in sorted(g.buyers())[:100]:
    ranked_u = rank_candidates(g, table, u, k=5)
    rec = build_recommendations(g, ranked_u, u, "rules", seed=0, rules=rules)
    tags.update(e.selection_method for e in rec.entries)
print(tags)
