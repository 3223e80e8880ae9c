# coding: utf-8

# # Ranking candidate sellers
#
# Candidates are scored three ways: how much their category mix overlaps the
# buyer's, how well rated their past sales were (weighted by money and by
# how much the buyer's neighbourhood cares about each category), and how
# closely their rating profile matches the sellers the buyer already uses.
# Each score is min-max scaled over the candidate list and the three are
# mixed with weights alpha, beta and gamma that sum to one.

# %%

from c2clink import GeneratorSpec, build_graph, generate_synthetic
from c2clink.scoring import cold_start_candidates, rank_candidates
from c2clink.similarity import compute_simrank

g = build_graph(generate_synthetic(GeneratorSpec(), seed=3))
table = compute_simrank(g)
target = max(g.buyers(), key=lambda u: len(g.sellers_of(u)))
print("target", target, "already buys from", sorted(g.sellers_of(target)))

# %%

ranked = rank_candidates(g, table, target, n=10, k=8)
print(f"{'seller':>8} {'cat':>6} {'rep':>6} {'rat':>6} {'total':>6}")
for c in ranked:
    n = c.normalized
    print(f"{c.seller:>8} {n.cat:6.3f} {n.rep:6.3f} {n.rat:6.3f} {c.total:6.3f}")

# %%
# Leaning on one signal reorders the list. With alpha = 1 only category
# overlap counts.

by_category = rank_candidates(g, table, target, n=10, alpha=1, beta=0, gamma=0, k=8)
print([c.seller for c in by_category])

# %%
# A buyer with no history has no lookalikes, so the fallback is simply the
# sellers with the most sales.

print(cold_start_candidates(g, "someone-new", 5))
