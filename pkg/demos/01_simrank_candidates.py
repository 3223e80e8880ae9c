# coding: utf-8

# # Finding lookalike buyers with SimRank
#
# A marketplace is a directed multigraph: every transaction is an edge from
# seller to buyer. Two buyers look alike when they bought from sellers who
# themselves look alike. This script builds a tiny graph, computes the
# similarity table and turns a buyer's lookalikes into candidate sellers.

# %%

from c2clink import RatingVector, Transaction, build_graph, graph_stats
from c2clink.similarity import candidate_sellers, compute_simrank, top_n_similar


def sale(i, seller, buyer, item, category, price):
    return Transaction(f"t{i}", buyer, seller, item, category, price, 1, RatingVector(0.5, 0.5, 0.5, 0.5))


txns = [
    sale(1, "alice", "ursula", "kettle", "kitchen", 25.0),
    sale(2, "alice", "victor", "kettle", "kitchen", 25.0),
    sale(3, "dora", "victor", "toaster", "kitchen", 40.0),
    sale(4, "emil", "victor", "mug", "kitchen", 6.0),
    sale(5, "emil", "walter", "mug", "kitchen", 6.0),
    sale(6, "fritz", "walter", "drill", "tools", 80.0),
]
g = build_graph(txns)
print(graph_stats(g))

# %%
# Similarity only flows through purchases, so pure sellers are similar to
# nobody but themselves.

table = compute_simrank(g, C=0.8)
print(f"converged={table.converged} after {table.iterations_run} sweeps")
for u in ("ursula", "victor", "walter"):
    print(u, [(v, round(s, 3)) for v, s in top_n_similar(table, u, 3)])

# %%
# Ursula's closest match is Victor. Victor also bought from Dora and Emil,
# and those are the sellers Ursula has not met yet.

similar = top_n_similar(table, "ursula", 1)
print(sorted(candidate_sellers(g, "ursula", similar).candidates))
