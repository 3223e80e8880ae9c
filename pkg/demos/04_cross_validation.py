# coding: utf-8

# # Offline evaluation
#
# Transactions are split into ten folds. For each fold the model is rebuilt
# from the other nine, fifty buyers with held-out purchases are sampled, and
# their prediction lists of length 1..25 are checked against what they
# actually bought. M1 is the fused ranking; M2 shuffles the same candidates
# so the difference isolates what the scores add.

# %%

import time

from c2clink import GeneratorSpec, RunConfig, generate_synthetic, run_experiment

txns = generate_synthetic(GeneratorSpec(), seed=0)
start = time.perf_counter()
report = run_experiment(txns, RunConfig(seed=0))
print(f"{len(txns)} transactions, {time.perf_counter() - start:.1f}s")
print(report.table())

# %%
# Seller-level hits always bound item-level hits: you cannot name the right
# item from the wrong seller.

for name, series in report.series.items():
    m = series.maxima()
    print(f"{name:<22} max P={m['precision']:.4f} R={m['recall']:.4f} F={m['f']:.4f}")

# %%
# Buyers who lost only a few purchases to the hold-out make the F-measure
# peak early and then fall as the list grows.

capped = run_experiment(txns, RunConfig(seed=0, max_target_links=3, mode="M1"))
f = [(p.size, round(p.f_measure, 4)) for p in capped.series["M1/user"].aggregate]
print(f[:5], "...", f[-3:])

# %%
# With no planted structure the scores have nothing to find.

flat = run_experiment(generate_synthetic(GeneratorSpec(affinity=0.0), seed=0),
                      RunConfig(seed=0, list_sizes=(1, 5, 10)))
for k in (1, 5, 10):
    print(k, round(flat.series["M1/user"].at(k).f_measure, 4), round(flat.series["M2/user"].at(k).f_measure, 4))
