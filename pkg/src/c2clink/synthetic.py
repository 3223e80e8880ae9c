"""Seeded synthetic C2C transaction data with planted structure.

Buyers lean towards a preferred (and a secondary) category and towards
well-rated sellers; both preferences scale with ``affinity`` and vanish at 0.
Sellers differ in popularity, and each seller's item sales follow a Zipf law
with exponent ``item_skew``. Buyers who share a category end up sharing
sellers, which is what the similarity stage picks up.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .config import ConfigError, rng_for
from .graph import RatingVector, Transaction, normalize_rating


@dataclass(frozen=True)
class GeneratorSpec:
    n_buyers: int = 300
    n_sellers: int = 100
    n_categories: int = 12
    n_transactions: int = 2066
    items_per_seller: int = 8
    affinity: float = 0.85
    item_skew: float = 1.2
    seller_skew: float = 0.8
    buyer_skew: float = 0.3
    quality_strength: float = 3.0
    rating_noise: float = 0.35
    repeat_rate: float = 0.15
    dual_role: float = 0.1

    @classmethod
    def sparse(cls, **overrides) -> "GeneratorSpec":
        """Sparse preset: about 1,400 users, average degree about 1.3, density about 0.001."""
        params = dict(n_buyers=2000, n_sellers=250, buyer_skew=0.3, seller_skew=1.25)
        params.update(overrides)
        return cls(**params)

    def validate(self) -> None:
        if self.n_transactions < 0:
            raise ConfigError("n_transactions must be >= 0")
        if self.n_transactions > 0 and (self.n_sellers < 1 or self.n_buyers < 1):
            raise ConfigError("positive transaction count needs at least one buyer and one seller")
        if self.n_categories < 1 or self.items_per_seller < 1:
            raise ConfigError("n_categories and items_per_seller must be >= 1")
        if not 0.0 <= self.affinity <= 1.0:
            raise ConfigError("affinity must lie in [0, 1]")
        if not 0.0 <= self.repeat_rate <= 1.0 or not 0.0 <= self.dual_role <= 1.0:
            raise ConfigError("repeat_rate and dual_role must lie in [0, 1]")
        for name in ("item_skew", "seller_skew", "buyer_skew", "quality_strength", "rating_noise"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)


def _zipf(n: int, s: float) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1) ** s
    return w / w.sum()


def generate_synthetic(spec: GeneratorSpec | None = None, seed: int = 0,
                       rating_scale=(1.0, 5.0)) -> list[Transaction]:
    """Exactly ``spec.n_transactions`` transactions, a pure function of ``(spec, seed)``.

    Raw ratings are integers on ``rating_scale`` (normalized in the returned
    transactions), so :func:`~c2clink.graph.write_csv` output round-trips
    through ingestion unchanged.
    """
    spec = spec or GeneratorSpec()
    spec.validate()
    if spec.n_transactions == 0:
        return []
    rng = rng_for(seed, "synth")
    C, aff = spec.n_categories, spec.affinity

    width = len(str(max(spec.n_buyers, spec.n_sellers)))
    sellers = [f"s{i:0{width}d}" for i in range(spec.n_sellers)]
    buyers = [f"b{i:0{width}d}" for i in range(spec.n_buyers)]

    # sellers: primary category, optional secondary, quality, popularity
    s_primary = rng.integers(C, size=spec.n_sellers)
    s_secondary = np.where(rng.random(spec.n_sellers) < 0.3, rng.integers(C, size=spec.n_sellers), -1)
    quality = rng.uniform(-0.7, 1.0, size=spec.n_sellers)
    popularity = _zipf(spec.n_sellers, spec.seller_skew)[rng.permutation(spec.n_sellers)]
    base_price = np.exp(rng.normal(3.0, 0.8, size=C))

    catalog = []  # per seller: list of (item_id, category, price)
    for v in range(spec.n_sellers):
        k = max(1, int(rng.poisson(spec.items_per_seller - 1)) + 1)
        items = []
        for j in range(k):
            cat = s_primary[v]
            if s_secondary[v] >= 0 and rng.random() < 0.4:
                cat = s_secondary[v]
            price = round(float(base_price[cat] * np.exp(rng.normal(0.0, 0.4))), 2)
            items.append((f"{sellers[v]}-i{j:02d}", int(cat), price))
        catalog.append(items)
    offers = [[v for v in range(spec.n_sellers) if any(c == cat for _, c, _ in catalog[v])]
              for cat in range(C)]

    # buyers: preferred/secondary category and activity; some sellers also buy
    n_dual = int(round(spec.dual_role * spec.n_sellers))
    dual = sorted(rng.choice(spec.n_sellers, size=n_dual, replace=False).tolist()) if n_dual else []
    pool = buyers + [sellers[v] for v in dual]
    pool_seller_ix = [-1] * len(buyers) + dual
    b_pref = rng.integers(C, size=len(pool))
    b_second = rng.integers(C, size=len(pool))
    activity = _zipf(len(pool), spec.buyer_skew)[rng.permutation(len(pool))]

    uniform = np.full(C, 1.0 / C)
    seller_pull = popularity * np.exp(aff * spec.quality_strength * quality)
    history: dict[int, list[int]] = {}
    lo, hi = rating_scale
    txns = []
    width_t = len(str(spec.n_transactions))
    for t in range(spec.n_transactions):
        b = int(rng.choice(len(pool), p=activity))
        own = pool_seller_ix[b]
        prior = [v for v in history.get(b, ()) if v != own]
        v = None
        if prior and rng.random() < spec.repeat_rate:
            v = prior[int(rng.integers(len(prior)))]
            cat = None
        else:
            pref = np.zeros(C)
            pref[b_pref[b]] += 0.7
            pref[b_second[b]] += 0.3
            cat_p = aff * pref + (1.0 - aff) * uniform
            for _ in range(20):
                cat = int(rng.choice(C, p=cat_p))
                choices = [s for s in offers[cat] if s != own]
                if choices:
                    break
            else:
                choices = [s for s in range(spec.n_sellers) if s != own]
                cat = None
            w = seller_pull[choices]
            v = int(choices[int(rng.choice(len(choices), p=w / w.sum()))])
        items = [it for it in catalog[v] if cat is None or it[1] == cat]
        item_id, item_cat, price = items[int(rng.choice(len(items), p=_zipf(len(items), spec.item_skew)))]
        quantity = 1 + int(rng.random() < 0.15) * int(rng.integers(1, 3))
        raw = np.clip(np.rint(3.0 + 2.0 * (quality[v] + rng.normal(0.0, spec.rating_noise, 4))), 1, 5)
        raw = lo + (raw - 1.0) * (hi - lo) / 4.0
        ratings = RatingVector(*(normalize_rating(float(r), rating_scale) for r in raw))
        history.setdefault(b, []).append(v)
        txns.append(
            Transaction(
                id=f"t{t:0{width_t}d}",
                buyer=pool[b],
                seller=sellers[v],
                item=item_id,
                category=f"c{item_cat:02d}",
                price=price,
                quantity=quantity,
                ratings=ratings,
            )
        )
    return txns
