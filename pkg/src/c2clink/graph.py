"""Transactions, CSV ingestion and the immutable commercial graph.

Edges run seller -> buyer: a user's in-edges are its purchases and its
out-edges are its sales. Repeated trades between the same pair are kept as
separate transactions; distinct-neighbour sets are derived views.
"""
from __future__ import annotations

import csv
import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple, Sequence

_log = logging.getLogger(__name__)

RATING_FIELDS = ("overall", "quality", "delivery", "support")
CSV_COLUMNS = (
    "txn_id",
    "buyer_id",
    "seller_id",
    "item_id",
    "category",
    "price",
    "quantity",
    "rating_overall",
    "rating_quality",
    "rating_delivery",
    "rating_support",
)
_RATING_COLUMNS = CSV_COLUMNS[-4:]


class SchemaError(ValueError):
    """The CSV header does not match the documented column layout."""


class RowError(ValueError):
    """A single CSV row failed validation."""

    def __init__(self, line: int, column: str | None, reason: str):
        self.line = line
        self.column = column
        self.reason = reason
        where = f"line {line}" + (f", column {column!r}" if column else "")
        super().__init__(f"{where}: {reason}")


@dataclass(frozen=True)
class RatingVector:
    """Four feedback components, each normalized to [-1, 1]."""

    overall: float
    quality: float
    delivery: float
    support: float

    def __post_init__(self):
        for name in RATING_FIELDS:
            value = getattr(self, name)
            if not -1.0 <= value <= 1.0:
                raise ValueError(f"rating component {name}={value} outside [-1, 1]")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.overall, self.quality, self.delivery, self.support)

    def mean(self) -> float:
        return sum(self.as_tuple()) / 4.0


@dataclass(frozen=True)
class Transaction:
    id: str
    buyer: str
    seller: str
    item: str
    category: str
    price: float
    quantity: int = 1
    ratings: RatingVector = field(default_factory=lambda: RatingVector(0.0, 0.0, 0.0, 0.0))

    def __post_init__(self):
        if self.buyer == self.seller:
            raise ValueError(f"transaction {self.id}: buyer and seller are both {self.buyer!r}")
        if not self.price >= 0:
            raise ValueError(f"transaction {self.id}: negative price {self.price}")
        if self.quantity < 1:
            raise ValueError(f"transaction {self.id}: quantity must be >= 1")

    @property
    def value(self) -> float:
        """Monetary value of the trade, price x quantity."""
        return self.price * self.quantity


def normalize_rating(raw: float, scale: tuple[float, float]) -> float:
    lo, hi = scale
    return 2.0 * (raw - lo) / (hi - lo) - 1.0


def denormalize_rating(value: float, scale: tuple[float, float]) -> float:
    lo, hi = scale
    return lo + (value + 1.0) * (hi - lo) / 2.0


class CommercialGraph:
    """Read-only directed multigraph of users linked by transactions.

    Build instances with :func:`build_graph`. All index views are immutable
    mappings; per-user lookups for unknown users return empty results.
    """

    def __init__(self, transactions: Iterable[Transaction]):
        txns = tuple(sorted(transactions, key=lambda t: t.id))
        ins: dict[str, list] = defaultdict(list)
        outs: dict[str, list] = defaultdict(list)
        cats: dict[str, set] = defaultdict(set)
        users = set()
        for t in txns:
            users.add(t.buyer)
            users.add(t.seller)
            ins[t.buyer].append((t.seller, t))
            outs[t.seller].append((t.buyer, t))
            cats[t.buyer].add(t.category)
            cats[t.seller].add(t.category)

        self._users = tuple(sorted(users))
        self._transactions = txns
        self._in = MappingProxyType({u: tuple(v) for u, v in ins.items()})
        self._out = MappingProxyType({u: tuple(v) for u, v in outs.items()})
        self._categories = MappingProxyType({u: frozenset(c) for u, c in cats.items()})
        self._sellers_of = MappingProxyType(
            {u: frozenset(s for s, _ in v) for u, v in self._in.items()}
        )
        self._buyers_of = MappingProxyType(
            {u: frozenset(b for b, _ in v) for u, v in self._out.items()}
        )
        self._sales_count = MappingProxyType({u: len(v) for u, v in self._out.items()})

    def __repr__(self):
        return f"CommercialGraph(users={len(self._users)}, transactions={len(self._transactions)})"

    def __contains__(self, user) -> bool:
        return user in self._categories

    def __len__(self) -> int:
        return len(self._users)

    @property
    def users(self) -> tuple[str, ...]:
        """All users, sorted by identifier."""
        return self._users

    @property
    def transactions(self) -> tuple[Transaction, ...]:
        return self._transactions

    @property
    def in_index(self) -> Mapping[str, tuple[tuple[str, Transaction], ...]]:
        """buyer -> (seller, transaction) pairs, one per purchase."""
        return self._in

    @property
    def out_index(self) -> Mapping[str, tuple[tuple[str, Transaction], ...]]:
        """seller -> (buyer, transaction) pairs, one per sale."""
        return self._out

    @property
    def category_index(self) -> Mapping[str, frozenset[str]]:
        return self._categories

    def purchases(self, u: str) -> tuple[Transaction, ...]:
        return tuple(t for _, t in self._in.get(u, ()))

    def sales(self, u: str) -> tuple[Transaction, ...]:
        return tuple(t for _, t in self._out.get(u, ()))

    def sellers_of(self, u: str) -> frozenset[str]:
        """Distinct sellers ``u`` has bought from."""
        return self._sellers_of.get(u, frozenset())

    def buyers_of(self, v: str) -> frozenset[str]:
        return self._buyers_of.get(v, frozenset())

    def neighbors(self, u: str) -> frozenset[str]:
        """Distinct users adjacent to ``u`` in either direction."""
        return self.sellers_of(u) | self.buyers_of(u)

    def categories(self, u: str) -> frozenset[str]:
        """Categories ``u`` has bought or sold in."""
        return self._categories.get(u, frozenset())

    def sales_count(self, u: str) -> int:
        return self._sales_count.get(u, 0)

    def sellers(self) -> tuple[str, ...]:
        return tuple(sorted(self._out))

    def buyers(self) -> tuple[str, ...]:
        return tuple(sorted(self._in))


def build_graph(transactions: Iterable[Transaction]) -> CommercialGraph:
    return CommercialGraph(transactions)


class GraphStats(NamedTuple):
    users: int
    edges: int
    density: float
    average_degree: float
    max_in_degree: int
    max_out_degree: int


def graph_stats(g: CommercialGraph) -> GraphStats:
    """Size and degree summary of ``g``.

    Parallel edges count once. ``average_degree`` is distinct directed edges
    per user (equivalently the mean distinct in-degree, or out-degree), and
    ``density`` is edges / (users * (users - 1)).
    """
    n = len(g.users)
    pairs = {(t.seller, t.buyer) for t in g.transactions}
    e = len(pairs)
    density = e / (n * (n - 1)) if n > 1 else 0.0
    avg = e / n if n else 0.0
    max_in = max((len(g.sellers_of(u)) for u in g.users), default=0)
    max_out = max((len(g.buyers_of(u)) for u in g.users), default=0)
    return GraphStats(n, e, density, avg, max_in, max_out)


def _read_header(reader) -> tuple[str, ...]:
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError("empty file: header row required") from None
    header = tuple(h.strip() for h in header)
    without_qty = tuple(c for c in CSV_COLUMNS if c != "quantity")
    if header not in (CSV_COLUMNS, without_qty):
        raise SchemaError(
            "header mismatch: expected " + ",".join(CSV_COLUMNS) + " (quantity optional), got "
            + ",".join(header)
        )
    return header


def _parse_row(row: Sequence[str], header, line: int, scale, seen_ids: set) -> Transaction:
    if len(row) != len(header):
        raise RowError(line, None, f"expected {len(header)} fields, found {len(row)}")
    rec = dict(zip(header, (v.strip() for v in row)))
    for col in ("txn_id", "buyer_id", "seller_id", "item_id", "category"):
        if not rec[col]:
            raise RowError(line, col, "empty identifier")
    if rec["txn_id"] in seen_ids:
        raise RowError(line, "txn_id", f"duplicate transaction id {rec['txn_id']!r}")
    if rec["buyer_id"] == rec["seller_id"]:
        raise RowError(line, "seller_id", "buyer and seller are the same user")

    try:
        price = float(rec["price"])
    except ValueError:
        raise RowError(line, "price", f"not a number: {rec['price']!r}") from None
    if not (math.isfinite(price) and price >= 0):
        raise RowError(line, "price", f"price must be a non-negative number, got {price}")

    qty_raw = rec.get("quantity", "")
    if qty_raw == "":
        quantity = 1
    else:
        try:
            quantity = int(qty_raw)
        except ValueError:
            raise RowError(line, "quantity", f"not an integer: {qty_raw!r}") from None
        if quantity < 1:
            raise RowError(line, "quantity", f"quantity must be >= 1, got {quantity}")

    lo, hi = scale
    ratings = []
    for col in _RATING_COLUMNS:
        try:
            raw = float(rec[col])
        except ValueError:
            raise RowError(line, col, f"not a number: {rec[col]!r}") from None
        if not lo <= raw <= hi:
            raise RowError(line, col, f"rating {raw:g} outside scale [{lo:g}, {hi:g}]")
        ratings.append(min(1.0, max(-1.0, normalize_rating(raw, scale))))

    return Transaction(
        id=rec["txn_id"],
        buyer=rec["buyer_id"],
        seller=rec["seller_id"],
        item=rec["item_id"],
        category=rec["category"],
        price=price,
        quantity=quantity,
        ratings=RatingVector(*ratings),
    )


def parse_csv(path, rating_scale=(1.0, 5.0)) -> tuple[list[Transaction], list[RowError]]:
    """Parse a transaction CSV, returning accepted rows and per-row rejections.

    Raises :class:`SchemaError` for a missing or mismatched header and
    ``OSError`` if the file cannot be read.
    """
    lo, hi = rating_scale
    if not lo < hi:
        raise ValueError(f"rating scale min must be below max, got {rating_scale}")
    accepted, rejected, seen = [], [], set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = _read_header(reader)
        for row in reader:
            line = reader.line_num
            if not row or all(not v.strip() for v in row):
                continue
            try:
                txn = _parse_row(row, header, line, (lo, hi), seen)
            except RowError as err:
                rejected.append(err)
                continue
            seen.add(txn.id)
            accepted.append(txn)
    for err in rejected:
        _log.warning("rejected %s", err)
    return accepted, rejected


def ingest_csv(path, rating_scale=(1.0, 5.0), strict: bool = False) -> list[Transaction]:
    """Load transactions from ``path``.

    Bad rows are skipped (and logged) unless ``strict`` is set, in which case
    the first :class:`RowError` is raised.
    """
    accepted, rejected = parse_csv(path, rating_scale)
    if strict and rejected:
        raise rejected[0]
    return accepted


def _fmt(x: float) -> str:
    return format(x, ".10g")


def write_csv(transactions: Iterable[Transaction], path, rating_scale=(1.0, 5.0)) -> None:
    """Write transactions in the ingest layout, mapping ratings back to ``rating_scale``."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for t in transactions:
            raw = [_fmt(round(denormalize_rating(r, rating_scale), 9)) for r in t.ratings.as_tuple()]
            w.writerow([t.id, t.buyer, t.seller, t.item, t.category, _fmt(t.price), t.quantity, *raw])


def save_snapshot(g: CommercialGraph, path) -> None:
    """Dump the graph's transactions (normalized ratings) as JSON."""
    rows = [
        {
            "id": t.id,
            "buyer": t.buyer,
            "seller": t.seller,
            "item": t.item,
            "category": t.category,
            "price": t.price,
            "quantity": t.quantity,
            "ratings": list(t.ratings.as_tuple()),
        }
        for t in g.transactions
    ]
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"format": "c2clink-graph/1", "transactions": rows}, fh, indent=1)
        fh.write("\n")


def load_snapshot(path) -> CommercialGraph:
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != "c2clink-graph/1":
        raise SchemaError(f"{path}: not a graph snapshot")
    txns = []
    for r in doc["transactions"]:
        r = dict(r)
        r["ratings"] = RatingVector(*r["ratings"])
        txns.append(Transaction(**r))
    return build_graph(txns)
