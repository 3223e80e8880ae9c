import random

import pytest
from hypothesis import given, strategies as st

from c2clink.graph import (
    CSV_COLUMNS,
    RowError,
    SchemaError,
    build_graph,
    denormalize_rating,
    graph_stats,
    ingest_csv,
    load_snapshot,
    normalize_rating,
    parse_csv,
    save_snapshot,
    write_csv,
)
from c2clink.synthetic import GeneratorSpec, generate_synthetic

from conftest import txn

HEADER = ",".join(CSV_COLUMNS)


def write(tmp_path, *rows, header=HEADER):
    path = tmp_path / "t.csv"
    path.write_text("\n".join([header, *rows]) + "\n", encoding="utf-8")
    return path


def test_top_of_scale_maps_to_plus_one(tmp_path):
    path = write(tmp_path, "t1,b,s,i,A,9.5,1,5,5,5,5")
    [t] = ingest_csv(path, (1, 5))
    assert t.ratings.as_tuple() == (1.0, 1.0, 1.0, 1.0)
    assert (t.buyer, t.seller, t.price, t.quantity) == ("b", "s", 9.5, 1)


def test_midpoint_maps_to_zero(tmp_path):
    path = write(tmp_path, "t1,b,s,i,A,9.5,1,3,3,3,3")
    [t] = ingest_csv(path, (1, 5))
    assert t.ratings.as_tuple() == (0.0, 0.0, 0.0, 0.0)


def test_out_of_scale_rating_rejected_with_column(tmp_path):
    path = write(tmp_path, "t1,b,s,i,A,9.5,1,5,7,5,5")
    accepted, rejected = parse_csv(path, (1, 5))
    assert accepted == []
    [err] = rejected
    assert err.column == "rating_quality"
    assert err.line == 2
    assert "rating_quality" in str(err)
    with pytest.raises(RowError, match="rating_quality"):
        ingest_csv(path, (1, 5), strict=True)


def test_bad_rows_are_counted_and_skipped(tmp_path):
    path = write(
        tmp_path,
        "t1,b,s,i,A,9.5,1,5,5,5,5",
        "t2,b,b,i,A,9.5,1,5,5,5,5",  # self trade
        "t3,b,s,i,A,cheap,1,5,5,5,5",  # price
        "t4,b,s,i,A,1,1,5,5",  # short row
        "t5,c,s,i,A,1,,4,4,4,4",
    )
    accepted, rejected = parse_csv(path)
    assert [t.id for t in accepted] == ["t1", "t5"]
    assert [(e.line, e.column) for e in rejected] == [(3, "seller_id"), (4, "price"), (5, None)]
    assert accepted[1].quantity == 1


def test_quantity_column_may_be_absent(tmp_path):
    header = ",".join(c for c in CSV_COLUMNS if c != "quantity")
    path = write(tmp_path, "t1,b,s,i,A,2.5,1,2,3,4", header=header)
    [t] = ingest_csv(path)
    assert t.quantity == 1
    assert t.ratings.as_tuple() == (-1.0, -0.5, 0.0, 0.5)


def test_header_mismatch(tmp_path):
    with pytest.raises(SchemaError):
        parse_csv(write(tmp_path, "t1,b,s,i,A,2.5,1,1,2,3,4", header="a,b,c"))
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(SchemaError):
        parse_csv(empty)


@given(
    st.floats(min_value=-100, max_value=100),
    st.floats(min_value=0.5, max_value=50),
    st.floats(min_value=0, max_value=1),
)
def test_rating_normalization_round_trip(lo, width, frac):
    scale = (lo, lo + width)
    raw = lo + frac * width
    norm = normalize_rating(raw, scale)
    assert -1 - 1e-12 <= norm <= 1 + 1e-12
    assert denormalize_rating(norm, scale) == pytest.approx(raw, abs=1e-9)


def test_empty_graph():
    g = build_graph([])
    assert len(g.users) == 0 and len(g.transactions) == 0
    assert graph_stats(g) == (0, 0, 0.0, 0.0, 0, 0)


def test_three_edge_indices(three_edge):
    g = three_edge
    assert g.sellers_of("b2") == {"s1", "s2"}
    assert g.sales_count("s1") == 2
    assert g.sales_count("b1") == 0
    assert g.neighbors("s1") == {"b1", "b2"}
    s = graph_stats(g)
    assert s.max_out_degree == 2
    assert s.max_in_degree == 2
    assert s.edges == 3 and s.users == 4


def test_complete_bipartite_density():
    g = build_graph([txn(s, b) for s in ("s1", "s2") for b in ("b1", "b2")])
    assert graph_stats(g).density == pytest.approx(4 / 12)


def test_parallel_edges_count_once_in_stats():
    g = build_graph([txn("s", "b"), txn("s", "b"), txn("s", "c")])
    s = graph_stats(g)
    assert s.edges == 2
    assert g.sales_count("s") == 3
    assert s.average_degree == pytest.approx(2 / 3)


@given(st.lists(st.tuples(st.integers(0, 5), st.integers(0, 5)), max_size=30), st.randoms())
def test_transpose_consistency_and_order_independence(pairs, rnd):
    txns = [txn(f"u{a}", f"u{b}", id=f"t{i:03d}") for i, (a, b) in enumerate(pairs) if a != b]
    g = build_graph(txns)
    for t in txns:
        assert sum(1 for _, x in g.out_index[t.seller] if x is t) == 1
        assert sum(1 for _, x in g.in_index[t.buyer] if x is t) == 1
    assert sum(map(len, g.in_index.values())) == sum(map(len, g.out_index.values())) == len(txns)
    for u in g.users:
        assert g.sales_count(u) == sum(1 for t in txns if t.seller == u)

    shuffled = list(txns)
    rnd.shuffle(shuffled)
    h = build_graph(shuffled)
    assert h.transactions == g.transactions
    assert dict(h.in_index) == dict(g.in_index)
    assert dict(h.out_index) == dict(g.out_index)
    assert dict(h.category_index) == dict(g.category_index)


def test_graph_is_read_only(three_edge):
    with pytest.raises(TypeError):
        three_edge.in_index["b9"] = ()


def test_csv_and_snapshot_round_trip(tmp_path):
    txns = generate_synthetic(GeneratorSpec(n_transactions=200), seed=3)
    path = tmp_path / "s.csv"
    write_csv(txns, path)
    back, rejected = parse_csv(path)
    assert rejected == []
    assert back == sorted(txns, key=lambda t: t.id)

    snap = tmp_path / "g.json"
    save_snapshot(build_graph(txns), snap)
    assert load_snapshot(snap).transactions == build_graph(txns).transactions


def test_marketplace_sized_dataset_builds():
    txns = generate_synthetic(GeneratorSpec.sparse(), seed=0)
    assert len(txns) == 2066
    s = graph_stats(build_graph(txns))
    assert s.users > 0 and 0 < s.density < 1
    assert s.max_out_degree > s.max_in_degree
