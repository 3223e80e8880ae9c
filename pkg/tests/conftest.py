import itertools

import pytest

from c2clink.graph import RatingVector, Transaction, build_graph

_ids = itertools.count()

ACCEPTANCE_RESULTS = []


def txn(seller, buyer, item="x", category="A", price=10.0, quantity=1, ratings=(0, 0, 0, 0), id=None):
    """Transaction factory with seller-first argument order (edge direction)."""
    return Transaction(
        id=id or f"t{next(_ids):06d}",
        buyer=buyer,
        seller=seller,
        item=item,
        category=category,
        price=price,
        quantity=quantity,
        ratings=RatingVector(*ratings),
    )


@pytest.fixture
def three_edge():
    """s1->b1, s1->b2, s2->b2."""
    return build_graph([txn("s1", "b1"), txn("s1", "b2"), txn("s2", "b2")])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(line)
