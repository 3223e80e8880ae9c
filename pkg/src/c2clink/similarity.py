"""SimRank over purchase in-neighbourhoods and candidate-seller generation."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Mapping

import numpy as np
from scipy import sparse

from .graph import CommercialGraph

_log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SimilarityTable:
    """Pairwise SimRank scores.

    Only users with at least one purchase are materialized in ``matrix``;
    every other off-diagonal pair reads as 0 and every diagonal entry as 1.
    """

    users: tuple[str, ...]
    index: Mapping[str, int]
    matrix: np.ndarray
    damping: float
    iterations_run: int
    converged: bool

    def __contains__(self, u) -> bool:
        return u in self._all

    @cached_property
    def _all(self) -> frozenset:
        return frozenset(self.users)

    @cached_property
    def _keys(self) -> list[str]:
        return list(self.index)

    def value(self, u: str, v: str) -> float:
        if u == v:
            return 1.0
        i, j = self.index.get(u), self.index.get(v)
        if i is None or j is None:
            return 0.0
        return float(self.matrix[i, j])

    def row(self, u: str) -> dict[str, float]:
        """Nonzero similarities of ``u`` to other users."""
        i = self.index.get(u)
        if i is None:
            return {}
        keys = self._keys
        return {keys[j]: float(s) for j, s in enumerate(self.matrix[i]) if j != i and s > 0}

    def pairs(self) -> Iterator[tuple[str, str, float]]:
        """Materialized pairs ``u < v`` with nonzero similarity, sorted."""
        keys = sorted(self.index)
        for a, u in enumerate(keys):
            i = self.index[u]
            for v in keys[a + 1:]:
                s = float(self.matrix[i, self.index[v]])
                if s > 0:
                    yield u, v, s


def compute_simrank(
    g: CommercialGraph, C: float = 0.8, max_iters: int = 10, tol: float = 1e-4
) -> SimilarityTable:
    """Jacobi fixed-point iteration of SimRank on sellers-purchased-from sets.

    Starting from the identity, each sweep sets, for users ``u != v`` who both
    have purchases, ``S(u, v) = C / (|I(u)| |I(v)|) * sum S(a, b)`` over
    ``a in I(u)``, ``b in I(v)``. Iteration stops once the largest change is
    below ``tol`` or after ``max_iters`` sweeps.
    """
    if not 0 < C < 1:
        raise ValueError(f"damping must lie in (0, 1), got {C}")
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    if not tol > 0:
        raise ValueError("tol must be positive")

    users = g.users
    buyers = [u for u in users if g.sellers_of(u)]
    node_ix = {u: i for i, u in enumerate(users)}
    buyer_ix = {u: i for i, u in enumerate(buyers)}
    nb = len(buyers)

    rows, cols, vals = [], [], []
    for j, u in enumerate(buyers):
        ins = g.sellers_of(u)
        w = 1.0 / len(ins)
        for a in ins:
            rows.append(node_ix[a])
            cols.append(j)
            vals.append(w)
    W = sparse.csr_matrix((vals, (rows, cols)), shape=(len(users), nb))
    # Contribution of seller pairs that are not both buyers: S(a, b) = [a == b].
    base = (W.T @ W).toarray()
    # Rows of W for sellers that are themselves buyers, reordered to buyer index.
    sel = np.array([node_ix[u] for u in buyers], dtype=np.int64)
    W_R = W[sel] if nb else W[:0]
    W_Rt = W_R.T.tocsr()

    S = np.eye(nb)
    iters, converged = 0, False
    for _ in range(max_iters):
        off = S - np.eye(nb)
        nxt = C * (base + W_Rt @ (W_Rt @ off.T).T)
        nxt = 0.5 * (nxt + nxt.T)
        np.clip(nxt, 0.0, 1.0, out=nxt)
        np.fill_diagonal(nxt, 1.0)
        delta = float(np.abs(nxt - S).max()) if nb else 0.0
        S = nxt
        iters += 1
        if delta < tol:
            converged = True
            break
    _log.debug("simrank: %d buyers, %d sweeps, converged=%s", nb, iters, converged)
    return SimilarityTable(
        users=users,
        index=buyer_ix,
        matrix=S,
        damping=C,
        iterations_run=iters,
        converged=converged,
    )


def top_n_similar(table: SimilarityTable, u: str, n: int = 10) -> list[tuple[str, float]]:
    """The ``n`` most similar users to ``u`` with nonzero similarity.

    Ties are broken by ascending user id.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if u not in table:
        raise KeyError(f"unknown user {u!r}")
    row = table.row(u)
    ranked = sorted(row.items(), key=lambda kv: (-round(kv[1], 12), kv[0]))
    return ranked[:n]


@dataclass(frozen=True)
class CandidateSet:
    target: str
    similar_users: tuple[tuple[str, float], ...]
    candidates: frozenset[str]

    def sorted(self) -> list[str]:
        return sorted(self.candidates)


def candidate_sellers(g: CommercialGraph, u: str, similar) -> CandidateSet:
    """Sellers who sold to any of ``similar`` but never to ``u``."""
    pool = set()
    for v, _ in similar:
        pool |= g.sellers_of(v)
    pool -= g.sellers_of(u)
    pool.discard(u)
    return CandidateSet(u, tuple(similar), frozenset(pool))


def dump_similarity(table: SimilarityTable, path) -> None:
    """Write nonzero pairs as ``u,v,value`` lines (9 significant digits)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(
            f"# damping={table.damping!r} iterations={table.iterations_run} "
            f"converged={int(table.converged)}\n"
        )
        for u, v, s in table.pairs():
            fh.write(f"{u},{v},{s:.9g}\n")


def load_similarity(path, g: CommercialGraph) -> SimilarityTable:
    """Rebuild a table written by :func:`dump_similarity` against graph ``g``."""
    meta = {}
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                meta.update(kv.split("=", 1) for kv in line[1:].split())
                continue
            u, v, s = line.rsplit(",", 2)
            entries.append((u, v, float(s)))
    buyers = [u for u in g.users if g.sellers_of(u)]
    index = {u: i for i, u in enumerate(buyers)}
    S = np.eye(len(buyers))
    for u, v, s in entries:
        i, j = index[u], index[v]
        S[i, j] = S[j, i] = s
    return SimilarityTable(
        users=g.users,
        index=index,
        matrix=S,
        damping=float(meta.get("damping", "nan")),
        iterations_run=int(meta.get("iterations", 0)),
        converged=meta.get("converged") == "1",
    )
