"""Exact discrete optimal transport between class-similarity profiles.

Similarity vectors produced by the class-relation graphs live in
``[-1, 1]^c``; they are shifted and L1-normalized onto the probability
simplex, compared with an exact Wasserstein distance under a pluggable
ground cost, and turned into per-sample confidence scores.

The transportation problem is solved exactly as a linear program
(HiGHS); closed forms for the 0/1 and ``|j - k|`` ground costs exist
only in the test suite, as independent oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .embeddings import EmotionVocabulary, similarity_matrix

GROUND_COST_KINDS = ("discrete", "index_linear", "semantic")

#: plan marginals must reproduce p and q this tightly
MARGINAL_TOL = 1e-7


@dataclass
class GroundCost:
    """Symmetric, zero-diagonal, nonnegative cost of moving class mass."""

    kind: str
    matrix: np.ndarray  # (c, c)

    def __post_init__(self) -> None:
        self.matrix = np.asarray(self.matrix, dtype=float)
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("cost matrix must be square")
        if np.abs(m - m.T).max() > 1e-12:
            raise ValueError("cost matrix must be symmetric")
        if np.abs(np.diag(m)).max() > 1e-12:
            raise ValueError("cost matrix needs a zero diagonal")
        if (m < 0).any():
            raise ValueError("cost matrix must be nonnegative")

    @property
    def num_classes(self) -> int:
        return self.matrix.shape[0]


def discrete_cost(c: int) -> GroundCost:
    """0/1 cost: any misplaced mass costs 1, indices carry no order."""
    return GroundCost(kind="discrete", matrix=1.0 - np.eye(c))


def index_linear_cost(c: int) -> GroundCost:
    """|j - k| cost; exists for testing against the CDF closed form."""
    idx = np.arange(c, dtype=float)
    return GroundCost(kind="index_linear", matrix=np.abs(idx[:, None] - idx[None, :]))


def semantic_cost(vocab: EmotionVocabulary) -> GroundCost:
    """1 - cos(v_j, v_k): moving mass between similar emotions is cheap."""
    m = 1.0 - similarity_matrix(vocab)
    np.fill_diagonal(m, 0.0)
    return GroundCost(kind="semantic", matrix=np.maximum(m, 0.0))


def make_ground_cost(
    kind: str, c: int, vocab: EmotionVocabulary | None = None
) -> GroundCost:
    if kind == "discrete":
        return discrete_cost(c)
    if kind == "index_linear":
        return index_linear_cost(c)
    if kind == "semantic":
        if vocab is None:
            raise ValueError("semantic cost needs a vocabulary")
        if vocab.num_classes != c:
            raise ValueError("vocabulary size does not match c")
        return semantic_cost(vocab)
    raise ValueError(f"unknown ground cost {kind!r}")


def normalize_similarities(s: np.ndarray) -> np.ndarray:
    """Shift similarities by +1 and L1-normalize onto the simplex.

    The affine shift keeps the ordering and relative spacing of the
    similarities; an all ``-1`` input (total mass below 1e-12) falls back
    to the uniform distribution.
    """
    s = np.asarray(s, dtype=float)
    if s.ndim != 1:
        raise ValueError("expected a similarity vector")
    if (s < -1.0 - 1e-9).any() or (s > 1.0 + 1e-9).any():
        raise ValueError("similarities must lie in [-1, 1]")
    shifted = s + 1.0
    total = float(shifted.sum())
    if total < 1e-12:
        return np.full(s.shape, 1.0 / s.size)
    return shifted / total


def _check_simplex_pair(p: np.ndarray, q: np.ndarray, c: int) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != (c,) or q.shape != (c,):
        raise ValueError("distribution lengths must match the cost matrix")
    for v in (p, q):
        if (v < -1e-9).any() or abs(float(v.sum()) - 1.0) > 1e-9:
            raise ValueError("inputs must be probability distributions")
    return np.maximum(p, 0.0), np.maximum(q, 0.0)


_MARGINAL_CONSTRAINTS: dict[int, np.ndarray] = {}


def _marginal_constraints(c: int) -> np.ndarray:
    """Equality matrix mapping a flattened plan to its 2c marginals."""
    cached = _MARGINAL_CONSTRAINTS.get(c)
    if cached is None:
        a = np.zeros((2 * c, c * c))
        for i in range(c):
            a[i, i * c : (i + 1) * c] = 1.0  # mass leaving row i
            a[c + i, i::c] = 1.0  # mass arriving at column i
        _MARGINAL_CONSTRAINTS[c] = cached = a
    return cached


def wasserstein(
    p: np.ndarray, q: np.ndarray, cost: GroundCost
) -> tuple[float, np.ndarray]:
    """Exact optimum of the discrete transportation problem.

    Minimizes ``sum_jk plan[j][k] * cost[j][k]`` over nonnegative plans
    with row sums ``p`` and column sums ``q``. Returns the distance and
    an optimal plan (a vertex of the transportation polytope).
    """
    c = cost.num_classes
    p, q = _check_simplex_pair(p, q, c)
    a_eq = _marginal_constraints(c)
    b_eq = np.concatenate([p, q])
    # drop one redundant marginal row so the system has full rank
    res = linprog(
        cost.matrix.ravel(),
        A_eq=a_eq[:-1],
        b_eq=b_eq[:-1],
        bounds=(0.0, None),
        method="highs",
    )
    if res.status != 0:
        raise RuntimeError(f"transport solve failed: {res.message}")
    plan = np.maximum(res.x.reshape(c, c), 0.0)
    return float(res.fun), plan


def wasserstein_many(
    ps: np.ndarray, qs: np.ndarray, cost: GroundCost
) -> np.ndarray:
    """Distances for row-aligned batches of distributions.

    The discrete cost uses its total-variation identity for speed; other
    costs call the exact solver per row. A unit test pins agreement of
    every branch with :func:`wasserstein`.
    """
    ps = np.asarray(ps, dtype=float)
    qs = np.asarray(qs, dtype=float)
    if ps.shape != qs.shape or ps.ndim != 2:
        raise ValueError("expected two equal-shaped batches")
    if cost.kind == "discrete":
        return 0.5 * np.abs(ps - qs).sum(axis=1)
    return np.array([wasserstein(p, q, cost)[0] for p, q in zip(ps, qs)])


def confidence(
    semantic_graph: np.ndarray,
    task_graph: np.ndarray,
    epsilon: float = 1e-3,
    cost: GroundCost | None = None,
) -> float:
    """Inverse Wasserstein gap between the two class-relation graphs.

    ``alpha = 1 / (W + epsilon)`` lies in ``(0, 1/epsilon]``; identical
    graphs give the cap ``1/epsilon``.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    s = np.asarray(semantic_graph, dtype=float)
    t = np.asarray(task_graph, dtype=float)
    if cost is None:
        cost = discrete_cost(s.size)
    dist, _ = wasserstein(normalize_similarities(s), normalize_similarities(t), cost)
    return 1.0 / (dist + epsilon)
