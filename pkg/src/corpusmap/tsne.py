"""Exact t-SNE reduction of embedding vectors to 2D layout coordinates.

Classic dense formulation: per-point Gaussian precisions are calibrated by
binary search so each conditional distribution hits the requested perplexity,
affinities are symmetrized and normalized, and the 2D layout is optimized by
momentum gradient descent on the KL divergence to a Student-t (one degree of
freedom) neighbor distribution, with early exaggeration and per-iteration
recentering to zero mean. Everything is seeded and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TooFewPointsError

BINARY_SEARCH_ITERS = 50
ENTROPY_TOLERANCE = 1e-5
EXAGGERATION_PHASE = 250  # iterations; momentum switches at the same point
MOMENTUM_EARLY = 0.5
MOMENTUM_LATE = 0.8
INIT_STD = 1e-4


@dataclass(frozen=True)
class TsneParams:
    perplexity: float = 30.0
    iterations: int = 1000
    early_exaggeration: float = 12.0
    learning_rate: float | None = None  # None resolves to max(N/12, 50)
    seed: int = 42

    def __post_init__(self) -> None:
        if self.perplexity <= 0:
            raise ValueError("perplexity must be positive")
        if self.iterations < 1:
            raise ValueError("iterations must be positive")
        if self.early_exaggeration < 1:
            raise ValueError("early_exaggeration must be >= 1")
        if self.learning_rate is not None and self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass
class LayoutPoint:
    item_id: str
    x: float
    y: float


def effective_perplexity(n: int, perplexity: float) -> float:
    """Cap perplexity so the per-row entropy target stays attainable."""
    if n >= 4:
        return min(perplexity, (n - 1) / 3.0)
    return min(perplexity, float(n - 1))


def pairwise_sq_dists(X: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances with an exactly zero diagonal."""
    sq = np.sum(X * X, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.maximum(d2, 0.0, out=d2)
    np.fill_diagonal(d2, 0.0)
    return d2


def _calibrate_row(dist_row: np.ndarray, target_entropy: float) -> tuple[np.ndarray, float]:
    """Binary-search the precision beta for one point's conditional distribution.

    Works with distances shifted by their minimum, which leaves the
    distribution and its entropy unchanged but keeps exp() away from
    underflowing for any beta.
    """
    shifted = dist_row - dist_row.min()
    beta = 1.0
    beta_min, beta_max = -np.inf, np.inf
    p = np.exp(-shifted * beta)
    for _ in range(BINARY_SEARCH_ITERS):
        total = p.sum()
        p_norm = p / total
        entropy = np.log(total) + beta * float(shifted @ p_norm)
        diff = entropy - target_entropy
        if abs(diff) <= ENTROPY_TOLERANCE:
            break
        if diff > 0:  # entropy too high: sharpen
            beta_min = beta
            beta = beta * 2.0 if beta_max == np.inf else (beta + beta_max) / 2.0
        else:
            beta_max = beta
            beta = beta / 2.0 if beta_min == -np.inf else (beta + beta_min) / 2.0
        p = np.exp(-shifted * beta)
    return p / p.sum(), beta


def calibrate_affinities(vectors, perplexity: float) -> tuple[np.ndarray, np.ndarray]:
    """Symmetrized affinity matrix P and the per-point precisions.

    P is (p_j|i + p_i|j) / 2N with zero diagonal, entries >= 0 and total sum 1.
    Each conditional row's Shannon entropy matches ln(effective perplexity)
    within the binary-search tolerance.
    """
    X = np.asarray(vectors, dtype=np.float64)
    n = len(X)
    if n < 2:
        raise TooFewPointsError("affinity calibration needs at least 2 points")
    target = np.log(effective_perplexity(n, perplexity))
    d2 = pairwise_sq_dists(X)
    conditional = np.zeros((n, n))
    betas = np.zeros(n)
    mask = ~np.eye(n, dtype=bool)
    for i in range(n):
        row, beta = _calibrate_row(d2[i][mask[i]], target)
        conditional[i][mask[i]] = row
        betas[i] = beta
    P = (conditional + conditional.T) / (2.0 * n)
    return P, betas


def _t_weights(Y: np.ndarray) -> np.ndarray:
    W = 1.0 / (1.0 + pairwise_sq_dists(Y))
    np.fill_diagonal(W, 0.0)
    return W


def kl_gradient(P: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Analytic gradient 4 * sum_j (p_ij - q_ij) w_ij (y_i - y_j)."""
    W = _t_weights(Y)
    Q = W / W.sum()
    M = (P - Q) * W
    return 4.0 * (M.sum(axis=1)[:, None] * Y - M @ Y)


def kl_divergence(P: np.ndarray, Y: np.ndarray) -> float:
    W = _t_weights(Y)
    Q = np.maximum(W / W.sum(), 1e-12)
    positive = P > 0
    return float(np.sum(P[positive] * np.log(P[positive] / Q[positive])))


def tsne_embed(
    X: np.ndarray, params: TsneParams, collect_costs: bool = False
) -> tuple[np.ndarray, list[float]]:
    """Optimize the 2D layout; returns (Y, per-iteration KL if collected)."""
    n = len(X)
    costs: list[float] = []
    if n == 0:
        return np.zeros((0, 2)), costs
    if n == 1:
        return np.zeros((1, 2)), costs
    P, _ = calibrate_affinities(X, params.perplexity)
    rng = np.random.default_rng(params.seed)
    Y = rng.normal(0.0, INIT_STD, size=(n, 2))
    velocity = np.zeros_like(Y)
    learning_rate = (
        params.learning_rate if params.learning_rate is not None else max(n / 12.0, 50.0)
    )
    P_exaggerated = P * params.early_exaggeration
    for iteration in range(params.iterations):
        early = iteration < EXAGGERATION_PHASE
        grad = kl_gradient(P_exaggerated if early else P, Y)
        momentum = MOMENTUM_EARLY if early else MOMENTUM_LATE
        velocity = momentum * velocity - learning_rate * grad
        Y = Y + velocity
        Y = Y - Y.mean(axis=0)
        if collect_costs:
            costs.append(kl_divergence(P, Y))
    return Y, costs


def tsne_fit(vectors, params: TsneParams | None = None, ids=None) -> list[LayoutPoint]:
    """Reduce vectors to 2D layout points (ids default to list positions)."""
    params = params or TsneParams()
    X = np.asarray(vectors, dtype=np.float64)
    if ids is None:
        ids = [str(i) for i in range(len(X))]
    if len(ids) != len(X):
        raise ValueError("ids and vectors must have equal length")
    Y, _ = tsne_embed(X, params)
    return [LayoutPoint(item_id, float(y[0]), float(y[1])) for item_id, y in zip(ids, Y)]
