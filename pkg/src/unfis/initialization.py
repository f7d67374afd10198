"""Centroid-based initialization of antecedents and consequents."""

from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_EPSILON, ModelParams
from .errors import InfeasibleClusteringError

INITIAL_LOGIT = 2.0
KMEANS_MAX_ITER = 50
WIDTH_FLOOR_FRACTION = 0.1


@dataclass
class InitReport:
    centroids: np.ndarray
    widths: np.ndarray
    populations: np.ndarray
    neighbours: int

    def to_text(self, feature_names=None):
        R, n = self.centroids.shape
        names = feature_names or [f"x{j + 1}" for j in range(n)]
        lines = [f"k-means initialization: {R} clusters, widths from {self.neighbours} nearest samples"]
        for i in range(R):
            lines.append(f"cluster {i + 1} (population {int(self.populations[i])})")
            for j, name in enumerate(names):
                lines.append(f"  {name:<24} center {self.centroids[i, j]: .6f}  width {self.widths[i, j]:.6f}")
        return "\n".join(lines)


def farthest_point_seeds(X, k, rng):
    """Greedy farthest-point seeding from a random starting sample."""
    first = int(rng.integers(len(X)))
    chosen = [first]
    dist = np.sum((X - X[first]) ** 2, axis=1)
    for _ in range(1, k):
        nxt = int(np.argmax(dist))
        chosen.append(nxt)
        dist = np.minimum(dist, np.sum((X - X[nxt]) ** 2, axis=1))
    return X[chosen].copy()


def kmeans(X, k, rng, max_iter=KMEANS_MAX_ITER):
    centroids = farthest_point_seeds(X, k, rng)
    labels = np.zeros(len(X), dtype=int)
    for _ in range(max_iter):
        d = np.sum((X[:, None, :] - centroids[None]) ** 2, axis=2)
        labels = np.argmin(d, axis=1)
        updated = centroids.copy()
        for i in range(k):
            members = X[labels == i]
            if len(members):
                updated[i] = members.mean(axis=0)
        if np.array_equal(updated, centroids):
            break
        centroids = updated
    return centroids, labels


def neighbour_count(N, R):
    if R == 1:
        return N
    return min(N, max(5, N // (3 * R)))


def init_params(X, Y, R, seed=0, selection=True, epsilon=DEFAULT_EPSILON, initial_logit=INITIAL_LOGIT):
    """Initial model from training inputs ``X`` (N, n) and one-hot labels ``Y`` (N, C).

    Centers are k-means centroids. Each width is the spread of the nearest
    training samples to the centroid along that dimension, floored at a tenth
    of the global spread. Gates start nearly open and every rule starts as the
    class-prior predictor.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    N, n = X.shape
    C = Y.shape[1]
    if N == 0:
        raise InfeasibleClusteringError("cannot initialize from an empty training set")
    if R < 1 or R > N:
        raise InfeasibleClusteringError(f"cannot form {R} clusters from {N} samples")
    rng = np.random.default_rng(seed)
    centroids, labels = kmeans(X, R, rng)

    spread = X.std(axis=0)
    floor = WIDTH_FLOOR_FRACTION * np.where(spread > 0, spread, 1.0)
    k = neighbour_count(N, R)
    widths = np.empty((R, n))
    for i in range(R):
        d = np.sum((X - centroids[i]) ** 2, axis=1)
        nearest = X[np.argsort(d, kind="stable")[:k]]
        widths[i] = nearest.std(axis=0)
    widths = np.maximum(widths, floor)

    counts = Y.sum(axis=0)
    prior_logit = np.log(np.maximum(counts, 1.0) / N)
    consequents = np.zeros((R, C, n + 1))
    consequents[:, :, 0] = prior_logit

    params = ModelParams(
        centers=centroids,
        widths=widths,
        logits=np.full((R, n), float(initial_logit)),
        consequents=consequents,
        thresholds=np.zeros(C),
        selection=selection,
        epsilon=epsilon,
    )
    report = InitReport(centroids, widths, np.bincount(labels, minlength=R), k)
    return params, report
