"""Ground-truth dataset generators and the cluster separation check."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bounds import ConfidencePolicy
from .errors import DomainError, GenerationError, TieError
from .metric import Dataset, true_nn_graph

MAX_TRIES = 100


def _euclidean(x: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - x[None, :, :]
    d = np.sqrt((diff * diff).sum(axis=2))
    d = (d + d.T) / 2.0
    np.fill_diagonal(d, 0.0)
    return d


def generate_circle_clusters(c: int, m: int, separation_frac: float, seed: int = 0,
                             radius: float = 1.0) -> Dataset:
    """c disks of the given radius with centers evenly spaced on a circle.

    Neighboring disks are ``separation_frac`` disk diameters apart. Points are
    uniform in their disk and indexed cluster by cluster.
    """
    if c < 1 or m < 1 or c * m < 2:
        raise DomainError("need c >= 1, m >= 1 and c * m >= 2")
    if not separation_frac > 0:
        raise DomainError("separation_frac must be positive")
    if not radius > 0:
        raise DomainError("radius must be positive")
    ring = 0.0 if c == 1 else radius * (1.0 + separation_frac) / math.sin(math.pi / c)
    angles = 2.0 * math.pi * np.arange(c) / c
    centers = ring * np.stack([np.cos(angles), np.sin(angles)], axis=1)
    labels = np.repeat(np.arange(c), m)
    rng = np.random.default_rng(seed)
    for _ in range(MAX_TRIES):
        rho = radius * np.sqrt(rng.random(c * m))
        theta = 2.0 * math.pi * rng.random(c * m)
        x = centers[labels] + np.stack([rho * np.cos(theta), rho * np.sin(theta)], axis=1)
        ds = Dataset.from_array(_euclidean(x), labels=labels, coords=x, generator={
            "name": "circle_clusters", "c": c, "m": m, "separation_frac": separation_frac,
            "radius": radius, "seed": seed})
        try:
            true_nn_graph(ds)
        except TieError:
            continue
        return ds
    raise GenerationError(f"no tie-free placement after {MAX_TRIES} attempts")


def generate_circulant(nu: int, alpha: float, r: float) -> Dataset:
    """2 nu points; row p has ``r (2 - ((s-1)/(nu-1))^alpha)`` at offset s < nu, r at offset nu."""
    if nu < 2:
        raise DomainError(f"need nu >= 2, got {nu}")
    if not (alpha > 0 and r > 0):
        raise DomainError("alpha and r must be positive")
    size = 2 * nu
    row = np.zeros(size)
    for s in range(1, nu):
        row[s] = r * (2.0 - ((s - 1) / (nu - 1)) ** alpha)
        row[size - s] = row[s]
    row[nu] = r
    offsets = (np.arange(size)[None, :] - np.arange(size)[:, None]) % size
    return Dataset.from_array(row[offsets], generator={"name": "circulant", "nu": nu, "alpha": alpha, "r": r})


def _leaf_block(size: int, r: float, g: float) -> np.ndarray:
    """Mutual nearest-neighbor pairs at r, everything else in the block at r (1 + g).

    With an odd size the last point sits at ``r (1 + g/2)`` from point 0.
    """
    d = np.full((size, size), r * (1.0 + g))
    for a in range(0, size - 1, 2):
        d[a, a + 1] = d[a + 1, a] = r
    if size % 2 == 1 and size > 1:
        d[0, size - 1] = d[size - 1, 0] = r * (1.0 + g / 2.0)
    np.fill_diagonal(d, 0.0)
    return d


def _check_leaf_args(leaf_size: int, margin: float, r: float, g: float) -> None:
    if leaf_size < 2:
        raise DomainError("clusters need at least two points")
    if not margin > 1:
        raise DomainError("margin must exceed 1")
    if not (r > 0 and 0 < g <= 1):
        raise DomainError("need r > 0 and 0 < g <= 1")


def _finish(d: np.ndarray, labels: np.ndarray, seed: int, generator: dict,
            level_labels: list[np.ndarray] | None = None) -> Dataset:
    perm = np.random.default_rng(seed).permutation(d.shape[0])
    d = d[np.ix_(perm, perm)]
    if level_labels is not None:
        generator["level_labels"] = [lab[perm].tolist() for lab in level_labels]
    return Dataset.from_array(d, labels=labels[perm], generator=generator)


def generate_separated_clusters(num_clusters: int, cluster_size: int, margin: float,
                                policy: ConfidencePolicy, seed: int = 0, r: float = 1.0,
                                g: float = 1.0) -> Dataset:
    """Equal clusters at a common cross distance that meets the separation check.

    Cross distance is ``margin * (6 radius(1) + 2 diameter)``; indices are
    shuffled by ``seed``.
    """
    _check_leaf_args(cluster_size, margin, r, g)
    if num_clusters < 1:
        raise DomainError("need at least one cluster")
    n = num_clusters * cluster_size
    policy = policy.with_n(n) if policy.n != n else policy
    block = _leaf_block(cluster_size, r, g)
    cross = margin * (6.0 * policy.radius(1) + 2.0 * block.max())
    labels = np.repeat(np.arange(num_clusters), cluster_size)
    d = np.where(labels[:, None] == labels[None, :], 0.0, cross)
    for c in range(num_clusters):
        s = slice(c * cluster_size, (c + 1) * cluster_size)
        d[s, s] = block
    return _finish(d, labels, seed, {
        "name": "separated_clusters", "num_clusters": num_clusters, "cluster_size": cluster_size,
        "margin": margin, "policy": policy.to_json(), "r": r, "g": g, "cross": cross, "seed": seed})


def auto_leaf_size(levels: int) -> int:
    """Smallest leaf size nu with ``nu >= ceil(log(2^levels * nu))``."""
    nu = 2
    while nu < math.ceil(math.log((2 ** levels) * nu)):
        nu += 1
    return nu


def generate_hierarchical(levels: int, leaf_size: int | str, margin: float,
                          policy: ConfidencePolicy, seed: int = 0, r: float = 1.0,
                          g: float = 1.0) -> Dataset:
    """Balanced binary tree of ``2^levels`` leaf clusters.

    Two points in different leaves are at the distance of their lowest common
    ancestor level, and each level's distance exceeds ``margin`` times
    ``6 radius(1) + 2 * (diameter of the level below)``.
    """
    if levels < 1:
        raise DomainError("levels must be at least 1")
    if leaf_size == "auto":
        leaf_size = auto_leaf_size(levels)
    leaf_size = int(leaf_size)
    _check_leaf_args(leaf_size, margin, r, g)
    leaves = 2 ** levels
    n = leaves * leaf_size
    policy = policy.with_n(n) if policy.n != n else policy
    c1 = policy.radius(1)
    block = _leaf_block(leaf_size, r, g)
    level_dist = []
    diam = float(block.max())
    for _ in range(levels):
        nxt = margin * (6.0 * c1 + 2.0 * diam)
        level_dist.append(nxt)
        diam = nxt
    if not math.isfinite(diam) or r / diam < 1e-12:
        raise GenerationError(f"separation at depth {levels} exceeds double precision range")
    leaf = np.repeat(np.arange(leaves), leaf_size)
    # leaves a, b meet at height h when a >> h == b >> h but a >> (h-1) != b >> (h-1)
    d = np.zeros((n, n))
    for h in range(1, levels + 1):
        meet = ((leaf[:, None] >> h) == (leaf[None, :] >> h)) & (
            (leaf[:, None] >> (h - 1)) != (leaf[None, :] >> (h - 1)))
        d[meet] = level_dist[h - 1]
    for c in range(leaves):
        s = slice(c * leaf_size, (c + 1) * leaf_size)
        d[s, s] = block
    level_labels = [leaf >> h for h in range(levels)]
    return _finish(d, leaf, seed, {
        "name": "hierarchical", "levels": levels, "leaf_size": leaf_size, "margin": margin,
        "policy": policy.to_json(), "r": r, "g": g, "level_distances": level_dist, "seed": seed},
        level_labels)


@dataclass(frozen=True)
class ClusterCheck:
    """Outcome for one cluster; ``witness`` is a violating (i, j, k) or None."""

    label: int
    passed: bool
    witness: tuple[int, int, int] | None


def check_cluster_condition(dataset: Dataset, labels, policy: ConfidencePolicy) -> list[ClusterCheck]:
    """Every k with ``d[i,k] < 6 radius(1) + 2 d[i,j]`` for i, j in a cluster must share it."""
    labels = np.asarray(labels)
    if labels.shape != (dataset.n,):
        raise DomainError("labels must have one entry per point")
    d = dataset.d
    six_c1 = 6.0 * policy.radius(1)
    out = []
    for lab in np.unique(labels):
        members = np.flatnonzero(labels == lab)
        outside = np.flatnonzero(labels != lab)
        witness = None
        for i in members:
            sub = d[i, members]
            j = int(members[np.argmax(sub)])
            thresh = six_c1 + 2.0 * d[i, j]
            bad = outside[d[i, outside] < thresh]
            if bad.size:
                witness = (int(i), j, int(bad[0]))
                break
        out.append(ClusterCheck(int(lab), witness is None, witness))
    return out
