"""Average-linkage (UPGMA) agglomerative clustering of correlation matrices."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DataError
from .rmt import CorrelationMatrix

# relative slack under which two linkage values count as tied
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class Merge:
    left: int
    right: int
    height: float
    size: int


@dataclass(frozen=True)
class Dendrogram:
    """Merge tree over ``leaves``.

    Node ids: ``0..N-1`` are leaves, ``N + k`` is the cluster formed by
    ``merges[k]``.
    """

    leaves: tuple[str, ...]
    merges: tuple[Merge, ...]

    def members(self, node: int) -> tuple[int, ...]:
        n = len(self.leaves)
        if node < n:
            return (node,)
        merge = self.merges[node - n]
        return tuple(sorted(self.members(merge.left) + self.members(merge.right)))

    def to_dict(self) -> dict:
        return {
            "leaves": list(self.leaves),
            "merges": [
                {
                    "node": len(self.leaves) + k,
                    "left": m.left,
                    "right": m.right,
                    "height": m.height,
                    "size": m.size,
                    "members": [self.leaves[i] for i in self.members(len(self.leaves) + k)],
                }
                for k, m in enumerate(self.merges)
            ],
            "newick": self.to_newick(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_newick(self) -> str:
        n = len(self.leaves)

        def height(node: int) -> float:
            return 0.0 if node < n else self.merges[node - n].height

        def render(node: int) -> str:
            if node < n:
                return _newick_label(self.leaves[node])
            m = self.merges[node - n]
            h = m.height
            return (
                f"({render(m.left)}:{h - height(m.left)!r},"
                f"{render(m.right)}:{h - height(m.right)!r})"
            )

        return render(2 * n - 2) + ";"


def _newick_label(label: str) -> str:
    if re.fullmatch(r"[A-Za-z0-9_.\-]+", label):
        return label
    return "'" + label.replace("'", "''") + "'"


def dissimilarity_rows(corr: CorrelationMatrix) -> np.ndarray:
    """Euclidean distances between rows of the correlation matrix."""
    c = corr.entries
    gram = c @ c.T
    sq = np.diag(gram)
    d2 = sq[:, None] + sq[None, :] - 2.0 * gram
    # the Gram expansion loses precision for near-identical rows; use differences there
    d = np.sqrt(np.maximum(d2, 0.0))
    close = d < 1e-4
    if close.any():
        for i, j in zip(*np.nonzero(close)):
            d[i, j] = np.linalg.norm(c[i] - c[j])
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return d


def correlation_distance(corr: CorrelationMatrix) -> np.ndarray:
    """sqrt(2 (1 - C_ij)), zero on the diagonal."""
    d = np.sqrt(np.maximum(2.0 * (1.0 - corr.entries), 0.0))
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return d


def agglomerate(distances, labels: Sequence[str]) -> Dendrogram:
    """UPGMA: repeatedly merge the two clusters with the smallest mean
    cross-pair dissimilarity.

    Linkage is tracked as the exact sum over original cross pairs, divided by
    the pair count on comparison. Ties (within TIE_RTOL) go to the
    lexicographically smallest (left id, right id).
    """
    d = np.asarray(distances, dtype=float)
    labels = tuple(str(x) for x in labels)
    n = len(labels)
    if n < 2:
        raise DataError("clustering needs at least two items")
    if d.shape != (n, n):
        raise DataError(f"distance matrix shape {d.shape} does not match {n} labels")
    if not np.all(np.isfinite(d)) or np.any(d < 0):
        raise DataError("distances must be finite and non-negative")
    if np.abs(d - d.T).max() > 1e-12 * max(1.0, float(np.abs(d).max())):
        raise DataError("distance matrix is not symmetric")
    if np.any(np.diag(d) != 0):
        raise DataError("distance matrix must have a zero diagonal")

    size = {i: 1 for i in range(n)}
    # cross-pair sums between active clusters, keyed (a, b) with a < b
    sums = {(i, j): float(d[i, j]) for i in range(n) for j in range(i + 1, n)}
    merges: list[Merge] = []
    next_id = n
    while len(size) > 1:
        best = min(sums[k] / (size[k[0]] * size[k[1]]) for k in sums)
        slack = TIE_RTOL * abs(best)
        left, right = min(k for k in sums if sums[k] / (size[k[0]] * size[k[1]]) <= best + slack)
        height = sums[(left, right)] / (size[left] * size[right])
        if merges and height < merges[-1].height <= height + TIE_RTOL * abs(merges[-1].height):
            # equal in exact arithmetic; keep the recorded heights monotone
            height = merges[-1].height
        new = next_id
        next_id += 1
        new_size = size.pop(left) + size.pop(right)
        del sums[(left, right)]
        for other in size:
            total = 0.0
            for old in (left, right):
                total += sums.pop((min(other, old), max(other, old)))
            sums[(other, new)] = total
        size[new] = new_size
        merges.append(Merge(left, right, height, new_size))
    return Dendrogram(labels, tuple(merges))


def merge_order(dend: Dendrogram) -> list[tuple[frozenset, float]]:
    """Merges in order, each as (member labels, height)."""
    n = len(dend.leaves)
    return [
        (frozenset(dend.leaves[i] for i in dend.members(n + k)), m.height)
        for k, m in enumerate(dend.merges)
    ]
