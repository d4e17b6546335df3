"""Uncertain objects as weighted sample sets with lazy kd-decomposition.

An object is a finite set of weighted alternative positions whose weights sum
to one, bounded by its tight MBR.  Continuous densities enter by sampling at
ingestion time.  The decomposition tree bisects a node's samples at the
weighted median of the widest MBR axis; child masses are always the exact
weight sums (which reduces to the 0.5^(level-1) rule for even splits), and
child rectangles are tight MBRs of their samples.
"""

from __future__ import annotations

import csv
import json
import threading
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .geometry import Rect

__all__ = [
    "Partition",
    "DecompositionTree",
    "UncertainObject",
    "UnsplittableNode",
    "DatasetError",
    "build_object",
    "split",
    "leaves_at_depth",
    "generate_synthetic",
    "load_dataset",
    "save_dataset_jsonl",
]

class UnsplittableNode(Exception):
    """Raised when a partition has fewer than two distinct sample points."""


class DatasetError(ValueError):
    """Malformed dataset file; message carries the offending line number."""


@dataclass(frozen=True)
class Partition:
    """One decomposition-tree node: samples, their tight MBR, mass and level."""

    points: np.ndarray
    weights: np.ndarray
    rect: Rect
    mass: float
    level: int
    sample_indices: np.ndarray

    @property
    def is_atomic(self) -> bool:
        """True when all contained samples coincide (nothing left to split)."""
        return self.rect.is_degenerate

    def __repr__(self):
        return f"Partition(n={len(self.weights)}, mass={self.mass:.4g}, level={self.level})"


def _tight_rect(points: np.ndarray) -> Rect:
    return Rect.from_bounds(points.min(axis=0), points.max(axis=0))


def _make_partition(points, weights, indices, level) -> Partition:
    return Partition(
        points=points,
        weights=weights,
        rect=_tight_rect(points),
        mass=float(weights.sum()),
        level=level,
        sample_indices=indices,
    )


def split(node: Partition) -> tuple[Partition, Partition]:
    """Bisect a partition at the weighted median of its widest MBR axis.

    Samples are ordered along the axis (stable); the shortest prefix whose
    cumulative weight reaches half the node mass goes left, clipped so both
    children stay non-empty.  Raises UnsplittableNode when every sample
    coincides.
    """
    if node.is_atomic:
        raise UnsplittableNode(f"cannot split {node!r}: all samples coincide")
    side = node.rect.hi - node.rect.lo
    axis = int(np.argmax(side))
    order = np.argsort(node.points[:, axis], kind="stable")
    cum = np.cumsum(node.weights[order])
    half = node.mass / 2.0
    n_left = int(np.searchsorted(cum, half)) + 1
    n_left = min(max(n_left, 1), len(order) - 1)
    left_idx, right_idx = order[:n_left], order[n_left:]
    left = _make_partition(
        node.points[left_idx], node.weights[left_idx], node.sample_indices[left_idx], node.level + 1
    )
    right = _make_partition(
        node.points[right_idx], node.weights[right_idx], node.sample_indices[right_idx], node.level + 1
    )
    return left, right


class _TreeNode:
    __slots__ = ("partition", "children")

    def __init__(self, partition: Partition):
        self.partition = partition
        self.children: Optional[tuple["_TreeNode", "_TreeNode"]] = None


class DecompositionTree:
    """Binary kd-decomposition, deepened lazily and guarded by a lock so that
    concurrent readers always observe a consistent frontier."""

    def __init__(self, root: Partition):
        self._root = _TreeNode(root)
        self._lock = threading.Lock()

    @property
    def root(self) -> Partition:
        return self._root.partition

    def leaves(self, depth: int) -> list[Partition]:
        """Frontier of the tree at most `depth` levels deep (root is level 1).

        Atomic partitions appear as-is at lower levels; the frontier masses
        always sum to the root mass.  Deepening past full separation is a
        no-op.
        """
        if depth < 1:
            raise ValueError("depth must be >= 1")
        with self._lock:
            out: list[Partition] = []
            self._collect(self._root, depth, out)
            return out

    def _collect(self, node: _TreeNode, depth: int, out: list[Partition]):
        part = node.partition
        if part.level >= depth or part.is_atomic:
            out.append(part)
            return
        if node.children is None:
            left, right = split(part)
            node.children = (_TreeNode(left), _TreeNode(right))
        for child in node.children:
            self._collect(child, depth, out)

    def fully_separated(self, depth: int) -> bool:
        """True when every frontier node at `depth` is atomic."""
        return all(p.is_atomic for p in self.leaves(depth))


class UncertainObject:
    """A weighted discrete sample set with id, tight MBR and decomposition tree."""

    __slots__ = ("id", "points", "weights", "mbr", "_tree")

    def __init__(self, obj_id, points: np.ndarray, weights: np.ndarray):
        # Copy before freezing so caller-owned arrays are never made read-only.
        points = np.array(points, dtype=float)
        weights = np.asarray(weights, dtype=float)
        if points.ndim != 2 or points.shape[0] == 0:
            raise ValueError("need a non-empty (n, d) sample array")
        if weights.shape != (points.shape[0],):
            raise ValueError("weights must be one per sample")
        if not np.isfinite(points).all():
            raise ValueError("sample coordinates must be finite")
        if (weights <= 0).any() or not np.isfinite(weights).all():
            raise ValueError("sample weights must be positive and finite")
        weights = weights / weights.sum()
        points.setflags(write=False)
        weights.setflags(write=False)
        self.id = obj_id
        self.points = points
        self.weights = weights
        self.mbr = _tight_rect(points)
        self._tree: Optional[DecompositionTree] = None

    @property
    def n_samples(self) -> int:
        return self.points.shape[0]

    @property
    def ndim(self) -> int:
        return self.points.shape[1]

    @property
    def samples(self) -> list[tuple[np.ndarray, float]]:
        return [(self.points[i], float(self.weights[i])) for i in range(self.n_samples)]

    @property
    def decomposition(self) -> DecompositionTree:
        if self._tree is None:
            root = _make_partition(
                self.points, self.weights, np.arange(self.n_samples), level=1
            )
            self._tree = DecompositionTree(root)
        return self._tree

    def leaves_at_depth(self, depth: int) -> list[Partition]:
        return self.decomposition.leaves(depth)

    def __repr__(self):
        return f"UncertainObject(id={self.id!r}, n={self.n_samples}, d={self.ndim})"


def build_object(obj_id, samples: Iterable) -> UncertainObject:
    """Build an object from (point, weight) pairs; weights are normalised."""
    pts = []
    wts = []
    for entry in samples:
        point, weight = entry
        pts.append(np.asarray(point, dtype=float))
        wts.append(float(weight))
    if not pts:
        raise ValueError("object needs at least one sample")
    return UncertainObject(obj_id, np.stack(pts), np.array(wts))


def leaves_at_depth(obj: UncertainObject, depth: int) -> list[Partition]:
    return obj.leaves_at_depth(depth)


def generate_synthetic(
    n: int,
    d: int = 2,
    max_extent: float = 0.004,
    samples_per_object: int = 1000,
    seed: int = 0,
) -> list[UncertainObject]:
    """Uniform random objects in the unit cube.

    Each object gets an anchor uniform in [0, 1]^d, per-dimension extents
    uniform in (0, max_extent], and samples uniform inside the resulting box,
    so every MBR lies within [0, 1 + max_extent]^d.  Fully deterministic for a
    fixed seed.
    """
    if n < 1 or d < 1 or samples_per_object < 1:
        raise ValueError("n, d and samples_per_object must be >= 1")
    if not (0.0 < max_extent < 1.0):
        raise ValueError("max_extent must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    objects = []
    for i in range(n):
        anchor = rng.uniform(0.0, 1.0, size=d)
        extent = (1.0 - rng.uniform(0.0, 1.0, size=d)) * max_extent
        pts = anchor + rng.uniform(0.0, 1.0, size=(samples_per_object, d)) * extent
        wts = np.full(samples_per_object, 1.0 / samples_per_object)
        objects.append(UncertainObject(i, pts, wts))
    return objects


def _gaussian_cloud(rng, mean, sigma, n):
    """Samples from a per-dimension Gaussian truncated at +-3 sigma.

    Rejection sampling renormalises the truncated density automatically;
    zero-sigma dimensions collapse to the mean.
    """
    d = mean.size
    z = rng.standard_normal((n, d))
    while True:
        bad = np.abs(z) > 3.0
        if not bad.any():
            break
        z[bad] = rng.standard_normal(int(bad.sum()))
    return mean[None, :] + z * sigma[None, :]


def load_dataset(path, fmt: Optional[str] = None, seed: int = 0) -> list[UncertainObject]:
    """Read objects from a file.

    Formats:
      * ``jsonl``: one object per line,
        ``{"id": ..., "samples": [[x1, ..., xd, w], ...]}``.
      * ``gaussian-csv``: rows ``id, x1..xd, sigma1..sigmad, nsamples``;
        samples are drawn from the per-dimension Gaussian truncated at
        +-3 sigma (seeded, reproducible), with equal weights.
    """
    path = str(path)
    if fmt is None:
        fmt = "gaussian-csv" if path.endswith(".csv") else "jsonl"
    if fmt == "jsonl":
        return _load_jsonl(path)
    if fmt == "gaussian-csv":
        return _load_gaussian_csv(path, seed)
    raise ValueError(f"unknown dataset format {fmt!r}")


def _check_consistent_dims(objects: list[UncertainObject], d: int, lineno: int):
    if objects and objects[-1].ndim != d:
        raise DatasetError(
            f"line {lineno}: dimensionality {d} differs from previous objects ({objects[-1].ndim})"
        )


def _load_jsonl(path) -> list[UncertainObject]:
    objects: list[UncertainObject] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"line {lineno}: invalid JSON ({exc.msg})") from exc
            try:
                obj_id = row["id"]
                raw = row["samples"]
                samples = [(entry[:-1], entry[-1]) for entry in raw]
                obj = build_object(obj_id, samples)
            except (KeyError, IndexError, TypeError, ValueError) as exc:
                raise DatasetError(f"line {lineno}: {exc}") from exc
            obj_d = obj.ndim
            _check_consistent_dims(objects, obj_d, lineno)
            objects.append(obj)
    if not objects:
        raise DatasetError("dataset is empty")
    return objects


def _load_gaussian_csv(path, seed: int) -> list[UncertainObject]:
    rng = np.random.default_rng(seed)
    objects: list[UncertainObject] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            row = [cell.strip() for cell in row if cell.strip() != ""]
            if not row or row[0].startswith("#"):
                continue
            if (len(row) - 2) % 2 != 0 or len(row) < 4:
                raise DatasetError(
                    f"line {lineno}: expected columns id, x1..xd, sigma1..sigmad, nsamples"
                )
            d = (len(row) - 2) // 2
            obj_id = row[0]
            try:
                mean = np.array([float(v) for v in row[1 : 1 + d]])
                sigma = np.array([float(v) for v in row[1 + d : 1 + 2 * d]])
                nsamples = int(row[-1])
            except ValueError as exc:
                raise DatasetError(f"line {lineno}: {exc}") from exc
            if (sigma < 0).any():
                raise DatasetError(f"line {lineno}: sigma must be >= 0")
            if nsamples < 1:
                raise DatasetError(f"line {lineno}: nsamples must be >= 1")
            pts = _gaussian_cloud(rng, mean, sigma, nsamples)
            wts = np.full(nsamples, 1.0 / nsamples)
            obj = UncertainObject(obj_id, pts, wts)
            _check_consistent_dims(objects, obj.ndim, lineno)
            objects.append(obj)
    if not objects:
        raise DatasetError("dataset is empty")
    return objects


def save_dataset_jsonl(objects: Sequence[UncertainObject], path):
    """Write objects in the jsonl sample-list format (stable field order)."""
    with open(path, "w", encoding="utf-8") as fh:
        for obj in objects:
            samples = [[*map(float, pt), float(w)] for pt, w in zip(obj.points, obj.weights)]
            fh.write(json.dumps({"id": obj.id, "samples": samples}) + "\n")
