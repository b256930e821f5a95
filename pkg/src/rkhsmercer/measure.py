"""Discrete measures: weighted node sets standing in for ``(X, mu)``."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import RkhsError


def as_points(points) -> np.ndarray:
    """Coerce a point or sequence of points to a float ``(n, d)`` array.

    Scalars and flat 1-d sequences are read as 1-d points.
    """
    arr = np.asarray(points, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    elif arr.ndim != 2:
        raise RkhsError("invalid-points", f"expected (n, d) array, got shape {arr.shape}")
    if arr.shape[1] < 1:
        raise RkhsError("invalid-points", "points need at least one coordinate")
    if not np.all(np.isfinite(arr)):
        raise RkhsError("invalid-points", "coordinates must be finite")
    return arr


def as_point(x) -> np.ndarray:
    """Coerce a single point to a float ``(d,)`` array."""
    arr = as_points(np.atleast_1d(np.asarray(x, dtype=np.float64)).reshape(1, -1))
    return arr[0]


def check_distinct(points: np.ndarray, what="points"):
    if len(np.unique(points, axis=0)) != len(points):
        raise RkhsError("duplicate-points", f"{what} must be pairwise distinct")


@dataclass(frozen=True, eq=False)
class DiscreteMeasure:
    """Quadrature nodes with strictly positive weights.

    Parameters
    ----------
    nodes
        Array of shape ``(n, d)``.
    weights
        Positive masses, one per node.
    labels
        Optional integer block tag per node.
    """

    nodes: np.ndarray
    weights: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        nodes = as_points(self.nodes)
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if len(nodes) < 1:
            raise RkhsError("empty-measure", "a measure needs at least one node")
        if weights.shape[0] != nodes.shape[0]:
            raise RkhsError("dimension-mismatch",
                            f"{nodes.shape[0]} nodes but {weights.shape[0]} weights")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise RkhsError("degenerate-measure", "every weight must be finite and > 0")
        check_distinct(nodes, "nodes")
        labels = self.labels
        if labels is not None:
            labels = np.asarray(labels, dtype=np.int64).reshape(-1)
            if labels.shape[0] != nodes.shape[0]:
                raise RkhsError("dimension-mismatch", "one label per node required")
            labels.setflags(write=False)
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def from_nonnegative(cls, nodes, weights, labels=None) -> "DiscreteMeasure":
        """Build a measure, dropping nodes that carry zero mass."""
        nodes = as_points(nodes)
        weights = np.asarray(weights, dtype=np.float64).reshape(-1)
        if np.any(weights < 0):
            raise RkhsError("degenerate-measure", "negative weight")
        keep = weights > 0
        labels = None if labels is None else np.asarray(labels)[keep]
        return cls(nodes[keep], weights[keep], labels)

    def __len__(self):
        return self.nodes.shape[0]

    @property
    def dim(self) -> int:
        return self.nodes.shape[1]

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.weights))

    def __eq__(self, other):
        if not isinstance(other, DiscreteMeasure):
            return NotImplemented
        same_labels = (self.labels is None and other.labels is None) or (
            self.labels is not None and other.labels is not None
            and np.array_equal(self.labels, other.labels))
        return (np.array_equal(self.nodes, other.nodes)
                and np.array_equal(self.weights, other.weights) and same_labels)

    __hash__ = None

    def inner(self, u, v) -> complex | float:
        """Weighted inner product ``sum_i w_i u_i conj(v_i)``."""
        u = self._values(u)
        v = self._values(v)
        out = np.sum(self.weights * u * np.conj(v))
        return float(out.real) if np.isrealobj(out) else complex(out)

    def _values(self, values) -> np.ndarray:
        arr = np.asarray(values)
        if arr.ndim != 1 or arr.shape[0] != len(self):
            raise RkhsError("dimension-mismatch",
                            f"expected {len(self)} node values, got shape {arr.shape}")
        return arr

    def to_dict(self) -> dict:
        out = {"nodes": self.nodes.tolist(), "weights": self.weights.tolist()}
        if self.labels is not None:
            out["labels"] = self.labels.tolist()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "DiscreteMeasure":
        try:
            nodes, weights = data["nodes"], data["weights"]
        except (KeyError, TypeError) as exc:
            raise RkhsError("invalid-measure", f"missing field {exc}") from None
        return cls(nodes, weights, data.get("labels"))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"x{k}" for k in range(self.dim)] + ["weight"])
        for node, w in zip(self.nodes, self.weights):
            writer.writerow([repr(float(c)) for c in node] + [repr(float(w))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "DiscreteMeasure":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise RkhsError("invalid-measure", "empty CSV")
        header = [h.strip() for h in rows[0]]
        if not header or header[-1] != "weight":
            raise RkhsError("invalid-measure", "CSV header must be x0..xd,weight")
        try:
            body = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=np.float64)
        except ValueError as exc:
            raise RkhsError("invalid-measure", str(exc)) from None
        if body.ndim != 2 or body.shape[1] != len(header):
            raise RkhsError("invalid-measure", "ragged CSV rows")
        return cls(body[:, :-1], body[:, -1])


def build_uniform_grid(lo: float, hi: float, n: int) -> DiscreteMeasure:
    """Midpoint rule for Lebesgue measure on ``[lo, hi]`` with ``n`` cells."""
    if not lo < hi:
        raise RkhsError("invalid-range", f"need lo < hi, got [{lo}, {hi}]")
    if int(n) != n or n < 1:
        raise RkhsError("invalid-count", f"need n >= 1, got {n}")
    n = int(n)
    h = (hi - lo) / n
    nodes = lo + (np.arange(n) + 0.5) * h
    return DiscreteMeasure(nodes.reshape(-1, 1), np.full(n, h))


def block_nodes(block: int, nodes_per_block: int) -> np.ndarray:
    """Node coordinates of block ``block``: midpoints inside ``[2b, 2b + 1)``."""
    return 2.0 * block + (np.arange(nodes_per_block) + 0.5) / nodes_per_block


def build_block_measure(block_masses: Sequence[float], nodes_per_block: int) -> DiscreteMeasure:
    """Disjoint blocks ``X_n = [2n, 2n + 1)`` carrying masses ``a_n``.

    Block ``n`` gets ``nodes_per_block`` nodes of weight ``a_n / nodes_per_block``.
    Blocks sit at distance 1 from one another so small probes never cross.
    """
    masses = np.asarray(block_masses, dtype=np.float64).reshape(-1)
    if masses.size == 0:
        raise RkhsError("invalid-mass", "need at least one block")
    if not np.all(np.isfinite(masses)) or np.any(masses <= 0):
        raise RkhsError("invalid-mass", "block masses must be > 0")
    if int(nodes_per_block) != nodes_per_block or nodes_per_block < 1:
        raise RkhsError("invalid-count", "nodes_per_block must be >= 1")
    m = int(nodes_per_block)
    nodes = np.concatenate([block_nodes(b, m) for b in range(masses.size)])
    weights = np.repeat(masses / m, m)
    labels = np.repeat(np.arange(masses.size), m)
    return DiscreteMeasure(nodes.reshape(-1, 1), weights, labels)


def lp_norm(values, mu: DiscreteMeasure, p: float) -> float:
    """Weighted ``L^p(mu)`` norm of node values; ``p = inf`` is the max modulus."""
    v = mu._values(values)
    if not p >= 1:
        raise RkhsError("invalid-p", f"need p >= 1, got {p}")
    a = np.abs(v)
    if np.isinf(p):
        return float(np.max(a))
    if p == 1:
        return float(np.sum(mu.weights * a))
    if p == 2:
        return float(np.sqrt(np.sum(mu.weights * a * a)))
    # scale by the max to avoid overflow for large p
    top = np.max(a)
    if top == 0:
        return 0.0
    return float(top * np.sum(mu.weights * (a / top) ** p) ** (1.0 / p))
