"""Finitely supported measure spaces and the weighted coefficient space.

A :class:`DiscretizedMeasureSpace` replaces ``(Omega, mu)`` by quadrature
nodes with positive weights.  Each node carries the dimension of its block
space ``H_w``.  A :class:`CoefficientFamily` is one vector per node with the
inner product ``sum_w mu_w <x_w, y_w>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadInterval, DimensionMismatch, SpaceMismatch, UnknownNode


@dataclass(frozen=True, eq=False)
class DiscretizedMeasureSpace:
    weights: np.ndarray
    block_dims: tuple[int, ...]
    nodes: tuple[int, ...] = ()
    # Optional positions recorded by interval builders; never used by the theory.
    coordinates: np.ndarray | None = None

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64).reshape(-1)
        dims = tuple(int(d) for d in self.block_dims)
        nodes = tuple(int(k) for k in self.nodes) if len(self.nodes) else tuple(range(len(w)))
        if len(w) < 1:
            raise ValueError("a measure space needs at least one node")
        if not (len(w) == len(dims) == len(nodes)):
            raise DimensionMismatch(
                f"nodes ({len(nodes)}), weights ({len(w)}) and block_dims ({len(dims)}) differ in length"
            )
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("every weight must be strictly positive and finite")
        if any(d < 1 for d in dims):
            raise ValueError("block dimensions must be positive")
        if len(set(nodes)) != len(nodes):
            raise ValueError("node identifiers must be distinct")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "block_dims", dims)
        object.__setattr__(self, "nodes", nodes)
        if self.coordinates is not None:
            c = np.array(self.coordinates, dtype=np.float64).reshape(-1)
            if len(c) != len(w):
                raise DimensionMismatch("coordinates must have one entry per node")
            c.setflags(write=False)
            object.__setattr__(self, "coordinates", c)

    def __len__(self) -> int:
        return len(self.weights)

    @property
    def total_dim(self) -> int:
        """Dimension of the stacked coefficient space, sum of d_w."""
        return sum(self.block_dims)

    @property
    def total_mass(self) -> float:
        return math.fsum(self.weights)

    def offsets(self) -> np.ndarray:
        """Start row of each node's block in stacked coordinates (length |Omega| + 1)."""
        return np.concatenate([[0], np.cumsum(self.block_dims)]).astype(int)

    def index(self, node: int) -> int:
        try:
            return self.nodes.index(int(node))
        except ValueError:
            raise UnknownNode(node) from None

    def stacked_sqrt_weights(self) -> np.ndarray:
        """sqrt(mu_w) repeated d_w times; turns raw stacked coefficients into l2 coordinates."""
        return np.repeat(np.sqrt(self.weights), self.block_dims)

    def same_as(self, other: "DiscretizedMeasureSpace") -> bool:
        if self is other:
            return True
        return (
            self.block_dims == other.block_dims
            and self.nodes == other.nodes
            and np.array_equal(self.weights, other.weights)
        )

    def __eq__(self, other):
        if not isinstance(other, DiscretizedMeasureSpace):
            return NotImplemented
        if not self.same_as(other):
            return False
        if (self.coordinates is None) != (other.coordinates is None):
            return False
        return self.coordinates is None or np.array_equal(self.coordinates, other.coordinates)

    __hash__ = None


def _check_same_space(a: DiscretizedMeasureSpace, b: DiscretizedMeasureSpace) -> None:
    if not a.same_as(b):
        raise SpaceMismatch("objects live on different measure spaces")


@dataclass(frozen=True, eq=False)
class CoefficientFamily:
    """An element of l2({H_w}): one complex block per node."""

    space: DiscretizedMeasureSpace
    blocks: tuple[np.ndarray, ...] = field(default=())

    def __post_init__(self):
        if len(self.blocks) != len(self.space):
            raise DimensionMismatch(f"expected {len(self.space)} blocks, got {len(self.blocks)}")
        frozen = []
        for k, (b, d) in enumerate(zip(self.blocks, self.space.block_dims)):
            v = np.array(b, dtype=np.complex128).reshape(-1)
            if v.shape[0] != d:
                raise DimensionMismatch(f"block {k} has length {v.shape[0]}, expected {d}")
            if not np.all(np.isfinite(v)):
                raise ValueError(f"block {k} has non-finite entries")
            v.setflags(write=False)
            frozen.append(v)
        object.__setattr__(self, "blocks", tuple(frozen))

    @classmethod
    def zeros(cls, space: DiscretizedMeasureSpace) -> "CoefficientFamily":
        return cls(space, tuple(np.zeros(d, dtype=np.complex128) for d in space.block_dims))

    @classmethod
    def from_stacked(cls, space: DiscretizedMeasureSpace, x) -> "CoefficientFamily":
        """Split a raw stacked vector (blocks concatenated, no weighting) into blocks."""
        x = np.asarray(x, dtype=np.complex128).reshape(-1)
        if x.shape[0] != space.total_dim:
            raise DimensionMismatch(f"stacked vector has length {x.shape[0]}, expected {space.total_dim}")
        off = space.offsets()
        return cls(space, tuple(x[off[k]:off[k + 1]] for k in range(len(space))))

    def stacked(self) -> np.ndarray:
        return np.concatenate(self.blocks)

    def weighted_stacked(self) -> np.ndarray:
        """l2 coordinates: block w scaled by sqrt(mu_w), so the Euclidean inner product is the weighted one."""
        return self.stacked() * self.space.stacked_sqrt_weights()

    def norm(self) -> float:
        return math.sqrt(max(weighted_inner_product(self, self).real, 0.0))

    def __add__(self, other: "CoefficientFamily") -> "CoefficientFamily":
        _check_same_space(self.space, other.space)
        return CoefficientFamily(self.space, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other: "CoefficientFamily") -> "CoefficientFamily":
        _check_same_space(self.space, other.space)
        return CoefficientFamily(self.space, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def scale(self, c: complex) -> "CoefficientFamily":
        return CoefficientFamily(self.space, tuple(c * b for b in self.blocks))


def weighted_inner_product(x: CoefficientFamily, y: CoefficientFamily) -> complex:
    """sum_w mu_w <x_w, y_w>, linear in ``x`` and conjugate-linear in ``y``."""
    _check_same_space(x.space, y.space)
    return complex(sum(mu * np.vdot(yb, xb) for mu, xb, yb in zip(x.space.weights, x.blocks, y.blocks)))


def delta_embedding(space: DiscretizedMeasureSpace, node: int, v) -> CoefficientFamily:
    """Point mass at ``node`` carrying ``v``: block ``v / mu_w`` there, zero elsewhere.

    The ``1/mu_w`` factor makes ``sum_w mu_w g_w delta_w`` reproduce ``g``
    exactly, so the family acts as unit mass at ``node``.
    """
    k = space.index(node)
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if v.shape[0] != space.block_dims[k]:
        raise DimensionMismatch(f"vector of length {v.shape[0]} does not fit block of dim {space.block_dims[k]}")
    blocks = [np.zeros(d, dtype=np.complex128) for d in space.block_dims]
    blocks[k] = v / space.weights[k]
    return CoefficientFamily(space, tuple(blocks))


def uniform_interval_space(a: float, b: float, N: int, d: int = 1) -> DiscretizedMeasureSpace:
    """Midpoint rule on [a, b] with ``N`` equal cells and block dimension ``d`` at every node."""
    if not (np.isfinite(a) and np.isfinite(b)) or not a < b:
        raise BadInterval(f"need finite a < b, got a={a}, b={b}")
    if N < 1:
        raise BadInterval(f"need at least one node, got N={N}")
    h = (b - a) / N
    coords = a + h * (np.arange(N) + 0.5)
    return DiscretizedMeasureSpace(
        weights=np.full(N, h),
        block_dims=(d,) * N,
        nodes=tuple(range(N)),
        coordinates=coords,
    )
