"""Continuous g-frames on a discretized measure space.

A family ``{Lambda_w}`` is stored as one ``d_w x n`` block per node.  The
stacked matrix with rows ``sqrt(mu_w) Lambda_w`` is the analysis operator
in l2 coordinates, so the frame operator is its Gram matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linops
from .errors import DimensionMismatch, NotOrthonormal, SpaceMismatch
from .measure import CoefficientFamily, DiscretizedMeasureSpace

FRAME_FLOOR = 1e-10
TIGHT_TOL = 1e-9
ORTH_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class GFrameFamily:
    space: DiscretizedMeasureSpace
    ambient_dim: int
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        n = int(self.ambient_dim)
        if n < 1:
            raise ValueError("ambient dimension must be positive")
        if len(self.blocks) != len(self.space):
            raise DimensionMismatch(f"expected {len(self.space)} blocks, got {len(self.blocks)}")
        frozen = []
        for k, (b, d) in enumerate(zip(self.blocks, self.space.block_dims)):
            B = np.array(b, dtype=np.complex128, ndmin=2)
            if B.shape != (d, n):
                raise DimensionMismatch(f"block {k} has shape {B.shape}, expected {(d, n)}")
            if not np.all(np.isfinite(B)):
                raise ValueError(f"block {k} has non-finite entries")
            B.setflags(write=False)
            frozen.append(B)
        object.__setattr__(self, "ambient_dim", n)
        object.__setattr__(self, "blocks", tuple(frozen))

    @classmethod
    def from_stacked(cls, space: DiscretizedMeasureSpace, M) -> "GFrameFamily":
        """Split a raw ``(sum d_w) x n`` matrix into per-node blocks."""
        M = linops.as_matrix(M)
        if M.shape[0] != space.total_dim:
            raise DimensionMismatch(f"stacked matrix has {M.shape[0]} rows, expected {space.total_dim}")
        off = space.offsets()
        return cls(space, M.shape[1], tuple(M[off[k]:off[k + 1]] for k in range(len(space))))

    def stacked(self) -> np.ndarray:
        """Raw blocks on top of each other, no weights."""
        return np.vstack(self.blocks)

    def weighted_stacked(self) -> np.ndarray:
        """Analysis operator in l2 coordinates: rows of block w scaled by sqrt(mu_w)."""
        return self.stacked() * self.space.stacked_sqrt_weights()[:, None]

    def map_blocks(self, fn) -> "GFrameFamily":
        return GFrameFamily(self.space, self.ambient_dim, tuple(fn(B) for B in self.blocks))

    def right_multiply(self, M) -> "GFrameFamily":
        """The family ``{Lambda_w M}``."""
        M = linops.as_matrix(M)
        return self.map_blocks(lambda B: B @ M)

    def __eq__(self, other):
        if not isinstance(other, GFrameFamily):
            return NotImplemented
        return (
            self.space == other.space
            and self.ambient_dim == other.ambient_dim
            and all(np.array_equal(a, b) for a, b in zip(self.blocks, other.blocks))
        )

    __hash__ = None


@dataclass(frozen=True)
class FrameReport:
    lower_bound: float
    upper_bound: float
    verdict: str  # "frame" | "bessel_only" | "not_bessel_degenerate"
    tight: bool
    parseval: bool
    hermitian_defect: float
    notes: tuple[str, ...] = field(default=())


def _check_vector(f, n: int) -> np.ndarray:
    f = np.asarray(f, dtype=np.complex128).reshape(-1)
    if f.shape[0] != n:
        raise DimensionMismatch(f"vector of length {f.shape[0]}, ambient dimension is {n}")
    return f


def _check_compatible(a: GFrameFamily, b: GFrameFamily) -> None:
    if not a.space.same_as(b.space):
        raise SpaceMismatch("families live on different measure spaces")
    if a.ambient_dim != b.ambient_dim:
        raise SpaceMismatch(f"ambient dimensions differ: {a.ambient_dim} vs {b.ambient_dim}")


def analysis(family: GFrameFamily, f) -> CoefficientFamily:
    f = _check_vector(f, family.ambient_dim)
    return CoefficientFamily(family.space, tuple(B @ f for B in family.blocks))


def synthesis(family: GFrameFamily, c: CoefficientFamily) -> np.ndarray:
    """sum_w mu_w Lambda_w^* c_w."""
    if not family.space.same_as(c.space):
        raise SpaceMismatch("coefficient family lives on a different measure space")
    out = np.zeros(family.ambient_dim, dtype=np.complex128)
    for mu, B, cw in zip(family.space.weights, family.blocks, c.blocks):
        out += mu * (B.conj().T @ cw)
    return out


def mixed_frame_operator(family: GFrameFamily, other: GFrameFamily) -> np.ndarray:
    """sum_w mu_w Lambda_w^* Gamma_w; not Hermitian in general."""
    _check_compatible(family, other)
    if family.space.block_dims != other.space.block_dims:
        raise SpaceMismatch("block dimensions differ")
    n = family.ambient_dim
    S = np.zeros((n, n), dtype=np.complex128)
    for mu, L, G in zip(family.space.weights, family.blocks, other.blocks):
        S += mu * (L.conj().T @ G)
    return S


def frame_operator(family: GFrameFamily) -> np.ndarray:
    A = family.weighted_stacked()
    return A.conj().T @ A


def quadratic_form(family: GFrameFamily, f) -> float:
    """sum_w mu_w ||Lambda_w f||^2, evaluated blockwise."""
    f = _check_vector(f, family.ambient_dim)
    return float(sum(mu * np.vdot(B @ f, B @ f).real for mu, B in zip(family.space.weights, family.blocks)))


def bounds_from_operator(M) -> tuple[float, float, float]:
    """Extremal eigenvalues of the Hermitian part of ``M`` and the defect ``||M - M*||``."""
    lo, hi = linops.extremal_eigenvalues(M)
    return lo, hi, linops.hermitian_defect(M)


def classify(lower: float, upper: float) -> str:
    if lower > FRAME_FLOOR:
        return "frame"
    if upper > FRAME_FLOOR:
        return "bessel_only"
    return "not_bessel_degenerate"


def _report(lower: float, upper: float, defect: float, notes=()) -> FrameReport:
    verdict = classify(lower, upper)
    scale = max(abs(upper), 1.0)
    tight = verdict == "frame" and abs(upper - lower) <= TIGHT_TOL * scale
    parseval = tight and abs(lower - 1.0) <= TIGHT_TOL and abs(upper - 1.0) <= TIGHT_TOL
    return FrameReport(lower, upper, verdict, tight, parseval, defect, tuple(notes))


def frame_bounds(family: GFrameFamily) -> FrameReport:
    """Optimal frame bounds: the extremal eigenvalues of the frame operator."""
    lo, hi, defect = bounds_from_operator(frame_operator(family))
    return _report(lo, hi, defect, ["strong measurability holds vacuously on a finite node set"])


def vector_family_bounds(vectors: np.ndarray, weights: np.ndarray) -> FrameReport:
    """Frame bounds of an ordinary vector family ``{u_k}`` with weights ``mu_k``."""
    U = np.asarray(vectors, dtype=np.complex128)
    W = U * np.sqrt(np.asarray(weights, dtype=np.float64))[:, None]
    lo, hi, defect = bounds_from_operator(W.T @ W.conj())
    return _report(lo, hi, defect)


def check_orthonormal_basis(E, tol: float = ORTH_TOL) -> np.ndarray:
    """Columns of ``E`` must form an orthonormal basis of C^d."""
    E = linops.as_matrix(E)
    d = E.shape[0]
    if E.shape != (d, d):
        raise NotOrthonormal(f"basis matrix has shape {E.shape}; need {d} columns")
    err = linops.operator_norm(E.conj().T @ E - np.eye(d))
    if err > tol:
        raise NotOrthonormal(f"basis fails orthonormality by {err:.3e}")
    return E


@dataclass(frozen=True)
class InducedSequence:
    """Vectors ``u_{w,v} = Lambda_w^* e_{w,v}`` in row form with product weights ``mu_w * 1``."""

    vectors: np.ndarray  # (K, n)
    weights: np.ndarray  # (K,)
    labels: tuple[tuple[int, int], ...]  # (node, v) per row


def standard_bases(space: DiscretizedMeasureSpace) -> list[np.ndarray]:
    return [np.eye(d, dtype=np.complex128) for d in space.block_dims]


def induced_sequence(family: GFrameFamily, bases=None) -> InducedSequence:
    """Induced vector family for per-node orthonormal bases (columns of ``bases[k]``).

    The inner index uses counting measure, so ``u_{w,v}`` carries weight ``mu_w``.
    """
    if bases is None:
        bases = standard_bases(family.space)
    if len(bases) != len(family.space):
        raise DimensionMismatch("need one basis per node")
    rows, weights, labels = [], [], []
    for node, mu, B, E in zip(family.space.nodes, family.space.weights, family.blocks, bases):
        E = check_orthonormal_basis(E)
        if E.shape[0] != B.shape[0]:
            raise DimensionMismatch(f"basis at node {node} has dim {E.shape[0]}, block has {B.shape[0]}")
        U = B.conj().T @ E  # columns are u_{w,v}
        for v in range(E.shape[1]):
            rows.append(U[:, v])
            weights.append(mu)
            labels.append((node, v))
    return InducedSequence(np.array(rows), np.array(weights), tuple(labels))
