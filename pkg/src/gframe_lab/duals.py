"""Controlled continuous dual g-frames.

Families here act on raw stacked coefficients (blocks concatenated, no
weights) unless a name says ``weighted``; weighted coordinates scale block
``w`` by ``sqrt(mu_w)`` so that plain conjugate transposition is the
l2 adjoint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import linops
from .checks import AuditRecord, random_unit_vectors
from .controlled import Controller, controlled_bounds, controlled_synthesis_matrix
from .errors import (
    BesselPreconditionFailed,
    DimensionMismatch,
    KernelViolation,
    NotDual,
    NotLeftInverse,
    SingularFrameOperator,
    SpaceMismatch,
)
from .gframe import FRAME_FLOOR, GFrameFamily, frame_operator, standard_bases, check_orthonormal_basis
from .measure import DiscretizedMeasureSpace, delta_embedding

DUAL_TOL = 1e-8
KERNEL_TOL = 1e-10
DUAL_SAMPLES = 64
STRICT_TOL = 1e-10
ESTIMATE_SLACK = 1e-8


def _check_pair(family: GFrameFamily, other: GFrameFamily) -> None:
    if not family.space.same_as(other.space):
        raise SpaceMismatch("families live on different measure spaces")
    if family.ambient_dim != other.ambient_dim:
        raise SpaceMismatch("families have different ambient dimensions")


def _mu_rep(space: DiscretizedMeasureSpace) -> np.ndarray:
    return np.repeat(space.weights, space.block_dims)


def dual_frame_operator(family: GFrameFamily, gamma: GFrameFamily, P: Controller, Q: Controller) -> np.ndarray:
    """S_{P Lambda Gamma Q} = sum_w mu_w P Lambda_w^* Gamma_w Q."""
    _check_pair(family, gamma)
    n = family.ambient_dim
    acc = np.zeros((n, n), dtype=np.complex128)
    for mu, L, G in zip(family.space.weights, family.blocks, gamma.blocks):
        acc += mu * (P.matrix @ L.conj().T @ G @ Q.matrix)
    return acc


def synthesis_composition(family: GFrameFamily, gamma: GFrameFamily, P: Controller, Q: Controller) -> np.ndarray:
    """T_{P Lambda P} T*_{Q Gamma Q} assembled from weighted stacked matrices."""
    _check_pair(family, gamma)
    T_lam = controlled_synthesis_matrix(family, P, P)
    T_gam = controlled_synthesis_matrix(gamma, Q, Q)
    return T_lam @ T_gam.conj().T


@dataclass(frozen=True)
class DualCertificate:
    residual: float
    is_dual: bool
    condition_checks: tuple[float, float, float, float]
    lambda_min: float
    inferred_lower_bounds: tuple[float, float]
    samples: int
    seed: int
    tolerance: float = DUAL_TOL


def _pairing_matrix(family, gamma, P, Q, F) -> tuple[np.ndarray, np.ndarray]:
    """M1[j,k] = sum mu <Lambda P f_k, Gamma Q f_j>,  M2[j,k] = sum mu <Gamma Q f_k, Lambda P f_j>."""
    sw = family.space.stacked_sqrt_weights()[:, None]
    LP = sw * (family.stacked() @ P.matrix @ F.T)
    GQ = sw * (gamma.stacked() @ Q.matrix @ F.T)
    return GQ.conj().T @ LP, LP.conj().T @ GQ


def _controlled_upper(family: GFrameFamily, C: Controller) -> tuple[float, float]:
    lam = np.linalg.eigvalsh(linops.hermitian_part(C.matrix @ frame_operator(family) @ C.matrix))
    return float(lam[0]), float(lam[-1])


def check_duality(family: GFrameFamily, gamma: GFrameFamily, P: Controller, Q: Controller,
                  samples: int = DUAL_SAMPLES, seed: int = 0, tol: float = DUAL_TOL) -> DualCertificate:
    n = family.ambient_dim
    I = np.eye(n)
    S1 = dual_frame_operator(family, gamma, P, Q)
    S2 = dual_frame_operator(gamma, family, Q, P)
    c1 = linops.operator_norm(S1 - I)
    c2 = linops.operator_norm(S2 - I)
    F = random_unit_vectors(np.random.default_rng(seed), samples, n)
    gram = F.conj() @ F.T  # gram[j,k] = <f_k, f_j>
    M1, M2 = _pairing_matrix(family, gamma, P, Q, F)
    c3 = float(max(np.abs(gram - M1).max(), np.abs(gram - M2).max()))
    c4 = float(max(np.abs(1.0 - np.diag(M1)).max(), np.abs(1.0 - np.diag(M2)).max()))
    lam = linops.smallest_singular_value(S1)
    B_lam = _controlled_upper(family, P)[1]
    B_gam = _controlled_upper(gamma, Q)[1]
    inferred = (lam**2 / B_lam if B_lam > 0 else 0.0, lam**2 / B_gam if B_gam > 0 else 0.0)
    return DualCertificate(c1, c1 <= tol, (c1, c2, c3, c4), lam, inferred, samples, seed, tol)


@dataclass
class ReconstructionAudit:
    certificate: DualCertificate
    condition_verdicts: tuple[bool, bool, bool, bool]
    unanimous: bool
    polarization_identity_residual: float
    polarization_reconstruction_residual: float
    record: AuditRecord


def _require_bessel(family: GFrameFamily, C: Controller, label: str) -> float:
    lo, hi = _controlled_upper(family, C)
    if not math.isfinite(hi) or hi <= FRAME_FLOOR:
        raise BesselPreconditionFailed(f"{label} has no usable controlled Bessel bound (upper = {hi:.3e})")
    return hi


def reconstruction_equivalence_audit(family: GFrameFamily, gamma: GFrameFamily, P: Controller, Q: Controller,
                                     samples: int = DUAL_SAMPLES, seed: int = 0,
                                     tol: float = DUAL_TOL) -> ReconstructionAudit:
    """The four reconstruction conditions must pass or fail together.

    Also rebuilds <f, g> from the diagonal form h -> sum mu <Lambda P h, Gamma Q h>
    by polarization over f +- g and f +- ig.
    """
    _check_pair(family, gamma)
    _require_bessel(family, P, "Lambda")
    _require_bessel(gamma, Q, "Gamma")
    cert = check_duality(family, gamma, P, Q, samples, seed, tol)
    verdicts = tuple(c <= tol for c in cert.condition_checks)
    unanimous = all(verdicts) or not any(verdicts)

    rng = np.random.default_rng(seed + 1)
    F = random_unit_vectors(rng, samples, family.ambient_dim)
    G = random_unit_vectors(rng, samples, family.ambient_dim)
    sw = family.space.stacked_sqrt_weights()[:, None]
    LPm = sw * (family.stacked() @ P.matrix)
    GQm = sw * (gamma.stacked() @ Q.matrix)

    def diag_form(H):
        # sum_w mu_w <Lambda_w P h, Gamma_w Q h> for each row h
        return np.einsum("ik,ik->k", (GQm @ H.T).conj(), LPm @ H.T)

    pol = 0.25 * (diag_form(F + G) - diag_form(F - G) + 1j * diag_form(F + 1j * G) - 1j * diag_form(F - 1j * G))
    direct = np.einsum("ik,ik->k", (GQm @ G.T).conj(), LPm @ F.T)
    inner = np.einsum("kj,kj->k", G.conj(), F)
    pid = float(np.abs(pol - direct).max())
    prec = float(np.abs(pol - inner).max())

    rec = AuditRecord("3.4", seed=seed)
    for k, c in enumerate(cert.condition_checks, start=1):
        rec.add(f"condition_{k}_residual", c, tol, applicable=False)
    rec.add("verdict_disagreement", 0.0 if unanimous else 1.0, 0.0)
    rec.add("polarization_identity_residual", pid, STRICT_TOL)
    rec.add("polarization_reconstruction_residual", prec, tol, applicable=cert.is_dual)
    rec.verdicts.update({f"condition_{k}": v for k, v in enumerate(verdicts, start=1)})
    rec.verdicts["is_dual"] = cert.is_dual
    return ReconstructionAudit(cert, verdicts, unanimous, pid, prec, rec)


@dataclass(frozen=True)
class LowerBoundInference:
    lam: float
    B_lambda: float
    B_gamma: float
    gamma_lower: float
    lambda_lower: float
    inferred_gamma_lower: float
    inferred_lambda_lower: float
    vacuous: bool

    @property
    def gamma_slack(self) -> float:
        return self.gamma_lower - self.inferred_gamma_lower

    @property
    def lambda_slack(self) -> float:
        return self.lambda_lower - self.inferred_lambda_lower


def lower_bound_inference(family: GFrameFamily, gamma: GFrameFamily, P: Controller, Q: Controller) -> LowerBoundInference:
    """Lower frame bounds implied by a bounded-below dual frame operator.

    With ``lam = sigma_min(S_{P Lambda Gamma Q})``, Gamma's (Q,Q) lower bound
    is at least ``lam^2 / B_Lambda`` and Lambda's (P,P) lower bound at least
    ``lam^2 / B_Gamma``.
    """
    _check_pair(family, gamma)
    B_lam = _require_bessel(family, P, "Lambda")
    B_gam = _require_bessel(gamma, Q, "Gamma")
    lam = linops.smallest_singular_value(dual_frame_operator(family, gamma, P, Q))
    gam_lo = _controlled_upper(gamma, Q)[0]
    lam_lo = _controlled_upper(family, P)[0]
    return LowerBoundInference(lam, B_lam, B_gam, gam_lo, lam_lo, lam**2 / B_lam, lam**2 / B_gam,
                               vacuous=lam <= FRAME_FLOOR)


@dataclass(frozen=True, eq=False)
class KernelOperator:
    """A map H -> l2({H_w}) stored as a raw ``(sum d_w) x n`` matrix; rows of block w give (Tf)_w."""

    space: DiscretizedMeasureSpace
    matrix: np.ndarray

    def __post_init__(self):
        M = linops.as_matrix(self.matrix)
        if M.shape[0] != self.space.total_dim:
            raise DimensionMismatch(f"kernel operator has {M.shape[0]} rows, expected {self.space.total_dim}")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @classmethod
    def zero(cls, space: DiscretizedMeasureSpace, n: int) -> "KernelOperator":
        return cls(space, np.zeros((space.total_dim, n)))

    def blocks(self) -> tuple[np.ndarray, ...]:
        off = self.space.offsets()
        return tuple(self.matrix[off[k]:off[k + 1]] for k in range(len(self.space)))

    def l2_norm(self) -> float:
        """Operator norm from H into the weighted coefficient space."""
        return linops.operator_norm(self.space.stacked_sqrt_weights()[:, None] * self.matrix)


def _raw_synthesis(family: GFrameFamily, P: Controller) -> np.ndarray:
    """T_{P Lambda P} acting on raw stacked coefficients: [mu_w P Lambda_w^*]_w."""
    return P.matrix @ (family.stacked().conj().T * _mu_rep(family.space))


def kernel_residual(family: GFrameFamily, P: Controller, T: KernelOperator) -> float:
    """||T_{P Lambda P} T||."""
    return linops.operator_norm(_raw_synthesis(family, P) @ T.matrix)


def kernel_sampler(family: GFrameFamily, P: Controller, seed: int, scale: float = 1.0) -> KernelOperator:
    """Random T with T_{P Lambda P} T = 0, by projecting a Gaussian map onto the kernel."""
    syn = _raw_synthesis(family, P)
    D, n = family.space.total_dim, family.ambient_dim
    rng = np.random.default_rng(seed)
    K = scale * (rng.standard_normal((D, n)) + 1j * rng.standard_normal((D, n))) / math.sqrt(2.0)
    proj = np.eye(D) - linops.pseudo_inverse(syn) @ syn
    return KernelOperator(family.space, proj @ K)


def _invertible_frame_operator(family: GFrameFamily) -> np.ndarray:
    S = frame_operator(family)
    lo = np.linalg.eigvalsh(S)[0]
    if lo <= FRAME_FLOOR:
        raise SingularFrameOperator(f"frame operator has minimum eigenvalue {lo:.3e}")
    return S


def canonical_part(family: GFrameFamily, P: Controller, mode: str = "general") -> np.ndarray:
    """The n x n matrix C with canonical dual blocks Lambda_w C.

    ``paper``: C = S_{P Lambda P}^{-1} P.  ``general``: C = S_Lambda^{-1} P^{-1}.
    The two agree when P commutes with S_Lambda.
    """
    S = _invertible_frame_operator(family)
    if mode == "paper":
        return linops.psd_function(P.matrix @ S @ P.matrix, "inv") @ P.matrix
    if mode == "general":
        return linops.psd_function(S, "inv") @ P.inv
    raise ValueError(f"unknown canonical dual mode {mode!r}")


@dataclass(frozen=True)
class DualConstruction:
    gamma: GFrameFamily
    certificate: DualCertificate
    mode: str
    kernel: KernelOperator


def canonical_dual(family: GFrameFamily, P: Controller, mode: str = "general", Q: Controller | None = None,
                   samples: int = DUAL_SAMPLES, seed: int = 0) -> DualConstruction:
    """Canonical P-controlled dual, or a (P, Q)-dual when ``Q`` is given (right factor Q^-1)."""
    Q = Q if Q is not None else Controller.identity(family.ambient_dim)
    C = canonical_part(family, P, mode)
    if not Q.is_identity():
        C = C @ Q.inv
    gamma = family.right_multiply(C)
    cert = check_duality(family, gamma, P, Q, samples, seed)
    return DualConstruction(gamma, cert, mode, KernelOperator.zero(family.space, family.ambient_dim))


def dual_parametrization(family: GFrameFamily, P: Controller, T: KernelOperator, mode: str = "general",
                         samples: int = DUAL_SAMPLES, seed: int = 0) -> DualConstruction:
    """Gamma_w = (T .)_w + Lambda_w C with C the canonical part; certified as a P-controlled dual."""
    if not T.space.same_as(family.space) or T.matrix.shape[1] != family.ambient_dim:
        raise SpaceMismatch("kernel operator does not match the family")
    res = kernel_residual(family, P, T)
    scale = max(1.0, linops.operator_norm(_raw_synthesis(family, P)) * linops.operator_norm(T.matrix))
    if res > KERNEL_TOL * scale:
        raise KernelViolation(f"||T_(P Lambda P) T|| = {res:.3e} exceeds {KERNEL_TOL:.0e}")
    C = canonical_part(family, P, mode)
    gamma = GFrameFamily(family.space, family.ambient_dim,
                         tuple(Tw + L @ C for Tw, L in zip(T.blocks(), family.blocks)))
    I = Controller.identity(family.ambient_dim)
    return DualConstruction(gamma, check_duality(family, gamma, P, I, samples, seed), mode, T)


def extract_kernel(family: GFrameFamily, gamma: GFrameFamily, P: Controller, mode: str = "general") -> KernelOperator:
    """T with (Tf)_w = Gamma_w f - Lambda_w C f, the converse direction of the parametrization."""
    _check_pair(family, gamma)
    C = canonical_part(family, P, mode)
    return KernelOperator(family.space, gamma.stacked() - family.stacked() @ C)


@dataclass(frozen=True)
class ParametrizationEstimates:
    kernel_norm_sq: float
    kernel_norm_bound: float  # B1 + 1/A + 2 sqrt(B1/A)
    gamma_bessel: float
    gamma_bessel_bound: float  # 2 (B ||S_{P Lambda P}^-1 P||^2 + ||T||^2)


def parametrization_estimates(family: GFrameFamily, gamma: GFrameFamily, P: Controller,
                              T: KernelOperator) -> ParametrizationEstimates:
    """Evaluate both norm estimates from the parametrization argument.

    ``B1`` is Gamma's plain upper bound, ``A`` Lambda's optimal (P,P)-controlled
    lower bound and ``B`` Lambda's plain upper bound.
    """
    S = _invertible_frame_operator(family)
    B = float(np.linalg.eigvalsh(S)[-1])
    A = _controlled_upper(family, P)[0]
    B1 = float(np.linalg.eigvalsh(frame_operator(gamma))[-1])
    t2 = T.l2_norm() ** 2
    spp_inv_p = linops.psd_function(P.matrix @ S @ P.matrix, "inv") @ P.matrix
    return ParametrizationEstimates(
        kernel_norm_sq=t2,
        kernel_norm_bound=B1 + 1.0 / A + 2.0 * math.sqrt(B1 / A),
        gamma_bessel=B1,
        gamma_bessel_bound=2.0 * (B * linops.operator_norm(spp_inv_p) ** 2 + t2),
    )


def parametrization_audit(family: GFrameFamily, P: Controller, mode: str = "general",
                          kernel_seeds=(0,), tol: float = DUAL_TOL) -> AuditRecord:
    """Build duals for several kernel operators and check every claim of the parametrization.

    Kernel seed 0 means T = 0 (the canonical dual).
    """
    rec = AuditRecord("3.7", seed=int(kernel_seeds[0]) if len(kernel_seeds) else None)
    S = _invertible_frame_operator(family)
    rec.add("commutator_PS", linops.commutator_norm(P.matrix, S), DUAL_TOL, applicable=False,
            note="paper-mode canonical part reconstructs only when P and S commute")
    worst = {"residual": 0.0, "kernel": 0.0, "roundtrip": 0.0, "tnorm": math.inf, "bessel": math.inf}
    for ks in kernel_seeds:
        T = KernelOperator.zero(family.space, family.ambient_dim) if ks == 0 else kernel_sampler(family, P, ks)
        built = dual_parametrization(family, P, T, mode)
        back = extract_kernel(family, built.gamma, P, mode)
        est = parametrization_estimates(family, built.gamma, P, T)
        worst["residual"] = max(worst["residual"], built.certificate.residual)
        worst["kernel"] = max(worst["kernel"], kernel_residual(family, P, T))
        worst["roundtrip"] = max(worst["roundtrip"], float(np.abs(back.matrix - T.matrix).max()))
        worst["tnorm"] = min(worst["tnorm"], est.kernel_norm_bound - est.kernel_norm_sq)
        worst["bessel"] = min(worst["bessel"], est.gamma_bessel_bound - est.gamma_bessel)
    rec.add("max_dual_residual", worst["residual"], tol)
    rec.add("max_kernel_residual", worst["kernel"], KERNEL_TOL)
    rec.add("max_extraction_error", worst["roundtrip"], STRICT_TOL)
    rec.add("min_kernel_norm_slack", worst["tnorm"], -ESTIMATE_SLACK, kind="ge",
            applicable=mode == "general")
    rec.add("min_bessel_bound_slack", worst["bessel"], -ESTIMATE_SLACK, kind="ge")
    rec.verdicts["all_dual"] = worst["residual"] <= tol
    return rec


@dataclass(frozen=True)
class LeftInverseResult:
    U: np.ndarray  # n x (sum d_w), acting on raw stacked coefficients
    gamma: GFrameFamily
    left_inverse_residual: float
    basis_residual: float
    certificate: DualCertificate


def _raw_analysis(family: GFrameFamily, P: Controller) -> np.ndarray:
    """T*_{P Lambda P} into raw stacked coefficients: rows Lambda_w P."""
    return family.stacked() @ P.matrix


def pinv_left_inverse(family: GFrameFamily, P: Controller) -> np.ndarray:
    """Left-inverse of the analysis operator from its l2 pseudo-inverse, returned in raw coordinates."""
    sw = family.space.stacked_sqrt_weights()
    weighted = sw[:, None] * _raw_analysis(family, P)
    return linops.pseudo_inverse(weighted) * sw[None, :]


def _basis_identity_residual(gamma: GFrameFamily, Q: Controller, U: np.ndarray, bases) -> float:
    space = gamma.space
    worst = 0.0
    for node, G, E in zip(space.nodes, gamma.blocks, bases):
        E = check_orthonormal_basis(E)
        for v in range(E.shape[1]):
            lhs = Q.matrix @ G.conj().T @ E[:, v]
            rhs = U @ delta_embedding(space, node, E[:, v]).stacked()
            worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return worst


def left_inverse_characterization(family: GFrameFamily, P: Controller, Q: Controller, gamma_or_U,
                                  direction: str, bases=None, tol: float = DUAL_TOL) -> LeftInverseResult:
    """Move between (P,Q)-duals and bounded left-inverses of T*_{P Lambda P}.

    ``dual_to_U`` takes a dual family and returns U = T_{Q Gamma Q}.
    ``U_to_dual`` takes U (raw coordinates) and defines Gamma_w^* = Q^-1 U(delta_w .).
    """
    bases = standard_bases(family.space) if bases is None else bases
    analysis_raw = _raw_analysis(family, P)
    I = np.eye(family.ambient_dim)
    if direction == "dual_to_U":
        gamma = gamma_or_U
        _check_pair(family, gamma)
        cert = check_duality(family, gamma, P, Q, tol=tol)
        if not cert.is_dual:
            raise NotDual(f"Gamma is not a (P,Q)-dual: residual {cert.residual:.3e}")
        U = Q.matrix @ (gamma.stacked().conj().T * _mu_rep(family.space))
    elif direction == "U_to_dual":
        U = linops.as_matrix(gamma_or_U)
        if U.shape != (family.ambient_dim, family.space.total_dim):
            raise DimensionMismatch(f"U has shape {U.shape}")
        left = linops.operator_norm(U @ analysis_raw - I)
        if left > tol:
            raise NotLeftInverse(f"||U T* - I|| = {left:.3e}")
        off = family.space.offsets()
        blocks = []
        for k, mu in enumerate(family.space.weights):
            cols = Q.inv @ U[:, off[k]:off[k + 1]] / mu  # Gamma_w^* applied to the standard basis
            blocks.append(cols.conj().T)
        gamma = GFrameFamily(family.space, family.ambient_dim, tuple(blocks))
        cert = check_duality(family, gamma, P, Q, tol=tol)
        if not cert.is_dual:
            raise NotDual(f"constructed Gamma fails duality: residual {cert.residual:.3e}")
    else:
        raise ValueError(f"unknown direction {direction!r}")
    left = linops.operator_norm(U @ analysis_raw - I)
    if left > tol:
        raise NotLeftInverse(f"||U T* - I|| = {left:.3e}")
    return LeftInverseResult(U, gamma, left, _basis_identity_residual(gamma, Q, U, bases), cert)


@dataclass(frozen=True)
class BesselNormCheck:
    optimal_upper: float
    synthesis_norm_sq: float
    relative_gap: float


def bessel_norm_check(family: GFrameFamily, P: Controller, Q: Controller) -> BesselNormCheck:
    """Optimal (P,Q)-controlled Bessel bound against ||T_{P Lambda Q}||^2 (needs PQ = QP)."""
    T = controlled_synthesis_matrix(family, P, Q)
    t2 = linops.operator_norm(T) ** 2
    B = controlled_bounds(family, P, Q).controlled_upper
    return BesselNormCheck(B, t2, abs(B - t2) / max(abs(B), abs(t2), 1e-300))
