"""(P, Q)-controlled continuous g-frames.

Controllers are positive definite matrices with cached square roots and
inverses.  The controlled frame operator is ``Q S P``; because ``Q S P`` is
Hermitian only when the three operators commute suitably, bounds are read
from its Hermitian part and the defect is reported next to them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linops
from .checks import AuditRecord, random_unit_vectors, relative_gap
from .errors import BadControllers, DimensionMismatch, NonCommutingControllers, SpaceMismatch
from .gframe import (
    FRAME_FLOOR,
    FrameReport,
    GFrameFamily,
    bounds_from_operator,
    frame_bounds,
    frame_operator,
    induced_sequence,
)
from .measure import CoefficientFamily

COMMUTE_TOL = 1e-8
DEFECT_TOL = 1e-10
IDENTITY_TOL = 1e-10
INDUCED_TOL = 1e-12
BRACKET_SLACK = 1e-10


@dataclass(frozen=True, eq=False)
class Controller:
    """An element of GL+(H): Hermitian with minimum eigenvalue above the PSD floor."""

    matrix: np.ndarray
    sqrt: np.ndarray = field(init=False, repr=False)
    inv: np.ndarray = field(init=False, repr=False)
    spectral_bounds: tuple[float, float] = field(init=False)

    def __post_init__(self):
        M = linops.as_matrix(self.matrix)
        try:
            lam, V = linops.hermitian_eigendecomposition(M)
        except (linops.NotHermitian, linops.NotSquare) as exc:
            raise BadControllers(f"controller is not Hermitian: {exc}") from exc
        if lam[0] < linops.PSD_FLOOR:
            raise BadControllers(f"controller minimum eigenvalue {lam[0]:.3e} is below {linops.PSD_FLOOR:.0e}")
        M.setflags(write=False)
        sq = (V * np.sqrt(lam)) @ V.conj().T
        inv = (V / lam) @ V.conj().T
        sq.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "matrix", M)
        object.__setattr__(self, "sqrt", sq)
        object.__setattr__(self, "inv", inv)
        object.__setattr__(self, "spectral_bounds", (float(lam[0]), float(lam[-1])))

    @classmethod
    def identity(cls, n: int) -> "Controller":
        return cls(np.eye(n))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def norm(self) -> float:
        return self.spectral_bounds[1]

    def is_identity(self) -> bool:
        return np.array_equal(self.matrix, np.eye(self.dim))

    def __eq__(self, other):
        if not isinstance(other, Controller):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix)

    __hash__ = None


def _check_controllers(family: GFrameFamily, *controllers: Controller) -> None:
    for C in controllers:
        if C.dim != family.ambient_dim:
            raise DimensionMismatch(f"controller of dim {C.dim} on ambient dim {family.ambient_dim}")


def _vec(f, n: int) -> np.ndarray:
    f = np.asarray(f, dtype=np.complex128).reshape(-1)
    if f.shape[0] != n:
        raise DimensionMismatch(f"vector of length {f.shape[0]}, ambient dimension is {n}")
    return f


def controllers_commute(P: Controller, Q: Controller, tol: float = COMMUTE_TOL) -> bool:
    return linops.commutator_norm(P.matrix, Q.matrix) <= tol * P.norm * Q.norm


def pq_sqrt(P: Controller, Q: Controller, inverse: bool = False) -> np.ndarray:
    """(PQ)^(1/2), or (PQ)^(-1/2) with ``inverse=True``; only for commuting P, Q."""
    c = linops.commutator_norm(P.matrix, Q.matrix)
    if c > COMMUTE_TOL * P.norm * Q.norm:
        raise NonCommutingControllers(
            f"||PQ - QP|| = {c:.3e} exceeds {COMMUTE_TOL:.0e} * ||P|| ||Q||; (PQ)^(1/2) is undefined"
        )
    PQ = linops.hermitian_part(P.matrix @ Q.matrix)
    return linops.psd_function(PQ, "inv_sqrt" if inverse else "sqrt")


def controlled_frame_operator(family: GFrameFamily, P: Controller, Q: Controller) -> np.ndarray:
    """S_{P Lambda Q} = Q S_Lambda P."""
    _check_controllers(family, P, Q)
    return Q.matrix @ frame_operator(family) @ P.matrix


def controlled_quadratic_form(family: GFrameFamily, P: Controller, Q: Controller, f) -> complex:
    """sum_w mu_w <Lambda_w P f, Lambda_w Q f>, evaluated node by node."""
    _check_controllers(family, P, Q)
    f = _vec(f, family.ambient_dim)
    Pf = P.matrix @ f
    Qf = Q.matrix @ f
    return complex(sum(mu * np.vdot(B @ Qf, B @ Pf) for mu, B in zip(family.space.weights, family.blocks)))


@dataclass(frozen=True)
class ControlledReport:
    controlled_lower: float
    controlled_upper: float
    hermitian_defect: float
    defect_scale: float
    commutation: dict
    verdict: str  # "controlled_frame" | "controlled_bessel" | "fail"
    plain: FrameReport

    @property
    def defect_ok(self) -> bool:
        return self.hermitian_defect <= DEFECT_TOL * self.defect_scale


def _controlled_verdict(lower: float, defect: float, scale: float) -> str:
    if defect > DEFECT_TOL * scale:
        return "fail"
    if lower > FRAME_FLOOR:
        return "controlled_frame"
    if lower >= -FRAME_FLOOR * max(scale, 1.0):
        return "controlled_bessel"
    return "fail"


def operator_verdict(M, scale: float) -> tuple[float, float, float, str]:
    """Bounds, defect and controlled-style verdict for an arbitrary form operator ``M``."""
    lo, hi, defect = bounds_from_operator(M)
    return lo, hi, defect, _controlled_verdict(lo, defect, scale)


def controlled_bounds(family: GFrameFamily, P: Controller, Q: Controller) -> ControlledReport:
    plain = frame_bounds(family)
    S = frame_operator(family)
    M = Q.matrix @ S @ P.matrix
    lo, hi, defect = bounds_from_operator(M)
    scale = linops.operator_norm(S) * P.norm * Q.norm
    commutation = {
        "PQ": linops.commutator_norm(P.matrix, Q.matrix),
        "PS": linops.commutator_norm(P.matrix, S),
        "QS": linops.commutator_norm(Q.matrix, S),
    }
    # Bessel precondition: any family with finite blocks has a finite upper bound here.
    if not np.isfinite(plain.upper_bound):
        verdict = "fail"
    else:
        verdict = _controlled_verdict(lo, defect, scale)
    return ControlledReport(lo, hi, defect, scale, commutation, verdict, plain)


def controlled_analysis(family: GFrameFamily, P: Controller, Q: Controller, f) -> CoefficientFamily:
    """T*_{P Lambda Q} f = {Lambda_w (QP)^(1/2) f}."""
    _check_controllers(family, P, Q)
    f = _vec(f, family.ambient_dim)
    g = pq_sqrt(Q, P) @ f
    return CoefficientFamily(family.space, tuple(B @ g for B in family.blocks))


def controlled_synthesis(family: GFrameFamily, P: Controller, Q: Controller, c: CoefficientFamily) -> np.ndarray:
    """T_{P Lambda Q} c = sum_w mu_w (PQ)^(1/2) Lambda_w^* c_w."""
    _check_controllers(family, P, Q)
    if not family.space.same_as(c.space):
        raise SpaceMismatch("coefficient family lives on a different measure space")
    R = pq_sqrt(P, Q)
    acc = np.zeros(family.ambient_dim, dtype=np.complex128)
    for mu, B, cw in zip(family.space.weights, family.blocks, c.blocks):
        acc += mu * (B.conj().T @ cw)
    return R @ acc


def controlled_synthesis_matrix(family: GFrameFamily, P: Controller, Q: Controller) -> np.ndarray:
    """T_{P Lambda Q} as an ``n x sum d_w`` matrix acting on l2 (sqrt-weighted) coordinates."""
    return pq_sqrt(P, Q) @ family.weighted_stacked().conj().T


def _pair(report) -> tuple[float, float]:
    if isinstance(report, ControlledReport):
        return report.controlled_lower, report.controlled_upper
    if isinstance(report, FrameReport):
        return report.lower_bound, report.upper_bound
    lo, hi = report
    return float(lo), float(hi)


def bound_conversion(report, P: Controller, Q: Controller, direction: str) -> tuple[float, float]:
    """Candidate bounds on the other side of the plain/controlled equivalence.

    ``controlled_to_plain`` gives ``(A / ||(PQ)^(1/2)||^2, B ||(PQ)^(-1/2)||^2)``
    and needs commuting controllers; ``plain_to_controlled`` gives
    ``(a1 a2 A, b1 b2 B)`` from the controllers' spectral bounds.
    """
    A, B = _pair(report)
    if direction == "controlled_to_plain":
        up = linops.operator_norm(pq_sqrt(P, Q)) ** 2
        down = linops.operator_norm(pq_sqrt(P, Q, inverse=True)) ** 2
        return A / up, B * down
    if direction == "plain_to_controlled":
        a1, b1 = P.spectral_bounds
        a2, b2 = Q.spectral_bounds
        return a1 * a2 * A, b1 * b2 * B
    raise ValueError(f"unknown direction {direction!r}")


def conversion_audit(family: GFrameFamily, P: Controller, Q: Controller) -> AuditRecord:
    """Equivalence of plain and controlled verdicts plus the bound brackets."""
    rec = AuditRecord("2.1")
    ctrl = controlled_bounds(family, P, Q)
    plain = ctrl.plain
    A_opt, B_opt = plain.lower_bound, plain.upper_bound
    A, B = ctrl.controlled_lower, ctrl.controlled_upper
    comparable = ctrl.defect_ok
    same = (ctrl.verdict == "controlled_frame") == (plain.verdict == "frame")
    rec.verdicts.update(
        plain_frame=plain.verdict == "frame",
        controlled_frame=ctrl.verdict == "controlled_frame",
        verdicts_agree=same,
    )
    rec.add("hermitian_defect", ctrl.hermitian_defect, DEFECT_TOL * ctrl.defect_scale, applicable=False,
            note="comparison is asserted only when the defect is within tolerance")
    rec.add("verdict_mismatch", 0.0 if same else 1.0, 0.0, applicable=comparable)
    for k, v in ctrl.commutation.items():
        rec.add(f"commutator_{k}", v, COMMUTE_TOL * max(ctrl.defect_scale, 1.0), applicable=False)
    a1a2A, b1b2B = bound_conversion(plain, P, Q, "plain_to_controlled")
    rec.add("converse_lower_slack", A - a1a2A, -BRACKET_SLACK, kind="ge",
            applicable=comparable and ctrl.verdict != "fail")
    rec.add("converse_upper_slack", b1b2B - B, -BRACKET_SLACK, kind="ge",
            applicable=comparable and ctrl.verdict != "fail")
    if controllers_commute(P, Q):
        lo_c, hi_c = bound_conversion(ctrl, P, Q, "controlled_to_plain")
        active = comparable and ctrl.verdict == "controlled_frame"
        rec.add("forward_lower_slack", A_opt - lo_c, -BRACKET_SLACK, kind="ge", applicable=active)
        rec.add("forward_upper_slack", hi_c - B_opt, -BRACKET_SLACK, kind="ge", applicable=active)
    else:
        rec.notes.append("P and Q do not commute; (PQ)^(1/2) undefined, forward conversion skipped")
    return rec


@dataclass
class EquivalenceAudit:
    """Sampled forms along the chain of controlled/plain equivalences."""

    forms: dict  # name -> array of sampled values (None when undefined)
    discrepancies: dict  # "a|b" -> max relative gap
    commutators: dict
    statements: dict  # item -> verdict string
    record: AuditRecord


# Statements claimed equivalent; the PQ product ordering is reported but not part of the claim.
_EQUIVALENT_STATEMENTS = ("pq_controlled", "sqrt_pq_controlled", "qp_controlled", "plain")

_CHAIN = (
    ("integral", "QSP"),      # blockwise integral vs operator form
    ("QSP", "QPS"),           # needs P S = S P
    ("QPS", "sqrtPQ"),        # needs P Q = Q P
    ("sqrtPQ", "sqrt_integral"),
)


def equivalence_audit(family: GFrameFamily, P: Controller, Q: Controller, samples: int = 64, seed: int = 0,
                      theorem: str = "2.7") -> EquivalenceAudit:
    """Sample every form in the controlled-equivalence chain and measure the gaps.

    Forms evaluated at random unit ``f``:

    * ``integral``: sum_w mu_w <Lambda_w P f, Lambda_w Q f>
    * ``QSP``: <Q S P f, f>
    * ``QPS``: <Q P S f, f>
    * ``sqrtPQ``: <R S R f, f> with R = (PQ)^(1/2), when P and Q commute
    * ``sqrt_integral``: sum_w mu_w ||Lambda_w R f||^2
    * ``S_QP``: <S QP f, f> (QP-controlled ordering)
    * ``S_PQ``: <S PQ f, f> (PQ-controlled ordering)
    """
    _check_controllers(family, P, Q)
    n = family.ambient_dim
    rng = np.random.default_rng(seed)
    F = random_unit_vectors(rng, samples, n)
    S = frame_operator(family)
    Pm, Qm = P.matrix, Q.matrix
    ops = {
        "QSP": Qm @ S @ Pm,
        "QPS": Qm @ Pm @ S,
        "S_QP": S @ Qm @ Pm,
        "S_PQ": S @ Pm @ Qm,
    }
    R = None
    if controllers_commute(P, Q):
        R = pq_sqrt(P, Q)
        ops["sqrtPQ"] = R @ S @ R
    forms = {"integral": np.array([controlled_quadratic_form(family, P, Q, f) for f in F])}
    for name, M in ops.items():
        forms[name] = np.einsum("ki,ij,kj->k", F.conj(), M, F)
    if R is not None:
        RF = F @ R.T
        forms["sqrt_integral"] = np.array(
            [sum(mu * np.vdot(B @ g, B @ g) for mu, B in zip(family.space.weights, family.blocks)) for g in RF]
        )
    else:
        forms["sqrtPQ"] = None
        forms["sqrt_integral"] = None

    scale = linops.operator_norm(S) * P.norm * Q.norm
    floor = max(scale, 1.0) * 1e-14

    def gap(a, b):
        if forms[a] is None or forms[b] is None:
            return float("inf")
        return max(relative_gap(x, y, floor) for x, y in zip(forms[a], forms[b]))

    pairs = list(_CHAIN) + [("integral", "S_QP"), ("integral", "S_PQ"), ("S_QP", "S_PQ")]
    discrepancies = {f"{a}|{b}": gap(a, b) for a, b in pairs}
    commutators = {
        "PQ": linops.commutator_norm(Pm, Qm),
        "PS": linops.commutator_norm(Pm, S),
        "QS": linops.commutator_norm(Qm, S),
    }

    plain = frame_bounds(family)
    ctrl = controlled_bounds(family, P, Q)
    statements = {
        "pq_controlled": ctrl.verdict,
        "plain": plain.verdict,
    }
    if R is not None:
        Rc = Controller(linops.hermitian_part(R))
        statements["sqrt_pq_controlled"] = controlled_bounds(family, Rc, Rc).verdict
    else:
        statements["sqrt_pq_controlled"] = "undefined"
    statements["qp_controlled"] = operator_verdict(ops["S_QP"], scale)[3]
    statements["pq_product_controlled"] = operator_verdict(ops["S_PQ"], scale)[3]

    rec = AuditRecord(theorem, seed=seed)
    for a, b in _CHAIN:
        rec.add(f"gap[{a}|{b}]", discrepancies[f"{a}|{b}"], IDENTITY_TOL,
                note="undefined: P and Q do not commute" if forms[b] is None else "")
    is_27 = theorem == "2.7"
    rec.add("gap[integral|S_QP]", discrepancies["integral|S_QP"], IDENTITY_TOL, applicable=is_27)
    rec.add("gap[integral|S_PQ]", discrepancies["integral|S_PQ"], IDENTITY_TOL, applicable=False,
            note="PQ product ordering, reported next to the QP ordering")
    for k, v in commutators.items():
        rec.add(f"commutator_{k}", v, COMMUTE_TOL * max(scale, 1.0), applicable=False)
    frame_like = {"controlled_frame": True, "frame": True}
    defined = {k: frame_like.get(v, False) for k, v in statements.items() if v != "undefined"}
    rec.verdicts.update({k: v for k, v in defined.items()})
    items = [v for k, v in defined.items() if k in _EQUIVALENT_STATEMENTS]
    unanimous = all(items) or not any(items)
    rec.verdicts["statements_agree"] = unanimous
    rec.add("statement_disagreement", 0.0 if unanimous else 1.0, 0.0, applicable=is_27)
    return EquivalenceAudit(forms, discrepancies, commutators, statements, rec)


@dataclass
class InducedControlledCheck:
    form_residual: float      # sum over u_{w,v} with (P, Q) vs controlled_quadratic_form
    rewritten_residual: float  # sum over P u_{w,v} with controller Q P^-1
    report_pq: tuple
    report_qp_inv: tuple
    record: AuditRecord


def induced_controlled_check(family: GFrameFamily, P: Controller, Q: Controller, bases=None,
                             samples: int = 20, seed: int = 0) -> InducedControlledCheck:
    """Compare the induced-sequence double sums with the controlled form.

    ``report_pq`` and ``report_qp_inv`` are (lower, upper, defect, verdict)
    tuples for the vector-family operators ``sum mu Q u u^* P`` and
    ``sum mu C (Pu)(Pu)^*`` with ``C = Q P^-1``.
    """
    _check_controllers(family, P, Q)
    seq = induced_sequence(family, bases)
    U = seq.vectors  # rows u_{w,v}
    mu = seq.weights
    PU = U @ P.matrix.T  # rows P u
    QU = U @ Q.matrix.T
    C = Q.matrix @ P.inv
    CPU = PU @ C.T  # rows (Q P^-1)(P u)
    rng = np.random.default_rng(seed)
    F = random_unit_vectors(rng, samples, family.ambient_dim)
    floor = 1e-14 * max(linops.operator_norm(frame_operator(family)) * P.norm * Q.norm, 1.0)
    r_a = r_b = 0.0
    for f in F:
        target = controlled_quadratic_form(family, P, Q, f)
        # <f, P u> = vdot(P u, f) and <Q u, f> = vdot(f, Q u)
        a = sum(m * np.vdot(pu, f) * np.vdot(f, qu) for m, pu, qu in zip(mu, PU, QU))
        b = sum(m * np.vdot(pu, f) * np.vdot(f, cpu) for m, pu, cpu in zip(mu, PU, CPU))
        r_a = max(r_a, relative_gap(a, target, floor))
        r_b = max(r_b, relative_gap(b, target, floor))
    # operator of the (P,Q) vector frame: sum mu Q u u^* P
    M_pq = (QU.T * mu) @ U.conj() @ P.matrix
    M_c = C @ (PU.T * mu) @ PU.conj()
    scale = linops.operator_norm(frame_operator(family)) * P.norm * Q.norm
    rep_a = operator_verdict(M_pq, scale)
    rep_b = operator_verdict(M_c, scale)
    rec = AuditRecord("2.5", seed=seed)
    rec.add("induced_form_gap", r_a, INDUCED_TOL)
    rec.add("rewritten_form_gap", r_b, INDUCED_TOL)
    ctrl = controlled_bounds(family, P, Q)
    rec.verdicts.update(
        controlled_frame=ctrl.verdict == "controlled_frame",
        induced_pq_frame=rep_a[3] == "controlled_frame",
        induced_qp_inv_frame=rep_b[3] == "controlled_frame",
    )
    return InducedControlledCheck(r_a, r_b, rep_a, rep_b, rec)
