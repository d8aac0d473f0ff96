"""Command-line front end: ``gframe-lab <check|audit|dual|gen>``.

Exit codes: 0 pass, 1 audit failure, 2 Bessel only, 3 not a frame,
4 singular frame operator, 64 usage, 65 file or format error,
66 scenario lacks a required component.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import controlled, duals, gframe, linops, scenarios
from .checks import AuditRecord
from .errors import FormatError, NonCommutingControllers, NotDual, NotLeftInverse, SingularFrameOperator

REPORT_FORMAT = "gframe-lab-report"
REPORT_VERSION = 1

EXIT_PASS = 0
EXIT_AUDIT_FAIL = 1
EXIT_BESSEL_ONLY = 2
EXIT_NOT_FRAME = 3
EXIT_SINGULAR = 4
EXIT_USAGE = 64
EXIT_IO = 65
EXIT_INCOMPLETE = 66

THEOREMS = ("2.1", "2.2", "2.5", "2.6", "2.7", "3.3", "3.4", "3.5", "3.6", "3.7")
NEEDS_GAMMA = ("3.3", "3.4", "3.6")


class UsageError(Exception):
    pass


class IncompleteScenario(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class Report:
    """Verdicts and metrics of one command; every metric carries its tolerance."""

    def __init__(self, command: str, scenario_label: str, seed: int | None):
        self.command = command
        self.scenario_label = scenario_label
        self.seed = seed
        self.verdicts: dict[str, bool] = {}
        self.metrics: dict[str, dict] = {}
        self.undefined: list[str] = []
        self.notes: list[str] = []
        self.tolerances: dict[str, float] = {}
        self.exit_code = EXIT_PASS

    def metric(self, name: str, value, tolerance: float, applicable: bool = True):
        value = float(value)
        if not math.isfinite(value):
            self.undefined.append(name)
            return
        self.metrics[name] = {"value": value, "tolerance": float(tolerance), "asserted": bool(applicable)}

    def add_record(self, rec: AuditRecord, prefix: str = ""):
        for c in rec.checks:
            self.metric(prefix + c.name, c.value, c.tolerance, c.applicable)
            if c.note:
                self.notes.append(f"{prefix}{c.name}: {c.note}")
            if c.applicable and not math.isfinite(c.value):
                self.verdicts[prefix + c.name + "_defined"] = False
        for k, v in rec.verdicts.items():
            self.verdicts[prefix + k] = bool(v)
        self.notes.extend(rec.notes)

    def to_dict(self) -> dict:
        return {
            "format": REPORT_FORMAT,
            "format_version": REPORT_VERSION,
            "command": self.command,
            "scenario_label": self.scenario_label,
            "seed": self.seed,
            "verdicts": self.verdicts,
            "metrics": self.metrics,
            "undefined": self.undefined,
            "tolerances": self.tolerances,
            "notes": self.notes,
            "exit_code": self.exit_code,
        }

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"
        lines = [f"{self.command}: {self.scenario_label} (seed {self.seed})"]
        if self.verdicts:
            lines.append("verdicts:")
            w = max(len(k) for k in self.verdicts)
            lines += [f"  {k:<{w}}  {'yes' if v else 'no'}" for k, v in sorted(self.verdicts.items())]
        if self.metrics:
            lines.append("metrics:")
            w = max(len(k) for k in self.metrics)
            for k, m in sorted(self.metrics.items()):
                flag = "" if m["asserted"] else "  (recorded)"
                lines.append(f"  {k:<{w}}  {m['value']: .6e}  tol {m['tolerance']:.1e}{flag}")
        if self.undefined:
            lines.append("undefined: " + ", ".join(self.undefined))
        for note in self.notes:
            lines.append(f"note: {note}")
        lines.append(f"exit code: {self.exit_code}")
        return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ commands

def _load(path) -> scenarios.Scenario:
    try:
        return scenarios.load_scenario(path)
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror or exc}") from exc


def cmd_check(args) -> Report:
    s = _load(args.scenario)
    rep = Report("check", s.label, s.seed)
    ctrl = controlled.controlled_bounds(s.lambda_family, s.P, s.Q)
    plain = ctrl.plain
    floor = gframe.FRAME_FLOOR
    rep.tolerances.update(frame_floor=floor, defect_tol=controlled.DEFECT_TOL, tight_tol=gframe.TIGHT_TOL)
    rep.metric("plain_lower", plain.lower_bound, floor)
    rep.metric("plain_upper", plain.upper_bound, floor)
    rep.metric("controlled_lower", ctrl.controlled_lower, floor)
    rep.metric("controlled_upper", ctrl.controlled_upper, floor)
    rep.metric("hermitian_defect", ctrl.hermitian_defect, controlled.DEFECT_TOL * ctrl.defect_scale)
    for k, v in ctrl.commutation.items():
        rep.metric(f"commutator_{k}", v, controlled.COMMUTE_TOL * max(ctrl.defect_scale, 1.0), applicable=False)
    lo, hi = controlled.bound_conversion(plain, s.P, s.Q, "plain_to_controlled")
    rep.metric("plain_to_controlled_lower", lo, controlled.BRACKET_SLACK, applicable=False)
    rep.metric("plain_to_controlled_upper", hi, controlled.BRACKET_SLACK, applicable=False)
    if controlled.controllers_commute(s.P, s.Q):
        lo, hi = controlled.bound_conversion(ctrl, s.P, s.Q, "controlled_to_plain")
        rep.metric("controlled_to_plain_lower", lo, controlled.BRACKET_SLACK, applicable=False)
        rep.metric("controlled_to_plain_upper", hi, controlled.BRACKET_SLACK, applicable=False)
    else:
        rep.notes.append("P and Q do not commute: controlled-to-plain conversion needs (PQ)^(1/2)")
    rep.verdicts.update(
        plain_frame=plain.verdict == "frame",
        plain_bessel_only=plain.verdict == "bessel_only",
        tight=plain.tight,
        parseval=plain.parseval,
        controlled_frame=ctrl.verdict == "controlled_frame",
        controlled_bessel=ctrl.verdict == "controlled_bessel",
    )
    rep.exit_code = {"controlled_frame": EXIT_PASS, "controlled_bessel": EXIT_BESSEL_ONLY}.get(ctrl.verdict, EXIT_NOT_FRAME)
    return rep


def _audit_record(s: scenarios.Scenario, args) -> AuditRecord:
    th = args.theorem
    fam, P, Q = s.lambda_family, s.P, s.Q
    if th in NEEDS_GAMMA and s.gamma_family is None:
        raise IncompleteScenario(f"theorem {th} needs a gamma family in the scenario")
    gam = s.gamma_family
    if th == "2.1":
        return controlled.conversion_audit(fam, P, Q)
    if th in ("2.2", "2.7"):
        rec = controlled.equivalence_audit(fam, P, Q, args.samples, args.seed, theorem=th).record
        if th == "2.7":
            ind = controlled.induced_controlled_check(fam, P, Q, samples=args.samples, seed=args.seed).record
            rec.checks.extend(ind.checks)
            rec.verdicts.update(ind.verdicts)
        return rec
    if th in ("2.5", "2.6"):
        rec = controlled.induced_controlled_check(fam, P, Q, samples=args.samples, seed=args.seed).record
        rec.theorem = th
        return rec
    if th == "3.3":
        inf = duals.lower_bound_inference(fam, gam, P, Q)
        rec = AuditRecord("3.3")
        rec.add("lambda_min", inf.lam, gframe.FRAME_FLOOR, kind="ge", applicable=False)
        rec.add("gamma_lower_slack", inf.gamma_slack, -duals.STRICT_TOL, kind="ge", applicable=not inf.vacuous)
        rec.add("lambda_lower_slack", inf.lambda_slack, -duals.STRICT_TOL, kind="ge", applicable=not inf.vacuous)
        rec.verdicts["bounded_below"] = not inf.vacuous
        if inf.vacuous:
            rec.notes.append("dual frame operator is not bounded below; inference is vacuous")
        return rec
    if th == "3.4":
        return duals.reconstruction_equivalence_audit(fam, gam, P, Q, args.samples, args.seed, args.dual_tol).record
    if th == "3.5":
        rec = AuditRecord("3.5")
        try:
            chk = duals.bessel_norm_check(fam, P, Q)
        except NonCommutingControllers as exc:
            rec.add("bessel_norm_gap", math.inf, duals.STRICT_TOL, note=str(exc))
            return rec
        rec.add("optimal_bessel_bound", chk.optimal_upper, gframe.FRAME_FLOOR, kind="ge", applicable=False)
        rec.add("synthesis_norm_sq", chk.synthesis_norm_sq, gframe.FRAME_FLOOR, kind="ge", applicable=False)
        rec.add("bessel_norm_gap", chk.relative_gap, duals.STRICT_TOL)
        return rec
    if th == "3.6":
        rec = AuditRecord("3.6")
        try:
            fwd = duals.left_inverse_characterization(fam, P, Q, gam, "dual_to_U", tol=args.dual_tol)
            back = duals.left_inverse_characterization(fam, P, Q, fwd.U, "U_to_dual", tol=args.dual_tol)
        except (NotDual, NotLeftInverse) as exc:
            rec.add("dual_certificate", math.inf, args.dual_tol, note=str(exc))
            return rec
        rt = max(float(np.abs(a - b).max()) for a, b in zip(back.gamma.blocks, gam.blocks))
        rec.add("left_inverse_residual", fwd.left_inverse_residual, duals.STRICT_TOL)
        rec.add("basis_identity_residual", fwd.basis_residual, duals.STRICT_TOL)
        rec.add("roundtrip_error", rt, duals.STRICT_TOL)
        pinv = duals.left_inverse_characterization(fam, P, Q, duals.pinv_left_inverse(fam, P), "U_to_dual",
                                                   tol=args.dual_tol)
        rec.add("pinv_dual_residual", pinv.certificate.residual, args.dual_tol)
        return rec
    if th == "3.7":
        seeds = args.kernel_seeds
        return duals.parametrization_audit(fam, P, args.mode, seeds, args.dual_tol)
    raise UsageError(f"unknown theorem {th}")


def cmd_audit(args) -> Report:
    s = _load(args.scenario)
    rec = _audit_record(s, args)
    if args.identity_tol is not None:
        rec.checks = [replace(c, tolerance=args.identity_tol) if c.name.startswith("gap[") else c for c in rec.checks]
    rep = Report(f"audit {args.theorem}", s.label, args.seed)
    rep.tolerances.update(dual_tol=args.dual_tol, identity_tol=args.identity_tol or controlled.IDENTITY_TOL,
                          kernel_tol=duals.KERNEL_TOL, samples=args.samples)
    rep.add_record(rec)
    rep.verdicts["audit_passed"] = rec.passed
    rep.exit_code = EXIT_PASS if rec.passed else EXIT_AUDIT_FAIL
    return rep


def cmd_dual(args) -> Report:
    s = _load(args.scenario)
    fam, P, Q = s.lambda_family, s.P, s.Q
    T = (duals.KernelOperator.zero(fam.space, fam.ambient_dim) if args.kernel_seed == 0
         else duals.kernel_sampler(fam, P, args.kernel_seed))
    built = duals.dual_parametrization(fam, P, T, args.mode)
    gamma = built.gamma if Q.is_identity() else built.gamma.right_multiply(Q.inv)
    cert = duals.check_duality(fam, gamma, P, Q, tol=args.dual_tol)
    out = Path(args.out_scenario) if args.out_scenario else \
        Path(args.scenario).with_name(f"{Path(args.scenario).stem}-dual-{args.mode}.json")
    scenarios.save_scenario(s.with_gamma(gamma, f"{s.label}+dual-{args.mode}-k{args.kernel_seed}"), out)
    rep = Report(f"dual {args.mode}", s.label, args.kernel_seed)
    rep.tolerances.update(dual_tol=args.dual_tol, kernel_tol=duals.KERNEL_TOL)
    for k, c in enumerate(cert.condition_checks, start=1):
        rep.metric(f"condition_{k}_residual", c, args.dual_tol)
    rep.metric("lambda_min", cert.lambda_min, gframe.FRAME_FLOOR, applicable=False)
    rep.metric("inferred_gamma_lower", cert.inferred_lower_bounds[0], gframe.FRAME_FLOOR, applicable=False)
    rep.metric("inferred_lambda_lower", cert.inferred_lower_bounds[1], gframe.FRAME_FLOOR, applicable=False)
    rep.metric("kernel_residual", duals.kernel_residual(fam, P, T), duals.KERNEL_TOL)
    rep.metric("commutator_PS", linops.commutator_norm(P.matrix, gframe.frame_operator(fam)),
               controlled.COMMUTE_TOL, applicable=False)
    rep.verdicts["is_dual"] = cert.is_dual
    rep.notes.append(f"dual family written to {out.name}")
    rep.exit_code = EXIT_PASS if cert.is_dual else EXIT_AUDIT_FAIL
    return rep


def _floats_arg(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def cmd_gen(args) -> tuple[Report, str]:
    preset = args.preset
    if preset == "example15":
        P = np.diag(_floats_arg(args.p_diag)) if args.p_diag else None
        Q = np.diag(_floats_arg(args.q_diag)) if args.q_diag else None
        try:
            s = scenarios.example_1_5(args.nodes, P, Q)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    elif preset == "random":
        dims = [int(x) for x in _floats_arg(args.blocks)] if args.blocks else None
        if dims is not None and (not dims or min(dims) < 1):
            raise UsageError("--blocks must list positive integers")
        if args.n is not None and args.n < 1:
            raise UsageError("--n must be positive")
        if args.cond < 1:
            raise UsageError("--cond must be >= 1")
        s = scenarios.random_scenario(args.seed, args.n, dims, args.cond, args.controllers)
    elif preset == "diag":
        s = scenarios.diag_example()
    elif preset == "noncommuting":
        s = scenarios.noncommuting_fixture()
    else:
        s = scenarios.rank_deficient_fixture(seed=args.seed)
    if args.with_dual:
        try:
            d = duals.canonical_dual(s.lambda_family, s.P, args.with_dual, Q=s.Q)
        except SingularFrameOperator as exc:
            raise UsageError(f"cannot attach a dual: {exc}") from exc
        s = s.with_gamma(d.gamma, f"{s.label}+canonical-{args.with_dual}")
    scenarios.save_scenario(s, args.out)
    rep = Report("gen", s.label, s.seed)
    return rep, f"{s.label} seed={s.seed}\n"


# ------------------------------------------------------------------ parser

def _kernel_seeds(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad kernel seed list {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gframe-lab", description="Numerical laboratory for controlled continuous g-frames.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("scenario", help="scenario file (JSON)")
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--dual-tol", type=float, default=duals.DUAL_TOL)

    c = sub.add_parser("check", help="frame and controlled-frame verdicts")
    common(c)

    a = sub.add_parser("audit", help="measure the identities behind one theorem")
    common(a)
    a.add_argument("--theorem", required=True, choices=THEOREMS)
    a.add_argument("--samples", type=int, default=duals.DUAL_SAMPLES)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--mode", choices=("paper", "general"), default="general")
    a.add_argument("--kernel-seeds", type=_kernel_seeds, default=(0, 1, 2, 3, 4),
                   help="comma-separated kernel seeds for 3.7; 0 means T = 0")
    a.add_argument("--identity-tol", type=float, default=None)

    d = sub.add_parser("dual", help="construct a controlled dual and write it into a scenario file")
    common(d)
    d.add_argument("--mode", choices=("paper", "general"), default="general")
    d.add_argument("--kernel-seed", type=int, default=0, help="0 gives T = 0 (canonical dual)")
    d.add_argument("--out-scenario", help="where to write the scenario with the dual family")

    g = sub.add_parser("gen", help="write a scenario file")
    g.add_argument("--preset", required=True, choices=("example15", "random", "diag", "noncommuting", "rank-deficient"))
    g.add_argument("--out", required=True)
    g.add_argument("--nodes", type=int, default=1024)
    g.add_argument("--p-diag", help="example15: diagonal of P, e.g. 2,1")
    g.add_argument("--q-diag", help="example15: diagonal of Q, e.g. 3,1")
    g.add_argument("--n", type=int)
    g.add_argument("--blocks", help="random: comma-separated block dims")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--cond", type=float, default=100.0)
    g.add_argument("--controllers", choices=scenarios.CONTROLLER_KINDS, default="independent")
    g.add_argument("--with-dual", choices=("paper", "general"), help="attach a canonical dual as gamma")
    return p


def _emit(text: str, out: str | None, stdout) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if args.command == "gen":
            _, text = cmd_gen(args)
            stdout.write(text)
            return EXIT_PASS
        if getattr(args, "samples", 1) < 1:
            raise UsageError("--samples must be positive")
        rep = {"check": cmd_check, "audit": cmd_audit, "dual": cmd_dual}[args.command](args)
        _emit(rep.render(args.format), args.out, stdout)
        return rep.exit_code
    except UsageError as exc:
        stderr.write(f"gframe-lab: usage error: {exc}\n")
        return EXIT_USAGE
    except (FormatError, OSError) as exc:
        stderr.write(f"gframe-lab: {exc}\n")
        return EXIT_IO
    except IncompleteScenario as exc:
        stderr.write(f"gframe-lab: {exc}\n")
        return EXIT_INCOMPLETE
    except SingularFrameOperator as exc:
        stderr.write(f"gframe-lab: singular frame operator: {exc}\n")
        return EXIT_SINGULAR


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
