"""Command line interface. Every command prints one JSON document.

Exit codes: 0 success, 2 bad input, 3 a mathematical check failed,
4 certification inconclusive.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import cremona, degeneration, gw_engine
from .classexpr import parse_class
from .intersection import canonical_class, mori_membership, pairing, stage_ring
from .lattice_core import NotAFan, validate_fan
from .tower import build_stage

EXIT_OK, EXIT_INPUT, EXIT_MATH, EXIT_INCONCLUSIVE = 0, 2, 3, 4
DESK_SCALE_N = 4


class CommandError(Exception):
    def __init__(self, step: str, detail: str, code: int = EXIT_INPUT, payload: dict | None = None):
        super().__init__(detail)
        self.step, self.detail, self.code, self.payload = step, detail, code, payload


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CommandError("parse", message)


def _emit(doc: dict, out) -> None:
    out.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _parse(step: str, fn, *args):
    try:
        return fn(*args)
    except (ValueError, KeyError) as exc:
        raise CommandError(step, str(exc)) from None


def _class_dict(c) -> dict:
    return {
        "d": c.d,
        "a": {",".join(map(str, sorted(g))): v for g, v in sorted(c.a.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))},
        "extra": {str(k): v for k, v in sorted(c.extra.items())},
    }


def _check_stage(n: int, stage: int | None) -> int:
    if n < 2:
        raise CommandError("input", "n must be at least 2")
    if stage is None:
        return n - 2
    if not -1 <= stage <= n - 2:
        raise CommandError("input", f"stage {stage} out of range for n = {n}")
    return stage


# --- commands -----------------------------------------------------------------


def cmd_fan_build(args) -> tuple[dict, int]:
    stage = _check_stage(args.n, args.stage)
    s = build_stage(args.n, stage)
    doc = {"n": args.n, "stage": stage, "fan": s.to_dict()}
    if args.out:
        try:
            with open(args.out, "w") as fh:
                json.dump(s.to_dict(), fh, sort_keys=True, indent=2)
        except OSError as exc:
            raise CommandError("write", str(exc)) from None
        doc["out"] = args.out
    return doc, EXIT_OK


def cmd_fan_verify(args) -> tuple[dict, int]:
    stage = _check_stage(args.n, args.stage)
    s = build_stage(args.n, stage)
    try:
        rep = validate_fan(s.fan, samples=args.samples, seed=args.seed)
    except NotAFan as exc:
        raise CommandError("validate", str(exc), EXIT_MATH) from None
    doc = {
        "n": args.n,
        "stage": stage,
        "smooth": rep.smooth,
        "complete": rep.complete,
        "rays": rep.ray_count,
        "max_cones": rep.max_cone_count,
        "seed": args.seed,
    }
    return doc, EXIT_OK if rep.smooth and rep.complete else EXIT_MATH


def cmd_ring_pair(args) -> tuple[dict, int]:
    stage = _check_stage(args.n, args.stage)
    D = _parse("parse", lambda: parse_class(args.divisor).divisor(args.n))
    C = _parse("parse", lambda: parse_class(args.curve).curve(args.n))
    extras = max([args.n + 1, *D.extra, *C.extra]) - args.n - 1
    table = pairing(build_stage(args.n, stage), extras)
    value = _parse("pair", table.pair, D, C)
    return {"n": args.n, "stage": stage, "divisor": args.divisor, "curve": args.curve, "value": value}, EXIT_OK


def cmd_ring_mori(args) -> tuple[dict, int]:
    stage = _check_stage(args.n, args.stage)
    C = _parse("parse", lambda: parse_class(args.cls).curve(args.n))
    if C.extra:
        raise CommandError("input", "mori membership is computed on toric stages only (no extra points)")
    s = build_stage(args.n, stage)
    membership = _parse("mori", mori_membership, s, C)
    ring = stage_ring(args.n, stage)
    extremal = ring.is_extremal(ring.basis.curve_vector(C))
    return {"n": args.n, "stage": stage, "class": args.cls, "membership": membership, "extremal": extremal}, EXIT_OK


def cmd_cremona_push(args) -> tuple[dict, int]:
    d, a = _parse("parse", lambda: parse_class(args.cls).point_data(args.n))
    m = args.m or max(len(a), args.n + 1)
    if len(a) > m:
        raise CommandError("input", f"class uses point {len(a)} but m = {m}")
    d2, a2 = _parse("transform", cremona.cremona_transform_class, args.n, m, d, a)
    if not 2 <= args.n <= 5:
        raise CommandError("input", "matrix route supports 2 <= n <= 5")
    cm = cremona.curve_pushforward(args.n, m)
    beta = cremona.point_class(args.n, d, a)
    image = cm.push(beta)
    agree = image == cremona.point_class(args.n, d2, a2)
    involution = cm.push(image) == beta
    degree = cremona.anticanonical_degree(args.n, beta)
    doc = {
        "n": args.n,
        "m": m,
        "d": d,
        "a": a,
        "image": {"d": d2, "a": list(a2)},
        "matrix_image": _class_dict(image),
        "routes_agree": agree,
        "involution_ok": involution,
        "anticanonical_degree": degree,
        "anticanonical_degree_preserved": cremona.anticanonical_degree(args.n, image) == degree,
    }
    return doc, EXIT_OK if agree and involution else EXIT_MATH


def cmd_cremona_verify(args) -> tuple[dict, int]:
    m = args.m or args.n + 3
    rep = _parse("input", cremona.verify_consistency, args.n, m, args.samples, args.seed)
    doc = {"n": args.n, "m": m, "samples": args.samples, "seed": args.seed, "checks": rep.checks, "counterexample": rep.counterexample}
    return doc, EXIT_OK if rep.ok else EXIT_MATH


def cmd_gw_stationary(args) -> tuple[dict, int]:
    try:
        st = gw_engine.stationary(args.n, args.d)
    except gw_engine.NoIntegralR as exc:
        raise CommandError("stationary", f"NoIntegralR: {exc}") from None
    except ValueError as exc:
        raise CommandError("input", str(exc)) from None
    return {"n": args.n, "d": args.d, "r": st.r, "N": str(st.N)}, EXIT_OK


def cmd_gw_invariant(args) -> tuple[dict, int]:
    try:
        ins = [int(x) for x in args.insertions.split(",") if x.strip()]
    except ValueError:
        raise CommandError("parse", f"bad insertion list {args.insertions!r}") from None
    value = _parse("gw", gw_engine.gw_invariant, args.n, args.d, ins)
    return {"n": args.n, "d": args.d, "insertions": sorted(ins, reverse=True), "value": str(value)}, EXIT_OK


def cmd_symmetry_check(args) -> tuple[dict, int]:
    d, a = _parse("parse", lambda: parse_class(args.cls).point_data(args.n))
    m = args.m or len(a)
    if len(a) > m:
        raise CommandError("input", f"class uses point {len(a)} but m = {m}")
    rep = _parse("symmetry", gw_engine.symmetry_check, args.n, m, d, a, args.points)
    code = EXIT_MATH if rep.equal is False else EXIT_OK
    return rep.as_dict(), code


def cmd_certify(args) -> tuple[dict, int]:
    d, a = _parse("parse", lambda: parse_class(args.cls).point_data(args.n))
    if args.n < 2:
        raise CommandError("input", "n must be at least 2")
    res = degeneration.certify_nonexceptional(args.n, d, a, certificate=args.certificate, bound=args.bound)
    doc = {"n": args.n, "class": args.cls, "bound": d if args.bound is None else args.bound}
    doc.update(res.as_dict())
    return doc, EXIT_OK if res.certified else EXIT_INCONCLUSIVE


def reproduce_corollary(n: int, seed: int = 0, samples: int = 1000) -> tuple[dict, int]:
    """Run the rational normal curve symmetry end to end; returns (transcript, exit code)."""
    if not 2 <= n <= DESK_SCALE_N:
        raise CommandError("input", f"n = {n} exceeds the desk-scale bound (2 <= n <= {DESK_SCALE_N})")
    m = n + 3
    steps: list[dict] = []

    def fail(step: str, detail: str, code: int = EXIT_MATH):
        raise CommandError(step, detail, code, {"n": n, "steps": steps})

    # 1. tower
    stages = []
    for j in range(-1, n - 1):
        rep = validate_fan(build_stage(n, j).fan, samples=samples, seed=seed)
        stages.append({"stage": j, "rays": rep.ray_count, "max_cones": rep.max_cone_count, "smooth": rep.smooth, "complete": rep.complete})
        if not (rep.smooth and rep.complete):
            fail("build_tower", f"stage {j} is not smooth and complete")
    steps.append({"step": "build_tower", "stages": stages})

    # 2. involution
    rep = cremona.verify_consistency(n, m, samples=samples, seed=seed)
    steps.append({"step": "verify_cremona", "checks": rep.checks})
    if not rep.ok:
        fail("verify_cremona", f"failed checks: {sorted(k for k, v in rep.checks.items() if not v)}")
    K = canonical_class(build_stage(n, n - 2))
    if cremona.cremona_map(n, n + 1).pull(K) != K:
        fail("verify_cremona", "canonical class not fixed")

    # 3. transform
    d, a = n, [1] * m
    d2, a2 = cremona.cremona_transform_class(n, m, d, a)
    matrix = cremona.curve_pushforward(n, m).push(cremona.point_class(n, d, a))
    agree = matrix == cremona.point_class(n, d2, a2)
    steps.append({"step": "transform", "beta": {"d": d, "a": a}, "image": {"d": d2, "a": list(a2)}, "matrix_agrees": agree})
    if not agree:
        fail("transform", "closed form and matrix pushforward differ")
    if d2 != 1 or sorted(a2) != [0] * (n + 1) + [1, 1]:
        fail("transform", f"unexpected image {d2}, {list(a2)}")

    # 4. nonexceptionality
    cert = degeneration.certify_nonexceptional(n, d, a, certificate="extremal", bound=n)
    steps.append({"step": "certify", **cert.as_dict()})
    if not cert.certified:
        fail("certify", cert.reason or "inconclusive", EXIT_INCONCLUSIVE)

    # 5. trade points and evaluate
    r = gw_engine.point_insertions_for_vdim_zero(n, d, a)
    if r != 0:
        fail("trade", f"expected no extra point insertions, got {r}")
    lhs_q = gw_engine.trade_points(n, m, d, a, 0)
    rhs_q = gw_engine.trade_points(n, m, d2, a2, 0)
    steps.append({"step": "trade", "lhs": {"d": lhs_q.d, "points": len(lhs_q.insertions)}, "rhs": {"d": rhs_q.d, "points": len(rhs_q.insertions)}})
    lhs, rhs = gw_engine.gw_pn(lhs_q), gw_engine.gw_pn(rhs_q)
    steps.append({"step": "evaluate", "lhs": str(lhs), "rhs": str(rhs)})
    if not lhs == rhs == 1:
        fail("evaluate", f"expected 1 = 1, got {lhs} and {rhs}")

    doc = {"n": n, "steps": steps, "lhs": str(lhs), "rhs": str(rhs), "ok": True}
    return doc, EXIT_OK


def cmd_reproduce(args) -> tuple[dict, int]:
    return reproduce_corollary(args.n, seed=args.seed)


def stationary_table(n: int, d_max: int) -> list[dict]:
    rows = []
    for d in range(1, d_max + 1):
        try:
            st = gw_engine.stationary(n, d)
        except gw_engine.NoIntegralR:
            continue
        rows.append({"d": d, "r": st.r, "N": str(st.N)})
    return rows


def cmd_table(args) -> tuple[dict, int]:
    if args.n < 2:
        raise CommandError("input", "n must be at least 2")
    return {"n": args.n, "d_max": args.d_max, "rows": stationary_table(args.n, args.d_max)}, EXIT_OK


# --- wiring -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", default=True, help="emit JSON (the only format)")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled checks")

    p = _Parser(prog="cremona-gw", description="Cremona symmetry of stationary invariants of blowups of P^n.", parents=[common])
    sub = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def leaf(parent, name, fn, help_):
        q = parent.add_parser(name, help=help_, parents=[common])
        q.set_defaults(fn=fn)
        return q

    fan = sub.add_parser("fan", help="blowup tower fans").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    for name, fn in (("build", cmd_fan_build), ("verify", cmd_fan_verify)):
        q = leaf(fan, name, fn, f"{name} the fan of a stage")
        q.add_argument("--n", type=int, required=True)
        q.add_argument("--stage", type=int, default=None, help="default: final stage n-2")
        if name == "verify":
            q.add_argument("--samples", type=int, default=1000)
        else:
            q.add_argument("--out", default=None, help="also write the fan JSON here")

    ring = sub.add_parser("ring", help="intersection numbers and Mori cone").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    q = leaf(ring, "pair", cmd_ring_pair, "intersect a divisor with a curve")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--stage", type=int, default=None)
    q.add_argument("--divisor", required=True)
    q.add_argument("--curve", required=True)
    q = leaf(ring, "mori", cmd_ring_mori, "locate a curve class relative to the Mori cone")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--stage", type=int, default=None)
    q.add_argument("--class", dest="cls", required=True)

    crem = sub.add_parser("cremona", help="Cremona action on classes").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    q = leaf(crem, "push", cmd_cremona_push, "image of d h - sum a_i e_i")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--m", type=int, default=None)
    q.add_argument("--class", dest="cls", required=True)
    q = leaf(crem, "verify", cmd_cremona_verify, "cross-check matrix and closed form")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--m", type=int, default=None)
    q.add_argument("--samples", type=int, default=1000)

    gw = sub.add_parser("gw", help="Gromov-Witten invariants of P^n").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    q = leaf(gw, "stationary", cmd_gw_stationary, "curves of degree d through r points")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--d", type=int, required=True)
    q = leaf(gw, "invariant", cmd_gw_invariant, "invariant with insertions h^a")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--d", type=int, required=True)
    q.add_argument("--insertions", required=True, help="comma separated exponents, e.g. 3,3,2")

    sym = sub.add_parser("symmetry", help="compare both sides of the symmetry").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    q = leaf(sym, "check", cmd_symmetry_check, "evaluate a class and its image")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--m", type=int, default=None)
    q.add_argument("--class", dest="cls", required=True)
    q.add_argument("--points", type=int, default=0)

    ne = sub.add_parser("nonexceptional", help="degeneration certificates").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    q = leaf(ne, "certify", cmd_certify, "certify a class nonexceptional")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--class", dest="cls", required=True)
    q.add_argument("--bound", type=int, default=None, help="default: the degree")
    q.add_argument("--certificate", choices=["extremal", "mori"], default=None)

    rep = sub.add_parser("reproduce", help="end-to-end reproductions").add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    q = leaf(rep, "corollary", cmd_reproduce, "rational normal curve through n+3 points")
    q.add_argument("--n", type=int, required=True)

    q = sub.add_parser("table", help="table of stationary invariants", parents=[common])
    q.set_defaults(fn=cmd_table)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--d-max", dest="d_max", type=int, required=True)
    return p


def run(argv: Sequence[str] | None = None) -> tuple[dict, int]:
    try:
        args = build_parser().parse_args(argv)
        return args.fn(args)
    except CommandError as exc:
        doc = dict(exc.payload or {})
        doc["error"] = {"step": exc.step, "detail": exc.detail}
        return doc, exc.code


def main(argv: Sequence[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    if any(a in ("-h", "--help") for a in argv):
        build_parser().parse_args(argv)
    doc, code = run(argv)
    _emit(doc, sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
