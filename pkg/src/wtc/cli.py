"""The ``wtc`` command-line driver.

    wtc <command> --workspace <path> [--json] [flags]

Commands: certify-smpic, descend, realign, normalize, eval, check-basis,
transfer-basis, check-localization.  Exit code 0 means every verdict in
the report passed, 1 means a verified failure (the report carries the
witness), 2 means a usage error.  Output is byte-stable for a fixed
workspace and command; the machine-readable form mirrors the text form.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

from .align import AlignmentClass
from .basis import check_localization, check_total_basis, transfer_basis
from .descent import certify_smpic, descend_alignment, realign
from .errors import WtcError
from .expr import (
    TwistedGroupRef,
    format_bundle_expr,
    normalize,
    parse_bundle_expr,
    parse_unit_expr,
)
from .module import eval_expr
from .workspace import parse_workspace


@dataclass
class Report:
    command: str
    records: list = field(default_factory=list)
    payload: dict = field(default_factory=dict)

    def add(self, name, ok, detail=""):
        self.records.append({"check": name, "ok": bool(ok), "detail": str(detail)})
        return ok

    def note(self, name, detail):
        self.records.append({"check": name, "ok": True, "detail": str(detail)})

    @property
    def passed(self):
        return all(r["ok"] for r in self.records)

    def to_dict(self):
        return {
            "command": self.command,
            "passed": self.passed,
            "records": self.records,
            "payload": self.payload,
        }

    def render_text(self):
        lines = [f"wtc {self.command}"]
        for r in self.records:
            tag = "PASS" if r["ok"] else "FAIL"
            detail = f": {r['detail']}" if r["detail"] else ""
            lines.append(f"[{tag}] {r['check']}{detail}")
        for key in sorted(self.payload):
            lines.append(f"{key} = {self.payload[key]}")
        lines.append(f"result: {'pass' if self.passed else 'fail'}")
        return "\n".join(lines) + "\n"


def emit_report(report, as_json=False, stream=None):
    stream = stream or sys.stdout
    if as_json:
        stream.write(json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n")
    else:
        stream.write(report.render_text())
    return 0 if report.passed else 1


def _fmt(el):
    return "<" + ",".join(map(str, el.coords)) + ">"


def _fmt_align(scheme, align):
    return (
        f"(M={format_bundle_expr(scheme, align.m)}, "
        f"u={scheme.units.describe(align.u)}): "
        f"{format_bundle_expr(scheme, align.source.cls)} ~> "
        f"{format_bundle_expr(scheme, align.target.cls)}"
    )


def _parse_alignment(scheme, src, tgt, text):
    parts = dict(
        kv.split("=", 1) for kv in (p.strip() for p in text.split(",")) if kv
    )
    m = parse_bundle_expr(scheme, parts.get("M", "0"))
    u = parse_unit_expr(scheme, parts.get("u", "1"))
    return AlignmentClass(scheme.bundle(src), scheme.bundle(tgt), m, u)


# ---------------------------------------------------------------------------
# commands


def cmd_certify_smpic(ws, args, report):
    pi = ws.morphism(args.morphism)
    cert = certify_smpic(pi)
    for name, (ok, witness) in cert.conditions().items():
        detail = "" if ok else f"witness {witness}"
        report.add(name, ok, detail)


def cmd_descend(ws, args, report):
    from .descent import relative_class_mod2
    from .errors import ClassMismatch

    f = ws.morphism(args.morphism)
    y, ybar = f.target, f.source
    l1 = y.bundle(parse_bundle_expr(y, args.l1))
    l2 = y.bundle(parse_bundle_expr(y, args.l2))
    if relative_class_mod2(y, l1.cls) != relative_class_mod2(y, l2.cls):
        raise ClassMismatch(
            "endpoints differ in the relative Picard group mod 2",
            witness=(l1, l2),
        )
    m = parse_bundle_expr(ybar, args.m)
    u = parse_unit_expr(ybar, args.u)
    if args.mode == "plain":
        src = f.pic_pullback.apply(l1.cls)
        tgt = f.pic_pullback.apply(l2.cls)
    else:
        src = f.omega + f.pic_pullback.apply(l1.cls)
        tgt = f.omega + f.pic_pullback.apply(l2.cls)
    abar = AlignmentClass(ybar.bundle(src), ybar.bundle(tgt), m, u)
    cert = descend_alignment(f, abar, l1, l2, mode=args.mode)
    report.add("descent_recomposes", cert.check)
    report.payload["descended"] = _fmt_align(y, cert.output)


def cmd_realign(ws, args, report):
    f = ws.morphism(args.morphism)
    y, ybar = f.target, f.source
    l1 = y.bundle(parse_bundle_expr(y, args.l1))
    l2 = y.bundle(parse_bundle_expr(y, args.l2))
    lbar = parse_bundle_expr(ybar, args.lbar)
    if args.side == "pull":
        s1, s2 = f.pic_pullback.apply(l1.cls), f.pic_pullback.apply(l2.cls)
        a1 = _parse_alignment(ybar, s1, lbar, args.a1)
        a2 = _parse_alignment(ybar, s2, lbar, args.a2)
    else:
        t1 = f.omega + f.pic_pullback.apply(l1.cls)
        t2 = f.omega + f.pic_pullback.apply(l2.cls)
        a1 = _parse_alignment(ybar, lbar, t1, args.a1)
        a2 = _parse_alignment(ybar, lbar, t2, args.a2)
    out = realign(f, a1, a2, l1, l2, args.side)
    report.add("realignment_recomposes", True)
    report.payload["alignment"] = _fmt_align(y, out)


def _domain_ref(ws, args):
    scheme = ws.scheme(args.scheme)
    twist = parse_bundle_expr(scheme, args.twist)
    return TwistedGroupRef(scheme, args.support, args.degree, twist)


def cmd_normalize(ws, args, report):
    dom = _domain_ref(ws, args)
    expr = ws.parser().parse(args.expr, dom)
    n = normalize(expr)
    report.add("normalizes", True)
    report.payload["normal_form"] = n.display()
    report.payload["domain"] = repr(n.domain)
    report.payload["codomain"] = repr(n.codomain)


def cmd_eval(ws, args, report):
    dom = _domain_ref(ws, args)
    pres = ws.presentation(args.presentation)
    key = pres.class_of(dom.twist)
    coords = [int(c) for c in args.coords.split(",")] if args.coords else []
    piece = pres.piece(args.degree, key)
    w = pres.element(
        args.degree, key, piece.from_presentation(coords), twist=dom.twist
    )
    expr = ws.parser().parse(args.expr, dom)
    out = eval_expr(expr, w)
    report.add("evaluates", True)
    report.payload["presentation"] = out.parent.name
    report.payload["degree"] = out.degree
    report.payload["class"] = ",".join(map(str, out.key))
    report.payload["coords"] = ",".join(
        map(str, out.piece_group().lift_to_presentation(out.coords))
    )
    report.payload["twist"] = format_bundle_expr(out.parent.scheme, out.twist)
    report.payload["transport_m"] = format_bundle_expr(
        out.parent.scheme, out.transport.m
    )
    report.payload["transport_u"] = out.parent.scheme.units.describe(
        out.transport.u
    )


def cmd_check_basis(ws, args, report):
    cand = ws.candidate(args.candidate)
    mode = "all-choices" if args.all_choices else "fixed-choices"
    theta = check_total_basis(cand, mode=mode)
    for (k, key), cell in sorted(theta.cells.items()):
        name = f"theta[k={k},p={','.join(map(str, key)) or '()'}]"
        detail = f"{cell.domain} -> {cell.target}"
        if not cell.is_iso:
            detail += f"; {cell.witness_kind}: {cell.witness}"
        report.add(name, cell.is_iso, detail)
    report.payload["mode"] = mode
    report.payload["members"] = len(cand.members)


def cmd_transfer_basis(ws, args, report):
    cand = ws.candidate(args.candidate)
    f = ws.morphism(args.morphism)
    via = ws.registered_maps.get(args.map) if args.map else None
    target_scope = None
    if args.target_class:
        target_scope = [
            tuple(int(b) for b in cls.split(",") if b != "")
            for cls in args.target_class
        ]
    res = transfer_basis(
        cand, f, args.mode, via=via, target_scope=target_scope
    )
    report.add("source_basis", res.source_report.passed)
    report.add("target_basis", res.target_report.passed)
    report.add("verdicts_agree", res.verdicts_agree)
    report.payload["mode"] = res.mode
    report.payload["target_presentation"] = res.candidate.presentation.name
    report.payload["target_scope"] = ";".join(
        ",".join(map(str, k)) for k in res.candidate.scope
    )
    report.payload["members"] = ";".join(
        f"{m.member_id}@deg{m.degree}" for m in res.candidate.members
    )


def cmd_check_localization(ws, args, report):
    ledger = ws.ledger(args.ledger)
    sides = tuple(s.strip() for s in args.assert_basis.split(","))
    rep = check_localization(ledger, assert_basis=sides)
    for record in rep.records:
        report.add(record.name, record.ok, record.detail)
    report.payload["derived_side"] = rep.derived_side
    report.payload["derived_verdict"] = (
        "derived-by-five-lemma: " + ("pass" if rep.derived_verdict else "fail")
    )
    report.payload["theta_verdict"] = (
        "verified-by-theta: " + ("pass" if rep.theta_report.passed else "fail")
    )
    report.payload["derived_members"] = ";".join(
        f"{m.member_id}@deg{m.degree}" for m in rep.derived_candidate.members
    )


COMMANDS = {
    "certify-smpic": cmd_certify_smpic,
    "descend": cmd_descend,
    "realign": cmd_realign,
    "normalize": cmd_normalize,
    "eval": cmd_eval,
    "check-basis": cmd_check_basis,
    "transfer-basis": cmd_transfer_basis,
    "check-localization": cmd_check_localization,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="wtc", description="total Witt group calculus"
    )
    sub = parser.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--workspace", required=True)
        p.add_argument("--json", action="store_true")

    p = sub.add_parser("certify-smpic")
    common(p)
    p.add_argument("--morphism", required=True)

    p = sub.add_parser("descend")
    common(p)
    p.add_argument("--morphism", required=True)
    p.add_argument("--l1", required=True)
    p.add_argument("--l2", required=True)
    p.add_argument("--m", required=True)
    p.add_argument("--u", default="1")
    p.add_argument("--mode", choices=["plain", "shriek"], default="plain")

    p = sub.add_parser("realign")
    common(p)
    p.add_argument("--morphism", required=True)
    p.add_argument("--side", choices=["pull", "push"], required=True)
    p.add_argument("--l1", required=True)
    p.add_argument("--l2", required=True)
    p.add_argument("--lbar", required=True)
    p.add_argument("--a1", required=True)
    p.add_argument("--a2", required=True)

    for name in ("normalize", "eval"):
        p = sub.add_parser(name)
        common(p)
        p.add_argument("--expr", required=True)
        p.add_argument("--scheme", required=True)
        p.add_argument("--support", default="total")
        p.add_argument("--degree", type=int, default=0)
        p.add_argument("--twist", default="0")
        if name == "eval":
            p.add_argument("--presentation", required=True)
            p.add_argument("--coords", required=True)

    p = sub.add_parser("check-basis")
    common(p)
    p.add_argument("--candidate", required=True)
    p.add_argument("--all-choices", action="store_true")

    p = sub.add_parser("transfer-basis")
    common(p)
    p.add_argument("--candidate", required=True)
    p.add_argument("--morphism", required=True)
    p.add_argument(
        "--mode", choices=["pullback", "affine", "push", "devissage"], required=True
    )
    p.add_argument("--map", default=None)
    p.add_argument("--target-class", action="append", default=None)

    p = sub.add_parser("check-localization")
    common(p)
    p.add_argument("--ledger", required=True)
    p.add_argument("--assert-basis", dest="assert_basis", default="z,u")

    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if argv and argv[0] not in COMMANDS and not argv[0].startswith("-"):
        sys.stderr.write(f"wtc: unknown command {argv[0]!r}\n")
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if not args.command:
        parser.print_usage(sys.stderr)
        return 2
    report = Report(args.command)
    try:
        ws = parse_workspace(args.workspace)
        COMMANDS[args.command](ws, args, report)
    except WtcError as exc:
        report.add(type(exc).__name__, False, str(exc))
        emit_report(report, as_json=args.json)
        return 1
    except FileNotFoundError as exc:
        sys.stderr.write(f"wtc: {exc}\n")
        return 2
    return emit_report(report, as_json=args.json)


if __name__ == "__main__":
    sys.exit(main())
