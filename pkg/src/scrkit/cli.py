"""Command-line front end.

Exit codes: 0 success or "true", 1 a semantic negative (not valid, no
embedding, ...), 2 malformed input or usage, 3 search budget exceeded.
Output is JSON by default; ``--pretty`` switches to a human-readable report.
``gen-rule`` and ``gen-formula`` print formula text unless ``--json`` is given.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Callable, Sequence

from . import formula as fm
from .algebra import DEFAULT_VALUATION_BUDGET, FiniteModalAlgebra
from .axiomatize import (DEFAULT_ENUMERATION_BUDGET, BaseLogic, refutation_patterns,
                         verify_equivalence)
from .errors import BudgetExceeded, FormulaSyntaxError, ScrError
from .filtration import filtrate, verify_definable_filtration
from .frame import dual_frame
from .io import load_algebra, read_json, structure_from_json
from .morphism import DEFAULT_SEARCH_BUDGET, find_si_image_embedding, find_stable_embedding
from .rules import CanonicalSpec, Kind, Rule, render

OK, FALSE, USAGE, BUDGET = 0, 1, 2, 3


class _Usage(Exception):
    pass


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(message)


# --- helpers ----------------------------------------------------------------

def _element(A: FiniteModalAlgebra, text: str) -> int:
    names = [t.strip() for t in text.split(",") if t.strip()]
    return A.element_from_labels(names)


def _domain(A: FiniteModalAlgebra, items: Sequence[str] | None) -> frozenset[int]:
    return frozenset(_element(A, t) for t in items or ())


def _labels(A: FiniteModalAlgebra, a: int) -> list[str]:
    return A.element_labels(a)


def _domain_json(A: FiniteModalAlgebra, domain) -> list[list[str]]:
    return sorted((_labels(A, d) for d in domain), key=lambda s: (len(s), s))


def _valuation(A: FiniteModalAlgebra, items: Sequence[str] | None) -> dict[str, int]:
    """``p=a,b`` assigns the set of atoms {a, b} to ``p``; ``p=`` assigns 0."""
    out = {}
    for item in items or ():
        name, sep, rest = item.partition("=")
        name = name.strip()
        if not sep or not fm.is_identifier(name):
            raise _Usage(f"bad valuation entry {item!r}; expected NAME=label,label")
        out[name] = _element(A, rest)
    return out


def _valuation_json(A: FiniteModalAlgebra, V: dict[str, int]) -> dict[str, list[str]]:
    return {p: _labels(A, v) for p, v in sorted(V.items())}


def _structure(args, name: str = "frame") -> FiniteModalAlgebra:
    src = getattr(args, name)
    if src is None:
        raise _Usage(f"--{name} is required")
    return load_algebra(src)


# --- subcommands ------------------------------------------------------------

def cmd_parse(args):
    phi = fm.parse(args.formula)
    data = {"formula": fm.render(phi), "variables": fm.variables([phi]), "depth": fm.depth(phi),
            "subformulas": [fm.render(f) for f in fm.subformula_closure([phi])]}
    return OK, data, fm.render(phi)


def cmd_check(args):
    A = _structure(args)
    rule = Rule.parse(args.formula)
    data: dict = {"input": str(rule) if rule.premises else str(rule.conclusions[0])}
    lines = []
    code = OK
    if args.m is not None:
        pre = A.is_pretransitive(args.m)
        data["pretransitive"] = {"m": args.m, "holds": pre}
        lines.append(f"validates dia^{args.m + 1} p -> dia p: {'yes' if pre else 'no'}")
        if not pre:
            code = FALSE
    cv = A.rule_countervaluation(rule.premises, rule.conclusions, args.budget_valuations)
    data["valid"] = cv is None
    if cv is None:
        data["detail"] = "exhaustive search completed"
        lines.append("valid (exhaustive search completed)")
    else:
        code = FALSE
        data["countervaluation"] = _valuation_json(A, cv)
        lines.append("not valid; countervaluation:")
        lines += [f"  {p} = {A.format_element(v)}" for p, v in sorted(cv.items())]
    return code, data, "\n".join(lines)


def cmd_dualize(args):
    src = read_json(args.frame)
    A = structure_from_json(src)
    if "points" in src:
        data = A.to_json()
    else:
        data = dual_frame(A).to_json()
    return OK, data, json.dumps(data, indent=2)


def cmd_filtrate(args):
    A = _structure(args)
    V = _valuation(A, args.val)
    theta = fm.subformula_closure(fm.parse(t) for t in args.formula)
    theta_prime = [fm.parse(t) for t in args.theta_prime or ()]
    if args.method == "gabbay" and args.m is None:
        raise _Usage("--method gabbay needs --m")
    m = args.m or 1
    res = filtrate(args.method, A, V, theta, theta_prime or None, m)
    level = m if args.method == "gabbay" else 1
    report = verify_definable_filtration(A, V, res.theta, res.theta_prime, res, level=level,
                                         pretransitive=m if args.method == "gabbay" else None)
    Ap = res.algebra
    data = {
        "method": args.method,
        "frame": dual_frame(Ap).to_json(),
        "cells": {Ap.labels[i]: _labels(A, c) for i, c in enumerate(res.cells)},
        "domain": _domain_json(Ap, res.domain),
        "valuation": _valuation_json(Ap, res.new_valuation),
        "verified": report.ok,
        "checked": report.checked,
        "failures": [list(f) for f in report.failures],
    }
    lines = [f"{args.method} filtration through {len(res.theta_prime)} formulas, {len(res.cells)} cells"]
    for i, c in enumerate(res.cells):
        lines.append(f"  {Ap.labels[i]} = {A.format_element(c)}  dia' = {Ap.format_element(Ap.diamond_of_atom[i])}")
    lines.append("D = " + ", ".join(Ap.format_element(d) for d in sorted(res.domain)))
    lines.append("verified" if report.ok else f"verification failed:\n{report}")
    return (OK if report.ok else FALSE), data, "\n".join(lines)


def _spec(args, A, kind: Kind) -> CanonicalSpec:
    domain = _domain(A, args.domain)
    return CanonicalSpec(A, domain, kind, args.m or 1)


def cmd_gen_rule(args):
    A = _structure(args)
    rule = render(_spec(args, A, Kind.RULE))
    return OK, rule.to_json(), str(rule)


def cmd_gen_formula(args):
    A = _structure(args)
    if args.m is None:
        raise _Usage("gen-formula needs --m")
    phi = render(_spec(args, A, Kind.GAMMA_PLUS if args.plus else Kind.GAMMA))
    data = {"premises": [], "conclusions": [fm.render(phi)]}
    return OK, data, fm.render(phi)


def _embedding_lines(w) -> list[str]:
    return [f"  {y} -> {x}" for y, x in w.to_json()["surjection"].items()]


def cmd_embed(args):
    A = load_algebra(args.source)
    B = load_algebra(args.target)
    domain = _domain(A, args.domain)
    w = find_stable_embedding(A, B, domain, args.level, args.budget)
    level_text = "CDC" if args.level == 1 else (f"{args.level}-CDC" if args.level else "no CDC requirement")
    if w is None:
        msg = f"no stable surjection with {level_text}" if args.level else "no stable surjection"
        data = {"embeds": False, "detail": msg, "search": "exhaustive search completed"}
        return FALSE, data, msg + " (exhaustive search completed)"
    data = {"embeds": True, "witness": w.to_json()}
    lines = [f"stable embedding with {level_text}; dual surjection:"] + _embedding_lines(w)
    return OK, data, "\n".join(lines)


def cmd_refute(args):
    A = load_algebra(args.source)
    B = _structure(args)
    kind = Kind(args.kind)
    spec = _spec(args, A, kind)
    data: dict = {"kind": kind.value}
    if kind is Kind.RULE:
        w = find_stable_embedding(A, B, spec.domain, 1, args.budget)
        quotient = None
    else:
        if not B.is_pretransitive(spec.m):
            raise _Usage(f"the tested structure does not validate dia^{spec.m + 1} p -> dia p")
        hit = find_si_image_embedding(A, spec.domain, B, spec.level, args.budget)
        w, quotient = (hit.embedding, hit.quotient) if hit else (None, None)
    if w is None:
        data.update(refutes=False, detail="exhaustive search completed")
        return FALSE, data, f"does not refute the {kind.value} (exhaustive search completed)"
    data["refutes"] = True
    data["witness"] = w.to_json()
    lines = [f"refutes the {kind.value}"]
    if quotient is not None:
        data["image_generator"] = _labels(B, quotient.generator)
        data["image_frame"] = dual_frame(quotient.algebra).to_json()
        lines.append(f"s.i. image: up-set {B.format_element(quotient.generator)}")
    lines.append("dual surjection:")
    lines += _embedding_lines(w)
    return OK, data, "\n".join(lines)


def _target(args):
    text = args.target
    return Rule.parse(text) if "/" in text else fm.parse(text)


def _pattern(args):
    base = BaseLogic.parse(args.base)
    kind = Kind(args.kind) if args.kind else None
    return base, refutation_patterns(_target(args), base, args.bound, kind, args.enumeration_budget)


def cmd_axiomatize(args):
    base, pat = _pattern(args)
    data = pat.to_json()
    lines = [f"{len(pat)} {pat.kind.value}s over {base} (atom bound {pat.atom_bound})"]
    for i, js in enumerate(data["members"]):
        lines.append(f"[{i}] frame {json.dumps(js['frame'])}  D = {js['domain']}")
        body = js[pat.kind.value]
        lines.append("    " + (f"{', '.join(body['premises'])} / {', '.join(body['conclusions'])}"
                               if isinstance(body, dict) else body))
    return OK, data, "\n".join(lines)


def cmd_verify(args):
    base, pat = _pattern(args)
    rep = verify_equivalence(_target(args), pat, base, args.test_bound, args.budget, args.enumeration_budget)
    data = {"members": len(pat), "test_bound": args.test_bound, **rep.to_json()}
    if rep.refuted_member is not None:
        data["refuted_member"] = rep.refuted_member
    text = f"equivalent on {rep.checked} test algebras ({rep.detail})" if rep.ok else \
        f"not equivalent: {rep.detail}\nwitness frame {json.dumps(data['witness'])}"
    return (OK if rep.ok else FALSE), data, text


# --- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _ArgParser(add_help=False)
    out = common.add_mutually_exclusive_group()
    out.add_argument("--json", action="store_true", help="JSON output (default except gen-rule/gen-formula)")
    out.add_argument("--pretty", action="store_true", help="human-readable output")
    common.add_argument("--budget", type=int, default=DEFAULT_SEARCH_BUDGET,
                        help="cap on embedding-search steps")
    common.add_argument("--valuation-budget", dest="budget_valuations", type=int,
                        default=DEFAULT_VALUATION_BUDGET, help="cap on valuations examined by check")
    common.add_argument("--enumeration-budget", type=int, default=DEFAULT_ENUMERATION_BUDGET,
                        help="cap on frame candidates enumerated by axiomatize/verify")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="accepted for compatibility; searches run on one thread")

    p = _ArgParser(prog="scrkit", description="Stable canonical rules and formulas over finite modal algebras.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_ArgParser)

    def add(name: str, fn: Callable, help: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, parents=[common], help=help)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("parse", cmd_parse, "parse and normalize a formula")
    sp.add_argument("formula")

    sp = add("check", cmd_check, "decide validity of a formula or rule on a frame/algebra")
    sp.add_argument("--frame", required=True, help="frame or algebra JSON (file or inline)")
    sp.add_argument("--m", type=int, help="also require dia^(m+1) p -> dia p")
    sp.add_argument("formula", help="formula, or rule 'g1, g2 / d1, d2'")

    sp = add("dualize", cmd_dualize, "frame JSON <-> algebra JSON")
    sp.add_argument("--frame", required=True, help="frame or algebra JSON")

    sp = add("filtrate", cmd_filtrate, "filtrate through Sub(formulas)")
    sp.add_argument("--frame", required=True)
    sp.add_argument("--method", choices=["least", "greatest", "lemmon", "gabbay"], default="least")
    sp.add_argument("--val", action="append", metavar="p=a,b", help="valuation entry (repeatable)")
    sp.add_argument("--theta-prime", action="append", metavar="FORMULA",
                    help="extra formulas for theta' (least/greatest/lemmon)")
    sp.add_argument("--m", type=int, help="pretransitivity parameter for gabbay")
    sp.add_argument("formula", nargs="+")

    for name, fn, hlp in (("gen-rule", cmd_gen_rule, "print the stable canonical rule"),
                          ("gen-formula", cmd_gen_formula, "print an m-stable canonical formula")):
        sp = add(name, fn, hlp)
        sp.add_argument("--frame", required=True)
        sp.add_argument("--domain", action="append", metavar="a,b", help="closed-domain element (repeatable)")
        sp.add_argument("--m", type=int)
        if name == "gen-formula":
            sp.add_argument("--plus", action="store_true", help="the m-CDC variant gamma+")

    sp = add("embed", cmd_embed, "search a stable embedding with CDC")
    sp.add_argument("--from", dest="source", required=True, help="embedded structure A")
    sp.add_argument("--to", dest="target", required=True, help="host structure B")
    sp.add_argument("--domain", action="append", metavar="a,b")
    sp.add_argument("--level", type=int, default=1, help="CDC depth; 0 = plain stable embedding")

    sp = add("refute", cmd_refute, "does a structure refute rho(A, D) or gamma(A, D)?")
    sp.add_argument("--frame", required=True, help="tested structure B")
    sp.add_argument("--from", dest="source", required=True, help="structure A of the rule/formula")
    sp.add_argument("--domain", action="append", metavar="a,b")
    sp.add_argument("--kind", choices=[k.value for k in Kind], default="rule")
    sp.add_argument("--m", type=int)

    for name, fn, hlp in (("axiomatize", cmd_axiomatize, "bounded refutation pattern of a target"),
                          ("verify", cmd_verify, "check a pattern against its target")):
        sp = add(name, fn, hlp)
        sp.add_argument("--base", default="k", help="k, k4 or k4m1:<m>")
        sp.add_argument("--bound", type=int, default=3, help="atom bound of refuting algebras")
        sp.add_argument("--kind", choices=[k.value for k in Kind])
        if name == "verify":
            sp.add_argument("--test-bound", type=int, default=3)
        sp.add_argument("target", help="formula or rule")
    return p


def _emit(args, data, text, stream) -> None:
    textual = args.command in ("gen-rule", "gen-formula")
    if args.pretty or (textual and not args.json):
        print(text, file=stream)
    else:
        print(json.dumps(data, sort_keys=True), file=stream)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _Usage as exc:
        print(f"scrkit: {exc}", file=sys.stderr)
        return USAGE
    try:
        code, data, text = args.fn(args)
    except BudgetExceeded as exc:
        _emit(args, {"error": "budget", "message": str(exc)}, f"budget exceeded: {exc}", sys.stdout)
        return BUDGET
    except FormulaSyntaxError as exc:
        _emit(args, {"error": "syntax", "message": str(exc), "column": exc.column},
              f"syntax error: {exc}", sys.stderr)
        return USAGE
    except (_Usage, ScrError, ValueError, OSError) as exc:
        _emit(args, {"error": "input", "message": str(exc)}, f"error: {exc}", sys.stderr)
        return USAGE
    _emit(args, data, text, sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
