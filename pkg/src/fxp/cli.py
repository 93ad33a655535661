"""Command-line front end: ``fxp <subcommand> [options]``.

Every subcommand builds a plain report dict.  ``--json`` prints it as a
single document; otherwise it is rendered as aligned text tables.
Exit status: 0 on success, 1 when a check-style answer is negative,
2 on usage or validation errors.
"""
from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .audit import AuditError, audit_all_paths, check_anchor, check_anchor_batch
from .explain import (ExplanationError, ExplanationProblem, check_duality, enumerate_explanations,
                      feature_status, find_axp, find_cxp)
from .lab import (FixtureSpec, LabError, ReconstructionError, issue_census, find_fixture,
                  reconstruct_dt_fig1, table_code)
from .model import DecisionTree, DomainError, ModelError, read_model, save_model, write_model
from .shapley import ISSUES, ShapleyError, detect_issues, render_decimal, shapley_values


class UsageError(Exception):
    pass


def _ints(text: str, what: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated integers, got {text!r}") from None


def _fmt_set(s) -> str:
    return "{" + ",".join(str(i) for i in s) + "}"


def _fmt_point(p) -> str:
    return "(" + ",".join(str(x) for x in p) + ")"


def _fmt_path(p) -> str:
    return "<" + ",".join(str(x) for x in p) + ">"


def _table(headers, rows) -> str:
    cells = [list(map(str, headers))] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[k]) for r in cells) for k in range(len(headers))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _problem(args):
    model = read_model(args.model)
    if args.instance is None:
        raise UsageError("--instance is required")
    return ExplanationProblem.at(model, _ints(args.instance, "--instance"))


def _head(problem) -> dict:
    return {"instance": list(problem.v), "class": problem.c}


# --- subcommands ------------------------------------------------------------------

def cmd_explain(args):
    problem = _problem(args)
    report = {"command": "explain", **_head(problem)}
    if args.all:
        sets = enumerate_explanations(problem)
        report.update(axps=[list(s) for s in sets.axps], cxps=[list(s) for s in sets.cxps],
                      duality=check_duality(sets))
        return report, 0
    seed = None if args.seed is None else _ints(args.seed, "--seed")
    kind = "cxp" if args.cxp else "axp"
    xp = (find_cxp if args.cxp else find_axp)(problem, seed)
    report.update(kind=kind, explanation=list(xp))
    return report, 0


def cmd_shapley(args):
    problem = _problem(args)
    sv = shapley_values(problem)
    values = [{"feature": i, "exact": str(v), "decimal": render_decimal(v)}
              for i, v in enumerate(sv, start=1)]
    return {"command": "shapley", **_head(problem), "values": values}, 0


def cmd_status(args):
    problem = _problem(args)
    status = feature_status(problem, args.feature)
    return {"command": "status", **_head(problem), "feature": args.feature,
            "status": str(status)}, 0


def cmd_issues(args):
    problem = _problem(args)
    report = detect_issues(problem)
    features = [{"feature": i, "status": str(st), "exact": str(v), "decimal": render_decimal(v)}
                for i, (st, v) in enumerate(zip(report.statuses, report.values), start=1)]
    issues = {name: {"flag": report.flags[name],
                     "witnesses": [list(w) for w in report.witnesses.get(name, ())]}
              for name in ISSUES}
    return {"command": "issues", **_head(problem), "features": features, "issues": issues}, 0


def cmd_audit_paths(args):
    dt = read_model(args.model)
    if not isinstance(dt, DecisionTree):
        raise UsageError("audit-paths needs a decision tree model")
    rows = [{"path": list(r.path), "features": list(r.features), "axp": list(r.axp),
             "redundancy": r.redundancy, "variants": [list(v) for v in r.variants]}
            for r in audit_all_paths(dt)]
    return {"command": "audit-paths", "rows": rows}, 0


def _verdict_dict(problem, v) -> dict:
    return {**_head(problem), "set": list(v.candidate), "verdict": str(v.verdict),
            "counterexample": None if v.counterexample is None else list(v.counterexample),
            "axp": None if v.axp is None else list(v.axp)}


def cmd_check(args):
    model = read_model(args.model)
    if args.batch:
        if args.set is not None or args.instance is not None:
            raise UsageError("--batch excludes --set and --instance")
        try:
            with open(args.batch, encoding="utf-8") as fh:
                entries = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"--batch: {exc}") from None
        if not isinstance(entries, list):
            raise UsageError("--batch: expected a JSON list")
        verdicts = check_anchor_batch(model, entries)
        results = [_verdict_dict(ExplanationProblem.at(model, e["instance"]), v)
                   for e, v in zip(entries, verdicts)]
    else:
        if args.set is None:
            raise UsageError("check needs --set or --batch")
        problem = _problem(args)
        results = [_verdict_dict(problem, check_anchor(problem, _ints(args.set, "--set")))]
    code = 1 if any(r["verdict"] == "Incorrect" for r in results) else 0
    return {"command": "check", "results": results}, code


def cmd_duality(args):
    problem = _problem(args)
    sets = enumerate_explanations(problem)
    ok = check_duality(sets)
    same = sets.axp_features == sets.cxp_features
    return {"command": "duality", **_head(problem), "axps": [list(s) for s in sets.axps],
            "cxps": [list(s) for s in sets.cxps], "duality": ok,
            "relevant_equal": same}, 0 if ok and same else 1


def cmd_census(args):
    issues = ISSUES if args.issues is None else tuple(x.strip() for x in args.issues.split(","))
    rep = issue_census(args.features, issues)
    return {"command": "census", "features": rep.m, "functions": rep.functions,
            "total": rep.total, "counts": rep.counts}, 0


def cmd_find_fixture(args):
    try:
        with open(args.spec, encoding="utf-8") as fh:
            spec = FixtureSpec.from_dict(json.load(fh))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"--spec: {exc}") from None
    matches = [{"code": table_code(tt), "rows": list(tt.rows)} for tt in find_fixture(spec)]
    return {"command": "find-fixture", "spec": spec.to_dict(), "count": len(matches),
            "matches": matches}, 0 if matches else 1


def cmd_reconstruct_dt(args):
    dt = reconstruct_dt_fig1(strict=args.strict)
    if args.output:
        write_model(dt, args.output)
    return {"command": "reconstruct-dt", "model": save_model(dt)}, 0


# --- human rendering --------------------------------------------------------------

def _render_head(r) -> str:
    return f"instance {_fmt_point(r['instance'])}  class {r['class']}"


def render(report: dict) -> str:
    cmd = report["command"]
    if cmd == "explain":
        if "axps" in report:
            return "\n".join([
                _render_head(report),
                "AXps: " + " ".join(_fmt_set(s) for s in report["axps"]),
                "CXps: " + " ".join(_fmt_set(s) for s in report["cxps"]),
                f"duality: {'holds' if report['duality'] else 'FAILS'}"])
        label = {"axp": "AXp", "cxp": "CXp"}[report["kind"]]
        return f"{_render_head(report)}\n{label}: {_fmt_set(report['explanation'])}"
    if cmd == "shapley":
        rows = [(v["feature"], v["exact"], v["decimal"]) for v in report["values"]]
        return _render_head(report) + "\n" + _table(("Feature", "Sv (exact)", "Sv"), rows)
    if cmd == "status":
        return f"{_render_head(report)}\nfeature {report['feature']}: {report['status']}"
    if cmd == "issues":
        rows = [(f["feature"], f["status"], f["exact"], f["decimal"]) for f in report["features"]]
        issues = [(name, "yes" if i["flag"] else "no",
                   " ".join(_fmt_point(w) for w in i["witnesses"]))
                  for name, i in report["issues"].items()]
        return "\n".join([_render_head(report),
                          _table(("Feature", "Status", "Sv (exact)", "Sv"), rows), "",
                          _table(("Issue", "Flag", "Witnesses"), issues)])
    if cmd == "audit-paths":
        rows = [(_fmt_path(r["path"]), _fmt_set(r["features"]), _fmt_set(r["axp"]),
                 f"{r['redundancy']}%") for r in report["rows"]]
        text = _table(("Path", "Features", "AXp", "%Red"), rows)
        for r in report["rows"]:
            if r["variants"]:
                text += (f"\nwarning: path {_fmt_path(r['path'])} AXp depends on the instance: "
                         + " ".join(_fmt_set(v) for v in r["variants"]))
        return text
    if cmd == "check":
        rows = []
        for r in report["results"]:
            detail = ""
            if r["counterexample"] is not None:
                detail = "counterexample " + _fmt_point(r["counterexample"])
            elif r["verdict"] == "Redundant":
                detail = "contains AXp " + _fmt_set(r["axp"])
            rows.append((_fmt_point(r["instance"]), r["class"], _fmt_set(r["set"]),
                         r["verdict"], detail))
        return _table(("Instance", "Class", "Set", "Verdict", "Detail"), rows)
    if cmd == "duality":
        return "\n".join([
            _render_head(report),
            "AXps: " + " ".join(_fmt_set(s) for s in report["axps"]),
            "CXps: " + " ".join(_fmt_set(s) for s in report["cxps"]),
            f"MHS duality: {'holds' if report['duality'] else 'FAILS'}",
            f"relevant features agree: {'yes' if report['relevant_equal'] else 'NO'}"])
    if cmd == "census":
        rows = [(name, n, f"{100 * n / report['total']:.2f}%") for name, n in report["counts"].items()]
        return (f"features {report['features']}: {report['functions']} functions, "
                f"{report['total']} (function, instance) pairs\n"
                + _table(("Issue", "Pairs", "Share"), rows))
    if cmd == "find-fixture":
        rows = [(m["code"], "".join(str(x) for x in m["rows"])) for m in report["matches"]]
        return (f"{report['count']} matching function(s)\n"
                + (_table(("Code", "Rows"), rows) if rows else ""))
    if cmd == "reconstruct-dt":
        doc = report["model"]
        rows = []
        for n in doc["nodes"]:
            if "leaf" in n:
                rows.append((n["id"], "", f"class {n['leaf']}"))
            else:
                edges = ", ".join(f"x{n['test']} in {_fmt_set(e['values'])} -> {e['to']}"
                                  for e in n["edges"])
                rows.append((n["id"], f"x{n['test']}", edges))
        return f"decision tree, root {doc['root']}\n" + _table(("Node", "Test", "Edges / class"), rows)
    raise ValueError(f"no renderer for {cmd!r}")


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False)


# --- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fxp", description="Formal explanations for small discrete classifiers.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help, model=True, instance=True):
        p = sub.add_parser(name, help=help)
        if model:
            p.add_argument("--model", required=True, help="model JSON document")
        if instance:
            p.add_argument("--instance", help="comma-separated feature values, e.g. 0,0,1,1")
        p.add_argument("--json", action="store_true", help="emit a JSON document")
        p.set_defaults(func=func)
        return p

    p = add("explain", cmd_explain, "one AXp (default), one CXp, or all explanations")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--cxp", action="store_true", help="compute a CXp instead of an AXp")
    g.add_argument("--all", action="store_true", help="enumerate all AXps and CXps")
    p.add_argument("--seed", help="comma-separated 1-based features to shrink from")

    add("shapley", cmd_shapley, "exact Shapley values")
    p = add("status", cmd_status, "necessity / relevancy of one feature")
    p.add_argument("--feature", type=int, required=True)
    add("issues", cmd_issues, "Shapley-vs-relevancy issues I1..I5")
    add("audit-paths", cmd_audit_paths, "path redundancy of every decision-tree path", instance=False)
    p = add("check", cmd_check, "sufficiency verdict for a candidate feature set")
    p.add_argument("--set", help="comma-separated 1-based features")
    p.add_argument("--batch", help="JSON list of {instance, set} entries")
    add("duality", cmd_duality, "verify AXp/CXp hitting-set duality")
    p = add("census", cmd_census, "issue counts over all boolean functions", model=False, instance=False)
    p.add_argument("--features", type=int, required=True)
    p.add_argument("--issues", help="comma-separated subset of I1..I5")
    p = add("find-fixture", cmd_find_fixture, "search boolean functions meeting a spec",
            model=False, instance=False)
    p.add_argument("--spec", required=True)
    p = add("reconstruct-dt", cmd_reconstruct_dt, "rebuild the running-example decision tree",
            model=False, instance=False)
    p.add_argument("--output", help="also write the model document here")
    p.add_argument("--strict", action="store_true", help="also demand class 1 for (0,1,1,0,0)")
    return parser


ERRORS = (UsageError, ModelError, DomainError, ExplanationError, ShapleyError, AuditError,
          LabError, ReconstructionError, OSError)


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report, code = args.func(args)
    except ERRORS as exc:
        print(f"fxp: error: {exc}", file=stderr)
        return 2
    print(dumps(report) if args.json else render(report), file=stdout)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
