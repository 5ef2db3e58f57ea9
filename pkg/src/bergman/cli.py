"""Command line interface: ``bergman check|conditions|basis|normal-form|complete|ms``.

Reports are JSON on stdout (graphs may be DOT).  Exit codes: 0 success or
Bergman type, 1 checked but not Bergman type (or a refused request), 2
error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import expressions as ex
from .errors import BergmanError, ConfigurationError, UncertifiedError
from .graphs import expression_graph, to_dot, to_json
from .hecke import (HeckePresentation, check_ambiguity_instance, derive_conditions,
                    enumerate_basis, hecke_reduce, instantiate_ambiguities,
                    residual_conditions, reduced_generators, validate_presentation,
                    HeckeVerdict)
from .presentation import load_presentation, parse_word
from .words import LinComb, RewriteSystem, format_word

EXIT_OK, EXIT_NOT_BERGMAN, EXIT_ERROR = 0, 1, 2
JOBS_ENV = "BERGMAN_JOBS"


class UsageError(BergmanError):
    pass


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, ensure_ascii=False) + "\n")


def _default_jobs() -> int:
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------
# parallel ambiguity checks; workers rebuild the system from the file

_worker = {}


def _init_worker(path):
    pf = load_presentation(path)
    _worker["obj"] = pf.build()


def _check_word_amb(args):
    idx, budget, relative, trace = args
    sys_ = _worker["obj"]
    amb = sys_.enumerate_minimal_ambiguities()[idx]
    return _word_report(sys_, sys_.check_ambiguity(amb, budget, relative, trace), trace)


def _check_hecke_inst(args):
    idx, budget, trace = args
    p = _worker["obj"]
    inst = instantiate_ambiguities(p)[0][idx]
    return check_ambiguity_instance(p, inst, budget, trace).to_json(trace)


def _run(fn, path, tasks, jobs):
    if jobs <= 1 or len(tasks) <= 1:
        _init_worker(path)
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs, initializer=_init_worker, initargs=(path,)) as pool:
        return list(pool.map(fn, tasks))


def _word_report(system: RewriteSystem, rep, trace: bool) -> dict:
    a = rep.ambiguity
    d = {
        "ambiguity": a.describe(system),
        "kind": a.kind,
        "resolvable": rep.resolvable or rep.method == "relative",
        "method": rep.method,
        "residual": str(rep.residual),
    }
    if trace:
        d["resolutions"] = [str(x) for x in rep.resolutions]
        d["normal_forms"] = [str(x) for x in rep.normal_forms]
        d["traces"] = [[[format_word(w), label, pos] for w, label, pos in tr] for tr in rep.traces]
    return d


# ---------------------------------------------------------------------------
# commands

def cmd_check(args) -> int:
    t0 = time.perf_counter()
    pf = load_presentation(args.file)
    obj = pf.build()
    budget = args.budget or pf.options.get("budget", 10 ** 6)
    jobs = args.jobs or _default_jobs()
    report = {"presentation": pf.name, "kind": pf.kind}
    if isinstance(obj, RewriteSystem):
        obj.validate().raise_if_invalid()
        relative = args.relative or pf.options.get("relative", False)
        n = len(obj.enumerate_minimal_ambiguities())
        entries = _run(_check_word_amb, args.file, [(i, budget, relative, args.trace) for i in range(n)], jobs)
        ok = all(e["resolvable"] for e in entries)
        counts = {}
        for w in obj.enumerate_irreducible(pf.options.get("max_length", 4)):
            counts[str(len(w))] = counts.get(str(len(w)), 0) + 1
        report.update({
            "verdict": "Bergman type" if ok else "not Bergman type",
            "bergman_type": ok,
            "ambiguities_checked": n,
            "ambiguities": entries,
            "irreducible_counts": counts,
        })
        if not ok:
            report["witness"] = next(e["ambiguity"] for e in entries if not e["resolvable"])
    else:
        validate_presentation(obj).raise_if_invalid()
        insts, skipped = instantiate_ambiguities(obj)
        entries = _run(_check_hecke_inst, args.file, [(i, budget, args.trace) for i in range(len(insts))], jobs)
        ok = all(e["resolvable"] for e in entries)
        report.update({
            "verdict": "Bergman type" if ok else "not Bergman type",
            "bergman_type": ok,
            "instances_checked": len(insts),
            "skipped": skipped,
            "instances": entries,
        })
        if not ok:
            e = next(e for e in entries if not e["resolvable"])
            report["witness"] = f"{e['template']}[{','.join(e['coloring'])}]"
    if args.timings:
        report["timings"] = {"seconds": round(time.perf_counter() - t0, 3)}
    _emit(report)
    return EXIT_OK if ok else EXIT_NOT_BERGMAN


def cmd_conditions(args) -> int:
    pf = load_presentation(args.file)
    obj = pf.build()
    if isinstance(obj, RewriteSystem):
        obj.validate().raise_if_invalid()
        residuals = []
        for a in obj.enumerate_minimal_ambiguities():
            residuals.append(obj.check_ambiguity(a).residual.items())
        raw = residual_conditions(residuals)
        out = {"generators": [str(g) for g in raw], "reduced": [str(g) for g in reduced_generators(raw)]}
    else:
        out = derive_conditions(obj).to_json()
    _emit({"presentation": pf.name, **out})
    return EXIT_OK


def _colors(text: str | None):
    return tuple(x.strip() for x in text.split(",")) if text else None


def cmd_basis(args) -> int:
    pf = load_presentation(args.file)
    obj = pf.build()
    if isinstance(obj, RewriteSystem):
        verdict = obj.bergman_check()
        if not verdict.bergman_type and not args.force:
            w = verdict.witness.ambiguity.describe(obj)
            raise UncertifiedError(f"not Bergman type (unresolvable {w}); use --force to list irreducibles")
        max_len = args.max_len if args.max_len is not None else pf.options.get("max_length")
        words = obj.enumerate_irreducible(max_len)
        _emit({"presentation": pf.name, "certified": verdict.bergman_type, "count": len(words),
               "basis": [format_word(w) for w in words]})
        return EXIT_OK
    source = _colors(args.source)
    target = _colors(args.target) or source
    if source is None:
        raise UsageError("Hecke presentations need --source (comma-separated colors)")
    verdict = None
    if not args.force:
        from .hecke import check_presentation
        verdict = check_presentation(obj)
    basis = enumerate_basis(obj, source, target, verdict, force=args.force)
    _emit({"presentation": pf.name, "certified": bool(verdict and verdict.bergman_type),
           "source": list(source), "target": list(target), "rank": len(basis),
           "basis": [ex.format_expression(w) or "1" for w in basis]})
    return EXIT_OK


def cmd_normal_form(args) -> int:
    pf = load_presentation(args.file)
    obj = pf.build()
    budget = args.budget or pf.options.get("budget", 10 ** 6)
    if isinstance(obj, RewriteSystem):
        nf, trace = obj.normal_form(LinComb.word(parse_word(args.word, obj.alphabet)), budget)
        out = {"input": args.word, "normal_form": str(nf), "steps": len(trace)}
        if args.trace:
            out["trace"] = [[format_word(w), label, pos] for w, label, pos in trace]
    else:
        word = ex.parse_expression(args.word)
        n = max(word, default=0) + 1
        source = _colors(args.source) or (obj.colors[0],) * max(n, 1)
        trace = [] if args.trace else None
        t = hecke_reduce(obj, source, word, budget, trace=trace)
        out = {"input": args.word, "source": list(source), "normal_form": str(t), "terms": t.to_json()}
        if args.trace:
            out["trace"] = [list(step) for step in trace]
    _emit(out)
    return EXIT_OK


def cmd_complete(args) -> int:
    pf = load_presentation(args.file)
    obj = pf.build()
    if not isinstance(obj, RewriteSystem):
        raise UsageError("completion applies to word-rewrite presentations")
    obj.validate().raise_if_invalid()
    rounds = args.rounds if args.rounds is not None else pf.options.get("rounds", 20)
    done, status = obj.complete(rounds)
    out = {"presentation": pf.name, **status, "rules": [str(r) for r in done.rules]}
    try:
        out["irreducible_count"] = len(done.enumerate_irreducible(None, cap=10_000))
    except BergmanError:
        out["irreducible_count"] = None
    _emit(out)
    return EXIT_OK if status["confluent"] else EXIT_NOT_BERGMAN


# -- ms ---------------------------------------------------------------------

def _expr(text: str):
    try:
        return ex.parse_expression(text)
    except BergmanError as e:
        raise UsageError(str(e)) from None


def _n_for(*words, given=None) -> int:
    n = max([max(w, default=0) + 1 for w in words] + [2])
    if given is not None:
        if given < n:
            raise UsageError(f"expressions need at least {n} strands")
        return given
    return n


def cmd_ms(args) -> int:
    if args.ms_cmd == "graph":
        try:
            w = ex.parse_permutation(args.w)
        except (ValueError, BergmanError) as e:
            raise UsageError(f"bad permutation {args.w!r}: {e}") from None
        g = expression_graph(w, args.extra)
        if args.format == "json":
            sys.stdout.write(to_json(g))
        else:
            sys.stdout.write(to_dot(g, quotient=args.quotient, orient=args.orient))
        return EXIT_OK
    if args.ms_cmd == "sink":
        word = _expr(args.expr)
        n = _n_for(word, given=args.n)
        s, trace = ex.sink(word, n)
        _emit({"input": ex.format_expression(word), "n": n, "sink": ex.format_expression(s),
               "length": len(s),
               "trace": [[k, ex.format_expression(a), ex.format_expression(b)] for k, a, b in trace]})
        return EXIT_OK
    if args.ms_cmd == "order":
        a, b = _expr(args.a), _expr(args.b)
        n = _n_for(a, b, given=args.n)
        _emit({"a": ex.format_expression(a), "b": ex.format_expression(b), "n": n,
               "result": str(ex.leq(a, b, n))})
        return EXIT_OK
    word = _expr(args.expr)
    n = _n_for(word, given=args.n)
    try:
        out = ex.apply_packet_flip(word, n, args.pos)
    except BergmanError as e:
        raise UsageError(str(e)) from None
    res = {"before": ex.format_expression(word), "after": ex.format_expression(out), "n": n}
    if ex.is_reduced(word, n):
        j0, j1 = ex.higher_inversion_set(word, n), ex.higher_inversion_set(out, n)
        res["J_added"] = [list(t) for t in sorted(j1 - j0)]
        res["J_removed"] = [list(t) for t in sorted(j0 - j1)]
    _emit(res)
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bergman", description="Confluence checks for algebra presentations.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("check", help="check every minimal ambiguity")
    c.add_argument("file")
    c.add_argument("--trace", action="store_true", help="include reduction chains")
    c.add_argument("--budget", type=int, help="step budget per normal form")
    c.add_argument("--jobs", type=int, help=f"worker processes (default ${JOBS_ENV} or 1)")
    c.add_argument("--relative", action="store_true", help="also try the bounded relative check")
    c.add_argument("--timings", action="store_true", help="add wall-clock timings to the report")
    c.set_defaults(fn=cmd_check)

    c = sub.add_parser("conditions", help="coefficient conditions for resolvability")
    c.add_argument("file")
    c.set_defaults(fn=cmd_conditions)

    c = sub.add_parser("basis", help="list the certified basis")
    c.add_argument("file")
    c.add_argument("--source")
    c.add_argument("--target")
    c.add_argument("--max-len", type=int)
    c.add_argument("--force", action="store_true", help="list without certification")
    c.set_defaults(fn=cmd_basis)

    c = sub.add_parser("normal-form", help="reduce one word")
    c.add_argument("file")
    c.add_argument("word")
    c.add_argument("--source")
    c.add_argument("--budget", type=int)
    c.add_argument("--trace", action="store_true")
    c.set_defaults(fn=cmd_normal_form)

    c = sub.add_parser("complete", help="run the completion loop")
    c.add_argument("file")
    c.add_argument("--rounds", type=int)
    c.set_defaults(fn=cmd_complete)

    ms = sub.add_parser("ms", help="symmetric group expressions")
    mss = ms.add_subparsers(dest="ms_cmd", required=True)
    g = mss.add_parser("graph")
    g.add_argument("--w", required=True, help="permutation in one-line notation, e.g. 4321")
    g.add_argument("--extra", type=int, default=0, help="extra length (even)")
    g.add_argument("--quotient", action="store_true")
    g.add_argument("--orient", action="store_true")
    g.add_argument("--format", choices=["dot", "json"], default="dot")
    g = mss.add_parser("sink")
    g.add_argument("expr")
    g.add_argument("--n", type=int)
    g = mss.add_parser("order")
    g.add_argument("a")
    g.add_argument("b")
    g.add_argument("--n", type=int)
    g = mss.add_parser("flip")
    g.add_argument("expr")
    g.add_argument("--pos", type=int, required=True)
    g.add_argument("--n", type=int)
    ms.set_defaults(fn=cmd_ms)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_OK
    try:
        return args.fn(args)
    except UncertifiedError as e:
        sys.stderr.write(f"refused: {e}\n")
        return EXIT_NOT_BERGMAN
    except BergmanError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
