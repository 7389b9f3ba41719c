"""Command-line front end.

Exit codes: 0 when the analysis ran (the verdict is in the report), 1 on
input errors, 2 when a feasibility problem exceeds the variable budget
(``CTXLAB_MAX_VARS``).
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import fixtures
from .coupling import equality_probability, is_coupling_for
from .errors import CapacityError, InputError, TheoremViolation
from .io import (
    counts_from_dict,
    coupling_from_dict,
    dumps,
    load_json,
    model_from_dict,
    model_to_dict,
    partition_from_dict,
    partition_to_dict,
    system_from_dict,
    system_to_dict,
)
from .model import minimal_influences
from .report import (
    ALL_TESTS,
    AnalysisOptions,
    _plain,
    check_model,
    check_partition,
    report_to_dict,
    report_to_text,
    run_analysis,
)
from .system import format_rational, validate

EXIT_OK, EXIT_INPUT, EXIT_CAPACITY = 0, 1, 2


def _add_input(p: argparse.ArgumentParser, many: bool = False) -> None:
    g = p.add_argument_group("input (exactly one kind)")
    if many:
        g.add_argument("systems", nargs="*", metavar="SYSTEM.json", help="system files")
    g.add_argument("--system", action="append", default=[], metavar="FILE", help="system JSON file")
    g.add_argument("--fixture", choices=sorted(fixtures.SYSTEMS), help="built-in system")
    g.add_argument("--counts", metavar="FILE", help="per-context counts JSON (frequencies treated as exact)")


def _add_format(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("text", "json"), default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctxlab", description="Exact contextuality analysis of finite measurement systems.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a system file for invariant violations")
    _add_input(p)
    _add_format(p)

    p = sub.add_parser("analyze", help="run consistency, minimal-influence and contextuality tests")
    _add_input(p, many=True)
    _add_format(p)
    p.add_argument("--tests", default=",".join(ALL_TESTS), help="comma list from: standard,cbd,m")
    p.add_argument("--verify-model", metavar="MODEL", help="model JSON file or built-in model name")
    p.add_argument("--partition", metavar="PARTITION", help="partition JSON file or built-in partition name")
    p.add_argument("--timing", action="store_true", help="include wall-clock timings")
    p.add_argument("--jobs", type=int, default=1, help="parallel workers across input files")

    p = sub.add_parser("minima", help="minimal direct influence for every (q, c, c')")
    _add_input(p)
    _add_format(p)

    p = sub.add_parser("verify-model", help="check a canonical model against a system")
    _add_input(p)
    _add_format(p)
    p.add_argument("--model", required=True, metavar="MODEL", help="model JSON file or built-in model name")

    p = sub.add_parser("verify-coupling", help="check a coupling against a system")
    _add_input(p)
    _add_format(p)
    p.add_argument("--coupling", required=True, metavar="FILE")

    p = sub.add_parser("partition-check", help="verify a partition; with --model also report signaling")
    _add_input(p)
    _add_format(p)
    p.add_argument("--partition", required=True, metavar="PARTITION")
    p.add_argument("--model", metavar="MODEL")

    p = sub.add_parser("fixtures", help="list or dump built-in fixtures")
    fx = p.add_subparsers(dest="action", required=True)
    fx.add_parser("list")
    d = fx.add_parser("dump")
    d.add_argument("name")
    return parser


# --- loading -----------------------------------------------------------------


def _load_one(path=None, fixture=None, counts=None):
    """Return ``(system, point_estimate)``."""
    if fixture:
        return fixtures.SYSTEMS[fixture](), False
    if counts:
        return counts_from_dict(load_json(counts)), True
    return system_from_dict(load_json(path)), False


def _inputs(args) -> list[tuple]:
    files = list(getattr(args, "systems", []) or []) + list(args.system)
    kinds = bool(files) + bool(args.fixture) + bool(args.counts)
    if kinds != 1:
        raise InputError("give exactly one of: system file(s), --fixture, --counts")
    if args.fixture:
        return [(None, args.fixture, None)]
    if args.counts:
        return [(None, None, args.counts)]
    return [(f, None, None) for f in files]


def _checked(system):
    problems = validate(system)
    if problems:
        raise InputError("invalid system:\n  " + "\n  ".join(map(str, problems)))
    return system


def _load_model(ref: str):
    if ref in fixtures.MODELS and not Path(ref).exists():
        return fixtures.MODELS[ref]()
    return model_from_dict(load_json(ref))


def _load_partition(ref: str):
    if ref in fixtures.PARTITIONS and not Path(ref).exists():
        return fixtures.PARTITIONS[ref]()
    return partition_from_dict(load_json(ref))


def _emit(doc: dict, text: str, fmt: str) -> None:
    sys.stdout.write(dumps(doc) if fmt == "json" else text)


# --- commands ------------------------------------------------------------------


def _analyze_one(job):
    (path, fixture, counts), opts_kw, fmt = job
    system, point = _load_one(path, fixture, counts)
    _checked(system)
    opts = AnalysisOptions(point_estimate=point, **opts_kw)
    report = run_analysis(system, opts)
    return report_to_dict(report) if fmt == "json" else report_to_text(report)


def cmd_analyze(args) -> int:
    tests = tuple(t.strip() for t in args.tests.split(",") if t.strip())
    unknown = set(tests) - set(ALL_TESTS)
    if unknown:
        raise InputError(f"unknown tests: {sorted(unknown)}")
    opts_kw = {"tests": tests, "timing": args.timing}
    if args.verify_model:
        opts_kw["model"] = _load_model(args.verify_model)
    if args.partition:
        opts_kw["partition"] = _load_partition(args.partition)
    jobs = [(inp, opts_kw, args.format) for inp in _inputs(args)]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_analyze_one, jobs))
    else:
        results = [_analyze_one(j) for j in jobs]
    if args.format == "json":
        sys.stdout.write(dumps(results[0] if len(results) == 1 else results))
    else:
        sys.stdout.write("\n".join(results))
    return EXIT_OK


def cmd_validate(args) -> int:
    rc = EXIT_OK
    docs, texts = [], []
    for inp in _inputs(args):
        system, _ = _load_one(*inp)
        problems = validate(system)
        label = inp[0] or inp[1] or inp[2]
        docs.append({"input": label, "valid": not problems, "violations": [str(v) for v in problems]})
        texts.append(f"{label}: " + ("valid" if not problems else "invalid\n  " + "\n  ".join(map(str, problems))))
        if problems:
            rc = EXIT_INPUT
    _emit(docs[0] if len(docs) == 1 else docs, "\n".join(texts) + "\n", args.format)
    return rc


def _single(args):
    inputs = _inputs(args)
    if len(inputs) != 1:
        raise InputError("this command takes a single system")
    system, _ = _load_one(*inputs[0])
    return _checked(system)


def cmd_minima(args) -> int:
    system = _single(args)
    minima = minimal_influences(system)
    doc = [{"q": q, "c": c, "c2": c2, "value": format_rational(m)} for (q, c, c2), m in minima.items()]
    text = "".join(f"q={q}: {c}, {c2} -> {m}\n" for (q, c, c2), m in minima.items()) or "(no observable is measured in two contexts)\n"
    _emit(doc, text, args.format)
    return EXIT_OK


def cmd_verify_model(args) -> int:
    system = _single(args)
    mc = check_model(_load_model(args.model), system)
    lines = [
        f"is_model_for: {mc['is_model_for']}",
        f"context_free: {mc['context_free']}",
        f"aligned: {mc['aligned']}",
    ]
    lines += [f"hidden influence: q={q}, value {v}, contexts {c} <-> {c2}" for q, v, c, c2 in mc["hidden_influences"]]
    lines += [
        f"Δ q={r['q']}: {r['c']}, {r['c2']} = {r['delta']} (minimum {r['minimum']})" for r in mc["direct_influences"]
    ]
    lines.append(f"attains_all_minima: {mc['attains_all_minima']}")
    _emit(_plain(mc), "\n".join(lines) + "\n", args.format)
    return EXIT_OK


def cmd_verify_coupling(args) -> int:
    system = _single(args)
    coupling = coupling_from_dict(load_json(args.coupling), system)
    ok, bad = is_coupling_for(coupling, system)
    rows = []
    minima = minimal_influences(system)
    for (q, c, c2), m in minima.items():
        eq = equality_probability(coupling, q, c, c2)
        rows.append({"q": q, "c": c, "c2": c2, "equal": eq, "target": 1 - m, "multimaximal": eq == 1 - m})
    doc = {
        "is_coupling_for": ok,
        "mismatched_contexts": bad,
        "equalities": rows,
        "multimaximal": ok and all(r["multimaximal"] for r in rows),
    }
    lines = [f"is_coupling_for: {ok}"] + [
        f"Pr[T_{r['q']}^{r['c']} = T_{r['q']}^{r['c2']}] = {r['equal']} (max {r['target']})" for r in rows
    ]
    lines.append(f"multimaximal: {doc['multimaximal']}")
    _emit(_plain(doc), "\n".join(lines) + "\n", args.format)
    return EXIT_OK


def cmd_partition_check(args) -> int:
    system = _single(args)
    model = _load_model(args.model) if args.model else None
    pc = check_partition(system, _load_partition(args.partition), model)
    lines = [f"valid: {pc['valid']}"] + [f"  {v}" for v in pc["violations"]]
    for r in pc.get("signaling", []):
        lines.append(f"signaling to observer {r['k']}: {r['c']} <-> {r['c2']} = {r['value']}")
    for r in pc.get("signals", []):
        if r["class"] != "none":
            lines.append(f"observer {r['k']}, value {r['v']}, {r['c']} <-> {r['c2']}: {r['class']}")
    if "no_signaling" in pc:
        lines.append(f"no_signaling: {pc['no_signaling']}; hidden_signals: {pc['hidden_signals']}")
    _emit(_plain(pc), "\n".join(lines) + "\n", args.format)
    return EXIT_OK


def cmd_fixtures(args) -> int:
    if args.action == "list":
        for group, table in (("system", fixtures.SYSTEMS), ("model", fixtures.MODELS), ("partition", fixtures.PARTITIONS)):
            for name, fn in table.items():
                doc = (fn.__doc__ or "").strip().splitlines()
                print(f"{name:<18} {group:<10} {doc[0] if doc else ''}")
        return EXIT_OK
    name = args.name
    if name in fixtures.SYSTEMS:
        doc = system_to_dict(fixtures.SYSTEMS[name]())
    elif name in fixtures.MODELS:
        doc = model_to_dict(fixtures.MODELS[name]())
    elif name in fixtures.PARTITIONS:
        doc = partition_to_dict(fixtures.PARTITIONS[name]())
    else:
        raise InputError(f"unknown fixture {name!r}")
    sys.stdout.write(dumps(doc))
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "analyze": cmd_analyze,
    "minima": cmd_minima,
    "verify-model": cmd_verify_model,
    "verify-coupling": cmd_verify_coupling,
    "partition-check": cmd_partition_check,
    "fixtures": cmd_fixtures,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except TheoremViolation as exc:
        print(f"internal error (please report): {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
