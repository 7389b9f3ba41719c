"""Analysis orchestration and report rendering.

The JSON rendering is deterministic: everything is emitted in system order
and every rational is a ``"num/den"`` string.  Wall-clock timing is only
included on request, since it would otherwise break byte-for-byte
reproducibility.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any

from . import coupling as cp
from .errors import TheoremViolation
from .io import _json_id, coupling_to_dict, model_to_dict, partition_to_dict
from .model import (
    CanonicalModel,
    direct_influence,
    is_aligned,
    is_context_free,
    is_model_for,
    minimal_influences,
)
from .partitioned import (
    Partition,
    classify_signals,
    has_no_signaling,
    signaling,
    to_partitioned,
    verify_partition,
    context_choices,
)
from .system import MeasurementSystem, format_rational, is_consistently_connected, marginal

ALL_TESTS = ("standard", "cbd", "m")
_RUNNERS = {
    "standard": cp.standard_contextuality_test,
    "cbd": cp.cbd_contextuality_test,
    "m": cp.m_contextuality_test,
}


@dataclass
class AnalysisOptions:
    tests: tuple = ALL_TESTS
    model: CanonicalModel | None = None
    partition: Partition | None = None
    point_estimate: bool = False
    timing: bool = False


@dataclass
class AnalysisReport:
    system: MeasurementSystem
    point_estimate: bool
    connected: bool
    violations: list
    minima: dict
    verdicts: dict = field(default_factory=dict)
    model_check: dict | None = None
    partition_check: dict | None = None
    timing: dict | None = None


def _reverify(system: MeasurementSystem, v: cp.ContextualityVerdict) -> None:
    if v.verdict != cp.NONCONTEXTUAL:
        return
    if v.kind == "standard":
        ok = cp.projects_to_system(v.witness, system)
    elif v.kind == "cbd":
        ok = cp.is_coupling_for(v.witness, system).ok and all(
            cp.equality_probability(v.witness, q, c, c2) == 1 - m for (q, c, c2), m in v.minima.items()
        )
    else:
        ok = (
            is_model_for(v.witness, system).ok
            and is_aligned(v.witness).ok
            and all(direct_influence(v.witness, *t) == m for t, m in v.minima.items())
        )
    if not ok:
        raise TheoremViolation(f"{v.kind} witness failed re-verification")


def check_model(model: CanonicalModel, system: MeasurementSystem, minima: dict | None = None) -> dict:
    minima = minimal_influences(system) if minima is None else minima
    fits, bad = is_model_for(model, system)
    aligned, hidden = is_aligned(model)
    rows = []
    for (q, c, c2), m in minima.items():
        d = direct_influence(model, q, c, c2)
        rows.append({"q": q, "c": c, "c2": c2, "delta": d, "minimum": m, "attains_minimum": d == m})
    return {
        "is_model_for": fits,
        "mismatched_contexts": bad,
        "context_free": is_context_free(model),
        "aligned": aligned,
        "hidden_influences": hidden,
        "direct_influences": rows,
        "attains_all_minima": all(r["attains_minimum"] for r in rows),
    }


def check_partition(system: MeasurementSystem, partition: Partition, model: CanonicalModel | None = None) -> dict:
    ok, issues = verify_partition(system, partition)
    out: dict = {"valid": ok, "violations": issues, "partition": None}
    if not ok:
        return out
    out["partition"] = partition_to_dict(partition, context_choices(system, partition))
    if model is not None:
        pm = to_partitioned(model, partition)
        out["signaling"] = [
            {"k": k, "c": c, "c2": c2, "value": signaling(pm, k, c, c2)}
            for k in partition.observers
            for c, c2 in pm.pairs(k)
        ]
        labels = classify_signals(pm)
        out["signals"] = [{"k": k, "v": v, "c": c, "c2": c2, "class": lab} for (k, v, c, c2), lab in labels.items()]
        out["no_signaling"] = has_no_signaling(pm)
        out["hidden_signals"] = "hidden" in labels.values()
    return out


def run_analysis(system: MeasurementSystem, options: AnalysisOptions | None = None) -> AnalysisReport:
    options = options or AnalysisOptions()
    clock: dict = {}
    t0 = time.perf_counter()
    connected, violations = is_consistently_connected(system)
    minima = minimal_influences(system)
    clock["connectedness"] = time.perf_counter() - t0

    report = AnalysisReport(system, options.point_estimate, connected, violations, minima)
    for name in ALL_TESTS:
        if name not in options.tests:
            continue
        t0 = time.perf_counter()
        verdict = _RUNNERS[name](system)
        _reverify(system, verdict)
        report.verdicts[name] = verdict
        clock[name] = time.perf_counter() - t0
    if options.model is not None:
        report.model_check = check_model(options.model, system, minima)
    if options.partition is not None:
        report.partition_check = check_partition(system, options.partition, options.model)
    if options.timing:
        report.timing = clock
    return report


# --- rendering -------------------------------------------------------------


def _plain(x: Any) -> Any:
    """Recursively convert rationals and tuples into JSON-ready values."""
    from fractions import Fraction

    if isinstance(x, Fraction):
        return format_rational(x)
    if isinstance(x, dict):
        return {str(_json_id(k)) if not isinstance(k, str) else k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def _witness_doc(v: cp.ContextualityVerdict, system: MeasurementSystem) -> dict | None:
    if v.witness is None:
        return None
    if v.kind == "standard":
        return {
            "type": "distribution",
            "observables": list(system.observables),
            "mass": [{"assignment": list(k), "p": format_rational(p)} for k, p in v.witness.items()],
        }
    if v.kind == "cbd":
        return {"type": "coupling", **coupling_to_dict(v.witness)}
    return {"type": "model", **model_to_dict(v.witness)}


def verdict_to_dict(v: cp.ContextualityVerdict, system: MeasurementSystem) -> dict:
    doc: dict = {"verdict": v.verdict, "variables": v.size[0], "equalities": v.size[1]}
    doc["witness"] = _witness_doc(v, system)
    doc["certificate"] = (
        None if v.certificate is None else [{"row": lab, "multiplier": format_rational(y)} for lab, y in v.certificate]
    )
    return doc


def report_to_dict(report: AnalysisReport) -> dict:
    s = report.system
    doc: dict = {
        "system": {
            "label": s.metadata,
            "observables": list(s.observables),
            "contexts": list(s.context_ids),
            "point_estimate": report.point_estimate,
        },
        "consistently_connected": {"value": report.connected, "violations": [list(t) for t in report.violations]},
        "minimal_direct_influences": [
            {"q": q, "c": c, "c2": c2, "value": format_rational(m)} for (q, c, c2), m in report.minima.items()
        ],
        "tests": {name: verdict_to_dict(v, s) for name, v in report.verdicts.items()},
    }
    if report.point_estimate:
        doc["system"]["note"] = "point-estimate verdict: frequencies from counts treated as exact"
    if report.model_check is not None:
        doc["model_check"] = _plain(report.model_check)
    if report.partition_check is not None:
        doc["partition_check"] = _plain(report.partition_check)
    if report.timing is not None:
        doc["timing_seconds"] = {k: round(v, 6) for k, v in report.timing.items()}
    return doc


def _yes(b: bool) -> str:
    return "yes" if b else "no"


def marginal_table(system: MeasurementSystem) -> list[str]:
    """Rows of ``Pr[M_q^c = v]`` with v the first declared value of each q."""
    qs = system.observables
    cells = [[str(q) for q in qs]]
    for ctx in system.contexts:
        cells.append([
            str(marginal(system, q, ctx.context_id)[system.values(q)[0]]) if q in ctx.measured else ""
            for q in qs
        ])
    width = max(len(x) for r in cells for x in r) + 2
    corner = "c \\ q"
    lab_w = max([len(str(c)) for c in system.context_ids] + [len(corner)])
    firsts = sorted({repr(system.values(q)[0]) for q in qs})
    lines = [f"Pr[M_q^c = v] for v = first declared value ({', '.join(firsts)})"]
    lines.append(corner.ljust(lab_w) + " |" + "".join(x.rjust(width) for x in cells[0]))
    lines.append("-" * len(lines[-1]))
    for cid, row in zip(system.context_ids, cells[1:]):
        lines.append(str(cid).ljust(lab_w) + " |" + "".join(x.rjust(width) for x in row))
    return lines


def report_to_text(report: AnalysisReport) -> str:
    s = report.system
    out = [f"System: {s.metadata or '(unlabelled)'}  ({len(s.observables)} observables, {len(s.contexts)} contexts)"]
    if report.point_estimate:
        out.append("Note: point-estimate verdict (frequencies from counts treated as exact)")
    out.append("")
    out.extend(marginal_table(s))
    out.append("")
    out.append(f"Consistently connected: {_yes(report.connected)}")
    for q, c, c2 in report.violations:
        out.append(f"  marginals of q={q} differ between contexts {c} and {c2}")
    out.append("Minimal direct influences (q: c, c' -> min Δ):")
    for (q, c, c2), m in report.minima.items():
        out.append(f"  q={q}: {c}, {c2} -> {m}")
    if not report.minima:
        out.append("  (no observable is measured in two contexts)")
    names = {"standard": "Standard", "cbd": "CbD", "m": "M"}
    for name, v in report.verdicts.items():
        verdict = "n/a (not consistently connected)" if v.verdict == cp.NOT_APPLICABLE else v.verdict
        extra = f"  [{v.size[0]} variables, {v.size[1]} equalities]" if v.verdict != cp.NOT_APPLICABLE else ""
        out.append(f"{names[name]}: {verdict}{extra}")
    if report.model_check is not None:
        mc = report.model_check
        out.append("")
        out.append(f"Model check: is_model_for: {_yes(mc['is_model_for'])}")
        if mc["mismatched_contexts"]:
            out.append(f"  mismatched contexts: {mc['mismatched_contexts']}")
        out.append(f"  context-free: {_yes(mc['context_free'])}")
        out.append(f"  aligned: {_yes(mc['aligned'])}")
        for q, v, c, c2 in mc["hidden_influences"]:
            out.append(f"  hidden influence: q={q}, value {v}, contexts {c} <-> {c2}")
        for r in mc["direct_influences"]:
            mark = "attains minimum" if r["attains_minimum"] else f"minimum {r['minimum']}"
            out.append(f"  Δ q={r['q']}: {r['c']}, {r['c2']} = {r['delta']} ({mark})")
        out.append(f"  attains all minima: {_yes(mc['attains_all_minima'])}")
    if report.partition_check is not None:
        pc = report.partition_check
        out.append("")
        out.append(f"Partition valid: {_yes(pc['valid'])}")
        for issue in pc["violations"]:
            out.append(f"  {issue}")
        for r in pc.get("signaling", []):
            out.append(f"  signaling to observer {r['k']}: {r['c']} <-> {r['c2']} = {r['value']}")
        for r in pc.get("signals", []):
            if r["class"] != "none":
                out.append(f"  observer {r['k']}, value {r['v']}, {r['c']} <-> {r['c2']}: {r['class']}")
        if "no_signaling" in pc:
            out.append(f"  no signaling: {_yes(pc['no_signaling'])}; hidden signals: {_yes(pc['hidden_signals'])}")
    if report.timing is not None:
        out.append("")
        out.append("Timing: " + ", ".join(f"{k} {v:.3f}s" for k, v in report.timing.items()))
    return "\n".join(out) + "\n"
