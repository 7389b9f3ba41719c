"""JSON file formats.

Probabilities are always strings: ``"num/den"`` on output, ``"num/den"`` or a
finite decimal such as ``"0.5"`` on input.  JSON object keys are strings, so
ids used as keys (state ids in a model map, ids in a partition's
``context_map``) are matched by their ``str`` form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

from .coupling import Coupling
from .errors import InputError
from .model import CanonicalModel
from .partitioned import Partition
from .system import ContextDistribution, MeasurementSystem, OutcomeSpace, format_rational, to_rational


def _json_id(x):
    """Ids that JSON cannot carry natively (tuples) become their repr."""
    if isinstance(x, (int, str)) and not isinstance(x, bool):
        return x
    return str(x)


def _require(obj: Mapping, key: str, where: str):
    try:
        return obj[key]
    except (KeyError, TypeError):
        raise InputError(f"{where}: missing field {key!r}") from None


def load_json(path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc


# --- systems ---------------------------------------------------------------


def system_from_dict(doc: Mapping) -> MeasurementSystem:
    spaces = []
    for i, ob in enumerate(_require(doc, "observables", "system")):
        spaces.append(OutcomeSpace(_require(ob, "id", f"observables[{i}]"), tuple(_require(ob, "values", f"observables[{i}]"))))
    contexts = []
    for i, ctx in enumerate(_require(doc, "contexts", "system")):
        where = f"contexts[{i}]"
        mass: dict = {}
        for entry in _require(ctx, "dist", where):
            key = tuple(_require(entry, "assignment", where))
            mass[key] = mass.get(key, Fraction(0)) + to_rational(_require(entry, "p", where))
        contexts.append(ContextDistribution(_require(ctx, "id", where), tuple(_require(ctx, "measured", where)), mass))
    return MeasurementSystem(tuple(spaces), tuple(contexts), str(doc.get("metadata", "")))


def system_to_dict(system: MeasurementSystem) -> dict:
    return {
        "metadata": system.metadata,
        "observables": [{"id": s.observable_id, "values": list(s.values)} for s in system.outcome_spaces],
        "contexts": [
            {
                "id": ctx.context_id,
                "measured": list(ctx.measured),
                "dist": [{"assignment": list(k), "p": format_rational(p)} for k, p in ctx.mass.items()],
            }
            for ctx in system.contexts
        ],
    }


@dataclass(frozen=True)
class CountsTable:
    context_id: Any
    measured: tuple
    rows: Mapping[tuple, int]


def ingest_counts(observables: Mapping, tables: list[CountsTable], metadata: str = "") -> MeasurementSystem:
    """Relative frequencies ``count / n_c`` as exact rationals, no smoothing."""
    contexts = []
    for t in tables:
        if any((not isinstance(n, int)) or isinstance(n, bool) or n < 0 for n in t.rows.values()):
            raise InputError(f"context {t.context_id!r}: counts must be nonnegative integers")
        total = sum(t.rows.values())
        if total == 0:
            raise InputError(f"context {t.context_id!r}: zero total count")
        mass = {tuple(k): Fraction(n, total) for k, n in t.rows.items() if n}
        contexts.append((t.context_id, t.measured, mass))
    return MeasurementSystem.build(observables, contexts, metadata)


def counts_from_dict(doc: Mapping) -> MeasurementSystem:
    """``{"observables": [...], "contexts": [{"id", "measured", "counts": [{"assignment", "n"}]}]}``."""
    observables = {
        _require(ob, "id", "observables"): tuple(_require(ob, "values", "observables"))
        for ob in _require(doc, "observables", "counts")
    }
    tables = []
    for i, ctx in enumerate(_require(doc, "contexts", "counts")):
        where = f"contexts[{i}]"
        rows: dict = {}
        for entry in _require(ctx, "counts", where):
            key = tuple(_require(entry, "assignment", where))
            rows[key] = rows.get(key, 0) + _require(entry, "n", where)
        tables.append(CountsTable(_require(ctx, "id", where), tuple(_require(ctx, "measured", where)), rows))
    return ingest_counts(observables, tables, str(doc.get("metadata", "")))


# --- models ----------------------------------------------------------------


def model_from_dict(doc: Mapping) -> CanonicalModel:
    states = [(_require(st, "id", "states"), to_rational(_require(st, "p", "states"))) for st in _require(doc, "states", "model")]
    by_name = {str(s): s for s, _ in states}
    fmap = {}
    for i, entry in enumerate(_require(doc, "F", "model")):
        where = f"F[{i}]"
        q, c = _require(entry, "q", where), _require(entry, "c", where)
        for key, v in _require(entry, "map", where).items():
            if str(key) not in by_name:
                raise InputError(f"{where}: unknown state {key!r}")
            fmap[q, c, by_name[str(key)]] = v
    return CanonicalModel(tuple(states), fmap)


def model_to_dict(model: CanonicalModel) -> dict:
    blocks: dict = {}
    for (q, c, s), v in model.outcome_map.items():
        blocks.setdefault((q, c), {})[str(_json_id(s))] = v
    return {
        "states": [{"id": _json_id(s), "p": format_rational(p)} for s, p in model.states],
        "F": [{"q": q, "c": c, "map": m} for (q, c), m in blocks.items()],
    }


# --- couplings ---------------------------------------------------------------


def coupling_to_dict(coupling: Coupling) -> dict:
    return {
        "pairs": [[q, c] for q, c in coupling.system.pairs],
        "mass": [{"assignment": list(k), "p": format_rational(p)} for k, p in coupling.mass.items()],
    }


def coupling_from_dict(doc: Mapping, system: MeasurementSystem) -> Coupling:
    pairs = [tuple(p) for p in _require(doc, "pairs", "coupling")]
    if pairs != list(system.pairs):
        raise InputError("coupling pairs do not match the system's (q, c) layout")
    mass: dict = {}
    for entry in _require(doc, "mass", "coupling"):
        key = tuple(_require(entry, "assignment", "mass"))
        mass[key] = mass.get(key, Fraction(0)) + to_rational(_require(entry, "p", "mass"))
    return Coupling(system, mass)


# --- partitions ------------------------------------------------------------


def partition_from_dict(doc: Mapping) -> Partition:
    blocks = {
        _require(ob, "id", "observers"): tuple(_require(ob, "observables", "observers"))
        for ob in _require(doc, "observers", "partition")
    }
    return Partition.build(blocks, doc.get("context_map"))


def partition_to_dict(partition: Partition, choices: Mapping | None = None) -> dict:
    doc: dict = {
        "observers": [{"id": k, "observables": list(partition.blocks[k])} for k in partition.observers]
    }
    cmap = choices if choices is not None else partition.context_map
    if cmap is not None:
        doc["context_map"] = {str(c): {str(k): q for k, q in ch.items()} for c, ch in cmap.items()}
    return doc


def dumps(doc: Any) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
