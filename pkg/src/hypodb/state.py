"""Versioned single-file persistence of a built engine.

The state file is self-describing JSON: world table, value-index maps,
all synthesized relations, derived schemes, the embedded project data,
and the committed conditioning history.  Serialization is stable-ordered
so identical engines produce identical files.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

from . import modeling
from .fd import FD, FDSet, RelationScheme
from .ingest import TrialInput, TrialOutput, UncertaintyFactor
from .pipeline import Engine, Hypothesis, Phenomenon, Project
from .worlds import Attribute, Descriptor, URelation, WorldTable

STATE_VERSION = 1


def _dump_descriptor(d: Descriptor) -> List[List[int]]:
    return [[var, idx] for var, idx in d.sorted_pairs()]


def _load_descriptor(pairs: List[List[int]]) -> Descriptor:
    return Descriptor(frozenset((int(v), int(i)) for v, i in pairs))


def _dump_relation(rel: URelation) -> Dict[str, Any]:
    return {
        "schema": [[a.name, a.kind] for a in rel.schema],
        "tuples": [
            [list(values), _dump_descriptor(desc)] for values, desc in rel.tuples
        ],
    }


def _load_relation(name: str, data: Dict[str, Any]) -> URelation:
    schema = [Attribute(n, k) for n, k in data["schema"]]
    tuples = [
        (tuple(values), _load_descriptor(pairs))
        for values, pairs in data["tuples"]
    ]
    return URelation(name, schema, tuples)


def _dump_world(w: WorldTable) -> Dict[str, Any]:
    return {
        "marginals": {str(v): w.marginals(v) for v in w.variables()},
        "labels": {
            str(v): w.labels(v) for v in w.variables() if w.labels(v) is not None
        },
        "compound": [v for v in w.variables() if w.is_compound(v)],
        "next_id": w._next_id,
    }


def _deep_tuple(value: Any) -> Any:
    if isinstance(value, list):
        return tuple(_deep_tuple(v) for v in value)
    return value


def _load_world(data: Dict[str, Any]) -> WorldTable:
    w = WorldTable()
    compound = set(data.get("compound", []))
    labels = data.get("labels", {})
    for key in sorted(data["marginals"], key=int):
        var = int(key)
        w._marginals[var] = [float(x) for x in data["marginals"][key]]
        if key in labels:
            # JSON turns the label tuples into lists; restore them
            w._labels[var] = [_deep_tuple(l) for l in labels[key]]
        if var in compound:
            w._compound.add(var)
    w._next_id = int(data["next_id"])
    return w


def _dump_scheme(s: RelationScheme) -> Dict[str, Any]:
    return {
        "name": s.name,
        "attrs": sorted(s.attrs),
        "key": sorted(s.key),
        "kind": s.kind,
        "uncertainty_deps": sorted(s.uncertainty_deps),
    }


def _load_scheme(data: Dict[str, Any]) -> RelationScheme:
    return RelationScheme(
        name=data["name"],
        attrs=frozenset(data["attrs"]),
        key=frozenset(data["key"]),
        kind=data["kind"],
        uncertainty_deps=frozenset(data["uncertainty_deps"]),
    )


def _dump_project(p: Project) -> Dict[str, Any]:
    return {
        "name": p.name,
        "phenomena": [
            {"phi": ph.phi, "description": ph.description} for ph in p.phenomena
        ],
        "hypotheses": [
            {
                "upsilon": h.upsilon,
                "model": modeling.pretty_print(h.model),
                "inputs": [
                    {"tid": r.tid, "phi": r.phi, "values": r.values}
                    for r in h.inputs
                ],
                "outputs": [
                    {
                        "tid": r.tid,
                        "phi": r.phi,
                        "upsilon": r.upsilon,
                        "dims": r.dims,
                        "outputs": r.outputs,
                    }
                    for r in h.outputs
                ],
            }
            for h in p.hypotheses
        ],
        "explanation": [list(e) for e in p.explanation],
    }


def _load_project(data: Dict[str, Any]) -> Project:
    hypotheses = []
    for h in data["hypotheses"]:
        hypotheses.append(
            Hypothesis(
                upsilon=int(h["upsilon"]),
                model=modeling.parse_model(h["model"]),
                inputs=[
                    TrialInput(int(r["tid"]), int(r["phi"]), r["values"])
                    for r in h["inputs"]
                ],
                outputs=[
                    TrialOutput(
                        int(r["tid"]),
                        int(r["phi"]),
                        int(r["upsilon"]),
                        r["dims"],
                        r["outputs"],
                    )
                    for r in h["outputs"]
                ],
            )
        )
    return Project(
        name=data["name"],
        phenomena=[
            Phenomenon(int(p["phi"]), p["description"]) for p in data["phenomena"]
        ],
        hypotheses=hypotheses,
        explanation=[
            (int(phi), int(upsilon), float(conf))
            for phi, upsilon, conf in data["explanation"]
        ],
    )


def dump_engine(engine: Engine, manifest_hash: Optional[str] = None) -> Dict[str, Any]:
    return {
        "version": STATE_VERSION,
        "manifest_hash": manifest_hash,
        "project": _dump_project(engine.project),
        "world": _dump_world(engine.world),
        "relations": {
            name: _dump_relation(rel) for name, rel in sorted(engine.relations.items())
        },
        "fdsets": {
            str(u): {
                "universe": sorted(s.universe),
                "fds": [[sorted(fd.lhs), sorted(fd.rhs)] for fd in s.sorted_fds()],
            }
            for u, s in engine.fdsets.items()
        },
        "schemes": {
            str(u): [_dump_scheme(s) for s in schemes]
            for u, schemes in engine.schemes.items()
        },
        "certain": {
            f"{phi}|{upsilon}": values
            for (phi, upsilon), values in engine.certain.items()
        },
        "factors": {
            f"{phi}|{upsilon}": [
                {
                    "params": list(f.params),
                    "support": [list(v) for v in f.support],
                    "frequencies": list(f.frequencies),
                }
                for f in factors
            ]
            for (phi, upsilon), factors in engine.factors.items()
        },
        "exp_var": {str(phi): var for phi, var in engine.exp_var.items()},
        "exp_index": {
            f"{phi}|{upsilon}": idx
            for (phi, upsilon), idx in engine.exp_index.items()
        },
        "factor_var": {
            f"{phi}|{upsilon}|{','.join(params)}": var
            for (phi, upsilon, params), var in engine.factor_var.items()
        },
        "history": engine.history,
    }


def load_engine(data: Dict[str, Any]) -> Engine:
    if data.get("version") != STATE_VERSION:
        raise ValueError(f"unsupported state version {data.get('version')!r}")
    engine = Engine(project=_load_project(data["project"]))
    engine.world = _load_world(data["world"])
    engine.relations = {
        name: _load_relation(name, rel) for name, rel in data["relations"].items()
    }
    engine.fdsets = {
        int(u): FDSet(
            frozenset(
                FD(frozenset(lhs), frozenset(rhs)) for lhs, rhs in entry["fds"]
            ),
            frozenset(entry["universe"]),
        )
        for u, entry in data["fdsets"].items()
    }
    engine.schemes = {
        int(u): [_load_scheme(s) for s in schemes]
        for u, schemes in data["schemes"].items()
    }
    engine.certain = {
        _split_key(key): values for key, values in data["certain"].items()
    }
    engine.factors = {
        _split_key(key): [
            UncertaintyFactor(
                params=tuple(f["params"]),
                support=tuple(tuple(v) for v in f["support"]),
                frequencies=tuple(int(x) for x in f["frequencies"]),
            )
            for f in factors
        ]
        for key, factors in data["factors"].items()
    }
    engine.exp_var = {int(phi): var for phi, var in data["exp_var"].items()}
    engine.exp_index = {
        _split_key(key): idx for key, idx in data["exp_index"].items()
    }
    engine.factor_var = {}
    for key, var in data["factor_var"].items():
        phi, upsilon, params = key.split("|")
        engine.factor_var[(int(phi), int(upsilon), tuple(params.split(",")))] = var
    engine.history = list(data["history"])
    return engine


def _split_key(key: str) -> Tuple[int, int]:
    phi, upsilon = key.split("|")
    return int(phi), int(upsilon)


def manifest_hash(manifest_path: str) -> str:
    return hashlib.sha256(Path(manifest_path).read_bytes()).hexdigest()


def save(engine: Engine, path: str, manifest_hash: Optional[str] = None) -> None:
    """Atomically write the state file."""
    data = dump_engine(engine, manifest_hash)
    text = json.dumps(data, sort_keys=True, indent=1)
    tmp = Path(path).with_suffix(".tmp")
    tmp.write_text(text, encoding="utf-8")
    tmp.replace(path)


def load(path: str) -> Engine:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return load_engine(data)
