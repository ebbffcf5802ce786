"""End-to-end synthesis of the uncertain hypothesis database.

From a project manifest (descriptive data, model files, trial CSVs) the
engine derives each hypothesis' FD schema, learns uncertainty factors from
the trial inputs, and synthesizes the U-relations: the hypothesis-choice
relation Y[Exp], per-factor relations Yi[X], per-hypothesis prediction
relations Yi[o], and the integrated relations Y[o].
"""

from __future__ import annotations

import itertools
import json

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from . import modeling
from .algebra import repair_key, union_all
from .errors import (
    MissingTrialForFactorValue,
    NoMatchingTrial,
    ProjectError,
    SchemaMismatch,
)
from .fd import FDSet, RelationScheme, u_ptc
from .ingest import (
    TrialInput,
    TrialOutput,
    UncertaintyFactor,
    learn_factors,
    load_trials,
    representative_tid,
)
from .modeling import HypothesisModel
from .worlds import (
    EMPTY_DESCRIPTOR,
    Attribute,
    Descriptor,
    URelation,
    VarId,
    WorldTable,
)

PRIOR_SUM_TOL = 1e-9


@dataclass(frozen=True)
class Phenomenon:
    phi: int
    description: str


@dataclass
class Hypothesis:
    upsilon: int
    model: HypothesisModel
    inputs: List[TrialInput] = field(default_factory=list)
    outputs: List[TrialOutput] = field(default_factory=list)

    @property
    def name(self) -> str:
        return self.model.name


@dataclass
class Project:
    name: str
    phenomena: List[Phenomenon]
    hypotheses: List[Hypothesis]
    explanation: List[Tuple[int, int, float]]  # (phi, upsilon, prior confidence)

    def validate(self) -> None:
        phis = {p.phi for p in self.phenomena}
        upsilons = {h.upsilon for h in self.hypotheses}
        if len(phis) != len(self.phenomena):
            raise ProjectError("duplicate phenomenon ids")
        if len(upsilons) != len(self.hypotheses):
            raise ProjectError("duplicate hypothesis ids")
        totals: Dict[int, float] = {}
        for phi, upsilon, conf_ in self.explanation:
            if phi not in phis:
                raise ProjectError(f"explanation references unknown phi={phi}")
            if upsilon not in upsilons:
                raise ProjectError(
                    f"explanation references unknown upsilon={upsilon}"
                )
            if conf_ < 0:
                raise ProjectError("negative prior confidence")
            totals[phi] = totals.get(phi, 0.0) + conf_
        for phi in phis:
            total = totals.get(phi, 0.0)
            if abs(total - 1.0) > PRIOR_SUM_TOL:
                raise ProjectError(
                    f"priors for phi={phi} sum to {total}, expected 1"
                )

    def hypothesis(self, upsilon: int) -> Hypothesis:
        for h in self.hypotheses:
            if h.upsilon == upsilon:
                return h
        raise ProjectError(f"unknown hypothesis upsilon={upsilon}")


def load_project(manifest_path: str) -> Project:
    """Read a TOML or JSON manifest and all files it references."""
    path = Path(manifest_path)
    if not path.exists():
        raise ProjectError(f"manifest not found: {manifest_path}")
    if path.suffix == ".json":
        data = json.loads(path.read_text(encoding="utf-8"))
    else:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    base = path.parent
    try:
        phenomena = [
            Phenomenon(int(p["phi"]), str(p["description"]))
            for p in data["phenomena"]
        ]
        hypotheses = []
        for i, entry in enumerate(data["hypotheses"], start=1):
            model_text = (base / entry["model"]).read_text(encoding="utf-8")
            model = modeling.parse_model(model_text)
            upsilon = int(entry.get("upsilon", model.upsilon or i))
            inputs, outputs = load_trials(
                str(base / entry["input"]),
                [str(base / p) for p in entry.get("outputs", [])],
                params=list(model.params),
                dims=list(model.dims),
            )
            hypotheses.append(Hypothesis(upsilon, model, inputs, outputs))
        explanation = [
            (int(e["phi"]), int(e["upsilon"]), float(e["confidence"]))
            for e in data["explanation"]
        ]
    except KeyError as exc:
        raise ProjectError(f"manifest missing field {exc}") from exc
    project = Project(
        name=str(data.get("name", path.stem)),
        phenomena=phenomena,
        hypotheses=hypotheses,
        explanation=explanation,
    )
    project.validate()
    return project


@dataclass
class Engine:
    """Built engine state: world table, synthesized relations, and the
    provenance maps tying random variables to the data they repair."""

    project: Project
    world: WorldTable = field(default_factory=WorldTable)
    relations: Dict[str, URelation] = field(default_factory=dict)
    fdsets: Dict[int, FDSet] = field(default_factory=dict)
    schemes: Dict[int, List[RelationScheme]] = field(default_factory=dict)
    certain: Dict[Tuple[int, int], Dict[str, float]] = field(default_factory=dict)
    factors: Dict[Tuple[int, int], List[UncertaintyFactor]] = field(default_factory=dict)
    exp_var: Dict[int, Optional[VarId]] = field(default_factory=dict)
    exp_index: Dict[Tuple[int, int], Optional[int]] = field(default_factory=dict)
    factor_var: Dict[Tuple[int, int, Tuple[str, ...]], Optional[VarId]] = field(
        default_factory=dict
    )
    history: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def output_attrs(self) -> List[str]:
        seen: List[str] = []
        for h in self.project.hypotheses:
            for o in h.model.output_names:
                if o not in seen:
                    seen.append(o)
        return seen

    def relation(self, name: str) -> URelation:
        return self.relations[name]

    def explained_phis(self, upsilon: int) -> List[int]:
        return [phi for phi, u, _ in self.project.explanation if u == upsilon]


def build_explanation(engine: Engine) -> URelation:
    """Y[Exp]: one hypothesis-choice variable per phenomenon, weighted by the
    prior confidences."""
    rel = URelation(
        "EXPLANATION",
        [Attribute("phi", "id"), Attribute("upsilon", "id"),
         Attribute("confidence", "numeric")],
    )
    for phi, upsilon, conf_ in engine.project.explanation:
        rel.add((phi, upsilon, conf_))
    repaired, var_of = repair_key(
        rel, key=["phi"], weight_attr="confidence", w=engine.world, name="Y[Exp]"
    )
    for (phi,), var in var_of.items():
        engine.exp_var[phi] = var
    # value-index of each hypothesis within its phenomenon's choice variable
    counters: Dict[int, int] = {}
    group_sizes: Dict[int, int] = {}
    for phi, _, _ in engine.project.explanation:
        group_sizes[phi] = group_sizes.get(phi, 0) + 1
    for phi, upsilon, _ in engine.project.explanation:
        counters[phi] = counters.get(phi, 0) + 1
        engine.exp_index[(phi, upsilon)] = (
            counters[phi] if group_sizes[phi] > 1 else None
        )
    engine.relations["Y[Exp]"] = repaired
    return repaired


def _exp_descriptor(engine: Engine, phi: int, upsilon: int) -> Descriptor:
    idx = engine.exp_index[(phi, upsilon)]
    if idx is None:
        return EMPTY_DESCRIPTOR
    return Descriptor.of((engine.exp_var[phi], idx))


def build_factor_relations(engine: Engine, phi: int, upsilon: int) -> List[URelation]:
    """Per uncertainty factor, a U-relation with one fresh variable weighted
    by trial frequency; certain params give certain single-tuple relations."""
    hyp = engine.project.hypothesis(upsilon)
    inputs = [r for r in hyp.inputs if r.phi == phi]
    built: List[URelation] = []
    for factor in engine.factors[(phi, upsilon)]:
        name = f"Y{upsilon}[{','.join(factor.params)}]"
        rel = URelation(
            name,
            [Attribute("phi", "id")]
            + [Attribute(p, "numeric") for p in factor.params]
            + [Attribute("Fr", "numeric")],
        )
        for joint, freq in zip(factor.support, factor.frequencies):
            rel.add((phi, *joint, freq))
        repaired, var_of = repair_key(
            rel, key=["phi"], weight_attr="Fr", w=engine.world, name=name
        )
        engine.factor_var[(phi, upsilon, factor.params)] = var_of[(phi,)]
        if name in engine.relations:
            repaired = union_all([engine.relations[name], repaired], name=name)
        engine.relations[name] = repaired
        built.append(repaired)
    for param, value in sorted(engine.certain[(phi, upsilon)].items()):
        name = f"Y{upsilon}[{param}]"
        rel = engine.relations.get(name) or URelation(
            name, [Attribute("phi", "id"), Attribute(param, "numeric")]
        )
        rel.add((phi, value))
        engine.relations[name] = rel
        built.append(rel)
    return built


def _scheme_for(engine: Engine, upsilon: int, output_attr: str) -> RelationScheme:
    for scheme in engine.schemes[upsilon]:
        if scheme.kind == "prediction" and scheme.name == f"Y[{output_attr}]":
            return scheme
    raise ProjectError(
        f"hypothesis {upsilon} has no prediction scheme for {output_attr!r}"
    )


def build_prediction_relation(
    engine: Engine, phi: int, upsilon: int, output_attr: str
) -> URelation:
    """Yi[o]: trial outputs joined to the hypothesis choice and the relevant
    factor variables, one tuple per factor-value combination and dim point."""
    hyp = engine.project.hypothesis(upsilon)
    model = hyp.model
    scheme = _scheme_for(engine, upsilon, output_attr)
    dims = [d for d in model.dims if d in scheme.attrs]
    relevant = [
        f
        for f in engine.factors[(phi, upsilon)]
        if set(f.params) & set(scheme.uncertainty_deps)
    ]
    inputs = [r for r in hyp.inputs if r.phi == phi]
    outputs = [r for r in hyp.outputs if r.phi == phi and r.upsilon == upsilon]
    exp_desc = _exp_descriptor(engine, phi, upsilon)

    rel = URelation(
        f"Y{upsilon}[{output_attr}]",
        [Attribute("phi", "id"), Attribute("upsilon", "id")]
        + [Attribute(d, "numeric") for d in dims]
        + [Attribute(output_attr, "numeric")],
    )
    combos = itertools.product(*(range(len(f.support)) for f in relevant))
    for combo in combos:
        joint: Dict[str, float] = {}
        desc = exp_desc
        for f, idx in zip(relevant, combo):
            joint.update(dict(zip(f.params, f.support[idx])))
            var = engine.factor_var[(phi, upsilon, f.params)]
            if var is not None:
                desc = desc.extend(var, idx + 1)
        try:
            tid = representative_tid(inputs, joint) if joint else min(
                r.tid for r in inputs
            )
        except (NoMatchingTrial, ValueError) as exc:
            raise MissingTrialForFactorValue(
                f"no trial for phi={phi}, upsilon={upsilon}, values {joint}"
            ) from exc
        rows: Dict[Tuple[float, ...], float] = {}
        for out in outputs:
            if out.tid != tid or output_attr not in out.outputs:
                continue
            if not set(dims) <= set(out.dims):
                continue
            point = tuple(out.dims[d] for d in dims)
            rows.setdefault(point, out.outputs[output_attr])
        if not rows:
            raise MissingTrialForFactorValue(
                f"trial {tid} has no {output_attr!r} rows for phi={phi}, "
                f"upsilon={upsilon}"
            )
        for point in sorted(rows):
            rel.add((phi, upsilon, *point, rows[point]), desc)
    engine.relations[rel.name] = rel
    return rel


def build_union(engine: Engine, output_attr: str) -> URelation:
    """Y[o]: union-all of the per-hypothesis prediction relations.

    Hypotheses whose prediction lacks a dimension used by the others are
    broadcast over the observed values of that dimension (their prediction
    is constant along it)."""
    parts: List[Tuple[URelation, List[str]]] = []
    target_dims: List[str] = []
    for hyp in engine.project.hypotheses:
        if output_attr not in hyp.model.output_names:
            continue
        name = f"Y{hyp.upsilon}[{output_attr}]"
        if name not in engine.relations:
            continue
        rel = engine.relations[name]
        dims = [a.name for a in rel.schema[2:-1]]
        parts.append((rel, dims))
        for d in dims:
            if d not in target_dims:
                target_dims.append(d)
    if not parts:
        raise ProjectError(f"no prediction relations for {output_attr!r}")

    dim_values: Dict[str, List[float]] = {}
    for rel, dims in parts:
        for d in dims:
            i = rel.attr_index(d)
            vals = dim_values.setdefault(d, [])
            for values, _ in rel.tuples:
                if values[i] not in vals:
                    vals.append(values[i])

    aligned: List[URelation] = []
    schema = (
        [Attribute("phi", "id"), Attribute("upsilon", "id")]
        + [Attribute(d, "numeric") for d in target_dims]
        + [Attribute(output_attr, "numeric")]
    )
    for rel, dims in parts:
        missing = [d for d in target_dims if d not in dims]
        if not missing:
            if dims == target_dims:
                aligned.append(URelation(rel.name, schema, list(rel.tuples)))
                continue
        for d in missing:
            if not dim_values.get(d):
                raise SchemaMismatch(
                    f"cannot broadcast {rel.name} over dimension {d!r}"
                )
        out = URelation(rel.name, schema)
        val_idx = rel.attr_index(output_attr)
        dim_idx = {d: rel.attr_index(d) for d in dims}
        for values, desc in rel.tuples:
            for extra in itertools.product(
                *(sorted(dim_values[d]) for d in missing)
            ):
                extra_map = dict(zip(missing, extra))
                point = [
                    values[dim_idx[d]] if d in dim_idx else extra_map[d]
                    for d in target_dims
                ]
                out.add((values[0], values[1], *point, values[val_idx]), desc)
        aligned.append(out)
    merged = union_all(aligned, name=f"Y[{output_attr}]")
    engine.relations[merged.name] = merged
    return merged


def build(project: Project, factor_tol: float = 1e-9) -> Engine:
    """Run the full synthesis: FD extraction, factor learning, scheme
    derivation, and construction of all Y-relations."""
    project.validate()
    engine = Engine(project=project)

    for hyp in project.hypotheses:
        engine.fdsets[hyp.upsilon] = modeling.extract_fds(hyp.model)

    build_explanation(engine)

    for phi, upsilon, _ in project.explanation:
        hyp = project.hypothesis(upsilon)
        inputs = [r for r in hyp.inputs if r.phi == phi]
        if not inputs:
            raise ProjectError(
                f"no trial inputs for phi={phi}, upsilon={upsilon}"
            )
        certain, factors = learn_factors(
            inputs, list(hyp.model.params), tol=factor_tol
        )
        engine.certain[(phi, upsilon)] = certain
        engine.factors[(phi, upsilon)] = factors
        engine.schemes[upsilon] = u_ptc(
            engine.fdsets[hyp.upsilon], certain_params=certain
        )
        build_factor_relations(engine, phi, upsilon)
        for output_attr in hyp.model.output_names:
            build_prediction_relation(engine, phi, upsilon, output_attr)

    for output_attr in engine.output_attrs:
        build_union(engine, output_attr)
    return engine
