"""World-set algebra over U-relations: selection, projection, join,
union-all, repair-key, possible, and the conf aggregate.

All operations are pure except repair_key, which registers fresh random
variables in the world table it is given.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import (
    NonNumericWeight,
    SchemaMismatch,
    UncertainRepairInput,
    UnknownAttribute,
    ZeroTotalWeight,
)
from .worlds import (
    EMPTY_DESCRIPTOR,
    Attribute,
    Descriptor,
    URelation,
    VarId,
    WorldTable,
    descriptor_probability,
    event_probability,
)

_OPS = {
    "=": operator.eq,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}


@dataclass(frozen=True)
class Comparison:
    """One conjunct of a selection predicate: attr OP constant or attr OP attr."""

    attr: str
    op: str
    const: Any = None
    other_attr: Optional[str] = None

    def __post_init__(self) -> None:
        if self.op not in _OPS:
            raise ValueError(f"unsupported comparison operator {self.op!r}")


def eq(attr: str, const: Any) -> Comparison:
    return Comparison(attr, "=", const)


def select(r: URelation, pred: Sequence[Comparison], name: Optional[str] = None) -> URelation:
    """Tuples satisfying every comparison; descriptors unchanged."""
    resolved = []
    for c in pred:
        i = r.attr_index(c.attr)
        j = r.attr_index(c.other_attr) if c.other_attr is not None else None
        resolved.append((i, _OPS[c.op], c.const, j))
    out = []
    for values, desc in r.tuples:
        ok = True
        for i, op, const, j in resolved:
            rhs = values[j] if j is not None else const
            if not op(values[i], rhs):
                ok = False
                break
        if ok:
            out.append((values, desc))
    return URelation(name or r.name, list(r.schema), out)


def project(
    r: URelation, attrs: Sequence[str], dedup: bool = False, name: Optional[str] = None
) -> URelation:
    """Column restriction; condition columns are always preserved.

    With dedup, tuples identical in both values and descriptor collapse.
    """
    idxs = [r.attr_index(a) for a in attrs]
    schema = [r.schema[i] for i in idxs]
    out: List[Tuple[Tuple[Any, ...], Descriptor]] = []
    seen = set()
    for values, desc in r.tuples:
        row = tuple(values[i] for i in idxs)
        if dedup:
            key = (row, desc.assignments)
            if key in seen:
                continue
            seen.add(key)
        out.append((row, desc))
    return URelation(name or r.name, schema, out)


def join(
    l: URelation,
    r: URelation,
    on: Sequence[Tuple[str, str]],
    name: Optional[str] = None,
) -> URelation:
    """Equi-join; output descriptor is the union of the input descriptors.

    Tuples whose merged descriptor is inconsistent hold in no world and are
    dropped.  Right-side join attributes are omitted from the output schema.
    """
    l_idx = [l.attr_index(a) for a, _ in on]
    r_idx = [r.attr_index(b) for _, b in on]
    r_keep = [i for i in range(len(r.schema)) if i not in r_idx]
    schema = list(l.schema) + [r.schema[i] for i in r_keep]

    by_key: Dict[Tuple[Any, ...], List[Tuple[Tuple[Any, ...], Descriptor]]] = {}
    for values, desc in r.tuples:
        by_key.setdefault(tuple(values[i] for i in r_idx), []).append((values, desc))

    out = []
    for lv, ld in l.tuples:
        key = tuple(lv[i] for i in l_idx)
        for rv, rd in by_key.get(key, ()):
            merged = ld.merge(rd)
            if not merged.is_consistent:
                continue
            out.append((lv + tuple(rv[i] for i in r_keep), merged))
    return URelation(name or f"{l.name}*{r.name}", schema, out)


def union_all(rs: Sequence[URelation], name: Optional[str] = None) -> URelation:
    """Concatenation of same-schema relations, no dedup."""
    if not rs:
        raise SchemaMismatch("union of no relations")
    names = rs[0].attribute_names
    for r in rs[1:]:
        if r.attribute_names != names:
            raise SchemaMismatch(
                f"schema mismatch: {names} vs {r.attribute_names}"
            )
    out = []
    for r in rs:
        out.extend(r.tuples)
    return URelation(name or rs[0].name, list(rs[0].schema), out)


def repair_key(
    r: URelation,
    key: Sequence[str],
    weight_attr: str,
    w: WorldTable,
    keep_zero_weight: bool = True,
    name: Optional[str] = None,
) -> Tuple[URelation, Dict[Tuple[Any, ...], Optional[VarId]]]:
    """Repair a violated key by creating mutually exclusive alternatives.

    Per key-group with more than one tuple, registers one fresh variable
    whose weights come from weight_attr; tuple i of the group gets
    descriptor {x -> i}.  Singleton groups stay certain.  The output drops
    weight_attr; the returned map gives the variable created per key-group
    (None for singleton groups).  Value-index labels on the variable record
    the tuple values each index stands for.
    """
    key_idx = [r.attr_index(a) for a in key]
    w_idx = r.attr_index(weight_attr)
    keep_idx = [i for i in range(len(r.schema)) if i != w_idx]
    schema = [r.schema[i] for i in keep_idx]

    groups: Dict[Tuple[Any, ...], List[Tuple[Tuple[Any, ...], Descriptor]]] = {}
    order: List[Tuple[Any, ...]] = []
    for values, desc in r.tuples:
        if desc.assignments:
            raise UncertainRepairInput(
                f"repair_key input {r.name} has uncertain tuples"
            )
        weight = values[w_idx]
        if not isinstance(weight, (int, float)) or isinstance(weight, bool):
            raise NonNumericWeight(f"weight {weight!r} is not numeric")
        if weight < 0:
            raise NonNumericWeight(f"weight {weight!r} is negative")
        gkey = tuple(values[i] for i in key_idx)
        if gkey not in groups:
            order.append(gkey)
        groups.setdefault(gkey, []).append((values, desc))

    out: List[Tuple[Tuple[Any, ...], Descriptor]] = []
    var_of: Dict[Tuple[Any, ...], Optional[VarId]] = {}
    for gkey in order:
        members = groups[gkey]
        weights = [float(v[w_idx]) for v, _ in members]
        rows = [tuple(v[i] for i in keep_idx) for v, _ in members]
        if len(members) == 1:
            var_of[gkey] = None
            out.append((rows[0], EMPTY_DESCRIPTOR))
            continue
        if sum(weights) <= 0:
            raise ZeroTotalWeight(f"key-group {gkey} has zero total weight")
        if not keep_zero_weight:
            rows = [row for row, wt in zip(rows, weights) if wt > 0]
            weights = [wt for wt in weights if wt > 0]
        var = w.register_variable(len(rows), weights, labels=rows)
        var_of[gkey] = var
        for i, row in enumerate(rows, start=1):
            out.append((row, Descriptor.of((var, i))))
    return URelation(name or r.name, schema, out), var_of


def conf(
    r: URelation, group_by: Sequence[str], w: WorldTable
) -> List[Tuple[Tuple[Any, ...], float]]:
    """Per distinct group value, the exact probability that at least one of
    the group's tuples appears in a randomly drawn world."""
    idxs = [r.attr_index(a) for a in group_by]
    groups: Dict[Tuple[Any, ...], List[Descriptor]] = {}
    order: List[Tuple[Any, ...]] = []
    for values, desc in r.tuples:
        gkey = tuple(values[i] for i in idxs)
        if gkey not in groups:
            order.append(gkey)
        groups.setdefault(gkey, []).append(desc)
    return [(gkey, event_probability(groups[gkey], w)) for gkey in order]


def possible(r: URelation, w: WorldTable, name: Optional[str] = None) -> URelation:
    """Tuples holding in at least one world."""
    out = [
        (values, desc)
        for values, desc in r.tuples
        if desc.is_consistent and descriptor_probability(desc, w) > 0.0
    ]
    return URelation(name or r.name, list(r.schema), out)
