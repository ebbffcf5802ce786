"""U-relational representation core: random variables, world table,
ws-descriptors, tuples, and exact possible-worlds probability computation.

A discrete random variable has a finite domain of value-indices 1..n with
marginal probabilities summing to 1.  A ws-descriptor is a conjunction of
(variable -> value-index) assignments; a tuple exists exactly in the worlds
where its descriptor holds.  Variables are independent by construction, so
the probability of a consistent descriptor is the product of its marginals.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from .errors import (
    DomainTooLarge,
    EmptyDomain,
    EmptyVarSet,
    InconsistentDescriptor,
    UnknownVariable,
    ZeroTotalWeight,
)

VarId = int

PROB_TOL = 1e-9
DEFAULT_WORLD_BOUND = 10**6


@dataclass(frozen=True)
class Descriptor:
    """A conjunction of (variable -> value-index) assignments.

    The empty descriptor denotes the certain event.  A descriptor is
    consistent iff no variable is assigned two different value-indices.
    """

    assignments: frozenset = frozenset()

    @staticmethod
    def of(*pairs: Tuple[VarId, int]) -> "Descriptor":
        return Descriptor(frozenset(pairs))

    @property
    def is_consistent(self) -> bool:
        seen: Dict[VarId, int] = {}
        for var, idx in self.assignments:
            if seen.setdefault(var, idx) != idx:
                return False
        return True

    def variables(self) -> frozenset:
        return frozenset(var for var, _ in self.assignments)

    def value_of(self, var: VarId) -> Optional[int]:
        for v, idx in self.assignments:
            if v == var:
                return idx
        return None

    def merge(self, other: "Descriptor") -> "Descriptor":
        return Descriptor(self.assignments | other.assignments)

    def extend(self, var: VarId, idx: int) -> "Descriptor":
        return Descriptor(self.assignments | {(var, idx)})

    def holds_in(self, world: Dict[VarId, int]) -> bool:
        return all(world.get(var) == idx for var, idx in self.assignments)

    def conflicts_with(self, other: "Descriptor") -> bool:
        """True iff the two descriptors share a variable with differing values
        (their events are mutually exclusive)."""
        mine = dict(self.assignments)
        return any(var in mine and mine[var] != idx for var, idx in other.assignments)

    def sorted_pairs(self) -> List[Tuple[VarId, int]]:
        return sorted(self.assignments)

    def __str__(self) -> str:
        if not self.assignments:
            return "{}"
        return "{" + ", ".join(f"x{v}->{d}" for v, d in self.sorted_pairs()) + "}"


EMPTY_DESCRIPTOR = Descriptor()


class WorldTable:
    """Registry of discrete random variables and their marginal probabilities.

    Variable identifiers are never reused, even after a variable is retired
    by posterior write-back.  Value-index labels record, per variable, which
    source values each index stands for (repair-key provenance).
    """

    def __init__(self) -> None:
        self._marginals: Dict[VarId, List[float]] = {}
        self._compound: set = set()
        self._labels: Dict[VarId, List[Any]] = {}
        self._next_id: VarId = 1

    def register_variable(
        self,
        domain_size: int,
        weights: Sequence[float],
        labels: Optional[Sequence[Any]] = None,
        compound: bool = False,
    ) -> VarId:
        if domain_size <= 0:
            raise EmptyDomain("variable domain must be nonempty")
        if len(weights) != domain_size:
            raise ValueError(
                f"expected {domain_size} weights, got {len(weights)}"
            )
        if any(w < 0 for w in weights):
            raise ValueError("weights must be nonnegative")
        total = float(sum(weights))
        if total <= 0.0:
            raise ZeroTotalWeight("all weights are zero")
        var = self._next_id
        self._next_id += 1
        self._marginals[var] = [float(w) / total for w in weights]
        if labels is not None:
            self._labels[var] = list(labels)
        if compound:
            self._compound.add(var)
        return var

    def variables(self) -> List[VarId]:
        return sorted(self._marginals)

    def __contains__(self, var: VarId) -> bool:
        return var in self._marginals

    def domain_size(self, var: VarId) -> int:
        self._require(var)
        return len(self._marginals[var])

    def marginal(self, var: VarId, idx: int) -> float:
        self._require(var)
        dom = self._marginals[var]
        if not 1 <= idx <= len(dom):
            raise UnknownVariable(f"x{var} has no value-index {idx}")
        return dom[idx - 1]

    def marginals(self, var: VarId) -> List[float]:
        self._require(var)
        return list(self._marginals[var])

    def labels(self, var: VarId) -> Optional[List[Any]]:
        lab = self._labels.get(var)
        return list(lab) if lab is not None else None

    def is_compound(self, var: VarId) -> bool:
        return var in self._compound

    def retire(self, var: VarId) -> None:
        self._require(var)
        del self._marginals[var]
        self._labels.pop(var, None)
        self._compound.discard(var)

    def copy(self) -> "WorldTable":
        clone = WorldTable()
        clone._marginals = {v: list(m) for v, m in self._marginals.items()}
        clone._compound = set(self._compound)
        clone._labels = {v: list(l) for v, l in self._labels.items()}
        clone._next_id = self._next_id
        return clone

    def _require(self, var: VarId) -> None:
        if var not in self._marginals:
            raise UnknownVariable(f"unknown variable x{var}")


def descriptor_probability(d: Descriptor, w: WorldTable) -> float:
    """Probability of a consistent descriptor: the product of its marginals."""
    if not d.is_consistent:
        raise InconsistentDescriptor(f"inconsistent descriptor {d}")
    prob = 1.0
    for var, idx in d.assignments:
        prob *= w.marginal(var, idx)
    return prob


def _pairwise_exclusive(ds: Sequence[Descriptor]) -> bool:
    return all(
        a.conflicts_with(b) for a, b in itertools.combinations(ds, 2)
    )


def event_probability(
    ds: Iterable[Descriptor], w: WorldTable, bound: int = DEFAULT_WORLD_BOUND
) -> float:
    """Exact probability of the disjunction of the descriptors' events.

    Fast paths cover the single-descriptor and pairwise mutually exclusive
    cases; the general case enumerates the joint assignments of the involved
    variables only (exact, exponential in those variables).
    """
    descs = list(ds)
    for d in descs:
        if not d.is_consistent:
            raise InconsistentDescriptor(f"inconsistent descriptor {d}")
    if not descs:
        return 0.0
    if len(descs) == 1:
        return descriptor_probability(descs[0], w)
    if _pairwise_exclusive(descs):
        return math.fsum(descriptor_probability(d, w) for d in descs)
    involved = sorted(set().union(*(d.variables() for d in descs)))
    if not involved:
        # at least one empty (certain) descriptor in a non-exclusive set
        return 1.0
    total = 0.0
    for world, prob in enumerate_worlds(involved, w, bound=bound):
        if any(d.holds_in(world) for d in descs):
            total += prob
    return total


def enumerate_worlds(
    vars: Iterable[VarId], w: WorldTable, bound: int = DEFAULT_WORLD_BOUND
) -> List[Tuple[Dict[VarId, int], float]]:
    """Cartesian product of the variables' domains with product probabilities.

    The test oracle for event_probability; guarded by a world-count bound.
    """
    var_list = sorted(set(vars))
    if not var_list:
        raise EmptyVarSet("no variables to enumerate")
    count = 1
    for var in var_list:
        count *= w.domain_size(var)
        if count > bound:
            raise DomainTooLarge(
                f"world count exceeds bound {bound}"
            )
    worlds = []
    for combo in itertools.product(
        *(range(1, w.domain_size(v) + 1) for v in var_list)
    ):
        prob = 1.0
        for var, idx in zip(var_list, combo):
            prob *= w.marginal(var, idx)
        worlds.append((dict(zip(var_list, combo)), prob))
    return worlds


# --- U-relations ---

ATTR_KINDS = ("id", "numeric", "text")


@dataclass(frozen=True)
class Attribute:
    name: str
    kind: str = "numeric"

    def __post_init__(self) -> None:
        if self.kind not in ATTR_KINDS:
            raise ValueError(f"unknown attribute kind {self.kind!r}")


@dataclass
class URelation:
    """A relation whose tuples carry ws-descriptors in condition columns."""

    name: str
    schema: List[Attribute]
    tuples: List[Tuple[Tuple[Any, ...], Descriptor]] = field(default_factory=list)

    def __post_init__(self) -> None:
        for values, _ in self.tuples:
            if len(values) != len(self.schema):
                raise ValueError(
                    f"tuple arity {len(values)} != schema arity "
                    f"{len(self.schema)} in {self.name}"
                )

    @property
    def attribute_names(self) -> List[str]:
        return [a.name for a in self.schema]

    def attr_index(self, name: str) -> int:
        for i, a in enumerate(self.schema):
            if a.name == name:
                return i
        from .errors import UnknownAttribute

        raise UnknownAttribute(f"{self.name} has no attribute {name!r}")

    def add(self, values: Sequence[Any], descriptor: Descriptor = EMPTY_DESCRIPTOR) -> None:
        if len(values) != len(self.schema):
            raise ValueError(
                f"tuple arity {len(values)} != schema arity {len(self.schema)}"
            )
        self.tuples.append((tuple(values), descriptor))

    def __len__(self) -> int:
        return len(self.tuples)

    def __iter__(self):
        return iter(self.tuples)
