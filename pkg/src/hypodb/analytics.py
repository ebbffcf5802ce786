"""Ranking queries over predictions and Bayesian conditioning of the
prior world distribution on observed data.

Conditioning uses a normal likelihood with known standard deviation and a
discrete prior over the alternative predicted values.  Committing the
posteriors back into the world table retires the variables the conditioned
tuples depend on and replaces them by one compound variable over their
joint assignments, since conditioning destroys their independence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

from .algebra import Comparison, select
from .errors import (
    DegenerateLikelihood,
    EmptySelection,
    PartialCoverage,
    UnknownAttribute,
)
from .pipeline import Engine
from .worlds import (
    Descriptor,
    URelation,
    WorldTable,
    enumerate_worlds,
    event_probability,
)

POSTERIOR_SUM_TOL = 1e-9
PRIOR_SUM_TOL = 1e-6
COVERAGE_TOL = 1e-9


@dataclass(frozen=True)
class Observation:
    """An observed output value with measurement noise."""

    output_attr: str
    dims: Dict[str, float]
    y: float
    sigma: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "dims", dict(self.dims))
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class RankedPrediction:
    phi: int
    upsilon: int
    value: float
    prior: float
    posterior: Optional[float] = None
    # descriptors of the tuples forming this group, with their individual
    # prior probabilities (needed for faithful write-back)
    descriptors: Tuple[Descriptor, ...] = ()
    descriptor_priors: Tuple[float, ...] = ()


def rank_predictions(
    engine: Engine,
    phi: int,
    output_attr: str,
    dim_filter: Optional[Dict[str, float]] = None,
) -> List[RankedPrediction]:
    """conf grouped by (phi, upsilon, value), descending by prior; ties
    break by (upsilon, value) ascending for determinism."""
    name = f"Y[{output_attr}]"
    if name not in engine.relations:
        raise UnknownAttribute(f"unknown prediction attribute {output_attr!r}")
    rel = engine.relations[name]
    pred = [Comparison("phi", "=", phi)]
    for dim, value in (dim_filter or {}).items():
        pred.append(Comparison(dim, "=", value))
    selected = select(rel, pred)
    if not selected.tuples:
        raise EmptySelection(
            f"no tuples for phi={phi}, {output_attr}, filter {dim_filter}"
        )
    u_idx = selected.attr_index("upsilon")
    v_idx = selected.attr_index(output_attr)
    groups: Dict[Tuple[int, float], List[Descriptor]] = {}
    for values, desc in selected.tuples:
        groups.setdefault((values[u_idx], values[v_idx]), []).append(desc)
    rows = []
    for (upsilon, value), descs in groups.items():
        prior = event_probability(descs, engine.world)
        rows.append(
            RankedPrediction(
                phi=phi,
                upsilon=upsilon,
                value=value,
                prior=prior,
                descriptors=tuple(descs),
                descriptor_priors=tuple(
                    event_probability([d], engine.world) for d in descs
                ),
            )
        )
    rows.sort(key=lambda r: (-r.prior, r.upsilon, r.value))
    return rows


def bayes_condition(
    rows: Sequence[RankedPrediction], obs: Observation
) -> List[RankedPrediction]:
    """Posterior over the alternative predictions given one observation.

    Likelihood weights are computed in log space with max-subtraction, so
    far-off alternatives underflow to exact zeros instead of poisoning the
    normalization.  Output is re-sorted descending by posterior.
    """
    if not rows:
        raise EmptySelection("nothing to condition")
    prior_total = math.fsum(r.prior for r in rows)
    if abs(prior_total - 1.0) > PRIOR_SUM_TOL:
        raise ValueError(f"priors sum to {prior_total}, expected 1")
    log_w = []
    for r in rows:
        loglik = -0.5 * ((obs.y - r.value) / obs.sigma) ** 2
        log_w.append(
            (math.log(r.prior) if r.prior > 0 else -math.inf) + loglik
        )
    peak = max(log_w)
    if peak == -math.inf:
        raise DegenerateLikelihood(
            "all likelihood-weighted priors underflowed to zero"
        )
    weights = [math.exp(lw - peak) for lw in log_w]
    total = math.fsum(weights)
    out = [
        replace(r, posterior=w / total) for r, w in zip(rows, weights)
    ]
    out.sort(key=lambda r: (-(r.posterior or 0.0), r.upsilon, r.value))
    return out


def _check_coverage(
    rows: Sequence[RankedPrediction], world: WorldTable
) -> None:
    descs = [d for r in rows for d in r.descriptors]
    for a, b in ((x, y) for i, x in enumerate(descs) for y in descs[i + 1:]):
        if not a.conflicts_with(b):
            raise PartialCoverage(
                f"conditioned events {a} and {b} are not mutually exclusive"
            )
    covered = event_probability(descs, world)
    if abs(covered - 1.0) > COVERAGE_TOL:
        raise PartialCoverage(
            f"conditioned tuples cover probability {covered}, expected 1: "
            "some joint assignment with prior mass has no conditioned tuple"
        )


def writeback_posteriors(
    engine: Engine, rows: Sequence[RankedPrediction]
) -> WorldTable:
    """Commit posteriors into the world table.

    The variables mentioned by the conditioned tuples are retired and
    replaced by a single compound variable whose domain is the conditioned
    events and whose marginals are their posteriors.  Every descriptor in
    every relation that mentions a retired variable is rewritten in terms
    of the compound variable (expanding into one tuple per consistent
    event when the descriptor covers several)."""
    if any(r.posterior is None for r in rows):
        raise ValueError("rows carry no posteriors; run bayes_condition first")
    retired = sorted(
        set().union(*(d.variables() for r in rows for d in r.descriptors))
        if rows else set()
    )
    if not retired:
        return engine.world  # conditioning a certain relation: no-op

    _check_coverage(rows, engine.world)

    # per conditioned event: its posterior, split over the event's tuples
    # proportionally to their prior mass
    events: List[Tuple[Descriptor, float, float]] = []  # (desc, posterior, prior)
    for r in rows:
        for desc, dprior in zip(r.descriptors, r.descriptor_priors):
            share = dprior / r.prior if r.prior > 0 else 1.0 / len(r.descriptors)
            events.append((desc, r.posterior * share, dprior))

    # The compound variable ranges over the full joint assignments of the
    # retired variables: each event's posterior is distributed over the
    # joints extending it by the prior conditional (the within-event
    # distribution is untouched by conditioning), so partial descriptors
    # stay exactly representable as sets of compound values.
    joints = enumerate_worlds(retired, engine.world)
    weights: List[float] = []
    labels: List[Tuple] = []
    for world_map, prior in joints:
        weight = 0.0
        for desc, posterior, dprior in events:
            if desc.holds_in(world_map):
                weight = posterior * (prior / dprior) if dprior > 0 else 0.0
                break
        weights.append(weight)
        labels.append(tuple(sorted(world_map.items())))

    retired_set = set(retired)
    z = engine.world.register_variable(
        len(weights), weights, labels=labels, compound=True
    )

    for name, rel in list(engine.relations.items()):
        out = []
        for values, desc in rel.tuples:
            in_v = Descriptor(
                frozenset(p for p in desc.assignments if p[0] in retired_set)
            )
            if not in_v.assignments:
                out.append((values, desc))
                continue
            rest = Descriptor(desc.assignments - in_v.assignments)
            for k, (world_map, _) in enumerate(joints):
                if in_v.holds_in(world_map):
                    out.append((values, rest.extend(z, k + 1)))
        engine.relations[name] = URelation(rel.name, list(rel.schema), out)

    for var in retired:
        engine.world.retire(var)
    return engine.world


def observe(
    engine: Engine, obs: Observation, commit: bool = False
) -> List[RankedPrediction]:
    """Rank, condition, and optionally commit in one step."""
    phis = sorted({p.phi for p in engine.project.phenomena})
    if len(phis) != 1:
        raise ValueError("observe() needs an explicit phi for multi-phenomenon "
                         "projects; use rank_predictions + bayes_condition")
    ranked = rank_predictions(engine, phis[0], obs.output_attr, obs.dims)
    conditioned = bayes_condition(ranked, obs)
    if commit:
        writeback_posteriors(engine, conditioned)
        engine.history.append(
            {
                "attr": obs.output_attr,
                "dims": dict(obs.dims),
                "y": obs.y,
                "sigma": obs.sigma,
            }
        )
    return conditioned
