"""Functional dependency reasoning: Armstrong closure, minimal cover,
3NF synthesis with a chase-based losslessness check, and the two-pass
scheme derivation that folds parameters behind the phenomenon key and
unfolds the uncertain ones into per-factor condition columns.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Sequence, Set, Tuple

from .errors import CyclicDependency, UnknownAttribute

Attrs = FrozenSet[str]


def attrs(*names: str) -> Attrs:
    return frozenset(names)


@dataclass(frozen=True)
class FD:
    """Functional dependency lhs -> rhs over attribute names."""

    lhs: Attrs
    rhs: Attrs

    def __post_init__(self) -> None:
        if not self.lhs or not self.rhs:
            raise ValueError("FD sides must be nonempty")

    def __str__(self) -> str:
        return f"{' '.join(sorted(self.lhs))} -> {' '.join(sorted(self.rhs))}"


def _fd_sort_key(fd: FD) -> Tuple[Tuple[str, ...], Tuple[str, ...]]:
    return (tuple(sorted(fd.lhs)), tuple(sorted(fd.rhs)))


@dataclass(frozen=True)
class FDSet:
    """A set of FDs closed over a declared attribute universe."""

    fds: FrozenSet[FD]
    universe: Attrs

    def __post_init__(self) -> None:
        for fd in self.fds:
            undeclared = (fd.lhs | fd.rhs) - self.universe
            if undeclared:
                raise UnknownAttribute(
                    f"FD {fd} mentions undeclared attributes {sorted(undeclared)}"
                )

    def sorted_fds(self) -> List[FD]:
        return sorted(self.fds, key=_fd_sort_key)

    def singleton_rhs(self) -> List[FD]:
        """Decomposition-rule normal form: one rhs attribute per FD,
        trivial rhs attributes (already in the lhs) dropped."""
        out = []
        for fd in self.sorted_fds():
            for a in sorted(fd.rhs - fd.lhs):
                out.append(FD(fd.lhs, frozenset({a})))
        return out

    def __str__(self) -> str:
        return "{ " + ", ".join(str(fd) for fd in self.sorted_fds()) + " }"


def attribute_closure(sigma: FDSet, x: Iterable[str]) -> Attrs:
    """Fixpoint X+ of x under sigma (idempotent, monotone)."""
    xs = frozenset(x)
    unknown = xs - sigma.universe
    if unknown:
        raise UnknownAttribute(f"unknown attributes {sorted(unknown)}")
    closure = set(xs)
    changed = True
    while changed:
        changed = False
        for fd in sigma.fds:
            if fd.lhs <= closure and not fd.rhs <= closure:
                closure |= fd.rhs
                changed = True
    return frozenset(closure)


def implies(sigma: FDSet, fd: FD) -> bool:
    """True iff sigma entails fd."""
    return fd.rhs <= attribute_closure(sigma, fd.lhs)


def equivalent(a: FDSet, b: FDSet) -> bool:
    return all(implies(b, fd) for fd in a.fds) and all(implies(a, fd) for fd in b.fds)


def minimal_cover(sigma: FDSet) -> FDSet:
    """Canonical cover: singleton rhs, no extraneous lhs attribute, no
    redundant FD; equivalent to the input."""
    fds = sigma.singleton_rhs()

    # drop extraneous lhs attributes: a is extraneous in X -> A iff
    # A is in the closure of X \ {a} under the current FD set
    current = list(fds)
    for i, fd in enumerate(list(current)):
        lhs = set(fd.lhs)
        for a in sorted(fd.lhs):
            if len(lhs) == 1:
                break
            trial = frozenset(lhs - {a})
            current_set = FDSet(frozenset(current), sigma.universe)
            if fd.rhs <= attribute_closure(current_set, trial):
                lhs.discard(a)
                current[i] = FD(frozenset(lhs), fd.rhs)
    # drop redundant FDs
    kept = list(dict.fromkeys(current))
    for fd in sorted(kept, key=_fd_sort_key):
        rest = [g for g in kept if g != fd]
        if rest and implies(FDSet(frozenset(rest), sigma.universe), fd):
            kept = rest
    return FDSet(frozenset(kept), sigma.universe)


def candidate_key(sigma: FDSet, within: Attrs = None) -> Attrs:
    """A minimal attribute set determining the universe, found by greedy
    reduction in deterministic (sorted) order."""
    key = set(within if within is not None else sigma.universe)
    target = sigma.universe
    for a in sorted(key):
        if target <= attribute_closure(sigma, key - {a}):
            key.discard(a)
    return frozenset(key)


SCHEME_KINDS = ("descriptive", "input", "prediction", "factor")


@dataclass(frozen=True)
class RelationScheme:
    name: str
    attrs: Attrs
    key: Attrs
    kind: str = "prediction"
    uncertainty_deps: Attrs = frozenset()

    def __post_init__(self) -> None:
        if self.kind not in SCHEME_KINDS:
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        if not self.key <= self.attrs:
            raise ValueError("key must be a subset of the scheme attributes")


def synthesize_3nf(sigma: FDSet) -> List[RelationScheme]:
    """Classical synthesis: minimal cover, one scheme per group of FDs with
    equivalent lhs, plus a candidate-key scheme when none contains one.
    The result is lossless and dependency-preserving.
    """
    cover = minimal_cover(sigma)
    fds = cover.sorted_fds()

    # group by lhs-equivalence under the cover
    groups: List[Tuple[Attrs, List[FD]]] = []
    for fd in fds:
        placed = False
        for rep, members in groups:
            if (rep <= attribute_closure(cover, fd.lhs)
                    and fd.lhs <= attribute_closure(cover, rep)):
                members.append(fd)
                placed = True
                break
        if not placed:
            groups.append((fd.lhs, [fd]))

    schemes: List[RelationScheme] = []
    for rep, members in groups:
        scheme_attrs = frozenset(set().union(*(fd.lhs | fd.rhs for fd in members)))
        schemes.append(
            RelationScheme(
                name=f"R{len(schemes) + 1}",
                attrs=scheme_attrs,
                key=rep,
                kind="prediction",
            )
        )
    # lossless join guarantee: some scheme must contain a candidate key
    key = candidate_key(cover)
    if not any(key <= s.attrs for s in schemes):
        schemes.append(
            RelationScheme(
                name=f"R{len(schemes) + 1}", attrs=key, key=key, kind="prediction"
            )
        )
    # absorb schemes contained in others
    schemes = [
        s
        for s in schemes
        if not any(t is not s and s.attrs < t.attrs for t in schemes)
    ]
    return schemes


def is_lossless(sigma: FDSet, decomposition: Sequence[Attrs]) -> bool:
    """Chase test for lossless join of a decomposition of sigma's universe."""
    universe = sorted(sigma.universe)
    pos = {a: i for i, a in enumerate(universe)}
    rows: List[List[object]] = []
    for r, scheme in enumerate(decomposition):
        rows.append(
            [a if a in scheme else ("b", r, a) for a in universe]
        )

    changed = True
    while changed:
        changed = False
        for fd in sigma.fds:
            lhs_idx = [pos[a] for a in sorted(fd.lhs)]
            rhs_idx = [pos[a] for a in sorted(fd.rhs)]
            buckets: Dict[Tuple, List[int]] = {}
            for i, row in enumerate(rows):
                buckets.setdefault(tuple(row[j] for j in lhs_idx), []).append(i)
            for members in buckets.values():
                if len(members) < 2:
                    continue
                for j in rhs_idx:
                    symbols = {rows[i][j] for i in members}
                    if len(symbols) == 1:
                        continue
                    # prefer the distinguished symbol, else the least marked one
                    target = universe[j] if universe[j] in symbols else min(
                        symbols, key=repr
                    )
                    for row in rows:
                        if row[j] in symbols and row[j] != target:
                            row[j] = target
                            changed = True
        if any(all(cell == universe[j] for j, cell in enumerate(row)) for row in rows):
            return True
    return any(
        all(cell == universe[j] for j, cell in enumerate(row)) for row in rows
    )


def preserves_dependencies(sigma: FDSet, schemes: Sequence[RelationScheme]) -> bool:
    """Every original FD is implied by the union of the FDs projected onto
    the schemes (checked via the standard closure-restriction loop)."""
    scheme_attrs = [s.attrs for s in schemes]

    def projected_closure(x: Attrs) -> Attrs:
        closure = set(x)
        changed = True
        while changed:
            changed = False
            for sa in scheme_attrs:
                add = attribute_closure(sigma, frozenset(closure) & sa) & sa
                if not add <= closure:
                    closure |= add
                    changed = True
        return frozenset(closure)

    return all(fd.rhs <= projected_closure(fd.lhs) for fd in sigma.fds)


def _classify(sigma: FDSet) -> Tuple[Attrs, List[FD], Attrs]:
    """Split sigma into the parameter FD and the output FDs; returns
    (params, output FDs with singleton rhs, dims)."""
    params: Set[str] = set()
    output_fds: List[FD] = []
    for fd in sigma.singleton_rhs():
        if fd.lhs == frozenset({"phi"}):
            params |= fd.rhs
        else:
            output_fds.append(fd)
    outputs = set().union(*(fd.rhs for fd in output_fds)) if output_fds else set()
    dims = sigma.universe - {"phi", "upsilon"} - params - outputs
    return frozenset(params), output_fds, frozenset(dims)


def u_ptc(sigma: FDSet, certain_params: Iterable[str]) -> List[RelationScheme]:
    """Derive relation schemes by folding parameters for certainty and
    unfolding the uncertain ones.

    Phase 1 replaces the parameters in each output FD's lhs by phi
    (pseudo-transitivity through phi -> params), yielding one prediction
    scheme (phi, upsilon, dims, output) per output.  Phase 2 re-derives
    with the certain parameters only, annotating each prediction scheme
    with the uncertain parameters it remains sensitive to; those become
    the scheme's condition-column factors.  One factor scheme per
    uncertain parameter and the descriptive schemes are emitted alongside.
    """
    certain = frozenset(certain_params)
    params, output_fds, dims = _classify(sigma)
    if not certain <= params:
        raise UnknownAttribute(
            f"certain params {sorted(certain - params)} are not parameters"
        )
    outputs = frozenset().union(*(fd.rhs for fd in output_fds)) if output_fds else frozenset()

    # resolve outputs referenced in lhs positions down to params and dims
    by_output = {next(iter(fd.rhs)): fd for fd in output_fds}

    def resolve(o: str, trail: Tuple[str, ...]) -> Attrs:
        if o in trail:
            raise CyclicDependency(
                "cyclic dependency among outputs: " + " -> ".join(trail + (o,))
            )
        base: Set[str] = set()
        for a in by_output[o].lhs:
            if a in outputs:
                base |= resolve(a, trail + (o,))
            else:
                base.add(a)
        return frozenset(base)

    schemes: List[RelationScheme] = [
        RelationScheme("PHENOMENON", attrs("phi", "description"), attrs("phi"),
                       kind="descriptive"),
        RelationScheme("HYPOTHESIS", attrs("upsilon", "name"), attrs("upsilon"),
                       kind="descriptive"),
        RelationScheme("EXPLANATION", attrs("phi", "upsilon", "confidence"),
                       attrs("phi", "upsilon"), kind="descriptive"),
    ]
    for p in sorted(params - certain):
        schemes.append(
            RelationScheme(f"Y[{p}]", attrs("phi", p), attrs("phi"), kind="factor")
        )
    for fd in output_fds:
        o = next(iter(fd.rhs))
        lhs = resolve(o, ())
        o_dims = lhs & dims
        deps = (lhs & params) - certain
        schemes.append(
            RelationScheme(
                name=f"Y[{o}]",
                attrs=frozenset({"phi", "upsilon", o} | o_dims),
                key=frozenset({"phi", "upsilon"} | o_dims),
                kind="prediction",
                uncertainty_deps=deps,
            )
        )
    return schemes
