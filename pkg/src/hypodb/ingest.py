"""Trial-file ingestion and uncertainty-factor learning.

Input CSVs carry one row per simulation trial (``tid,phi,<param>,...``);
output CSVs carry predicted values keyed by trial, hypothesis, and
dimension valuation (``tid,phi,upsilon,<dim>,...,<output>,...``).

Factor learning splits the uncertain parameters into the finest partition
whose blocks are empirically independent: the observed joint relative
frequency of every full value combination must equal the product of the
block relative frequencies.
"""

from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .errors import DanglingTid, DuplicateTid, MalformedRow, NoMatchingTrial


@dataclass(frozen=True)
class TrialInput:
    tid: int
    phi: int
    values: Dict[str, float]  # param name -> value

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", dict(self.values))


@dataclass(frozen=True)
class TrialOutput:
    tid: int
    phi: int
    upsilon: int
    dims: Dict[str, float]
    outputs: Dict[str, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "dims", dict(self.dims))
        object.__setattr__(self, "outputs", dict(self.outputs))


@dataclass(frozen=True)
class UncertaintyFactor:
    """A block of parameters carrying one random variable whose discrete
    distribution comes from trial-value frequencies."""

    params: Tuple[str, ...]
    support: Tuple[Tuple[float, ...], ...]  # distinct joint values, ascending
    frequencies: Tuple[int, ...]

    @property
    def domain_size(self) -> int:
        return len(self.support)

    def value_index(self, joint: Tuple[float, ...]) -> int:
        """1-based value-index of a joint value in the support."""
        return self.support.index(joint) + 1


def _parse_number(text: str, path: str, line: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise MalformedRow(f"{path}:{line}: not a number: {text!r}") from None


def _parse_int(text: str, path: str, line: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise MalformedRow(f"{path}:{line}: not an integer: {text!r}") from None


def load_inputs(path: str, params: Sequence[str]) -> List[TrialInput]:
    """Load a trial-input CSV; tids must be dense 1..n per phenomenon."""
    rows: List[TrialInput] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MalformedRow(f"{path}: empty file") from None
        expected = ["tid", "phi", *params]
        if [h.strip() for h in header] != expected:
            raise MalformedRow(
                f"{path}:1: header {header} does not match {expected}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(expected):
                raise MalformedRow(
                    f"{path}:{lineno}: expected {len(expected)} fields, got {len(row)}"
                )
            tid = _parse_int(row[0], path, lineno)
            phi = _parse_int(row[1], path, lineno)
            values = {
                p: _parse_number(cell, path, lineno)
                for p, cell in zip(params, row[2:])
            }
            rows.append(TrialInput(tid, phi, values))
    seen: Dict[int, Set[int]] = {}
    for r in rows:
        if r.tid in seen.setdefault(r.phi, set()):
            raise DuplicateTid(f"{path}: duplicate tid {r.tid} for phi={r.phi}")
        seen[r.phi].add(r.tid)
    for phi, tids in seen.items():
        if tids != set(range(1, len(tids) + 1)):
            raise MalformedRow(
                f"{path}: tids for phi={phi} are not dense 1..{len(tids)}"
            )
    return rows


def load_outputs(
    path: str, dims: Sequence[str], known_tids: Iterable[int]
) -> List[TrialOutput]:
    """Load a trial-output CSV.  Columns after tid, phi, upsilon that name a
    model dimension are dim columns; the rest are output attributes."""
    tids = set(known_tids)
    rows: List[TrialOutput] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            return []
        if header[:3] != ["tid", "phi", "upsilon"]:
            raise MalformedRow(
                f"{path}:1: header must start with tid,phi,upsilon"
            )
        tail = header[3:]
        dim_cols = [c for c in tail if c in dims]
        out_cols = [c for c in tail if c not in dims]
        if not out_cols:
            raise MalformedRow(f"{path}:1: no output attribute column")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise MalformedRow(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            tid = _parse_int(row[0], path, lineno)
            if tid not in tids:
                raise DanglingTid(f"{path}:{lineno}: unknown tid {tid}")
            cells = dict(zip(tail, row[3:]))
            rows.append(
                TrialOutput(
                    tid=tid,
                    phi=_parse_int(row[1], path, lineno),
                    upsilon=_parse_int(row[2], path, lineno),
                    dims={c: _parse_number(cells[c], path, lineno) for c in dim_cols},
                    outputs={c: _parse_number(cells[c], path, lineno) for c in out_cols},
                )
            )
    return rows


def load_trials(
    input_file: str,
    output_files: Sequence[str],
    params: Sequence[str],
    dims: Sequence[str],
) -> Tuple[List[TrialInput], List[TrialOutput]]:
    inputs = load_inputs(input_file, params)
    tids = [r.tid for r in inputs]
    outputs: List[TrialOutput] = []
    for path in output_files:
        outputs.extend(load_outputs(path, dims, tids))
    return inputs, outputs


# --- factor learning ---

def _set_partitions(items: Sequence[str]):
    """All partitions of items into nonempty blocks."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in _set_partitions(rest):
        for i in range(len(partition)):
            yield partition[:i] + [partition[i] + [first]] + partition[i + 1:]
        yield partition + [[first]]


def _canonical(partition: List[List[str]]) -> Tuple[Tuple[str, ...], ...]:
    return tuple(sorted(tuple(sorted(block)) for block in partition))


def _block_distribution(
    inputs: Sequence[TrialInput], block: Sequence[str]
) -> Dict[Tuple[float, ...], int]:
    counts: Dict[Tuple[float, ...], int] = {}
    for r in inputs:
        joint = tuple(r.values[p] for p in block)
        counts[joint] = counts.get(joint, 0) + 1
    return counts


def _factorizes(
    inputs: Sequence[TrialInput],
    partition: Sequence[Tuple[str, ...]],
    tol: float,
) -> bool:
    n = len(inputs)
    block_dists = [_block_distribution(inputs, block) for block in partition]
    full_params = [p for block in partition for p in block]
    observed = _block_distribution(inputs, full_params)
    for combo in itertools.product(*(sorted(d) for d in block_dists)):
        joint = tuple(v for block_vals in combo for v in block_vals)
        expected = 1.0
        for block_vals, dist in zip(combo, block_dists):
            expected *= dist[block_vals] / n
        got = observed.get(joint, 0) / n
        if abs(got - expected) > tol:
            return False
    return True


def learn_factors(
    inputs: Sequence[TrialInput],
    params: Sequence[str],
    tol: float = 1e-9,
) -> Tuple[Dict[str, float], List[UncertaintyFactor]]:
    """Split params into certain values and independent uncertainty factors.

    Single-valued params become certain.  The remaining params get the
    finest partition whose empirical joint distribution factorizes across
    blocks (exhaustive search at desk scale); ties among equally fine
    partitions break to the lexicographically least block list.
    """
    if not inputs:
        raise ValueError("no trial inputs")
    if not 0 <= tol < 0.5:
        raise ValueError("tol must be in [0, 0.5)")
    certain: Dict[str, float] = {}
    uncertain: List[str] = []
    for p in params:
        observed = {r.values[p] for r in inputs}
        if len(observed) == 1:
            certain[p] = next(iter(observed))
        else:
            uncertain.append(p)

    if not uncertain:
        return certain, []

    candidates = [_canonical(p) for p in _set_partitions(sorted(uncertain))]
    best = None
    for partition in sorted(set(candidates), key=lambda p: (-len(p), p)):
        if _factorizes(inputs, partition, tol):
            best = partition
            break
    assert best is not None  # the single-block partition always factorizes

    factors = []
    for block in best:
        dist = _block_distribution(inputs, block)
        support = tuple(sorted(dist))
        factors.append(
            UncertaintyFactor(
                params=block,
                support=support,
                frequencies=tuple(dist[v] for v in support),
            )
        )
    return certain, factors


def representative_tid(
    inputs: Sequence[TrialInput], factor_value: Dict[str, float]
) -> int:
    """Smallest tid among trials matching a joint factor value."""
    matches = [
        r.tid
        for r in inputs
        if all(r.values[p] == v for p, v in factor_value.items())
    ]
    if not matches:
        raise NoMatchingTrial(f"no trial matches {factor_value}")
    return min(matches)
