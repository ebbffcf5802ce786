"""World table, descriptors, and exact probability computation."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypodb.errors import (
    DomainTooLarge,
    EmptyDomain,
    EmptyVarSet,
    InconsistentDescriptor,
    UnknownVariable,
    ZeroTotalWeight,
)
from hypodb.worlds import (
    EMPTY_DESCRIPTOR,
    Attribute,
    Descriptor,
    URelation,
    WorldTable,
    descriptor_probability,
    enumerate_worlds,
    event_probability,
)


class TestDescriptor:
    def test_empty_descriptor_is_consistent(self):
        assert EMPTY_DESCRIPTOR.is_consistent
        assert EMPTY_DESCRIPTOR.variables() == frozenset()

    def test_inconsistent_when_variable_doubly_assigned(self):
        d = Descriptor.of((1, 1), (1, 2))
        assert not d.is_consistent

    def test_merge_and_extend(self):
        d = Descriptor.of((1, 1)).extend(2, 3)
        assert d == Descriptor.of((1, 1), (2, 3))
        assert d.merge(Descriptor.of((3, 1))).variables() == frozenset({1, 2, 3})

    def test_conflicts_with(self):
        a = Descriptor.of((1, 1), (2, 2))
        assert a.conflicts_with(Descriptor.of((1, 2)))
        assert not a.conflicts_with(Descriptor.of((1, 1), (3, 1)))
        assert not a.conflicts_with(EMPTY_DESCRIPTOR)

    def test_holds_in(self):
        d = Descriptor.of((1, 2))
        assert d.holds_in({1: 2, 5: 1})
        assert not d.holds_in({1: 1})
        assert not d.holds_in({})

    def test_str_is_sorted(self):
        assert str(Descriptor.of((2, 1), (1, 3))) == "{x1->3, x2->1}"


class TestWorldTable:
    def test_register_normalizes_weights(self):
        w = WorldTable()
        x = w.register_variable(2, [3, 3])
        assert w.marginals(x) == [0.5, 0.5]

    def test_ids_are_sequential_and_never_reused(self):
        w = WorldTable()
        a = w.register_variable(1, [1.0])
        b = w.register_variable(1, [1.0])
        w.retire(a)
        c = w.register_variable(1, [1.0])
        assert (a, b, c) == (1, 2, 3)
        assert a not in w

    def test_labels_and_compound_flag(self):
        w = WorldTable()
        x = w.register_variable(2, [1, 1], labels=["lo", "hi"], compound=True)
        assert w.labels(x) == ["lo", "hi"]
        assert w.is_compound(x)

    def test_empty_domain_rejected(self):
        with pytest.raises(EmptyDomain):
            WorldTable().register_variable(0, [])

    def test_zero_total_weight_rejected(self):
        with pytest.raises(ZeroTotalWeight):
            WorldTable().register_variable(2, [0, 0])

    def test_unknown_variable(self):
        w = WorldTable()
        with pytest.raises(UnknownVariable):
            w.marginal(7, 1)

    def test_bad_value_index(self):
        w = WorldTable()
        x = w.register_variable(2, [1, 1])
        with pytest.raises(UnknownVariable):
            w.marginal(x, 3)

    def test_copy_is_independent(self):
        w = WorldTable()
        x = w.register_variable(2, [1, 1])
        clone = w.copy()
        clone.retire(x)
        assert x in w and x not in clone


class TestProbabilities:
    @pytest.fixture()
    def world(self):
        w = WorldTable()
        w.register_variable(3, [0.6, 0.2, 0.2])  # x1
        w.register_variable(2, [0.5, 0.5])  # x2
        return w

    def test_descriptor_probability_is_product(self, world):
        d = Descriptor.of((1, 1), (2, 2))
        assert descriptor_probability(d, world) == pytest.approx(0.3)

    def test_empty_descriptor_probability_is_one(self, world):
        assert descriptor_probability(EMPTY_DESCRIPTOR, world) == 1.0

    def test_inconsistent_descriptor_rejected(self, world):
        with pytest.raises(InconsistentDescriptor):
            descriptor_probability(Descriptor.of((1, 1), (1, 2)), world)
        with pytest.raises(InconsistentDescriptor):
            event_probability([Descriptor.of((1, 1), (1, 2))], world)

    def test_event_probability_empty(self, world):
        assert event_probability([], world) == 0.0

    def test_event_probability_exclusive_sum(self, world):
        descs = [Descriptor.of((1, i)) for i in (1, 2, 3)]
        assert event_probability(descs, world) == pytest.approx(1.0)

    def test_event_probability_overlapping(self, world):
        # P(x1=1 or x2=1) = .6 + .5 - .3
        descs = [Descriptor.of((1, 1)), Descriptor.of((2, 1))]
        assert event_probability(descs, world) == pytest.approx(0.8)

    def test_certain_descriptor_dominates(self, world):
        descs = [Descriptor.of((1, 1)), EMPTY_DESCRIPTOR]
        assert event_probability(descs, world) == 1.0

    def test_enumerate_worlds(self, world):
        worlds = enumerate_worlds([1, 2], world)
        assert len(worlds) == 6
        assert math.fsum(p for _, p in worlds) == pytest.approx(1.0)
        assert worlds[0] == ({1: 1, 2: 1}, pytest.approx(0.3))

    def test_enumerate_worlds_empty_varset(self, world):
        with pytest.raises(EmptyVarSet):
            enumerate_worlds([], world)

    def test_enumerate_worlds_bound(self, world):
        with pytest.raises(DomainTooLarge):
            enumerate_worlds([1, 2], world, bound=5)


def _random_world_and_descriptors(draw):
    n_vars = draw(st.integers(min_value=1, max_value=6))
    w = WorldTable()
    for _ in range(n_vars):
        size = draw(st.integers(min_value=1, max_value=4))
        weights = [draw(st.integers(min_value=1, max_value=5)) for _ in range(size)]
        w.register_variable(size, weights)
    descs = []
    for _ in range(draw(st.integers(min_value=0, max_value=5))):
        pairs = []
        for var in range(1, n_vars + 1):
            if draw(st.booleans()):
                pairs.append((var, draw(st.integers(1, w.domain_size(var)))))
        descs.append(Descriptor(frozenset(pairs)))
    return w, descs


@st.composite
def world_instances(draw):
    return _random_world_and_descriptors(draw)


class TestEventProbabilityOracle:
    """event_probability against brute-force world enumeration."""

    @settings(max_examples=1000, deadline=None)
    @given(world_instances())
    def test_matches_enumeration(self, instance):
        w, descs = instance
        got = event_probability(descs, w)
        worlds = enumerate_worlds(w.variables(), w)
        want = math.fsum(
            p for world, p in worlds if any(d.holds_in(world) for d in descs)
        )
        assert got == pytest.approx(want, abs=1e-12)


class TestURelation:
    def test_arity_checked(self):
        rel = URelation("R", [Attribute("a"), Attribute("b")])
        with pytest.raises(ValueError):
            rel.add((1,))

    def test_attr_index(self):
        rel = URelation("R", [Attribute("a"), Attribute("b")])
        assert rel.attr_index("b") == 1

    def test_unknown_attribute(self):
        from hypodb.errors import UnknownAttribute

        rel = URelation("R", [Attribute("a")])
        with pytest.raises(UnknownAttribute):
            rel.attr_index("z")

    def test_bad_kind_rejected(self):
        with pytest.raises(ValueError):
            Attribute("a", "float")
