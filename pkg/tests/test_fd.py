"""Functional dependency reasoning and scheme synthesis."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypodb.errors import CyclicDependency, UnknownAttribute
from hypodb.fd import (
    FD,
    FDSet,
    attribute_closure,
    attrs,
    candidate_key,
    equivalent,
    implies,
    is_lossless,
    minimal_cover,
    preserves_dependencies,
    synthesize_3nf,
    u_ptc,
)


def fdset(universe, *fds):
    return FDSet(
        frozenset(FD(frozenset(l), frozenset(r)) for l, r in fds),
        frozenset(universe),
    )


@pytest.fixture()
def sigma_fall():
    """FD schema of the free-fall model."""
    return fdset(
        {"phi", "upsilon", "g", "v0", "s0", "t", "a", "v", "s"},
        ({"phi"}, {"g", "v0", "s0"}),
        ({"g", "upsilon"}, {"a"}),
        ({"g", "v0", "t", "upsilon"}, {"v"}),
        ({"g", "v0", "s0", "t", "upsilon"}, {"s"}),
    )


@pytest.fixture()
def sigma_drag():
    """FD schema shared by the two drag models."""
    return fdset(
        {"phi", "upsilon", "g", "D", "s0", "t", "a", "v", "s"},
        ({"phi"}, {"g", "D", "s0"}),
        ({"upsilon"}, {"a"}),
        ({"g", "D", "upsilon"}, {"v"}),
        ({"g", "D", "s0", "t", "upsilon"}, {"s"}),
    )


class TestClosure:
    def test_reflexive(self, sigma_fall):
        assert attrs("t") <= attribute_closure(sigma_fall, {"t"})

    def test_phi_key_reaches_everything(self, sigma_fall):
        closure = attribute_closure(sigma_fall, {"phi", "upsilon", "t"})
        assert closure == sigma_fall.universe

    def test_premise_of_fold(self, sigma_fall):
        assert attribute_closure(sigma_fall, {"g", "upsilon"}) == attrs(
            "g", "upsilon", "a"
        )

    def test_unknown_attribute(self, sigma_fall):
        with pytest.raises(UnknownAttribute):
            attribute_closure(sigma_fall, {"bogus"})

    def test_idempotent(self, sigma_fall):
        once = attribute_closure(sigma_fall, {"phi"})
        assert attribute_closure(sigma_fall, once) == once


class TestImplies:
    def test_pseudo_transitive_fold(self, sigma_fall):
        # phi -> g and g upsilon -> a give phi upsilon -> a
        assert implies(sigma_fall, FD(attrs("phi", "upsilon"), attrs("a")))

    def test_non_consequence(self, sigma_fall):
        assert not implies(sigma_fall, FD(attrs("t"), attrs("s")))

    def test_fd_sides_nonempty(self):
        with pytest.raises(ValueError):
            FD(frozenset(), attrs("a"))


class TestMinimalCover:
    def test_equivalent_to_input(self, sigma_fall):
        assert equivalent(minimal_cover(sigma_fall), sigma_fall)

    def test_singleton_rhs(self, sigma_fall):
        assert all(len(fd.rhs) == 1 for fd in minimal_cover(sigma_fall).fds)

    def test_redundant_fd_removed(self):
        sigma = fdset({"a", "b", "c"}, ({"a"}, {"b"}), ({"b"}, {"c"}), ({"a"}, {"c"}))
        cover = minimal_cover(sigma)
        assert FD(attrs("a"), attrs("c")) not in cover.fds

    def test_extraneous_lhs_attribute_removed(self):
        sigma = fdset({"a", "b", "c"}, ({"a"}, {"b"}), ({"a", "b"}, {"c"}))
        cover = minimal_cover(sigma)
        assert FD(attrs("a"), attrs("c")) in cover.fds

    def test_deterministic(self, sigma_fall):
        assert minimal_cover(sigma_fall) == minimal_cover(sigma_fall)


class TestCandidateKey:
    def test_fall_key(self, sigma_fall):
        key = candidate_key(sigma_fall)
        assert key == attrs("phi", "upsilon", "t")

    def test_key_determines_universe(self, sigma_drag):
        key = candidate_key(sigma_drag)
        assert attribute_closure(sigma_drag, key) == sigma_drag.universe


class TestThreeNF:
    def test_fall_contains_reference_scheme(self, sigma_fall):
        schemes = synthesize_3nf(sigma_fall)
        assert attrs("g", "v0", "s0", "upsilon", "t", "s") in {
            s.attrs for s in schemes
        }

    def test_drag_schemes(self, sigma_drag):
        scheme_attrs = {s.attrs for s in synthesize_3nf(sigma_drag)}
        assert attrs("g", "D", "s0", "upsilon", "t", "s") in scheme_attrs
        assert attrs("g", "D", "upsilon", "v") in scheme_attrs

    def test_lossless_and_dependency_preserving(self, sigma_fall, sigma_drag):
        for sigma in (sigma_fall, sigma_drag):
            schemes = synthesize_3nf(sigma)
            assert is_lossless(sigma, [s.attrs for s in schemes])
            assert preserves_dependencies(sigma, schemes)


class TestChase:
    def test_textbook_lossless_pair(self):
        sigma = fdset({"a", "b", "c"}, ({"a"}, {"b"}))
        assert is_lossless(sigma, [attrs("a", "b"), attrs("a", "c")])

    def test_textbook_lossy_pair(self):
        sigma = fdset({"a", "b", "c"}, ({"a"}, {"b"}))
        assert not is_lossless(sigma, [attrs("a", "b"), attrs("b", "c")])

    def test_full_universe_is_lossless(self, sigma_fall):
        assert is_lossless(sigma_fall, [sigma_fall.universe])


@st.composite
def fd_sets(draw):
    n = draw(st.integers(3, 8))
    universe = [f"a{i}" for i in range(n)]
    fds = []
    for _ in range(draw(st.integers(1, 6))):
        lhs = draw(
            st.sets(st.sampled_from(universe), min_size=1, max_size=3)
        )
        rhs = draw(
            st.sets(st.sampled_from(universe), min_size=1, max_size=2)
        )
        fds.append((lhs, rhs))
    return fdset(universe, *fds)


class TestSynthesisProperties:
    @settings(max_examples=200, deadline=None)
    @given(fd_sets())
    def test_lossless_by_chase(self, sigma):
        schemes = synthesize_3nf(sigma)
        assert is_lossless(sigma, [s.attrs for s in schemes])

    @settings(max_examples=200, deadline=None)
    @given(fd_sets())
    def test_dependency_preserving(self, sigma):
        assert preserves_dependencies(sigma, synthesize_3nf(sigma))

    @settings(max_examples=200, deadline=None)
    @given(fd_sets())
    def test_cover_equivalent(self, sigma):
        assert equivalent(minimal_cover(sigma), sigma)


class TestUPtc:
    def test_fall_prediction_schemes(self, sigma_fall):
        schemes = {s.name: s for s in u_ptc(sigma_fall, {"s0"})}
        s = schemes["Y[s]"]
        assert s.attrs == attrs("phi", "upsilon", "t", "s")
        assert s.uncertainty_deps == attrs("g", "v0")
        assert schemes["Y[a]"].attrs == attrs("phi", "upsilon", "a")
        assert schemes["Y[a]"].uncertainty_deps == attrs("g")
        assert {"Y[g]", "Y[v0]"} <= set(schemes)
        assert "Y[s0]" not in schemes  # certain params get no factor scheme

    def test_drag_certain_output(self, sigma_drag):
        schemes = {s.name: s for s in u_ptc(sigma_drag, {"s0"})}
        assert schemes["Y[a]"].uncertainty_deps == frozenset()
        assert schemes["Y[v]"].attrs == attrs("phi", "upsilon", "v")
        assert schemes["Y[v]"].uncertainty_deps == attrs("D", "g")

    def test_descriptive_schemes_present(self, sigma_fall):
        kinds = {s.name: s.kind for s in u_ptc(sigma_fall, {"s0"})}
        assert kinds["PHENOMENON"] == "descriptive"
        assert kinds["HYPOTHESIS"] == "descriptive"
        assert kinds["EXPLANATION"] == "descriptive"

    def test_non_parameter_certain_rejected(self, sigma_fall):
        with pytest.raises(UnknownAttribute):
            u_ptc(sigma_fall, {"t"})

    def test_cyclic_output_lhs_rejected(self):
        sigma = fdset(
            {"phi", "upsilon", "x", "y"},
            ({"upsilon", "y"}, {"x"}),
            ({"upsilon", "x"}, {"y"}),
        )
        with pytest.raises(CyclicDependency):
            u_ptc(sigma, set())
