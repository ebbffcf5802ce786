"""Prediction ranking, Bayesian conditioning, and posterior write-back."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypodb.algebra import conf
from hypodb.analytics import (
    Observation,
    RankedPrediction,
    bayes_condition,
    observe,
    rank_predictions,
    writeback_posteriors,
)
from hypodb.errors import (
    DegenerateLikelihood,
    EmptySelection,
    UnknownAttribute,
)
from hypodb.worlds import enumerate_worlds


def _normal_posteriors(priors, means, y, sigma):
    """Direct textbook computation used as an oracle: likelihood times prior,
    normalized.  No log-space tricks."""
    weights = [
        p * math.exp(-((y - mu) ** 2) / (2 * sigma**2))
        for p, mu in zip(priors, means)
    ]
    total = sum(weights)
    return [w / total for w in weights]


class TestRankPredictions:
    def test_position_ranking(self, built_engine_session):
        rows = rank_predictions(built_engine_session, 1, "s", {"t": 3})
        assert len(rows) == 14
        assert [r.upsilon for r in rows[:6]] == [1] * 6
        for r in rows[:6]:
            assert r.prior == pytest.approx(0.1, abs=1e-9)
        for r in rows[6:]:
            assert r.prior == pytest.approx(0.05, abs=1e-9)
        assert math.fsum(r.prior for r in rows) == pytest.approx(1.0, abs=1e-9)

    def test_descending_order_with_deterministic_ties(self, built_engine_session):
        rows = rank_predictions(built_engine_session, 1, "s", {"t": 3})
        assert [(r.upsilon, r.value) for r in rows[:6]] == [
            (1, 2188.36),
            (1, 2205.82),
            (1, 2320.51),
            (1, 2337.97),
            (1, 2452.66),
            (1, 2470.12),
        ]

    def test_acceleration_groups(self, built_engine_session):
        rows = rank_predictions(built_engine_session, 1, "a")
        got = {(r.upsilon, r.value): r.prior for r in rows}
        assert got[(1, -32.0)] == pytest.approx(0.3)
        assert got[(1, -32.2)] == pytest.approx(0.3)
        assert got[(2, 0.0)] == pytest.approx(0.2)
        assert got[(3, 0.0)] == pytest.approx(0.2)

    def test_unknown_attribute(self, built_engine_session):
        with pytest.raises(UnknownAttribute):
            rank_predictions(built_engine_session, 1, "momentum")

    def test_empty_selection(self, built_engine_session):
        with pytest.raises(EmptySelection):
            rank_predictions(built_engine_session, 1, "s", {"t": 99})


class TestBayesCondition:
    def test_hand_computed_two_point_prior(self):
        rows = [
            RankedPrediction(1, 1, 0.0, 0.5),
            RankedPrediction(1, 2, 10.0, 0.5),
        ]
        out = bayes_condition(rows, Observation("o", {}, 0.0, 10.0))
        want = _normal_posteriors([0.5, 0.5], [0.0, 10.0], 0.0, 10.0)
        assert out[0].posterior == pytest.approx(max(want))
        assert out[0].posterior == pytest.approx(1 / (1 + math.exp(-0.5)))

    def test_reference_posterior_column(self, built_engine_session):
        rows = rank_predictions(built_engine_session, 1, "s", {"t": 3})
        out = bayes_condition(rows, Observation("s", {"t": 3}, 2250.0, 400.0))
        got = {r.value: r.posterior for r in out}
        want = _normal_posteriors(
            [r.prior for r in rows], [r.value for r in rows], 2250.0, 400.0
        )
        for r, w in zip(rows, want):
            assert got[r.value] == pytest.approx(w, abs=1e-12)
        assert math.fsum(got.values()) == pytest.approx(1.0, abs=1e-9)

    def test_sorted_by_posterior(self, built_engine_session):
        rows = rank_predictions(built_engine_session, 1, "s", {"t": 3})
        out = bayes_condition(rows, Observation("s", {"t": 3}, 2250.0, 400.0))
        posts = [r.posterior for r in out]
        assert posts == sorted(posts, reverse=True)
        assert out[0].value == 2205.82

    def test_far_tail_underflows_to_zero_not_nan(self):
        rows = [
            RankedPrediction(1, 1, 0.0, 0.5),
            RankedPrediction(1, 2, 1e6, 0.5),
        ]
        out = bayes_condition(rows, Observation("o", {}, 0.0, 1.0))
        assert out[0].posterior == 1.0
        assert out[1].posterior == 0.0

    def test_priors_must_sum_to_one(self):
        rows = [RankedPrediction(1, 1, 0.0, 0.25)]
        with pytest.raises(ValueError):
            bayes_condition(rows, Observation("o", {}, 0.0, 1.0))

    def test_empty_rows(self):
        with pytest.raises(EmptySelection):
            bayes_condition([], Observation("o", {}, 0.0, 1.0))

    def test_degenerate_likelihood(self):
        rows = [
            RankedPrediction(1, 1, 0.0, 0.5),
            RankedPrediction(1, 2, 1.0, 0.5),
        ]
        with pytest.raises(DegenerateLikelihood):
            bayes_condition(rows, Observation("o", {}, 1e30, 1e-290))

    def test_sigma_must_be_positive(self):
        with pytest.raises(ValueError):
            Observation("o", {}, 0.0, 0.0)

    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(st.floats(-100, 100), min_size=2, max_size=6, unique=True),
        st.floats(-50, 50),
        st.floats(0.5, 50),
        st.floats(-1000, 1000),
    )
    def test_shift_invariance(self, means, y, sigma, shift):
        """Translating means and observation together leaves posteriors fixed."""
        priors = [1.0 / len(means)] * len(means)
        rows = [
            RankedPrediction(1, i + 1, mu, p)
            for i, (mu, p) in enumerate(zip(means, priors))
        ]
        shifted = [
            RankedPrediction(1, i + 1, mu + shift, p)
            for i, (mu, p) in enumerate(zip(means, priors))
        ]
        a = bayes_condition(rows, Observation("o", {}, y, sigma))
        b = bayes_condition(shifted, Observation("o", {}, y + shift, sigma))
        for ra, rb in zip(a, b):
            assert ra.upsilon == rb.upsilon
            assert ra.posterior == pytest.approx(rb.posterior, abs=1e-9)

    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(st.floats(-100, 100), min_size=2, max_size=6, unique=True),
        st.floats(-50, 50),
    )
    def test_infinite_noise_recovers_prior(self, means, y):
        """As sigma grows, the observation carries no information."""
        priors = [1.0 / len(means)] * len(means)
        rows = [
            RankedPrediction(1, i + 1, mu, p)
            for i, (mu, p) in enumerate(zip(means, priors))
        ]
        out = bayes_condition(rows, Observation("o", {}, y, 1e12))
        for r in out:
            assert r.posterior == pytest.approx(r.prior, abs=1e-9)


class TestWritebackPosteriors:
    def _condition(self, engine, y=2250.0, sigma=400.0, attr="s", dims={"t": 3}):
        rows = rank_predictions(engine, 1, attr, dims)
        return bayes_condition(rows, Observation(attr, dims, y, sigma))

    def test_requires_posteriors(self, engine):
        rows = rank_predictions(engine, 1, "s", {"t": 3})
        with pytest.raises(ValueError):
            writeback_posteriors(engine, rows)

    def test_faithful_to_posteriors(self, engine):
        out = self._condition(engine)
        writeback_posteriors(engine, out)
        rel = engine.relations["Y[s]"]
        masses = dict(conf(rel, ["phi", "upsilon", "s"], engine.world))
        for r in out:
            assert masses[(1, r.upsilon, r.value)] == pytest.approx(
                r.posterior, abs=1e-9
            )

    def test_retires_variables_and_registers_compound(self, engine):
        out = self._condition(engine)
        writeback_posteriors(engine, out)
        assert engine.world.variables() == [8]
        assert engine.world.is_compound(8)
        assert math.fsum(engine.world.marginals(8)) == pytest.approx(1.0)

    def test_hypothesis_mass_propagates_to_other_attributes(self, engine):
        out = self._condition(engine)
        writeback_posteriors(engine, out)
        upsilon_mass = dict(conf(engine.relations["Y[a]"], ["upsilon"], engine.world))
        want_h1 = math.fsum(r.posterior for r in out if r.upsilon == 1)
        assert upsilon_mass[(1,)] == pytest.approx(want_h1, abs=1e-9)

    def test_within_event_conditionals_preserved(self, engine):
        # the g-factor split inside hypothesis 1 is untouched by conditioning
        # on s alone beyond the reweighting of the conditioned events
        out = self._condition(engine)
        writeback_posteriors(engine, out)
        masses = dict(conf(engine.relations["Y[a]"], ["upsilon", "a"], engine.world))
        want = {
            (1, -32.0): math.fsum(
                r.posterior
                for r in out
                if r.upsilon == 1 and r.value in (2188.36, 2320.51, 2452.66)
            ),
            (1, -32.2): math.fsum(
                r.posterior
                for r in out
                if r.upsilon == 1 and r.value in (2205.82, 2337.97, 2470.12)
            ),
        }
        for key, value in want.items():
            assert masses[key] == pytest.approx(value, abs=1e-9)

    def test_sequential_conditioning_stays_normalized(self, engine):
        writeback_posteriors(engine, self._condition(engine))
        second = self._condition(engine, y=-90.0, sigma=5.0, attr="v", dims={"t": 3})
        writeback_posteriors(engine, second)
        masses = conf(engine.relations["Y[s]"], ["phi"], engine.world)
        assert math.fsum(p for _, p in masses) == pytest.approx(1.0, abs=1e-9)

    def test_posterior_matches_enumeration_oracle(self, engine):
        out = self._condition(engine)
        writeback_posteriors(engine, out)
        rel = engine.relations["Y[s]"]
        worlds = enumerate_worlds(engine.world.variables(), engine.world)
        groups = {}
        for values, desc in rel.tuples:
            groups.setdefault(values[-1], []).append(desc)
        got = dict(conf(rel, ["s"], engine.world))
        for value, descs in groups.items():
            want = math.fsum(
                p for world, p in worlds
                if any(d.holds_in(world) for d in descs)
            )
            assert got[(value,)] == pytest.approx(want, abs=1e-12)


class TestObserve:
    def test_dry_run_leaves_engine_unchanged(self, engine):
        before = engine.world.variables()
        rows = observe(engine, Observation("s", {"t": 3}, 2250.0, 400.0))
        assert engine.world.variables() == before
        assert engine.history == []
        assert rows[0].posterior is not None

    def test_commit_updates_history_and_world(self, engine):
        observe(engine, Observation("s", {"t": 3}, 2250.0, 400.0), commit=True)
        assert engine.history == [
            {"attr": "s", "dims": {"t": 3}, "y": 2250.0, "sigma": 400.0}
        ]
        assert engine.world.variables() == [8]
