"""Descriptive stats, correlations, significance and friend influence."""

import math
from datetime import timedelta

import numpy as np
import pytest
import scipy.special
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from happimeter.analytics import (
    STAR_THRESHOLDS,
    TABLE_VARIABLES,
    build_correlation_rows,
    copresence_events,
    correlation_matrix,
    correlation_p_value,
    descriptive_stats,
    descriptives_from_counts,
    friend_influence,
    hourly_profile,
    pearson_r,
    rank_influences,
    regularized_incomplete_beta,
    significance_stars,
)
from happimeter.domain import (
    BigFive,
    Gender,
    MoodInput,
    ParticipantProfile,
)
from happimeter.errors import UndefinedCorrelationError, ValidationError
from happimeter.features import FeatureVector, LabeledExample

from conftest import make_sample, ts
from oracles import stars_for_p, t_two_tailed_p

# Published cohort-level label distributions used as regression fixtures.
PLEASANCE_COUNTS = {2: 13436, 1: 2855, 0: 515}
ACTIVATION_COUNTS = {2: 2662, 1: 9784, 0: 4360}


class TestDescriptives:
    def test_pleasance_reference_counts(self):
        d = descriptives_from_counts(PLEASANCE_COUNTS)
        assert d.n == 16806
        assert d.mean == pytest.approx(1.7688, abs=0.0005)
        assert d.sd == pytest.approx(0.4889, abs=0.0015)

    def test_activation_reference_counts(self):
        d = descriptives_from_counts(ACTIVATION_COUNTS)
        assert d.mean == pytest.approx(0.8989, abs=0.0005)
        assert d.sd == pytest.approx(0.6384, abs=0.0015)

    def test_counts_and_percentages_keyed_by_level_name(self):
        d = descriptives_from_counts({2: 6, 1: 3, 0: 1})
        assert d.counts == {"high": 6, "medium": 3, "low": 1}
        assert d.percentages["high"] == pytest.approx(60.0)
        assert sum(d.percentages.values()) == pytest.approx(100.0)

    def test_missing_levels_default_to_zero(self):
        d = descriptives_from_counts({2: 4})
        assert d.counts == {"high": 4, "medium": 0, "low": 0}
        assert d.mean == 2.0
        assert d.sd == 0.0

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            descriptives_from_counts({})

    def test_pairwise_report_matches_counts(self):
        labels = [(2, 1)] * 5 + [(1, 0)] * 3 + [(0, 2)] * 2
        report = descriptive_stats(labels)
        assert report.n == 10
        assert report.pleasance == descriptives_from_counts({2: 5, 1: 3, 0: 2})
        assert report.activation == descriptives_from_counts({1: 5, 0: 3, 2: 2})

    def test_degenerate_all_high(self):
        report = descriptive_stats([(2, 2)] * 7)
        assert report.pleasance.mean == 2.0
        assert report.pleasance.sd == 0.0
        assert report.activation.percentages == {"high": 100.0, "medium": 0.0, "low": 0.0}

    def test_sd_is_population_not_sample(self):
        # two observations at 0 and 2: population SD is 1, sample SD sqrt(2)
        d = descriptives_from_counts({2: 1, 0: 1})
        assert d.sd == pytest.approx(1.0, abs=1e-15)


def _example(p, a, hour, user="u01", at="2017-05-03 12:00", **feat):
    base = dict(
        heart_rate=70.0,
        activity=2,
        vmc=100.0,
        vmc_last_4h=100.0,
        is_weekend_or_holiday=0,
        hour_of_day=hour,
        light_level=3,
        gps_variance=0.0,
        temperature=18.0,
        humidity=50.0,
        clouds=20.0,
        wind=3.0,
        pressure=1013.0,
    )
    base.update(feat)
    return LabeledExample(
        features=FeatureVector(**base),
        pleasance=p,
        activation=a,
        mood_state=1 + (2 - p) + 3 * (2 - a),
        user=user,
        timestamp=ts(at),
    )


class TestHourlyProfile:
    def test_single_hour_mean(self):
        prof = hourly_profile([_example(2, 1, 9), _example(0, 1, 9)])
        assert set(prof) == {9}
        assert prof[9].mean_pleasance == pytest.approx(1.0)
        assert prof[9].mean_activation == pytest.approx(1.0)
        assert prof[9].n == 2

    def test_hours_without_data_are_absent(self):
        prof = hourly_profile([_example(2, 2, 8), _example(1, 0, 22)])
        assert set(prof) == {8, 22}
        assert 12 not in prof

    def test_keys_sorted_ascending(self):
        prof = hourly_profile([_example(1, 1, 22), _example(1, 1, 6), _example(1, 1, 14)])
        assert list(prof) == [6, 14, 22]


class TestPearson:
    def test_perfect_positive(self):
        assert pearson_r([1, 2, 3], [10, 20, 30]) == pytest.approx(1.0, abs=1e-15)

    def test_perfect_negative(self):
        assert pearson_r([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0, abs=1e-15)

    def test_textbook_point_eight(self):
        assert pearson_r([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-12)

    def test_zero_variance_is_undefined(self):
        with pytest.raises(UndefinedCorrelationError):
            pearson_r([1.0, 1.0, 1.0], [1, 2, 3])
        with pytest.raises(UndefinedCorrelationError):
            pearson_r([1, 2, 3], [5.0, 5.0, 5.0])

    def test_too_short_rejected(self):
        with pytest.raises(ValidationError):
            pearson_r([1, 2], [3, 4])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValidationError):
            pearson_r([1, 2, 3], [1, 2])

    @given(
        st.lists(
            st.floats(min_value=-1e3, max_value=1e3, allow_nan=False),
            min_size=3,
            max_size=30,
        ),
        st.randoms(use_true_random=False),
    )
    @settings(max_examples=60, deadline=None)
    def test_symmetric_bounded_and_shift_invariant(self, xs, rnd):
        ys = [rnd.uniform(-1e3, 1e3) for _ in xs]
        try:
            r = pearson_r(xs, ys)
        except UndefinedCorrelationError:
            return
        assert abs(r) <= 1.0 + 1e-12
        assert pearson_r(ys, xs) == pytest.approx(r, abs=1e-12)
        shifted = [x + 100.0 for x in xs]
        scaled = [3.0 * y for y in ys]
        assert pearson_r(shifted, scaled) == pytest.approx(r, abs=1e-9)

    def test_matches_scipy_on_random_vectors(self):
        rng = np.random.default_rng(5)
        for _ in range(25):
            n = int(rng.integers(3, 40))
            x = rng.normal(size=n)
            y = rng.normal(size=n)
            expected = scipy.stats.pearsonr(x, y).statistic
            assert pearson_r(x, y) == pytest.approx(expected, abs=1e-12)


class TestIncompleteBeta:
    def test_uniform_case_is_identity(self):
        for x in (0.1, 0.25, 0.5, 0.9):
            assert regularized_incomplete_beta(1.0, 1.0, x) == pytest.approx(x, abs=1e-14)

    def test_arcsine_closed_form(self):
        for x in (0.05, 0.3, 0.5, 0.77):
            expected = 2.0 / math.pi * math.asin(math.sqrt(x))
            assert regularized_incomplete_beta(0.5, 0.5, x) == pytest.approx(
                expected, abs=1e-12
            )

    def test_boundaries_and_reflection(self):
        assert regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0
        assert regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0
        for a, b, x in ((2.5, 7.0, 0.2), (40.0, 0.5, 0.93), (0.5, 12.0, 0.01)):
            forward = regularized_incomplete_beta(a, b, x)
            reflected = 1.0 - regularized_incomplete_beta(b, a, 1.0 - x)
            assert forward == pytest.approx(reflected, abs=1e-12)

    def test_invalid_parameters_rejected(self):
        with pytest.raises(ValidationError):
            regularized_incomplete_beta(0.0, 1.0, 0.5)
        with pytest.raises(ValidationError):
            regularized_incomplete_beta(1.0, -2.0, 0.5)

    def test_against_scipy_grid(self):
        params = [0.5, 1.0, 2.5, 10.0, 49.0]
        xs = [1e-6, 0.01, 0.2, 0.5, 0.8, 0.99, 1 - 1e-6]
        for a in params:
            for b in params:
                for x in xs:
                    got = regularized_incomplete_beta(a, b, x)
                    want = float(scipy.special.betainc(a, b, x))
                    assert got == pytest.approx(want, abs=1e-10), (a, b, x)


class TestSignificance:
    def test_p_value_fixtures_against_t_oracle(self):
        for r, n in ((0.9, 5), (0.5, 10), (-0.31, 42), (0.05, 1000), (0.8, 4)):
            assert correlation_p_value(r, n) == pytest.approx(
                t_two_tailed_p(r, n), abs=1e-12
            )

    def test_extremes(self):
        assert correlation_p_value(1.0, 8) == 0.0
        assert correlation_p_value(-1.0, 8) == 0.0
        assert correlation_p_value(0.0, 30) == pytest.approx(1.0, abs=1e-12)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValidationError):
            correlation_p_value(1.2, 10)
        with pytest.raises(ValidationError):
            correlation_p_value(0.5, 2)

    def test_star_fixtures(self):
        assert significance_stars(0.9, 5) == "*"
        assert significance_stars(0.0, 500) == ""
        assert significance_stars(0.99, 100) == "***"
        assert significance_stars(1.0, 3) == "***"
        assert significance_stars(-0.9, 5) == "*"

    def test_thresholds_are_strict(self):
        # p exactly at a threshold must not earn the star for that threshold
        assert STAR_THRESHOLDS == ((0.001, "***"), (0.01, "**"), (0.05, "*"))

    def test_stars_match_oracle_near_thresholds(self):
        rng = np.random.default_rng(17)
        checked = 0
        for _ in range(200):
            n = int(rng.integers(5, 400))
            r = float(rng.uniform(-0.95, 0.95))
            p = t_two_tailed_p(r, n)
            if not (1e-5 < p < 0.2):
                continue  # focus on the region where stars actually flip
            assert significance_stars(r, n) == stars_for_p(p), (r, n, p)
            checked += 1
        assert checked >= 30


class TestCorrelationMatrix:
    def _rows(self, n=40, seed=3):
        rng = np.random.default_rng(seed)
        rows = []
        for _ in range(n):
            a = float(rng.normal())
            rows.append({"a": a, "b": a * 2.0 + float(rng.normal(0, 0.1)), "c": float(rng.normal())})
        return rows

    def test_symmetry_and_diagonal(self):
        m = correlation_matrix(self._rows(), ("a", "b", "c"))
        for i in range(3):
            assert m.cells[i][i].r == 1.0
            assert m.cells[i][i].stars == "***"
            for j in range(3):
                assert m.cells[i][j] == m.cells[j][i]

    def test_identical_columns_fully_significant(self):
        rows = [{"x": float(v), "y": float(v)} for v in range(30)]
        cell = correlation_matrix(rows, ("x", "y")).cell("x", "y")
        assert cell.r == pytest.approx(1.0, abs=1e-12)
        assert cell.stars == "***"
        assert cell.n == 30

    def test_pairwise_complete_counts(self):
        rows = self._rows(20)
        for row in rows[:12]:
            row["c"] = None
        m = correlation_matrix(rows, ("a", "b", "c"))
        assert m.cell("a", "b").n == 20
        assert m.cell("a", "c").n == 8
        assert m.cell("c", "c").n == 8

    def test_insufficient_overlap_is_absent(self):
        rows = self._rows(10)
        for row in rows[:8]:
            row["c"] = None
        m = correlation_matrix(rows, ("a", "b", "c"))
        assert m.cell("a", "c") is None
        assert m.cell("c", "c") is None
        assert m.cell("a", "b") is not None

    def test_zero_variance_column_is_absent(self):
        rows = [{"x": float(v), "k": 1.0} for v in range(10)]
        m = correlation_matrix(rows, ("x", "k"))
        assert m.cell("x", "k") is None
        # the diagonal is fixed at r=1 even for a constant column
        assert m.cell("k", "k").r == 1.0

    def test_matches_scipy_cell_values(self):
        rows = self._rows(35, seed=9)
        m = correlation_matrix(rows, ("a", "b", "c"))
        a = np.array([r["a"] for r in rows])
        c = np.array([r["c"] for r in rows])
        want = scipy.stats.pearsonr(a, c)
        assert m.cell("a", "c").r == pytest.approx(want.statistic, abs=1e-12)


class TestCorrelationRows:
    def _profile(self, user, gender=Gender.MALE, age=31, big5=True):
        return ParticipantProfile(
            user=user,
            age=age,
            gender=gender,
            big_five=BigFive(3.1, 2.9, 3.5, 4.0, 2.2) if big5 else None,
        )

    def test_row_values_and_variable_coverage(self):
        ex = _example(2, 0, 9, temperature=21.5)
        rows = build_correlation_rows([ex], {"u01": self._profile("u01")})
        row = rows[0]
        assert set(row) == set(TABLE_VARIABLES)
        assert row["pleasance"] == 2.0
        assert row["activation"] == 0.0
        assert row["age"] == 31.0
        assert row["gender_male"] == 1.0
        assert row["temperature"] == 21.5
        assert row["hour"] == 9.0

    def test_female_and_unknown_gender_coding(self):
        ex = _example(1, 1, 12)
        female = build_correlation_rows(
            [ex], {"u01": self._profile("u01", gender=Gender.FEMALE)}
        )[0]
        unknown = build_correlation_rows(
            [ex], {"u01": self._profile("u01", gender=Gender.UNKNOWN)}
        )[0]
        assert female["gender_male"] == 0.0
        assert unknown["gender_male"] is None

    def test_missing_profile_leaves_profile_columns_absent(self):
        rows = build_correlation_rows([_example(1, 1, 12)], {})
        row = rows[0]
        assert row["age"] is None
        assert row["neuroticism"] is None
        assert row["heart_rate"] == 70.0

    def test_vmc_window_override_must_align(self):
        exs = [_example(1, 1, 12), _example(1, 1, 13)]
        rows = build_correlation_rows(exs, {}, vmc_window_values=[5.0, 6.0])
        assert [r["vmc_window"] for r in rows] == [5.0, 6.0]
        with pytest.raises(ValidationError):
            build_correlation_rows(exs, {}, vmc_window_values=[5.0])


def _mood(user, at, p=1, a=1):
    return MoodInput(user=user, timestamp=ts(at), pleasance=p, activation=a)


class TestCopresence:
    def test_nearby_in_space_and_time(self):
        moods = [_mood("u01", "2017-05-03 12:00")]
        subj = [make_sample(at="2017-05-03 11:58", lat=48.0, lon=11.5)]
        # ~10 m north of the subject
        frnd = [make_sample(user="u02", at="2017-05-03 12:03", lat=48.00009, lon=11.5)]
        assert copresence_events(moods, subj, frnd) == [True]

    def test_far_apart_is_false(self):
        moods = [_mood("u01", "2017-05-03 12:00")]
        subj = [make_sample(at="2017-05-03 12:00", lat=48.0, lon=11.5)]
        frnd = [make_sample(user="u02", at="2017-05-03 12:00", lat=48.018, lon=11.5)]  # ~2 km
        assert copresence_events(moods, subj, frnd) == [False]

    def test_friend_without_samples_is_absent(self):
        moods = [_mood("u01", "2017-05-03 12:00")]
        subj = [make_sample(at="2017-05-03 12:00")]
        assert copresence_events(moods, subj, []) == [None]

    def test_positionless_samples_do_not_count(self):
        moods = [_mood("u01", "2017-05-03 12:00")]
        subj = [make_sample(at="2017-05-03 12:00", lat=None, lon=None)]
        frnd = [make_sample(user="u02", at="2017-05-03 12:00")]
        assert copresence_events(moods, subj, frnd) == [None]

    def test_slack_window_is_inclusive(self):
        moods = [_mood("u01", "2017-05-03 12:00")]
        subj = [make_sample(at="2017-05-03 11:30")]  # exactly 30 min before
        frnd = [make_sample(user="u02", at="2017-05-03 12:30")]  # exactly 30 min after
        assert copresence_events(moods, subj, frnd) == [True]
        late = [make_sample(user="u02", at="2017-05-03 12:31")]
        assert copresence_events(moods, subj, late) == [None]

    def test_any_pair_within_radius_counts(self):
        moods = [_mood("u01", "2017-05-03 12:00")]
        subj = [
            make_sample(at="2017-05-03 11:50", lat=48.0, lon=11.5),
            make_sample(at="2017-05-03 12:10", lat=48.5, lon=11.5),
        ]
        frnd = [make_sample(user="u02", at="2017-05-03 12:05", lat=48.5, lon=11.5)]
        assert copresence_events(moods, subj, frnd) == [True]

    def test_one_row_per_mood(self):
        moods = [
            _mood("u01", "2017-05-03 09:00"),
            _mood("u01", "2017-05-03 12:00"),
            _mood("u01", "2017-05-03 18:00"),
        ]
        subj = [make_sample(at="2017-05-03 12:00")]
        frnd = [make_sample(user="u02", at="2017-05-03 12:00")]
        assert copresence_events(moods, subj, frnd) == [None, True, None]


class TestFriendInfluence:
    def test_perfect_separation(self):
        pleasance = [2] * 6 + [0] * 6
        indicators = [True] * 6 + [False] * 6
        score = friend_influence("u01", "u02", pleasance, indicators)
        assert score.r == pytest.approx(1.0, abs=1e-12)
        assert score.direction == "positive"
        assert score.n_events == 6

    def test_sign_flip_metamorphic(self):
        rng = np.random.default_rng(11)
        indicators = [bool(b) for b in rng.integers(0, 2, size=60)]
        pleasance = [1 + int(ind) for ind in indicators]
        # add disagreement so |r| < 1
        pleasance[0] = 2 - pleasance[0]
        up = friend_influence("u01", "u02", pleasance, indicators)
        down = friend_influence("u01", "u02", [2 - p for p in pleasance], indicators)
        assert up.direction == "positive"
        assert down.direction == "negative"
        assert down.r == pytest.approx(-up.r, abs=1e-12)

    def test_min_events_applies_to_both_sides(self):
        pleasance = [2] * 10
        assert friend_influence("u01", "u02", pleasance, [True] * 4 + [False] * 6) is None
        assert friend_influence("u01", "u02", pleasance, [True] * 6 + [False] * 4) is None

    def test_absent_indicators_excluded_from_counts(self):
        pleasance = [2, 0] * 5 + [1, 1]
        indicators = [True, False] * 5 + [None, None]
        score = friend_influence("u01", "u02", pleasance, indicators)
        assert score is not None
        assert score.n_events == 5
        # dropping two None rows: same correlation as the dense 10-row input
        dense = friend_influence("u01", "u02", pleasance[:10], indicators[:10])
        assert score.r == pytest.approx(dense.r, abs=1e-15)

    def test_constant_mood_is_excluded(self):
        assert (
            friend_influence("u01", "u02", [1] * 12, [True] * 6 + [False] * 6) is None
        )

    def test_misaligned_inputs_rejected(self):
        with pytest.raises(ValidationError):
            friend_influence("u01", "u02", [1, 2], [True])

    def test_ranking_by_strength_then_friend_id(self):
        mk = lambda friend, r: friend_influence(
            "u01",
            friend,
            [2] * 6 + [0] * 6 if r > 0 else [0] * 6 + [2] * 6,
            [True] * 6 + [False] * 6,
        )
        strong_pos = mk("u05", 1.0)
        strong_neg = mk("u02", -1.0)
        weak = friend_influence(
            "u01", "u09", [2, 0, 2, 0, 2, 0, 2, 0, 2, 0, 0, 2], [True, False] * 6
        )
        ranked = rank_influences([weak, strong_pos, strong_neg])
        assert [s.friend for s in ranked] == ["u02", "u05", "u09"]
        assert abs(ranked[0].r) == abs(ranked[1].r)
