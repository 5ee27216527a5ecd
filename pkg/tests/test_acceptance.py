"""Headline behavior checks, one test per guarantee.

Each test here is an end-to-end statement about the system: published
statistics reproduce, the split finder is exactly equivalent to brute
force, the planted cohort signal is recovered, outputs are byte-stable,
and no API response leaks mood data across consent boundaries.
"""

import random
import time
from datetime import time as dtime
from datetime import timedelta

import numpy as np
import pytest
from fastapi.testclient import TestClient

from happimeter import forest, pipeline
from happimeter.analytics import (
    correlation_p_value,
    descriptives_from_counts,
    pearson_r,
    significance_stars,
)
from happimeter.config import AppConfig
from happimeter.domain import MoodInput, decode_mood_state, encode_mood_state
from happimeter.errors import SchedulingError
from happimeter.forest import ForestHyperparams, ModelScope
from happimeter.sampling import SamplingConfig, generate_schedule
from happimeter.server import create_app
from happimeter.simulate import CohortSpec, influence_cohort_spec, simulate
from happimeter.store import Store

from conftest import ts
from oracles import brute_force_best_split, stars_for_p, t_two_tailed_p


def test_table2_statistics_reproduction():
    started = time.perf_counter()
    pleasance = descriptives_from_counts({2: 13436, 1: 2855, 0: 515})
    activation = descriptives_from_counts({2: 2662, 1: 9784, 0: 4360})
    elapsed = time.perf_counter() - started

    assert pleasance.mean == pytest.approx(1.7688, abs=0.0005)
    assert pleasance.sd == pytest.approx(0.4889, abs=0.0015)
    assert activation.mean == pytest.approx(0.8989, abs=0.0005)
    assert activation.sd == pytest.approx(0.6384, abs=0.0015)
    assert pleasance.n == activation.n == 16806
    assert elapsed < 1.0


def test_mood_grid_bijection_and_anchors():
    codes = {
        encode_mood_state(p, a): (p, a) for p in (0, 1, 2) for a in (0, 1, 2)
    }
    assert sorted(codes) == list(range(1, 10))
    assert encode_mood_state(2, 2) == 1
    assert encode_mood_state(0, 0) == 9
    assert encode_mood_state(0, 2) == 3
    for code, (p, a) in codes.items():
        assert decode_mood_state(code) == (p, a)


def test_split_oracle_equivalence_1000_instances():
    rng = np.random.default_rng(0)
    started = time.perf_counter()
    checked = 0
    for case in range(1000):
        n = int(rng.integers(2, 31)) if case % 5 == 0 else int(rng.integers(20, 201))
        d = int(rng.integers(1, 6))
        X = np.empty((n, d), dtype=np.float64)
        for j in range(d):
            style = int(rng.integers(0, 3))
            if style == 0:
                X[:, j] = rng.integers(0, 4, size=n).astype(np.float64)
            elif style == 1:
                X[:, j] = np.round(rng.normal(size=n), 1)
            else:
                X[:, j] = rng.uniform(-5.0, 5.0, size=n)
        y = rng.integers(0, int(rng.integers(2, 5)), size=n).astype(np.int64)
        k = int(rng.integers(1, d + 1))
        candidates = sorted(rng.choice(d, size=k, replace=False).tolist())
        min_leaf = int(rng.choice([1, 1, 2, 2, 5, 10, 25, 50]))

        got = forest.best_split(X, y, candidates, min_leaf)
        want = brute_force_best_split(X, y, candidates, min_leaf)
        if want is None:
            assert got is None, f"case {case}: expected no split, got {got}"
        else:
            assert got is not None, f"case {case}: expected {want}, got None"
            assert got.feature == want[0], f"case {case}"
            assert got.threshold == want[1], f"case {case}"
            assert got.impurity_decrease == pytest.approx(want[2], abs=1e-10), f"case {case}"
        checked += 1
    elapsed = time.perf_counter() - started
    assert checked == 1000
    assert elapsed < 30.0


def test_metric_oracles():
    # hand-computed confusion fixtures
    perfect = [[3, 0], [0, 7]]
    assert forest.accuracy(perfect) == pytest.approx(1.0, abs=1e-12)
    assert forest.cohens_kappa(perfect) == pytest.approx(1.0, abs=1e-12)

    chance = [[5, 5], [5, 5]]
    assert forest.accuracy(chance) == pytest.approx(0.5, abs=1e-12)
    assert forest.cohens_kappa(chance) == pytest.approx(0.0, abs=1e-12)

    mixed = [[20, 5], [10, 15]]  # p_o=0.7, p_e=0.5 -> kappa 0.4
    assert forest.accuracy(mixed) == pytest.approx(0.7, abs=1e-12)
    assert forest.cohens_kappa(mixed) == pytest.approx(0.4, abs=1e-12)

    assert pearson_r([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-12)

    # significance stars against an independent high-precision t-CDF
    rng = np.random.default_rng(2025)
    pairs = [(float(rng.uniform(-0.99, 0.99)), int(rng.integers(4, 401)))
             for _ in range(50)]
    for r, n in pairs:
        oracle_p = t_two_tailed_p(r, n)
        assert correlation_p_value(r, n) == pytest.approx(oracle_p, abs=1e-12), (r, n)
        assert significance_stars(r, n) == stars_for_p(oracle_p), (r, n)


def test_planted_signal_recovery(tmp_path):
    started = time.perf_counter()
    spec = CohortSpec(seed=0, n_users=20, n_days=30, noise=0.1)
    simulate(spec, tmp_path)
    bundle = pipeline.load_bundle(tmp_path)
    examples, drops = pipeline.featurize_bundle(bundle, AppConfig())
    assert drops == []

    hyper = ForestHyperparams()  # 100 trees, min_leaf 50
    accuracies = {}
    for target in forest.TARGETS:
        report = forest.cross_validate(
            pipeline.dataset_for(examples, target), target, hyper, k=10, n_jobs=4
        )
        assert report.stratified, target
        assert report.k == 10
        accuracies[target] = report.accuracy

    for target, acc in accuracies.items():
        assert acc >= 0.85, f"{target}: {acc:.4f}"

    model = forest.train_forest(
        pipeline.dataset_for(examples, "mood_state"), "mood_state",
        ModelScope.general(), hyper, n_jobs=4,
    )
    top3 = [name for name, _ in forest.feature_importance(model).ranked_by_decrease()[:3]]
    assert "temperature" in top3, top3
    assert "hour_of_day" in top3, top3

    elapsed = time.perf_counter() - started
    assert elapsed < 60.0, f"took {elapsed:.1f}s"


def test_determinism_across_runs_and_parallelism(tmp_path):
    bundle_dir = tmp_path / "bundle"
    simulate(CohortSpec(seed=3, n_users=6, n_days=8, noise=0.1), bundle_dir)
    cfg = AppConfig(forest=ForestHyperparams(n_trees=16, min_leaf=10, seed=0))

    outs = {}
    for name, jobs in (("rerun_a", 1), ("rerun_b", 1), ("par4", 4), ("par8", 8)):
        out = tmp_path / name
        pipeline.run_report(bundle_dir, out, cfg, folds=3, n_jobs=jobs)
        pipeline.run_train(bundle_dir, out, cfg, n_jobs=jobs)
        outs[name] = out

    files = [
        "table2.csv", "fig6.csv", "table4.csv", "fig7.csv", "fig8.csv",
        "table3.csv", "influence.csv",
        "model_pleasance.json", "model_activation.json", "model_mood_state.json",
    ]
    reference = {f: (outs["rerun_a"] / f).read_bytes() for f in files}
    for name, out in outs.items():
        for f in files:
            assert (out / f).read_bytes() == reference[f], f"{name}/{f}"


def test_scheduler_properties_1000_seeds():
    cfg = SamplingConfig()
    for seed in range(1000):
        schedule = generate_schedule("u01", ts("2017-05-03 00:00").date(), "UTC", seed, cfg)
        assert len(schedule.prompts) == 4
        previous = None
        for prompt in schedule.prompts:
            local = prompt.fire_at
            assert dtime(8, 0) <= local.time() < dtime(22, 0)
            if previous is not None:
                assert prompt.fire_at - previous >= timedelta(minutes=90)
            previous = prompt.fire_at

    tight = SamplingConfig(awake_start=dtime(8, 0), awake_end=dtime(12, 30))
    with pytest.raises(SchedulingError):
        generate_schedule("u01", ts("2017-05-03 00:00").date(), "UTC", 0, tight)


def test_influence_recovery_and_sign_flip(tmp_path):
    cfg = AppConfig()

    pos_dir = tmp_path / "positive"
    simulate(influence_cohort_spec(seed=0), pos_dir)
    scores = pipeline.influence_scores(pipeline.load_bundle(pos_dir), cfg)
    assert scores, "no influence scores produced"
    top = scores[0]
    assert (top.subject, top.friend) == ("u01", "u02")
    assert top.direction == "positive"
    assert top.r > 0.5, top.r

    neg_dir = tmp_path / "negative"
    simulate(influence_cohort_spec(seed=0, negative=True), neg_dir)
    neg_scores = pipeline.influence_scores(pipeline.load_bundle(neg_dir), cfg)
    neg_top = neg_scores[0]
    assert (neg_top.subject, neg_top.friend) == ("u01", "u02")
    assert neg_top.direction == "negative"
    assert neg_top.r < -0.5, neg_top.r


def test_privacy_1000_randomized_probes():
    users = [f"u{i:02d}" for i in range(1, 7)]
    tokens = {f"tok-{u}": u for u in users}
    probes = 0
    rnd = random.Random(99)

    for graph_round in range(90):
        store = Store()
        base = ts("2017-05-03 08:00")
        for i, u in enumerate(users):
            for m in range(rnd.randint(1, 3)):
                store.append_mood(MoodInput(
                    u, base + timedelta(minutes=7 * i + 60 * m),
                    rnd.randint(0, 2), rnd.randint(0, 2),
                ))

        allowed: dict[str, set[str]] = {u: set() for u in users}
        for i, a in enumerate(users):
            for b in users[i + 1:]:
                state = rnd.random()
                if state < 0.4:
                    continue
                store.request_friend(a, b)
                if state < 0.65:
                    continue  # left pending
                store.accept_friend(b, a)
                share_ab = rnd.random() < 0.7
                share_ba = rnd.random() < 0.7
                store.set_sharing(a, b, share_ab)
                store.set_sharing(b, a, share_ba)
                if share_ab:
                    allowed[b].add(a)  # a shares toward b
                if share_ba:
                    allowed[a].add(b)

        app = create_app(
            AppConfig(tokens=tokens), store=store, clock=lambda: ts("2017-05-03 12:00")
        )
        client = TestClient(app)
        for viewer in users:
            headers = {"Authorization": f"Bearer tok-{viewer}"}

            body = client.get("/api/friends/moods", headers=headers).json()
            probes += 1
            listed = {entry["user"] for entry in body["friends"]}
            assert listed == allowed[viewer], (
                f"round {graph_round}: viewer {viewer} sees {listed}, "
                f"consented {allowed[viewer]}"
            )
            for entry in body["friends"]:
                if entry["mood"] is not None:
                    truth = store.moods_for(entry["user"])[-1]
                    assert entry["mood"]["pleasance"] == truth.pleasance

            insights = client.get("/api/insights", headers=headers).json()
            probes += 1
            influencer_users = {
                item["friend"] for item in insights["influencers"]["items"]
            }
            assert influencer_users <= allowed[viewer]

    assert probes >= 1000, probes
