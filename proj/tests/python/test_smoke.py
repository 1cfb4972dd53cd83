import os

import pytest

import tmfs


@pytest.fixture(scope="module")
def interaction_bundle():
    raw = tmfs.generate_feature_interaction(n=400, d=6, seed=11)
    split = tmfs.stratified_split(raw.labels, seed=3)
    full = tmfs.thermometer_encode(raw, bins=10, fit_indices=split.train)
    return (
        tmfs.take_rows(full, split.train),
        tmfs.take_rows(full, split.val),
        tmfs.take_rows(full, split.test),
    )


def make_params(**kwargs):
    defaults = dict(
        num_clauses=60, threshold=20, specificity=5.0, num_classes=2, epochs=15, seed=5
    )
    defaults.update(kwargs)
    return tmfs.HyperParams(**defaults)


def test_generators_and_encoding():
    raw = tmfs.generate_parity(n=200, d=8, k=3, seed=1)
    assert raw.n_samples == 200
    assert raw.n_features == 8
    split = tmfs.stratified_split(raw.labels, seed=2)
    assert len(split.train) + len(split.val) + len(split.test) == 200
    data = tmfs.thermometer_encode(raw, bins=10, fit_indices=split.train)
    # binary features pass through as single columns
    assert data.num_columns == 8
    assert data.num_features == 8


def test_training_learns_interaction(interaction_bundle):
    train, _, test = interaction_bundle
    model = tmfs.TMClassifier(make_params(), train.num_columns)
    model.fit(train)
    assert model.accuracy(test) > 0.9
    assert 0.0 <= model.macro_f1(test) <= 1.0


def test_training_is_deterministic(interaction_bundle):
    train, _, test = interaction_bundle
    a = tmfs.TMClassifier(make_params(epochs=5), train.num_columns)
    b = tmfs.TMClassifier(make_params(epochs=5), train.num_columns)
    a.fit(train)
    b.fit(train)
    rows = [train.row(i) for i in range(10)]
    assert [a.predict(r) for r in rows] == [b.predict(r) for r in rows]
    assert a.accuracy(test) == b.accuracy(test)


def test_model_save_load_round_trip(interaction_bundle, tmp_path):
    train, _, test = interaction_bundle
    model = tmfs.TMClassifier(make_params(epochs=5), train.num_columns)
    model.fit(train)
    path = str(tmp_path / "model.tm")
    model.save(path)
    loaded = tmfs.TMClassifier.load(path)
    assert loaded.accuracy(test) == model.accuracy(test)


def test_scorers_return_valid_rankings(interaction_bundle):
    train, val, _ = interaction_bundle
    model = tmfs.TMClassifier(make_params(), train.num_columns)
    model.fit(train)
    for method in ("chi2", "cw_sum", "taylor_crit", "shapley"):
        result = tmfs.score(
            method, model, train, val, variant="posneg", seed=9, n_shapley_perms=16
        )
        assert sorted(result["ranking"]) == list(range(train.num_features))
        assert len(result["scores"]) == train.num_features
        assert result["rank_time_s"] > 0
    assert len(tmfs.available_methods()) == 21


def test_scores_are_deterministic(interaction_bundle):
    train, val, _ = interaction_bundle
    model = tmfs.TMClassifier(make_params(epochs=5), train.num_columns)
    model.fit(train)
    a = tmfs.score("random", model, train, val, seed=4)
    b = tmfs.score("random", model, train, val, seed=4)
    assert a["scores"] == b["scores"]


def test_evaluate_curve(interaction_bundle):
    train, val, test = interaction_bundle
    model = tmfs.TMClassifier(make_params(epochs=5), train.num_columns)
    model.fit(train)
    ranking = tmfs.score("variance", model, train, val)["ranking"]
    curve = tmfs.evaluate_curve(
        train,
        val,
        test,
        ranking,
        protocol="deletion",
        k_grid=[1, 3, 6],
        trials=2,
        params=make_params(epochs=5),
        seed=13,
    )
    assert curve["k_values"] == [1, 3, 6]
    assert len(curve["mean_acc"]) == 3
    assert 0.0 <= curve["auc"] <= 1.0


def test_apply_protocol_roar_shrinks():
    raw = tmfs.generate_parity(n=60, d=6, k=2, seed=8)
    split = tmfs.stratified_split(raw.labels, seed=5)
    data = tmfs.thermometer_encode(raw, bins=10, fit_indices=split.train)
    out = tmfs.apply_protocol(data, list(range(6)), 2, "roar", seed=1)
    assert out.num_features == 4


def test_iris_fixture_loads():
    data_dir = os.environ.get("TMFS_DATA_DIR", "data")
    raw = tmfs.load_csv(os.path.join(data_dir, "iris.csv"), "species")
    assert raw.n_samples == 150
    assert raw.num_classes == 3
    assert abs(tmfs.spearman([1, 2, 3], [1, 3, 2]) - 0.5) < 1e-12
