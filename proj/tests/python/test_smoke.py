"""Smoke tests for the python bindings: the main operations round-trip
through the extension and agree with brute-force checks."""

import math

import pytest

import cplearn


def test_feature_maps():
    assert cplearn.map_polynomial(2.0, 4) == [1.0, 2.0, 4.0, 8.0]
    v = cplearn.map_normalized_polynomial(2.0, 3)
    assert math.isclose(sum(e * e for e in v), 1.0, rel_tol=1e-12)
    assert cplearn.map_categorical(1, 3) == [1.0, 0.0, 1.0, 0.0]


def test_predict_matches_materialized_weights():
    spec = cplearn.FeatureMapSpec.polynomial(2, 2)
    model = cplearn.make_model(spec, 1, [[[1.0], [2.0]], [[3.0], [4.0]]])
    assert model.predict([1.0, 1.0]) == pytest.approx(21.0)

    dims, weights = cplearn.materialize_weights(model)
    assert dims == [2, 2]
    # First-index-fastest layout: w[i + 2j] = a_i * b_j.
    assert weights == pytest.approx([3.0, 6.0, 4.0, 8.0])

    batch = model.predict_batch([[1.0, 1.0], [0.0, 2.0]])
    assert batch[0] == pytest.approx(21.0)
    assert batch[1] == pytest.approx(model.predict([0.0, 2.0]))


def test_gradient_shapes_and_coefficients():
    spec = cplearn.FeatureMapSpec.polynomial(3, 2)
    model = cplearn.init_random(spec, 4, 0.3, 11)
    grads = model.prediction_gradient([0.1, -0.2, 0.3])
    assert len(grads) == 3
    assert len(grads[0]) == 2 and len(grads[0][0]) == 4

    dims, weights = cplearn.materialize_weights(model)
    coeff = model.extract_coefficient([1, 0, 1])
    lin = 1 + 2 * 0 + 2 * 2 * 1  # first-index-fastest linearization of (1,0,1)
    assert coeff == pytest.approx(weights[lin], rel=1e-12)


def test_save_load_roundtrip(tmp_path):
    spec = cplearn.FeatureMapSpec.polynomial(3, 3)
    model = cplearn.init_random(spec, 2, 0.2, 5)
    path = str(tmp_path / "model.json")
    model.save(path)
    back = cplearn.CpModel.load(path)
    assert back.rank == model.rank
    assert back.factors == model.factors
    with pytest.raises(cplearn.CplearnError):
        cplearn.CpModel.from_json("{not json")


def test_linear_init_equivalence():
    spec = cplearn.FeatureMapSpec.polynomial(3, 2)
    lin = cplearn.LinearSolution(6.0, [[0.5], [-1.5], [2.0]])
    model = cplearn.init_linear(lin, spec, 3)
    x = [0.3, -0.7, 1.1]
    direct = 6.0 + 0.5 * x[0] - 1.5 * x[1] + 2.0 * x[2]
    assert model.predict(x) == pytest.approx(direct, rel=1e-12)
    assert model.extract_coefficient([0, 0, 0]) == pytest.approx(6.0)


def test_training_loop_improves_on_synthetic_data():
    synth = cplearn.generate_synthetic_poly(600, 3, 1, 0.1, 17)
    parts = cplearn.split(synth.data, seed=17)
    stats = cplearn.standardize_fit(parts.train)
    train = cplearn.standardize_apply(stats, parts.train)
    val = cplearn.standardize_apply(stats, parts.validation)

    spec = cplearn.FeatureMapSpec.polynomial(4, 3)
    config = cplearn.TrainConfig(rank=5, epochs=25, seed=17)
    model = cplearn.init_random(spec, 5, 0.2, 17)
    before = cplearn.evaluate(model, val, cplearn.Metric.MSE)
    report = cplearn.fit(model, train, val, config)
    after = cplearn.evaluate(model, val, cplearn.Metric.MSE)
    assert len(report.epochs) == 25
    assert after < before


def test_order_penalty_matches_materialized_definition():
    spec = cplearn.FeatureMapSpec.polynomial(2, 3)
    model = cplearn.init_random(spec, 2, 0.5, 23)
    reg = cplearn.RegularizerSpec(cplearn.RegKind.ORDER, alpha=0.5, beta=2.0)
    b = cplearn.build_b_vector(reg, spec, 0)
    assert b == [1.0, 2.0, 4.0]

    dims, weights = cplearn.materialize_weights(model)
    # <B*W, B*W> computed directly over the flattened tensor.
    total = 0.0
    for j in range(dims[1]):
        for i in range(dims[0]):
            w = weights[i + dims[0] * j]
            total += (b[i] * b[j] * w) ** 2
    assert cplearn.order_penalty(model, reg) == pytest.approx(0.5 * total, rel=1e-9)


def test_csv_roundtrip(tmp_path):
    synth = cplearn.generate_synthetic_poly(50, 2, 1, 0.0, 29)
    path = str(tmp_path / "data.csv")
    cplearn.save_csv(synth.data, path)
    back = cplearn.load_csv(path)
    assert len(back) == 50
    assert back.rows == synth.data.rows
    assert back.targets == synth.data.targets
