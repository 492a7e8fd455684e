import numpy as np
import pytest

from pikieval.errors import ModelDimensionError, ModelHeaderError, ModelTruncatedError
from pikieval.factors import (
    FactorModel,
    init_model,
    load_model,
    predict,
    predict_batch,
    save_model,
)


def test_init_model_shape_and_scale():
    model = init_model(300, 200, d=25, seed=1)
    assert model.user_factors.shape == (300, 25)
    assert model.item_factors.shape == (200, 25)
    assert model.d == 25
    assert model.user_factors.std() == pytest.approx(0.1 / 5, rel=0.05)


def test_init_model_is_seeded():
    a = init_model(4, 5, d=3, seed=7)
    b = init_model(4, 5, d=3, seed=7)
    np.testing.assert_array_equal(a.user_factors, b.user_factors)
    np.testing.assert_array_equal(a.item_factors, b.item_factors)


def test_init_model_rejects_empty_dimensions():
    with pytest.raises(ValueError):
        init_model(0, 5)
    with pytest.raises(ValueError):
        init_model(3, 5, d=0)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        FactorModel(np.zeros((2, 3)), np.zeros((2, 4)))


def test_predict_is_dot_product():
    model = FactorModel(np.array([[1.0, 2.0], [0.5, -1.0]]), np.array([[3.0, 1.0]]))
    assert predict(model, 0, 0) == pytest.approx(5.0)
    assert predict(model, 1, 0) == pytest.approx(0.5)
    np.testing.assert_allclose(predict_batch(model, [(0, 0), (1, 0)]), [5.0, 0.5])


def test_predict_out_of_range():
    model = init_model(2, 2, d=2)
    with pytest.raises(IndexError):
        predict(model, 2, 0)
    with pytest.raises(IndexError):
        predict_batch(model, [(0, 0), (0, -1)])


def test_predict_batch_empty():
    assert predict_batch(init_model(2, 2, d=2), []).shape == (0,)


def test_save_and_load(tmp_path):
    model = init_model(3, 4, d=5, seed=2)
    path = tmp_path / "model.wrmf"
    save_model(model, path)
    assert path.stat().st_size == 33 + (3 + 4) * 5 * 8
    loaded = load_model(path)
    np.testing.assert_array_equal(loaded.user_factors, model.user_factors)
    np.testing.assert_array_equal(loaded.item_factors, model.item_factors)


def test_load_truncated_payload(tmp_path):
    path = tmp_path / "model.wrmf"
    save_model(init_model(3, 4, d=5), path)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(ModelTruncatedError) as info:
        load_model(path)
    assert info.value.expected - info.value.actual == 8


def test_load_truncated_header(tmp_path):
    path = tmp_path / "model.wrmf"
    path.write_bytes(b"PIKI")
    with pytest.raises(ModelTruncatedError):
        load_model(path)


def test_load_bad_magic(tmp_path):
    path = tmp_path / "model.wrmf"
    save_model(init_model(2, 2, d=2), path)
    payload = bytearray(path.read_bytes())
    payload[:8] = b"NOTAMODL"
    path.write_bytes(bytes(payload))
    with pytest.raises(ModelHeaderError):
        load_model(path)


def test_load_trailing_bytes(tmp_path):
    path = tmp_path / "model.wrmf"
    save_model(init_model(2, 2, d=2), path)
    path.write_bytes(path.read_bytes() + b"\x00")
    with pytest.raises(ModelDimensionError):
        load_model(path)


def test_predict_by_hand():
    model = FactorModel(np.array([[1.0, 0.0], [0.5, 2.0]]), np.array([[0.0, 1.0], [2.0, 0.25]]))
    assert predict(model, 0, 0) == 0.0
    assert predict(model, 1, 1) == pytest.approx(1.5)


def test_batch_matches_scalar_path():
    model = init_model(30, 40, d=20, seed=3)
    rng = np.random.default_rng(0)
    pairs = np.stack([rng.integers(0, 30, 1000), rng.integers(0, 40, 1000)], axis=1)
    batch = predict_batch(model, pairs)
    assert batch.tolist() == [predict(model, u, i) for u, i in pairs.tolist()]


def test_scores_are_bilinear():
    model = init_model(3, 3, d=4, seed=5)
    scaled = FactorModel(model.user_factors * 3.5, model.item_factors)
    assert predict(scaled, 1, 2) == pytest.approx(3.5 * predict(model, 1, 2))
    swapped = FactorModel(model.item_factors, model.user_factors)
    assert predict(swapped, 2, 1) == pytest.approx(predict(model, 1, 2))
