import os

import numpy as np
import pytest

os.environ.setdefault("TF_CPP_MIN_LOG_LEVEL", "2")

import keras  # noqa: E402 - after the log-level guard


def _save(model, path):
    model.save(path)
    return str(path)


def _dense_softmax(units, classes, dropout=None, activation="softmax",
                   inputs=8):
    layers = [keras.layers.Input(shape=(inputs,)),
              keras.layers.Dense(units, activation="relu")]
    if dropout is not None:
        layers.append(keras.layers.Dropout(dropout))
    layers.append(keras.layers.Dense(classes, activation=activation))
    return keras.Sequential(layers)


@pytest.fixture(scope="session")
def model_dir(tmp_path_factory):
    """Toy .keras files shared by the whole session; building is slow."""
    d = tmp_path_factory.mktemp("models")
    keras.utils.set_random_seed(100)
    _save(_dense_softmax(16, 3, dropout=0.5), d / "dropout.keras")
    keras.utils.set_random_seed(101)
    _save(_dense_softmax(16, 3), d / "plain.keras")
    keras.utils.set_random_seed(102)
    _save(_dense_softmax(16, 3, activation=None), d / "logits.keras")
    for i, seed in enumerate((103, 104, 105)):
        keras.utils.set_random_seed(seed)
        _save(_dense_softmax(12, 3), d / f"member{i}.keras")
    keras.utils.set_random_seed(106)
    _save(_dense_softmax(12, 4), d / "member_4class.keras")
    return d


@pytest.fixture(scope="session")
def xy():
    rng = np.random.default_rng(42)
    x = rng.normal(size=(30, 8)).astype("float32")
    y = rng.integers(0, 3, size=30)
    return x, y
