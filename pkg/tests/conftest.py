import pytest

from uqsup import REGRESSION

from builders import make_dataset


@pytest.fixture
def point_dataset():
    rows = [[[0.7, 0.2, 0.1]], [[0.1, 0.8, 0.1]], [[0.4, 0.35, 0.25]],
            [[0.2, 0.3, 0.5]]]
    return make_dataset(rows, labels=[0, 1, 1, 2])


@pytest.fixture
def sampled_dataset():
    rows = [
        [[0.8, 0.1, 0.1], [0.7, 0.2, 0.1], [0.2, 0.7, 0.1],
         [0.1, 0.2, 0.7], [0.6, 0.3, 0.1]],
        [[0.1, 0.8, 0.1], [0.2, 0.7, 0.1], [0.3, 0.6, 0.1],
         [0.1, 0.7, 0.2], [0.2, 0.6, 0.2]],
    ]
    return make_dataset(rows, labels=[0, 1])


@pytest.fixture
def regression_dataset():
    rows = [[0.0, 1.0, 2.0, 3.0, 4.0], [1.9, 2.0, 2.1, 2.0, 2.0]]
    return make_dataset(rows, task=REGRESSION, labels=[2.0, 2.0])
