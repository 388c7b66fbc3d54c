import pytest

from fake_review_lab.errors import InsufficientPoolError, ParameterError
from fake_review_lab.learner.model_spec import ModelSpec
from fake_review_lab.learner.validation import CVConfig
from fake_review_lab.sweeper import (
    SWEEP_COLUMNS,
    regular_count,
    run_sweep,
    skew_grid,
    sweep_frame,
)
from tests.helpers import separable_dataset

SMALL_CV = CVConfig(folds=3, repeats=1)


def sweep_data(n_fake: int = 20, pool: int = 100):
    X, _ = separable_dataset(n_per_class=100, gap=2.0)
    return X[:n_fake], X[100 : 100 + pool]


# ------
#  Grid
# ------


def test_skew_grid():
    grid = skew_grid()
    assert len(grid) == 27
    assert grid[:3] == [90.0, 80.0, 70.0]
    assert grid[8:11] == [10.0, 9.0, 8.0]
    assert grid[-2:] == [0.2, 0.1]
    assert grid == sorted(grid, reverse=True)


def test_skew_grid_minimum():
    grid = skew_grid(min_skew=1.0)
    assert len(grid) == 18
    assert grid[-1] == 1.0


@pytest.mark.parametrize(
    "n_fake, skew, expected",
    [
        (8000, 90.0, 889),
        (8000, 50.0, 8000),
        (8000, 1.0, 792000),
        (100, 0.1, 99900),
        (1, 30.0, 2),
        (3, 40.0, 5),
    ],
    ids=["ninety", "fifty", "one", "tenth", "round_down", "half_rounds_up"],
)
def test_regular_count(n_fake, skew, expected):
    assert regular_count(n_fake, skew) == expected


@pytest.mark.parametrize("skew", [0.0, 100.0, -5.0])
def test_regular_count_invalid_skew(skew):
    with pytest.raises(ParameterError):
        regular_count(10, skew)


# -------
#  Sweep
# -------


def test_run_sweep_rows():
    fakes, pool = sweep_data()
    specs = [ModelSpec.default("nb"), ModelSpec.default("dt")]

    rows = run_sweep(fakes, pool, specs, SMALL_CV, seed=1, skews=[50.0, 20.0])

    assert [(row.skew, row.algorithm) for row in rows] == [
        (50.0, "nb"),
        (50.0, "dt"),
        (20.0, "nb"),
        (20.0, "dt"),
    ]
    assert [row.n_regular for row in rows] == [20, 20, 80, 80]
    assert all(row.n_fake == 20 for row in rows)
    assert all(row.summary.n_folds == 3 for row in rows)


def test_run_sweep_is_independent_of_workers():
    fakes, pool = sweep_data()
    specs = [ModelSpec.default("nb")]
    serial = run_sweep(fakes, pool, specs, SMALL_CV, seed=2, skews=[50.0, 25.0])
    parallel = run_sweep(
        fakes, pool, specs, SMALL_CV, seed=2, skews=[50.0, 25.0], workers=2
    )
    assert serial == parallel


def test_run_sweep_pool_too_small():
    fakes, pool = sweep_data(pool=50)
    with pytest.raises(InsufficientPoolError) as exc_info:
        run_sweep(fakes, pool, [ModelSpec("nb")], SMALL_CV, seed=0, skews=[20.0])
    assert exc_info.value.required == 80
    assert exc_info.value.available == 50


def test_run_sweep_needs_skews_and_algorithms():
    fakes, pool = sweep_data()
    with pytest.raises(ParameterError):
        run_sweep(fakes, pool, [], SMALL_CV, seed=0, skews=[50.0])
    with pytest.raises(ParameterError):
        run_sweep(fakes, pool, [ModelSpec("nb")], SMALL_CV, seed=0, skews=[])


def test_sweep_frame():
    fakes, pool = sweep_data()
    rows = run_sweep(fakes, pool, [ModelSpec("nb")], SMALL_CV, seed=0, skews=[50.0])
    frame = sweep_frame(rows)
    assert list(frame.columns) == SWEEP_COLUMNS
    assert frame.iloc[0]["algorithm"] == "nb"
    assert frame.iloc[0]["n_regular"] == 20
    assert 0.0 <= frame.iloc[0]["auc"] <= 1.0
