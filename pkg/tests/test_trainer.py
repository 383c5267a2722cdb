"""Training-loop tests: stopping rules, model selection, trace output.

Datasets are small so exact mode saturates quickly; every run here takes
well under a second.
"""

import json
import re

import numpy as np
import pytest

from basis_learner import (
    DEFAULT_LAMBDA_GRID,
    TrainConfig,
    evaluate,
    make_dataset,
    split,
    train,
)
from basis_learner.dataset import LabeledDataset, SplitSpec
from basis_learner.network import predict
from basis_learner.trainer import _head_seed


def regression_ds(m, d, seed, noise=0.0):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((m, d))
    y = rng.standard_normal(m)
    if noise:
        y = X[:, 0] ** 2 + noise * rng.standard_normal(m)
    return make_dataset(X, y)


def binary_ds(m, seed):
    # XOR-sign labels with a margin floor so a hinge fit can separate
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((3 * m, 2))
    X = X[np.abs(X[:, 0] * X[:, 1]) >= 0.3][:m]
    assert X.shape[0] == m
    y = np.where(X[:, 0] * X[:, 1] > 0.0, 1.0, -1.0)
    return make_dataset(X, y)


class TestLambdaGrid:
    def test_default_grid_frozen(self):
        assert len(DEFAULT_LAMBDA_GRID) == 17
        assert DEFAULT_LAMBDA_GRID[0] == pytest.approx(1e-7)
        assert DEFAULT_LAMBDA_GRID[-1] == pytest.approx(10.0)
        ratios = np.diff(np.log10(DEFAULT_LAMBDA_GRID))
        assert np.allclose(ratios, 0.5)


class TestConfigValidation:
    def test_defaults_valid(self):
        TrainConfig()

    @pytest.mark.parametrize(
        "kw,msg",
        [
            (dict(mode="turbo"), "unknown mode"),
            (dict(svd="sketchy"), "unknown svd"),
            (dict(loss="huber"), "unknown loss"),
            (dict(mode="width", gamma=0), "gamma >= 1"),
            (dict(mode="width", gamma=4, batch=9), "batch <= gamma"),
            (dict(mode="width", gamma=4, batch=0), "batch <= gamma"),
            (dict(max_depth=1), "must be >= 2"),
            (dict(patience=0), "patience"),
            (dict(lambda_grid=()), "lambda grid"),
            (dict(lambda_grid=(0.1, -0.5)), "lambda grid"),
            (dict(seed=-1), "seed"),
        ],
    )
    def test_rejections(self, kw, msg):
        with pytest.raises(ValueError, match=msg):
            TrainConfig(**kw)


class TestStopping:
    def test_error_threshold_stop(self):
        ds = regression_ds(12, 2, 21)
        cfg = TrainConfig(lambda_grid=(0.0,), error_threshold=1e-10)
        net, trace = train(ds, None, cfg)
        assert trace.termination == "error_threshold"
        assert trace.best_train_loss <= 1e-10
        assert np.max(np.abs(predict(net, ds.X)[:, 0] - ds.labels)) <= 1e-6

    def test_depth_cap_stop(self):
        ds = regression_ds(15, 2, 22)
        net, trace = train(ds, None, TrainConfig(lambda_grid=(0.0,), max_depth=2))
        assert trace.termination == "depth_cap"
        assert net.depth == 2
        assert net.product_layers == ()
        assert [r.depth for r in trace.records] == [2]

    def test_empty_layer_stop_on_saturated_line(self):
        # three collinear points saturate at depth 3; the next layer
        # comes back empty and the run stops on its own
        ds = make_dataset(np.array([[0.0], [1.0], [2.0]]), np.array([1.0, 3.0, -2.0]))
        net, trace = train(ds, None, TrainConfig(lambda_grid=(0.0,), max_depth=50))
        assert trace.termination == "empty_layer"
        assert trace.records[-1].total_cols == 3
        assert trace.best_train_loss <= 1e-18

    def test_validation_stop_on_noise(self):
        # pure-noise labels: deeper nets only overfit, so patience fires
        rng = np.random.default_rng(23)
        full = make_dataset(rng.standard_normal((60, 2)), rng.standard_normal(60))
        tr, va = split(full, SplitSpec(validation_count=30))
        net, trace = train(tr, va, TrainConfig(lambda_grid=(1e-6,), patience=2))
        assert trace.termination == "validation_stop"
        assert trace.best_depth <= trace.records[-1].depth

    def test_monotone_training_loss_in_depth(self):
        ds = regression_ds(25, 3, 24)
        net, trace = train(ds, None, TrainConfig(lambda_grid=(0.0,), max_depth=6))
        losses = [r.train_loss for r in trace.records]
        assert all(b <= a + 1e-10 for a, b in zip(losses, losses[1:]))


class TestModelSelection:
    def test_prefers_lambda_with_lower_objective(self):
        # without validation the training objective picks the head, and
        # an absurd lambda can never win over the unregularized fit
        ds = regression_ds(10, 2, 25)
        cfg = TrainConfig(lambda_grid=(1e6, 0.0), error_threshold=1e-10)
        net, trace = train(ds, None, cfg)
        assert net.head.lam == 0.0
        assert trace.best_lambda == 0.0

    def test_validation_picks_returned_network(self):
        rng = np.random.default_rng(26)
        X = rng.standard_normal((80, 2))
        y = X[:, 0] ** 2 + 0.3 * X[:, 1] + 0.05 * rng.standard_normal(80)
        tr, va = split(make_dataset(X, y), SplitSpec(validation_count=30))
        net, trace = train(tr, va, TrainConfig(lambda_grid=(1e-6, 1e-3), patience=2))
        # returned head reproduces the best recorded validation error
        assert evaluate(net, va)["error"] == pytest.approx(trace.best_valid_err, rel=1e-12)

    def test_best_depth_matches_network_shape(self):
        ds = regression_ds(12, 2, 27)
        net, trace = train(ds, None, TrainConfig(lambda_grid=(0.0,), max_depth=5))
        assert net.depth == trace.best_depth
        assert net.total_nodes == trace.feature_columns.shape[1]
        norms = np.linalg.norm(trace.feature_columns, axis=0)
        assert np.allclose(norms, np.sqrt(ds.m), atol=1e-6)


class TestWidthMode:
    def test_cubic_exact_with_width_two(self):
        # gamma=2 keeps both directions of [1 x]; each later layer then
        # adds the single new degree direction, so x^3 lands in the span
        rng = np.random.default_rng(28)
        x = rng.uniform(-2.0, 2.0, (20, 1))
        ds = make_dataset(x, x[:, 0] ** 3)
        cfg = TrainConfig(mode="width", gamma=2, batch=2,
                          lambda_grid=(0.0,), max_depth=6)
        net, trace = train(ds, None, cfg)
        assert trace.best_train_loss <= 1e-12
        assert all(w <= 2 for w in net.layer_widths)

    def test_unit_width_runs_and_improves(self):
        # gamma=1 mixes the constant into the single first-layer node, so
        # the fit is approximate; it must still improve monotonically
        rng = np.random.default_rng(28)
        x = rng.uniform(-2.0, 2.0, (20, 1))
        ds = make_dataset(x, x[:, 0] ** 3)
        cfg = TrainConfig(mode="width", gamma=1, batch=1,
                          lambda_grid=(0.0,), max_depth=6)
        net, trace = train(ds, None, cfg)
        assert all(w == 1 for w in net.layer_widths)
        losses = [r.train_loss for r in trace.records]
        assert losses[-1] <= losses[0]
        assert trace.best_train_loss <= 1e-3

    def test_width_cap_holds_every_layer(self):
        ds = regression_ds(40, 4, 29)
        cfg = TrainConfig(mode="width", gamma=5, batch=2,
                          lambda_grid=(0.0,), max_depth=6)
        net, trace = train(ds, None, cfg)
        assert all(w <= 5 for w in net.layer_widths)
        assert net.total_nodes <= 5 * (net.depth - 1)

    def test_randomized_svd_mode_runs(self):
        ds = regression_ds(30, 3, 30)
        cfg = TrainConfig(mode="width", gamma=3, batch=3, svd="randomized",
                          lambda_grid=(0.0,), max_depth=4)
        net, trace = train(ds, None, cfg)
        assert net.W1.shape[1] == 3


class TestLossTaskPairing:
    def test_hinge_needs_binary(self):
        ds = regression_ds(10, 2, 31)
        with pytest.raises(ValueError, match="binary"):
            train(ds, None, TrainConfig(loss="hinge", lambda_grid=(0.1,), max_depth=3))

    def test_mc_hinge_needs_multiclass(self):
        ds = binary_ds(10, 32)
        with pytest.raises(ValueError, match="multiclass"):
            train(ds, None, TrainConfig(loss="mc-hinge", lambda_grid=(0.1,), max_depth=3))

    def test_hinge_binary_end_to_end(self):
        ds = binary_ds(60, 33)
        cfg = TrainConfig(loss="hinge", lambda_grid=(0.01,), max_depth=4)
        net, trace = train(ds, None, cfg)
        assert trace.best_train_err <= 0.1
        assert net.head.loss == "hinge"

    def test_mc_hinge_end_to_end(self):
        rng = np.random.default_rng(34)
        m = 90
        y = rng.integers(0, 3, m)
        X = rng.standard_normal((m, 2)) * 0.3
        X[np.arange(m), y % 2] += y + 1.0
        ds = make_dataset(X, y)
        cfg = TrainConfig(loss="mc-hinge", lambda_grid=(0.1,), max_depth=4)
        net, trace = train(ds, None, cfg)
        assert net.outputs == 3
        assert trace.best_train_err <= 0.2

    def test_squared_on_binary_reports_misclassification(self):
        ds = binary_ds(40, 35)
        net, trace = train(ds, None, TrainConfig(lambda_grid=(0.0,), max_depth=4))
        assert 0.0 <= trace.best_train_err <= 1.0
        metrics = evaluate(net, ds)
        assert metrics["error"] == pytest.approx(trace.best_train_err)


class TestPreconditions:
    def test_requires_some_stop_rule_without_validation(self):
        ds = regression_ds(10, 2, 36)
        with pytest.raises(ValueError, match="validation split"):
            train(ds, None, TrainConfig(lambda_grid=(0.0,)))

    def test_rejects_empty_training_set(self):
        empty = LabeledDataset(
            X=np.zeros((0, 2)), labels=np.zeros(0), task="regression"
        )
        with pytest.raises(ValueError, match="empty"):
            train(empty, None, TrainConfig(lambda_grid=(0.0,), max_depth=3))

    def test_duplicate_rows_warn(self):
        X = np.array([[1.0, 2.0], [1.0, 2.0], [0.0, 1.0]])
        ds = make_dataset(X, np.array([1.0, 1.0, 2.0]))
        assert not ds.distinct
        net, trace = train(ds, None, TrainConfig(lambda_grid=(0.0,), max_depth=3))
        assert any("distinct" in w for w in trace.warnings)


SECS = re.compile(r" secs=\d+\.\d{3}$")


def stripped_lines(trace):
    return [SECS.sub("", line) for line in trace.lines()]


class TestTraceOutput:
    def test_line_format(self):
        ds = regression_ds(12, 2, 37)
        net, trace = train(ds, None, TrainConfig(lambda_grid=(1e-3,), max_depth=4))
        pat = re.compile(
            r"^depth=\d+ layer_width=\d+ total_cols=\d+ lambda=\S+ "
            r"train_loss=\S+ train_err=\S+ valid_err=\S+ secs=\d+\.\d{3}$"
        )
        for line in trace.lines():
            assert pat.match(line), line

    def test_valid_err_nan_without_split(self):
        ds = regression_ds(10, 2, 38)
        net, trace = train(ds, None, TrainConfig(lambda_grid=(0.0,), max_depth=3))
        assert all("valid_err=nan" in line for line in trace.lines())

    def test_header_is_json_safe_and_timeless(self):
        ds = regression_ds(10, 2, 39)
        net, trace = train(ds, None, TrainConfig(lambda_grid=(0.0,), max_depth=3))
        header = trace.header()
        encoded = json.dumps(header, allow_nan=False)
        assert "secs" not in encoded
        assert header["best_valid_err"] is None
        assert header["depths_trained"] == len(trace.records)

    def test_provenance_embedded_in_model(self):
        ds = regression_ds(10, 2, 40)
        cfg = TrainConfig(lambda_grid=(0.0,), max_depth=3, seed=5)
        net, trace = train(ds, None, cfg)
        assert net.provenance["config"]["seed"] == 5
        assert net.provenance["trace"] == trace.header()


class TestDeterminism:
    def test_identical_runs_identical_artifacts(self):
        from basis_learner.network import serialize

        ds = regression_ds(20, 2, 41)
        cfg = TrainConfig(lambda_grid=(0.0, 1e-4), max_depth=5)
        net_a, trace_a = train(ds, None, cfg)
        net_b, trace_b = train(ds, None, cfg)
        assert serialize(net_a) == serialize(net_b)
        assert stripped_lines(trace_a) == stripped_lines(trace_b)
        assert np.array_equal(trace_a.feature_columns, trace_b.feature_columns)

    def test_sgd_seed_flows_from_config(self):
        ds = binary_ds(50, 42)
        cfg_a = TrainConfig(loss="hinge", lambda_grid=(0.01,), max_depth=3, seed=0)
        cfg_b = TrainConfig(loss="hinge", lambda_grid=(0.01,), max_depth=3, seed=1)
        net_a, _ = train(ds, None, cfg_a)
        net_b, _ = train(ds, None, cfg_b)
        assert not np.array_equal(net_a.head.weights, net_b.head.weights)

    def test_head_seed_spreads(self):
        seeds = {_head_seed(0, t, li) for t in range(2, 6) for li in range(3)}
        assert len(seeds) == 12
        assert _head_seed(7, 3, 1) == _head_seed(7, 3, 1)


class TestEvaluate:
    def test_empty_dataset_rejected(self):
        ds = regression_ds(10, 2, 43)
        net, _ = train(ds, None, TrainConfig(lambda_grid=(0.0,), max_depth=3))
        empty = LabeledDataset(X=np.zeros((0, 2)), labels=np.zeros(0), task="regression")
        with pytest.raises(ValueError, match="empty"):
            evaluate(net, empty)

    def test_task_mismatch_rejected(self):
        ds = regression_ds(10, 2, 44)
        net, _ = train(ds, None, TrainConfig(lambda_grid=(0.0,), max_depth=3))
        other = binary_ds(10, 44)
        with pytest.raises(ValueError, match="does not match"):
            evaluate(net, other)

    def test_regression_metrics(self):
        ds = regression_ds(12, 2, 45)
        net, trace = train(ds, None, TrainConfig(lambda_grid=(0.0,), error_threshold=1e-10))
        metrics = evaluate(net, ds)
        assert set(metrics) == {"m", "error", "mean_loss"}
        assert metrics["m"] == 12
        assert metrics["error"] <= 1e-10

    def test_multiclass_confusion(self):
        rng = np.random.default_rng(46)
        m = 60
        y = rng.integers(0, 3, m)
        X = rng.standard_normal((m, 2)) * 0.3
        X[np.arange(m), y % 2] += y + 1.0
        ds = make_dataset(X, y)
        net, _ = train(ds, None, TrainConfig(loss="mc-hinge", lambda_grid=(0.1,), max_depth=3))
        conf = evaluate(net, ds)["confusion"]
        assert conf.shape == (3, 3)
        assert conf.sum() == m
        counts = np.bincount(ds.labels, minlength=3)
        assert np.array_equal(conf.sum(axis=1), counts)
        off_diag = conf.sum() - np.trace(conf)
        assert evaluate(net, ds)["error"] == pytest.approx(off_diag / m)
