import math
import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from ccsk.chaos import MapKind, generate_segment, standardize_segment
from ccsk.channel import ChannelConfig
from ccsk.modem import ModemConfig
from ccsk.neural import (
    CheckpointFormatError,
    NetConfig,
    NetParams,
    TrainingConfig,
    TrainingDivergedError,
    WindowClassifier,
    estimate_complexity,
    forward,
    generate_dataset,
    init_params,
    load_params,
    save_params,
    train,
    zero_params,
)
from ccsk.neural import layers, training
from ccsk.neural.checkpoint import dumps, loads
from ccsk.neural.network import bce_loss, param_shapes
from ccsk.validation import ParameterError

from gradcheck import max_relative_error

TINY = NetConfig(window_length=4, hidden_units=3, attention_heads=1, attention_dim=6, dropout_p=0.2)
SMALL = NetConfig(window_length=8, hidden_units=4, attention_heads=2, attention_dim=8)


def separable_windows(n, T, seed=0):
    """Noiseless standardized windows, alternating Logistic (0) and Cubic (1)."""
    X = np.empty((n, T))
    for i in range(n):
        kind = MapKind.CUBIC if i % 2 else MapKind.LOGISTIC
        X[i] = standardize_segment(generate_segment(kind, T, seed=(seed, i))).samples
    return X, np.arange(n) % 2


class TestConfig:
    def test_defaults(self):
        cfg = NetConfig()
        assert (cfg.hidden_units, cfg.attention_heads, cfg.attention_dim, cfg.dropout_p) == (64, 4, 128, 0.2)

    @pytest.mark.parametrize("kw", [dict(attention_dim=10, attention_heads=4), dict(dropout_p=1.0),
                                    dict(aux_channel="phase"), dict(classes=3), dict(window_length=0)])
    def test_rejects(self, kw):
        with pytest.raises(ParameterError):
            NetConfig(**kw)

    def test_fingerprint_tracks_fields(self):
        assert NetConfig().fingerprint() == NetConfig().fingerprint()
        assert NetConfig().fingerprint() != NetConfig(hidden_units=32).fingerprint()

    def test_training_snr_defaults(self):
        assert TrainingConfig().train_snr_range_db == (12.0, 14.0)
        assert TrainingConfig(channel_kind="rayleigh2").train_snr_range_db == (14.0, 16.0)
        with pytest.raises(ParameterError):
            TrainingConfig(train_snr_range_db=(5, 1))


class TestForward:
    @settings(max_examples=25, deadline=None)
    @given(arrays(np.float64, (3, 8), elements=st.floats(-1e3, 1e3)), st.integers(0, 100))
    def test_probabilities_sum_to_one(self, X, seed):
        p = forward(X, init_params(SMALL, seed))
        assert np.all((p >= 0) & (p <= 1))
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-9)

    def test_zero_params_give_half(self):
        p = forward(np.random.default_rng(0).normal(size=(4, 8)), zero_params(SMALL))
        np.testing.assert_array_equal(p, 0.5)

    def test_inference_deterministic(self):
        X = np.random.default_rng(1).normal(size=(6, 8))
        P = init_params(SMALL, 2)
        np.testing.assert_array_equal(forward(X, P), forward(X, P))

    def test_train_mode_uses_seeded_dropout(self):
        X = np.random.default_rng(1).normal(size=(6, 8))
        P = init_params(SMALL, 2)
        a = forward(X, P, train=True, seed=5)
        np.testing.assert_array_equal(a, forward(X, P, train=True, seed=5))
        assert not np.array_equal(a, forward(X, P))

    def test_length_mismatch(self):
        with pytest.raises(ParameterError):
            forward(np.zeros((2, 9)), init_params(SMALL, 0))

    def test_nonfinite_input(self):
        with pytest.raises(ValueError):
            forward(np.full((1, 8), np.nan), init_params(SMALL, 0))

    @pytest.mark.parametrize("aux", ["zero", "delta", "square"])
    def test_aux_channels(self, aux):
        cfg = NetConfig(window_length=8, hidden_units=4, attention_heads=2, attention_dim=8, aux_channel=aux)
        assert forward(np.ones((2, 8)), init_params(cfg, 0)).shape == (2, 2)


class TestLayers:
    def test_dropout_rate_and_scale(self):
        m = layers.dropout_mask((1000, 1000), 0.2, np.random.default_rng(0))
        assert abs(np.mean(m == 0) - 0.2) < 0.002
        np.testing.assert_allclose(m[m > 0], 1.25)
        assert abs(m.mean() - 1) < 0.005
        assert layers.dropout_mask((3,), 0.0, None) is None

    def test_attention_is_permutation_equivariant(self):
        P = init_params(SMALL, 3).tensors
        A = np.random.default_rng(0).normal(size=(2, 8, 8))
        perm = np.random.default_rng(1).permutation(8)
        out, _ = layers.attention_forward(A, P, heads=2)
        out_p, _ = layers.attention_forward(A[:, perm], P, heads=2)
        np.testing.assert_allclose(out_p, out[:, perm], atol=1e-12)

    def test_attention_rows_are_distributions(self):
        P = init_params(SMALL, 3).tensors
        _, cache = layers.attention_forward(np.random.default_rng(0).normal(size=(2, 5, 8)), P, heads=2)
        np.testing.assert_allclose(cache[4].sum(axis=-1), 1.0, atol=1e-12)

    def test_bilstm_final_states(self):
        P = init_params(SMALL, 3).tensors
        x = np.random.default_rng(0).normal(size=(2, 8, 2))
        seq, _ = layers.bilstm_forward(x, P, "lstm1")
        fin, _ = layers.bilstm_forward(x, P, "lstm1", final_only=True)
        np.testing.assert_allclose(fin[:, :4], seq[:, -1, :4])
        np.testing.assert_allclose(fin[:, 4:], seq[:, 0, 4:])

    def test_sigmoid(self):
        x = np.linspace(-30, 30, 101)
        np.testing.assert_allclose(layers.sigmoid(x), 1 / (1 + np.exp(-x)), rtol=0, atol=1e-15)


class TestLoss:
    def test_certain_predictions(self):
        assert bce_loss(np.array([1.0, 0.0]), [1, 0]) <= 1e-11

    def test_half(self):
        assert bce_loss(np.full(4, 0.5), [0, 1, 1, 0]) == pytest.approx(math.log(2))

    def test_clamped_log_zero(self):
        assert math.isfinite(bce_loss(np.array([0.0]), [1]))


class TestGradients:
    X = np.random.default_rng(0).normal(size=(5, 4))
    y = np.array([0, 1, 1, 0, 1])

    @pytest.mark.parametrize("train_mode", [False, True])
    def test_finite_differences(self, train_mode):
        worst, where = max_relative_error(self.X, self.y, init_params(TINY, 3), seed=7, train=train_mode)
        assert worst < 1e-4, where

    def test_gradient_shapes(self):
        from ccsk.neural import loss_and_grad
        _, g = loss_and_grad(self.X, self.y, init_params(TINY, 1))
        assert {k: v.shape for k, v in g.items()} == param_shapes(TINY)

    def test_empty_batch(self):
        from ccsk.neural import loss_and_grad
        with pytest.raises(ParameterError):
            loss_and_grad(np.empty((0, 4)), [], init_params(TINY, 1))


@pytest.fixture(scope="module")
def separable_run():
    X, y = separable_windows(800, 16)
    cfg = NetConfig(window_length=16, hidden_units=8, attention_heads=2, attention_dim=16)
    tr = TrainingConfig(dataset_size=800, batch_size=32, learning_rate=3e-3, max_epochs=12, patience=12, seed=4)
    return X, y, cfg, tr, train(X, y, cfg, tr)


class TestTraining:
    def test_learns_separable_task(self, separable_run):
        *_, (params, hist) = separable_run
        assert max(hist.train_acc) >= 0.99

    def test_early_epoch_losses_decrease(self, separable_run):
        *_, (params, hist) = separable_run
        assert hist.train_loss[0] >= hist.train_loss[1] >= hist.train_loss[2]

    def test_deterministic(self, separable_run):
        X, y, cfg, tr, (params, hist) = separable_run
        params2, hist2 = train(X, y, cfg, tr)
        assert params.equals(params2)
        assert hist.as_dict() == hist2.as_dict()

    def test_returns_best_checkpoint(self, separable_run):
        X, y, cfg, tr, (params, hist) = separable_run
        b = hist.best_epoch
        assert hist.val_loss[b] == min(hist.val_loss)
        tr_idx, va_idx = training.split_train_val(len(y), tr.validation_fraction,
                                                  training.derive_seed(tr.seed, 0))
        val_loss, _ = training._evaluate(X[va_idx], y[va_idx], params)
        assert val_loss == pytest.approx(hist.val_loss[b], abs=1e-12)

    def test_early_stopping(self):
        X, y = separable_windows(200, 8, seed=1)
        rng = np.random.default_rng(0)
        y = rng.permutation(y)  # noise labels: validation loss stops improving quickly
        cfg = NetConfig(window_length=8, hidden_units=4, attention_heads=2, attention_dim=8)
        _, hist = train(X, y, cfg, TrainingConfig(dataset_size=200, batch_size=16, learning_rate=1e-2,
                                                  max_epochs=40, patience=2))
        assert hist.stopped_early and hist.epochs == hist.best_epoch + 3

    def test_divergence_reports_history(self, monkeypatch):
        X, y = separable_windows(64, 8)
        monkeypatch.setattr(training, "loss_and_grad", lambda *a, **k: (float("nan"), {}))
        with pytest.raises(TrainingDivergedError) as err:
            train(X, y, SMALL, TrainingConfig(dataset_size=64, batch_size=16))
        assert err.value.history.epochs == 0

    def test_batch_larger_than_data(self):
        X, y = separable_windows(8, 8)
        with pytest.raises(ParameterError):
            train(X, y, SMALL, TrainingConfig(dataset_size=8, batch_size=16))


class TestDataset:
    modem = ModemConfig(4, 16, 64)

    def test_reproducible(self):
        tr = TrainingConfig()
        a = generate_dataset(4, self.modem, ChannelConfig.awgn(), tr, seed=3)
        b = generate_dataset(4, self.modem, ChannelConfig.awgn(), tr, seed=3)
        np.testing.assert_array_equal(a.X, b.X)
        assert a.X.shape == (4, 16)

    def test_odd_rejected(self):
        with pytest.raises(ParameterError):
            generate_dataset(5, self.modem, ChannelConfig.awgn(), TrainingConfig())

    def test_balanced_with_snr_in_range(self):
        ds = generate_dataset(2000, self.modem, ChannelConfig.rayleigh2(),
                              TrainingConfig(channel_kind="rayleigh2"), seed=1)
        assert ds.y.sum() == 1000
        assert ds.snr_db.min() >= 14 and ds.snr_db.max() <= 16

    def test_snr_histogram_uniform(self):
        from scipy.stats import chisquare
        ds = generate_dataset(100_000, ModemConfig(2, 2, 4), ChannelConfig.awgn(), TrainingConfig(), seed=2)
        counts, _ = np.histogram(ds.snr_db, bins=20, range=(12, 14))
        assert chisquare(counts).pvalue > 1e-3

    def test_noiseless_labels_match_residual_detector(self):
        from ccsk.receiver import ResidualDetector
        ds = generate_dataset(200, self.modem, ChannelConfig.awgn(),
                              TrainingConfig(train_snr_range_db=(300, 300)), seed=0)
        np.testing.assert_array_equal(ResidualDetector().predict(ds.X), ds.y)


class TestComplexity:
    def test_default_hand_values(self):
        est = estimate_complexity(NetConfig(window_length=128))
        nh, T, D = 128, 128, 128
        assert est.terms["recurrent_1"] == (2 * nh + nh * nh) * T == 2_129_920
        assert est.terms["recurrent_2"] == (D * nh + nh * nh) * T
        assert est.terms["attention_scores"] == D * T * T
        assert est.terms["attention_values"] == D * T
        assert est.terms["dense"] == nh * 2
        assert est.total == sum(est.terms.values())

    def test_single_step(self):
        est = estimate_complexity(NetConfig(window_length=1))
        assert est.terms["attention_scores"] == est.terms["attention_values"]

    def test_doubling_T(self):
        a = estimate_complexity(NetConfig(window_length=32)).terms
        b = estimate_complexity(NetConfig(window_length=64)).terms
        assert b["recurrent_1"] == 2 * a["recurrent_1"] and b["recurrent_2"] == 2 * a["recurrent_2"]
        assert b["attention_scores"] == 4 * a["attention_scores"]


class TestCheckpoint:
    def test_round_trip_bitwise(self, tmp_path):
        P = init_params(SMALL, 9)
        save_params(P, tmp_path / "m.ccsk")
        Q = load_params(tmp_path / "m.ccsk", expected=SMALL)
        assert P.equals(Q)
        assert os.listdir(tmp_path) == ["m.ccsk"]

    def test_truncated(self, tmp_path):
        blob = dumps(init_params(SMALL, 9))
        for cut in (3, 20, len(blob) // 2, len(blob) - 1):
            with pytest.raises(CheckpointFormatError):
                loads(blob[:cut])

    def test_bit_flip(self):
        blob = bytearray(dumps(init_params(SMALL, 9)))
        blob[len(blob) // 2] ^= 0x10
        with pytest.raises(CheckpointFormatError):
            loads(bytes(blob))

    def test_fingerprint_mismatch(self):
        blob = dumps(init_params(SMALL, 9))
        with pytest.raises(CheckpointFormatError, match="expected"):
            loads(blob, expected=NetConfig(window_length=8, hidden_units=5, attention_heads=2, attention_dim=8))

    def test_header_layout(self):
        blob = dumps(init_params(TINY, 0))
        assert blob[:4] == b"CCSK"
        assert int.from_bytes(blob[4:8], "little") == 1

    def test_failed_save_leaves_old_file(self, tmp_path, monkeypatch):
        path = tmp_path / "m.ccsk"
        save_params(init_params(SMALL, 1), path)
        before = path.read_bytes()
        import ccsk.neural.checkpoint as ck

        def boom(_):
            raise RuntimeError("disk full")
        monkeypatch.setattr(ck, "dumps", boom)
        with pytest.raises(RuntimeError):
            save_params(init_params(SMALL, 2), path)
        assert path.read_bytes() == before
        assert os.listdir(tmp_path) == ["m.ccsk"]

    def test_params_validate_shapes(self):
        t = {n: np.zeros(s) for n, s in param_shapes(SMALL).items()}
        t["dense.b"] = np.zeros(3)
        with pytest.raises(ParameterError):
            NetParams(SMALL, t)


class TestWindowClassifier:
    def test_sklearn_api(self, separable_run):
        X, y, *_ = separable_run
        clf = WindowClassifier(hidden_units=4, attention_heads=2, attention_dim=8, max_epochs=2,
                               batch_size=32, random_state=1)
        assert clone(clf).get_params() == clf.get_params()
        with pytest.raises(NotFittedError):
            clf.predict(X)
        clf.fit(X, y)
        assert clf.predict(X).shape == (len(y),)
        assert clf.n_features_in_ == 16 and clf.history_.epochs == 2

    def test_rejects_bad_labels(self, separable_run):
        X, y, *_ = separable_run
        with pytest.raises(ParameterError):
            WindowClassifier(max_epochs=1).fit(X, y + 1)

    def test_save_load(self, tmp_path):
        clf = WindowClassifier.untrained(8, random_state=2, hidden_units=4, attention_heads=2, attention_dim=8)
        clf.save(tmp_path / "c.ccsk")
        back = WindowClassifier.load(tmp_path / "c.ccsk")
        X = np.random.default_rng(0).normal(size=(3, 8))
        np.testing.assert_array_equal(back.predict_proba(X), clf.predict_proba(X))
        assert back.get_params()["hidden_units"] == 4

    def test_trained_scores_noiseless_cubic_high(self, separable_run):
        *_, (params, _) = separable_run
        clf = WindowClassifier.from_params(params)
        X = np.stack([standardize_segment(generate_segment(MapKind.CUBIC, 16, seed=(77, i))).samples
                      for i in range(2000)])
        assert np.mean(clf.predict_proba(X)[:, 1] > 0.5) >= 0.99
