from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ..validation import ParameterError, check_windows
from .checkpoint import load_params, save_params
from .config import NetConfig, TrainingConfig
from .network import NetParams, init_params, predict_proba
from .training import train


class WindowClassifier(ClassifierMixin, BaseEstimator):
    """Recurrent/attention binary classifier for received windows.

    Class 1 means the window carries the Cubic segment. ``predict_proba``
    runs in inference mode (no dropout), so repeated calls are identical.

    Parameters
    ----------
    hidden_units : int, default=64
        LSTM units per direction.
    attention_heads, attention_dim : int
        Self-attention geometry; ``attention_dim`` must divide evenly.
    dropout : float, default=0.2
    aux_channel : {"zero", "delta", "square"}
        Second input channel fed alongside the received samples.
    batch_size, learning_rate, validation_fraction, max_epochs, patience
        Training schedule, see :class:`~ccsk.neural.config.TrainingConfig`.
    random_state : int
        Seeds initialisation, the validation split, shuffling and dropout.
    """

    def __init__(self, hidden_units=64, attention_heads=4, attention_dim=128, dropout=0.2,
                 aux_channel="zero", batch_size=128, learning_rate=1e-3, validation_fraction=0.2,
                 max_epochs=50, patience=5, random_state=0, verbose=False):
        self.hidden_units = hidden_units
        self.attention_heads = attention_heads
        self.attention_dim = attention_dim
        self.dropout = dropout
        self.aux_channel = aux_channel
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.validation_fraction = validation_fraction
        self.max_epochs = max_epochs
        self.patience = patience
        self.random_state = random_state
        self.verbose = verbose

    def net_config(self, window_length: int) -> NetConfig:
        return NetConfig(
            window_length=window_length,
            hidden_units=self.hidden_units,
            attention_heads=self.attention_heads,
            attention_dim=self.attention_dim,
            dropout_p=self.dropout,
            aux_channel=self.aux_channel,
        )

    def training_config(self, n_samples: int) -> TrainingConfig:
        return TrainingConfig(
            dataset_size=max(n_samples, 2),
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            validation_fraction=self.validation_fraction,
            max_epochs=self.max_epochs,
            patience=self.patience,
            seed=self.random_state,
        )

    def fit(self, X, y, init_params_=None):
        X = check_windows(X)
        y = np.asarray(y).ravel()
        if set(np.unique(y)) - {0, 1}:
            raise ParameterError("labels must be 0 (Logistic) or 1 (Cubic)")
        net_cfg = self.net_config(X.shape[1])
        params, history = train(X, y, net_cfg, self.training_config(X.shape[0]),
                                params=init_params_, verbose=self.verbose)
        self._set_params(params)
        self.history_ = history
        return self

    def _set_params(self, params: NetParams):
        self.params_ = params
        self.classes_ = np.array([0, 1])
        self.n_features_in_ = params.config.window_length

    @classmethod
    def from_params(cls, params: NetParams) -> "WindowClassifier":
        cfg = params.config
        clf = cls(hidden_units=cfg.hidden_units, attention_heads=cfg.attention_heads,
                  attention_dim=cfg.attention_dim, dropout=cfg.dropout_p, aux_channel=cfg.aux_channel)
        clf._set_params(params)
        return clf

    @classmethod
    def load(cls, path, expected: NetConfig | None = None) -> "WindowClassifier":
        return cls.from_params(load_params(path, expected))

    @classmethod
    def untrained(cls, window_length: int, random_state=0, **kwargs) -> "WindowClassifier":
        clf = cls(random_state=random_state, **kwargs)
        clf._set_params(init_params(clf.net_config(window_length), random_state))
        return clf

    def save(self, path):
        check_is_fitted(self, "params_")
        save_params(self.params_, path)

    def predict_proba(self, X):
        check_is_fitted(self, "params_")
        return predict_proba(X, self.params_)

    def predict(self, X):
        return (self.predict_proba(X)[:, 1] > 0.5).astype(np.int64)
