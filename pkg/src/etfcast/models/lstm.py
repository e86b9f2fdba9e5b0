"""Minimal LSTM trainer shared by the regression and classification heads.

Everything runs in float64 on CPU with full-batch updates. Weights are
initialised explicitly from a caller-supplied numpy Generator rather
than torch's global RNG, so concurrent fits stay reproducible without
process-wide seeding. The trained network round-trips through plain
numpy arrays for checkpointing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from ..errors import NonConvergenceError, ShapeMismatchError

_OPTIMIZERS = ("adam", "sgd")


@dataclass(frozen=True)
class LstmArchitecture:
    n_features: int
    hidden_size: int
    n_layers: int

    def __post_init__(self):
        if self.n_features < 1 or self.hidden_size < 1 or self.n_layers < 1:
            raise ShapeMismatchError(f"bad architecture {self}")


@dataclass(frozen=True)
class LstmTrainConfig:
    epochs: int = 50
    optimizer: str = "adam"
    learning_rate: float = 0.01

    def __post_init__(self):
        if self.optimizer not in _OPTIMIZERS:
            raise ShapeMismatchError(f"unknown optimizer {self.optimizer!r}")
        if self.epochs < 1:
            raise ShapeMismatchError("epochs must be positive")


class _Net(torch.nn.Module):
    def __init__(self, arch: LstmArchitecture):
        super().__init__()
        self.lstm = torch.nn.LSTM(
            input_size=arch.n_features,
            hidden_size=arch.hidden_size,
            num_layers=arch.n_layers,
            batch_first=True,
        )
        self.head = torch.nn.Linear(arch.hidden_size, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        out, _ = self.lstm(x)
        return self.head(out[:, -1, :]).squeeze(-1)


def _build_net(arch: LstmArchitecture, rng: np.random.Generator) -> _Net:
    net = _Net(arch).to(torch.float64)
    # same uniform(-1/sqrt(h), 1/sqrt(h)) scheme torch uses, but drawn
    # from our own generator in sorted parameter order
    bound = 1.0 / np.sqrt(arch.hidden_size)
    with torch.no_grad():
        for name, param in sorted(net.named_parameters()):
            values = rng.uniform(-bound, bound, size=tuple(param.shape))
            param.copy_(torch.from_numpy(values))
    return net


@dataclass
class FittedLstm:
    """A trained network plus enough metadata to rebuild it exactly."""

    arch: LstmArchitecture
    train_config: LstmTrainConfig
    classify: bool
    loss_history: list[float]
    _net: _Net = field(repr=False)

    def predict(self, X: np.ndarray) -> np.ndarray:
        if X.ndim != 3 or X.shape[2] != self.arch.n_features:
            raise ShapeMismatchError(
                f"expected (n, L, {self.arch.n_features}), got {X.shape}")
        self._net.eval()
        with torch.no_grad():
            raw = self._net(torch.from_numpy(np.asarray(X, dtype=np.float64)))
            if self.classify:
                raw = torch.sigmoid(raw)
        return raw.numpy()

    def weight_arrays(self) -> dict[str, np.ndarray]:
        return {
            name: param.detach().numpy().copy()
            for name, param in self._net.named_parameters()
        }


def restore_lstm(
    arch: LstmArchitecture,
    train_config: LstmTrainConfig,
    classify: bool,
    loss_history: list[float],
    weights: dict[str, np.ndarray],
) -> FittedLstm:
    net = _Net(arch).to(torch.float64)
    expected = {name for name, _ in net.named_parameters()}
    if set(weights) != expected:
        raise ShapeMismatchError(
            f"weight names {sorted(weights)} do not match {sorted(expected)}")
    with torch.no_grad():
        for name, param in net.named_parameters():
            stored = np.asarray(weights[name], dtype=np.float64)
            if tuple(stored.shape) != tuple(param.shape):
                raise ShapeMismatchError(
                    f"{name}: stored {stored.shape} vs expected {tuple(param.shape)}")
            param.copy_(torch.from_numpy(stored))
    return FittedLstm(
        arch=arch,
        train_config=train_config,
        classify=classify,
        loss_history=list(loss_history),
        _net=net,
    )


def fit_lstm(
    X: np.ndarray,
    y: np.ndarray,
    arch: LstmArchitecture,
    train_config: LstmTrainConfig,
    rng: np.random.Generator,
    classify: bool = False,
) -> FittedLstm:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 3:
        raise ShapeMismatchError(f"X must be (n, L, F), got {X.shape}")
    if len(X) != len(y):
        raise ShapeMismatchError(f"{len(X)} windows vs {len(y)} targets")
    if X.shape[2] != arch.n_features:
        raise ShapeMismatchError(
            f"X has {X.shape[2]} features, architecture wants {arch.n_features}")

    net = _build_net(arch, rng)
    xt = torch.from_numpy(X)
    yt = torch.from_numpy(y)
    loss_fn = torch.nn.BCEWithLogitsLoss() if classify else torch.nn.MSELoss()
    if train_config.optimizer == "adam":
        opt = torch.optim.Adam(net.parameters(), lr=train_config.learning_rate)
    else:
        opt = torch.optim.SGD(net.parameters(), lr=train_config.learning_rate)

    history: list[float] = []
    net.train()
    for _ in range(train_config.epochs):
        opt.zero_grad()
        loss = loss_fn(net(xt), yt)
        loss.backward()
        opt.step()
        value = float(loss.item())
        if not np.isfinite(value):
            raise NonConvergenceError(
                f"loss diverged to {value} after {len(history)} epochs")
        history.append(value)

    return FittedLstm(
        arch=arch,
        train_config=train_config,
        classify=classify,
        loss_history=history,
        _net=net,
    )
