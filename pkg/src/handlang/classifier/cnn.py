"""A small convolutional network implemented directly in numpy.

Layer stack: conv 5x5 (3->16, same padding), max-pool 2x2, per-channel
normalization, conv 5x5 (16->16), max-pool 2x2, normalization, dense
1024->64, dense 64->10, softmax. Parameters and activations use one
dtype (float32 by default, matching the weight-file format; build with
dtype=float64 for finite-difference gradient checks); the scalar loss
is always accumulated in float64. Every operation is deterministic, so
a fixed seed reproduces training bit-for-bit.

Backpropagation notes, for the non-obvious layers:
  * max-pool routes the upstream gradient to the first argmax of each
    2x2 window (deterministic on ties);
  * the normalization layer standardizes each sample's channel to zero
    mean / unit variance over its spatial extent and applies a learned
    per-channel affine, so its input gradient is
    (g - mean(g) - xhat * mean(g * xhat)) / std with means taken over
    the spatial extent, where g is the gradient w.r.t. xhat.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_NORM_EPS = 1e-5


class ModelConfigError(ValueError):
    """Layer shapes are inconsistent with each other or with the input."""


class TrainingDivergedError(RuntimeError):
    def __init__(self, epoch: int):
        super().__init__(f"training loss became non-finite at epoch {epoch}")
        self.epoch = epoch


# ---------------------------------------------------------------------------
# layers


class ConvSame:
    """KxK convolution, stride 1, zero same-padding, via im2col matmuls."""

    def __init__(self, name: str, in_ch: int, out_ch: int, kernel: int, dtype=np.float32):
        self.name = name
        self.in_ch = in_ch
        self.out_ch = out_ch
        self.kernel = kernel
        self.dtype = dtype
        self.weight = np.zeros((kernel, kernel, in_ch, out_ch), dtype=dtype)
        self.bias = np.zeros(out_ch, dtype=dtype)
        self._cols: np.ndarray | None = None
        self._out_hw: tuple[int, int] | None = None

    def params(self) -> dict[str, np.ndarray]:
        return {f"{self.name}.weight": self.weight, f"{self.name}.bias": self.bias}

    def init(self, rng: np.random.Generator) -> None:
        fan_in = self.kernel * self.kernel * self.in_ch
        self.weight = (rng.standard_normal(self.weight.shape) / np.sqrt(fan_in)).astype(
            self.dtype
        )
        self.bias = np.zeros(self.out_ch, dtype=self.dtype)

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.shape[-1] != self.in_ch:
            raise ModelConfigError(
                f"{self.name}: expected {self.in_ch} input channels, got {x.shape[-1]}"
            )
        n, h, w, _ = x.shape
        k, pad = self.kernel, self.kernel // 2
        x_pad = np.zeros((n, h + 2 * pad, w + 2 * pad, self.in_ch), dtype=self.dtype)
        x_pad[:, pad : pad + h, pad : pad + w, :] = x
        windows = np.lib.stride_tricks.sliding_window_view(x_pad, (k, k), axis=(1, 2))
        # windows: (n, h, w, c, k, k) -> columns (n*h*w, k*k*c) ordered (di, dj, c)
        cols = windows.transpose(0, 1, 2, 4, 5, 3).reshape(n * h * w, k * k * self.in_ch)
        self._cols = cols
        self._out_hw = (h, w)
        w2d = self.weight.reshape(k * k * self.in_ch, self.out_ch)
        out = cols @ w2d + self.bias
        return out.reshape(n, h, w, self.out_ch)

    def backward(
        self, dout: np.ndarray, need_dx: bool = True
    ) -> tuple[np.ndarray | None, dict[str, np.ndarray]]:
        n, h, w, _ = dout.shape
        k, pad = self.kernel, self.kernel // 2
        flat_dout = dout.reshape(-1, self.out_ch)
        dW = (self._cols.T @ flat_dout).reshape(self.weight.shape)
        db = flat_dout.sum(axis=0)
        grads = {f"{self.name}.weight": dW, f"{self.name}.bias": db}
        if not need_dx:
            return None, grads
        w2d = self.weight.reshape(k * k * self.in_ch, self.out_ch)
        dcols = (flat_dout @ w2d.T).reshape(n, h, w, k, k, self.in_ch)
        dx_pad = np.zeros((n, h + 2 * pad, w + 2 * pad, self.in_ch), dtype=self.dtype)
        for di in range(k):
            for dj in range(k):
                dx_pad[:, di : di + h, dj : dj + w, :] += dcols[:, :, :, di, dj, :]
        dx = dx_pad[:, pad : pad + h, pad : pad + w, :]
        return dx, grads


class MaxPool2x2:
    def __init__(self, name: str, dtype=np.float32):
        self.name = name
        self.dtype = dtype
        self._mask: np.ndarray | None = None
        self._in_shape: tuple[int, ...] | None = None

    def params(self) -> dict[str, np.ndarray]:
        return {}

    def init(self, rng: np.random.Generator) -> None:
        pass

    def forward(self, x: np.ndarray) -> np.ndarray:
        n, h, w, c = x.shape
        if h % 2 or w % 2:
            raise ModelConfigError(f"{self.name}: spatial dims must be even, got {h}x{w}")
        windows = x.reshape(n, h // 2, 2, w // 2, 2, c).transpose(0, 1, 3, 5, 2, 4)
        flat = windows.reshape(n, h // 2, w // 2, c, 4)
        idx = np.argmax(flat, axis=-1)
        self._mask = np.eye(4, dtype=self.dtype)[idx]  # one-hot of the first max
        self._in_shape = x.shape
        return np.take_along_axis(flat, idx[..., None], axis=-1)[..., 0]

    def backward(self, dout: np.ndarray) -> tuple[np.ndarray, dict[str, np.ndarray]]:
        n, h, w, c = self._in_shape
        spread = self._mask * dout[..., None]
        dx = (
            spread.reshape(n, h // 2, w // 2, c, 2, 2)
            .transpose(0, 1, 4, 2, 5, 3)
            .reshape(n, h, w, c)
        )
        return dx, {}


class ChannelNorm:
    """Per-sample, per-channel standardization with a learned affine."""

    def __init__(self, name: str, channels: int, dtype=np.float32):
        self.name = name
        self.channels = channels
        self.dtype = dtype
        self.gamma = np.ones(channels, dtype=dtype)
        self.beta = np.zeros(channels, dtype=dtype)
        self._xhat: np.ndarray | None = None
        self._inv_std: np.ndarray | None = None

    def params(self) -> dict[str, np.ndarray]:
        return {f"{self.name}.gamma": self.gamma, f"{self.name}.beta": self.beta}

    def init(self, rng: np.random.Generator) -> None:
        self.gamma = np.ones(self.channels, dtype=self.dtype)
        self.beta = np.zeros(self.channels, dtype=self.dtype)

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.shape[-1] != self.channels:
            raise ModelConfigError(
                f"{self.name}: expected {self.channels} channels, got {x.shape[-1]}"
            )
        mean = x.mean(axis=(1, 2), keepdims=True)
        var = x.var(axis=(1, 2), keepdims=True)
        inv_std = 1.0 / np.sqrt(var + _NORM_EPS)
        xhat = (x - mean) * inv_std
        self._xhat = xhat
        self._inv_std = inv_std
        return xhat * self.gamma + self.beta

    def backward(self, dout: np.ndarray) -> tuple[np.ndarray, dict[str, np.ndarray]]:
        xhat, inv_std = self._xhat, self._inv_std
        dgamma = np.sum(dout * xhat, axis=(0, 1, 2))
        dbeta = np.sum(dout, axis=(0, 1, 2))
        g = dout * self.gamma
        g_mean = g.mean(axis=(1, 2), keepdims=True)
        gx_mean = (g * xhat).mean(axis=(1, 2), keepdims=True)
        dx = (g - g_mean - xhat * gx_mean) * inv_std
        return dx, {f"{self.name}.gamma": dgamma, f"{self.name}.beta": dbeta}


class Flatten:
    def __init__(self, name: str):
        self.name = name
        self._in_shape: tuple[int, ...] | None = None

    def params(self) -> dict[str, np.ndarray]:
        return {}

    def init(self, rng: np.random.Generator) -> None:
        pass

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._in_shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout: np.ndarray) -> tuple[np.ndarray, dict[str, np.ndarray]]:
        return dout.reshape(self._in_shape), {}


class Dense:
    def __init__(self, name: str, in_dim: int, out_dim: int, dtype=np.float32):
        self.name = name
        self.in_dim = in_dim
        self.out_dim = out_dim
        self.dtype = dtype
        self.weight = np.zeros((in_dim, out_dim), dtype=dtype)
        self.bias = np.zeros(out_dim, dtype=dtype)
        self._x: np.ndarray | None = None

    def params(self) -> dict[str, np.ndarray]:
        return {f"{self.name}.weight": self.weight, f"{self.name}.bias": self.bias}

    def init(self, rng: np.random.Generator) -> None:
        self.weight = (rng.standard_normal(self.weight.shape) / np.sqrt(self.in_dim)).astype(
            self.dtype
        )
        self.bias = np.zeros(self.out_dim, dtype=self.dtype)

    def forward(self, x: np.ndarray) -> np.ndarray:
        if x.shape[1] != self.in_dim:
            raise ModelConfigError(
                f"{self.name}: expected input dim {self.in_dim}, got {x.shape[1]}"
            )
        self._x = x
        return x @ self.weight + self.bias

    def backward(self, dout: np.ndarray) -> tuple[np.ndarray, dict[str, np.ndarray]]:
        dW = self._x.T @ dout
        db = dout.sum(axis=0)
        dx = dout @ self.weight.T
        return dx, {f"{self.name}.weight": dW, f"{self.name}.bias": db}


# ---------------------------------------------------------------------------
# model


@dataclass
class ModelSpec:
    input_size: int = 32
    input_channels: int = 3
    conv_channels: tuple[int, int] = (16, 16)
    kernel: int = 5
    hidden: int = 64
    classes: int = 10
    dtype: type = np.float32  # float64 for finite-difference gradient checks


class CnnModel:
    """Ordered layer list plus the weight tensors."""

    def __init__(self, spec: ModelSpec):
        self.spec = spec
        side = spec.input_size
        if side % 4:
            raise ModelConfigError("input size must be divisible by 4 (two 2x2 pools)")
        c1, c2 = spec.conv_channels
        dt = spec.dtype
        flat = (side // 4) * (side // 4) * c2
        self.layers = [
            ConvSame("conv1", spec.input_channels, c1, spec.kernel, dtype=dt),
            MaxPool2x2("pool1", dtype=dt),
            ChannelNorm("norm1", c1, dtype=dt),
            ConvSame("conv2", c1, c2, spec.kernel, dtype=dt),
            MaxPool2x2("pool2", dtype=dt),
            ChannelNorm("norm2", c2, dtype=dt),
            Flatten("flatten"),
            Dense("fc1", flat, spec.hidden, dtype=dt),
            Dense("fc2", spec.hidden, spec.classes, dtype=dt),
        ]

    def init_params(self, seed: int) -> "CnnModel":
        rng = np.random.default_rng(seed)
        for layer in self.layers:
            layer.init(rng)
        return self

    def params(self) -> dict[str, np.ndarray]:
        out: dict[str, np.ndarray] = {}
        for layer in self.layers:
            out.update(layer.params())
        return out

    def set_params(self, values: dict[str, np.ndarray]) -> None:
        own = self.params()
        if set(own) != set(values):
            raise ModelConfigError(
                f"parameter names mismatch: {sorted(set(own) ^ set(values))}"
            )
        for layer in self.layers:
            for name, current in layer.params().items():
                new = values[name]
                if new.shape != current.shape:
                    raise ModelConfigError(
                        f"{name}: shape {new.shape} incompatible with {current.shape}"
                    )
                attr = name.split(".", 1)[1]
                setattr(layer, attr, new.astype(current.dtype))

    def param_count(self) -> int:
        return sum(p.size for p in self.params().values())

    def forward_batch(self, x: np.ndarray) -> np.ndarray:
        """Probabilities for a batch of (n, size, size, channels) patches."""
        out = np.asarray(x, dtype=self.spec.dtype)
        for layer in self.layers:
            out = layer.forward(out)
        return _softmax(out.astype(np.float64))

    def summary(self) -> str:
        lines = [f"{type(l).__name__:12s} {l.name}" for l in self.layers]
        lines.append(f"parameters: {self.param_count()}")
        return "\n".join(lines)


def build_model(spec: ModelSpec | None = None, seed: int = 0) -> CnnModel:
    return CnnModel(spec or ModelSpec()).init_params(seed)


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def forward(model: CnnModel, patch: np.ndarray) -> np.ndarray:
    """Probability vector for one patch; non-negative, sums to 1."""
    from . import validate_patch

    x = validate_patch(patch)[None, ...] if patch.ndim == 3 else np.asarray(patch, np.float64)
    x = x.astype(model.spec.dtype)
    if x.ndim != 4:
        raise ModelConfigError(f"expected one patch, got shape {patch.shape}")
    return model.forward_batch(x)[0]


def loss_and_gradients(
    model: CnnModel, batch: list[tuple[np.ndarray, int]]
) -> tuple[float, dict[str, np.ndarray]]:
    """Mean cross-entropy over the batch and backprop gradients for every tensor."""
    if not batch:
        raise ValueError("batch must be non-empty")
    x = np.stack([np.asarray(p, dtype=model.spec.dtype) for p, _ in batch])
    labels = np.array([c for _, c in batch], dtype=np.int64)
    n = len(batch)

    out = x
    for layer in model.layers:
        out = layer.forward(out)
    probs64 = _softmax(out.astype(np.float64))
    eps = 1e-300  # guards log(0); the loss itself is accumulated in float64
    loss = float(-np.mean(np.log(probs64[np.arange(n), labels] + eps)))

    dlogits = probs64.astype(model.spec.dtype)
    dlogits[np.arange(n), labels] -= 1.0
    dlogits /= n
    grads: dict[str, np.ndarray] = {}
    dout = dlogits
    for i, layer in enumerate(reversed(model.layers)):
        is_first = i == len(model.layers) - 1
        if isinstance(layer, ConvSame):
            dout, layer_grads = layer.backward(dout, need_dx=not is_first)
        else:
            dout, layer_grads = layer.backward(dout)
        grads.update(layer_grads)
    return loss, grads


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    batch_size: int = 128
    epochs: int = 50
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate < 0 or self.batch_size < 1 or self.epochs < 1:
            raise ValueError(f"invalid train config: {self}")


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    train_accuracy: float
    val_accuracy: float | None

    def to_dict(self) -> dict:
        return {
            "epoch": self.epoch,
            "train_loss": self.train_loss,
            "train_accuracy": self.train_accuracy,
            "val_accuracy": self.val_accuracy,
        }


def train(model: CnnModel, data, cfg: TrainConfig) -> tuple[CnnModel, list[EpochStats]]:
    """Seeded minibatch gradient descent; reproducible bit-for-bit per seed."""
    rng = np.random.default_rng(cfg.seed)
    items = list(data.train)
    if not items:
        raise ValueError("dataset has no training split")
    history: list[EpochStats] = []
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(items))
        losses = []
        for start in range(0, len(items), cfg.batch_size):
            batch = [items[i] for i in order[start : start + cfg.batch_size]]
            loss, grads = loss_and_gradients(model, batch)
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch)
            losses.append(loss)
            if cfg.learning_rate:
                params = model.params()
                updated = {
                    name: params[name] - cfg.learning_rate * grads[name] for name in params
                }
                model.set_params(updated)
        train_acc, _ = evaluate(model, items)
        val_acc = evaluate(model, data.validation)[0] if data.validation else None
        history.append(EpochStats(epoch, float(np.mean(losses)), train_acc, val_acc))
    return model, history


def evaluate(model: CnnModel, items) -> tuple[float, np.ndarray]:
    """Accuracy and a true-by-predicted confusion matrix over one split."""
    items = list(items)
    if not items:
        raise ValueError("evaluation split is empty")
    classes = model.spec.classes
    confusion = np.zeros((classes, classes), dtype=np.int64)
    for start in range(0, len(items), 256):
        chunk = items[start : start + 256]
        x = np.stack([np.asarray(p, dtype=model.spec.dtype) for p, _ in chunk])
        probs = model.forward_batch(x)
        pred = probs.argmax(axis=1)
        for (_, truth), guess in zip(chunk, pred):
            confusion[truth, guess] += 1
    accuracy = float(np.trace(confusion) / confusion.sum())
    return accuracy, confusion


class CnnClassifier:
    """GestureClassifier backed by a trained CnnModel."""

    def __init__(self, model: CnnModel):
        self.model = model

    def classify(self, obs) -> np.ndarray:
        return forward(self.model, obs.patch)
