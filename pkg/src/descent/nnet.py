"""Small numpy network stack for value functions.

Layers: valid/padded 2-D convolution, dense, ReLU, tanh. Parameters live in
one flat vector ``theta`` with per-layer views, so the optimizer state, the
L2 penalty and the checkpoint format all work on a single array.

The loss of a batch is ``sum((f(x) - y) ** 2) + l2 * ||theta||^2``, minimized
with Adam, one step per batch.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

MAGIC = b"DSCNTCKP"
VERSION = 1


class NonFiniteLoss(FloatingPointError):
    pass


class CheckpointError(ValueError):
    pass


# -- layers ------------------------------------------------------------------


class Conv2D:
    def __init__(self, kernel: int, filters: int, padding: int = 0):
        self.kernel, self.filters, self.padding = kernel, filters, padding

    def build(self, in_shape):
        c, h, w = in_shape
        k, p = self.kernel, self.padding
        self.in_shape = in_shape
        self.out_shape = (self.filters, h + 2 * p - k + 1, w + 2 * p - k + 1)
        if min(self.out_shape[1:]) < 1:
            raise ValueError(f"conv{k}x{k} does not fit input {in_shape}")
        self.shapes = [(self.filters, c * k * k), (self.filters,)]
        self.fan_in = c * k * k
        return self.out_shape

    def forward(self, x, params):
        w, b = params
        p, k = self.padding, self.kernel
        if p:
            x = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))
        n = x.shape[0]
        _, ho, wo = self.out_shape
        # (n, c, ho, wo, k, k) -> (n, ho, wo, c, k, k)
        win = sliding_window_view(x, (k, k), axis=(2, 3)).transpose(0, 2, 3, 1, 4, 5)
        cols = win.reshape(n * ho * wo, -1)
        out = cols @ w.T + b
        out = out.reshape(n, ho, wo, self.filters).transpose(0, 3, 1, 2)
        return out, (cols, x.shape)

    def backward(self, dout, params, cache):
        w, _ = params
        cols, xshape = cache
        n = dout.shape[0]
        f, ho, wo = self.out_shape
        k, p = self.kernel, self.padding
        d2 = dout.transpose(0, 2, 3, 1).reshape(n * ho * wo, f)
        dw = d2.T @ cols
        db = d2.sum(axis=0)
        dcols = (d2 @ w).reshape(n, ho, wo, xshape[1], k, k)
        dx = np.zeros(xshape, dtype=dout.dtype)
        for i in range(k):
            for j in range(k):
                dx[:, :, i:i + ho, j:j + wo] += dcols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
        if p:
            dx = dx[:, :, p:-p, p:-p]
        return dx, [dw, db]

    def describe(self):
        return f"conv{self.kernel}x{self.kernel}x{self.filters}" + (f"p{self.padding}" if self.padding else "")


class Dense:
    def __init__(self, units: int):
        self.units = units

    def build(self, in_shape):
        d = int(np.prod(in_shape))
        self.in_shape = in_shape
        self.out_shape = (self.units,)
        self.shapes = [(d, self.units), (self.units,)]
        self.fan_in = d
        return self.out_shape

    def forward(self, x, params):
        w, b = params
        flat = x.reshape(x.shape[0], -1)
        return flat @ w + b, (flat, x.shape)

    def backward(self, dout, params, cache):
        w, _ = params
        flat, xshape = cache
        return (dout @ w.T).reshape(xshape), [flat.T @ dout, dout.sum(axis=0)]

    def describe(self):
        return f"dense{self.units}"


class ReLU:
    shapes: list = []

    def build(self, in_shape):
        self.out_shape = in_shape
        return in_shape

    def forward(self, x, params):
        mask = x > 0
        return x * mask, mask

    def backward(self, dout, params, mask):
        return dout * mask, []

    def describe(self):
        return "relu"


class Tanh:
    shapes: list = []

    def build(self, in_shape):
        self.out_shape = in_shape
        return in_shape

    def forward(self, x, params):
        y = np.tanh(x)
        return y, y

    def backward(self, dout, params, y):
        return dout * (1.0 - y * y), []

    def describe(self):
        return "tanh"


def parse_layer(token: str):
    if token == "relu":
        return ReLU()
    if token == "tanh":
        return Tanh()
    if token.startswith("dense"):
        return Dense(int(token[5:]))
    if token.startswith("conv"):
        body = token[4:]
        pad = 0
        if "p" in body:
            body, pad = body.split("p")
            pad = int(pad)
        k1, k2, f = (int(v) for v in body.split("x"))
        if k1 != k2:
            raise ValueError(f"only square kernels are supported: {token!r}")
        return Conv2D(k1, f, pad)
    raise ValueError(f"unknown layer token {token!r}")


def default_layers(input_shape, output_tanh: bool, kind: str = "desk") -> list[str]:
    """Layer tokens for the standard architectures.

    ``desk``: up to two 3x3/16 convolutions (as many as fit the board), a 64-unit
    hidden layer and one output. ``large``: three 3x3/64 convolutions and a
    100-unit hidden layer. Convolutions are unpadded; on boards too small for
    a 3x3 window the stack falls back to dense layers only.
    """
    convs, filters, hidden = {"desk": (2, 16, 64), "large": (3, 64, 100)}[kind]
    _, h, w = input_shape
    tokens = []
    for _ in range(convs):
        if min(h, w) < 3:
            break
        tokens += [f"conv3x3x{filters}", "relu"]
        h, w = h - 2, w - 2
    tokens += [f"dense{hidden}", "relu", "dense1"]
    if output_tanh:
        tokens.append("tanh")
    return tokens


# -- network -----------------------------------------------------------------


@dataclass
class TrainConfig:
    batch_size: int = 128
    l2: float = 0.001
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.l2 < 0:
            raise ValueError("l2 must be >= 0")


@dataclass
class TrainStats:
    mean_squared_error: float
    steps: int
    samples: int


class Network:
    """Feed-forward value network over plane tensors, one scalar per input."""

    def __init__(self, input_shape, layers, seed: int = 0, dtype=np.float32, init: str = "he"):
        self.input_shape = tuple(int(v) for v in input_shape)
        self.tokens = [t if isinstance(t, str) else t.describe() for t in layers]
        self.layers = [parse_layer(t) for t in self.tokens]
        self.dtype = np.dtype(dtype)
        shape = self.input_shape
        sizes = []
        for layer in self.layers:
            shape = layer.build(shape)
            sizes += [int(np.prod(s)) for s in layer.shapes]
        if shape != (1,):
            raise ValueError(f"network must end in a single unit, got output shape {shape}")
        self.theta = np.zeros(sum(sizes), dtype=self.dtype)
        self._bind()
        self.m = np.zeros_like(self.theta)
        self.v = np.zeros_like(self.theta)
        self.step = 0
        if init == "he":
            self._init_he(seed)
        elif init != "zeros":
            raise ValueError(f"unknown init {init!r}")

    def _bind(self):
        self.views = []
        off = 0
        for layer in self.layers:
            vs = []
            for s in layer.shapes:
                size = int(np.prod(s))
                vs.append(self.theta[off:off + size].reshape(s))
                off += size
            self.views.append(vs)

    def _init_he(self, seed):
        rng = np.random.default_rng(seed)
        for layer, vs in zip(self.layers, self.views):
            if vs:
                limit = np.sqrt(6.0 / layer.fan_in)
                vs[0][...] = rng.uniform(-limit, limit, size=vs[0].shape)

    @property
    def n_params(self) -> int:
        return self.theta.size

    @property
    def output_tanh(self) -> bool:
        return self.tokens[-1] == "tanh"

    def descriptor(self) -> str:
        shape = "x".join(str(v) for v in self.input_shape)
        return f"in={shape} " + " ".join(self.tokens)

    @classmethod
    def from_descriptor(cls, text: str, dtype=np.float32) -> "Network":
        head, *tokens = text.split()
        if not head.startswith("in="):
            raise CheckpointError(f"bad architecture descriptor {text!r}")
        shape = tuple(int(v) for v in head[3:].split("x"))
        return cls(shape, tokens, dtype=dtype, init="zeros")

    def copy(self, dtype=None) -> "Network":
        net = Network(self.input_shape, self.tokens, dtype=dtype or self.dtype, init="zeros")
        net.theta[...] = self.theta
        net.m[...] = self.m
        net.v[...] = self.v
        net.step = self.step
        return net

    # -- computation ----------------------------------------------------------
    def _check_input(self, x):
        x = np.asarray(x)
        if x.ndim != 4 or x.shape[1:] != self.input_shape:
            raise ValueError(
                f"input shape mismatch: expected (batch, {', '.join(map(str, self.input_shape))}), "
                f"got {tuple(x.shape)}"
            )
        return x.astype(self.dtype, copy=False)

    def forward_batch(self, x) -> np.ndarray:
        """Plain batched forward pass (the one training differentiates)."""
        out = self._check_input(x)
        for layer, vs in zip(self.layers, self.views):
            out, _ = layer.forward(out, vs)
        return out[:, 0]

    def forward(self, x, chunk: int = 32) -> np.ndarray:
        """Values for a batch; each row's value does not depend on the rest of the batch.

        BLAS picks different kernels for different matrix heights and row
        offsets, so a plain batched pass can differ from single-row calls in
        the last bit. Running every call through zero-padded chunks of a
        fixed height makes batching a pure optimization.
        """
        x = self._check_input(x)
        n = x.shape[0]
        out = np.empty(n, dtype=self.dtype)
        for start in range(0, n, chunk):
            xb = x[start:start + chunk]
            k = xb.shape[0]
            if k < chunk:
                xb = np.concatenate([xb, np.zeros((chunk - k,) + xb.shape[1:], dtype=xb.dtype)])
            out[start:start + k] = self.forward_batch(xb)[:k]
        return out

    def loss_and_grad(self, x, y, l2: float = 0.0):
        """Return (total loss, predictions, gradient of the loss w.r.t. theta)."""
        out = self._check_input(x)
        y = np.asarray(y, dtype=self.dtype).reshape(-1)
        caches = []
        for layer, vs in zip(self.layers, self.views):
            out, cache = layer.forward(out, vs)
            caches.append(cache)
        pred = out[:, 0]
        err = pred - y
        loss = float(np.sum(err.astype(np.float64) ** 2))
        if l2:
            loss += l2 * float(np.dot(self.theta.astype(np.float64), self.theta))
        grad = np.zeros_like(self.theta)
        gviews = []
        off = 0
        for layer in self.layers:
            vs = []
            for s in layer.shapes:
                size = int(np.prod(s))
                vs.append(grad[off:off + size].reshape(s))
                off += size
            gviews.append(vs)
        d = (2.0 * err).reshape(-1, 1).astype(self.dtype)
        for layer, vs, gv, cache in zip(
            reversed(self.layers), reversed(self.views), reversed(gviews), reversed(caches)
        ):
            d, pgrads = layer.backward(d, vs, cache)
            for g, pg in zip(gv, pgrads):
                g[...] = pg
        if l2:
            grad += (2.0 * l2) * self.theta
        return loss, pred, grad

    def adam_update(self, grad, cfg: TrainConfig):
        self.step += 1
        b1, b2 = cfg.beta1, cfg.beta2
        self.m *= b1
        self.m += (1 - b1) * grad
        self.v *= b2
        self.v += (1 - b2) * grad * grad
        mhat = self.m / (1 - b1 ** self.step)
        vhat = self.v / (1 - b2 ** self.step)
        self.theta -= (cfg.learning_rate * mhat / (np.sqrt(vhat) + cfg.eps)).astype(self.dtype)

    # -- checkpoint ------------------------------------------------------------
    def to_bytes(self) -> bytes:
        buf = io.BytesIO()
        buf.write(pack_header(self.descriptor()))
        buf.write(struct.pack("<Q", self.n_params))
        for arr in (self.theta, self.m, self.v):
            buf.write(np.asarray(arr, dtype="<f4").tobytes())
        buf.write(struct.pack("<Q", self.step))
        return buf.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes, expect: str | None = None) -> "Network":
        descriptor, off = unpack_header(data)
        if expect is not None and descriptor != expect:
            raise CheckpointError(f"architecture mismatch: checkpoint has {descriptor!r}, expected {expect!r}")
        net = cls.from_descriptor(descriptor)
        if len(data) < off + 8:
            raise CheckpointError("truncated checkpoint")
        (count,) = struct.unpack_from("<Q", data, off)
        off += 8
        if count != net.n_params:
            raise CheckpointError(f"parameter count {count} does not match descriptor ({net.n_params})")
        if len(data) != off + 12 * count + 8:
            raise CheckpointError(f"checkpoint is {len(data)} bytes, expected {off + 12 * count + 8}")
        arrays = []
        for _ in range(3):
            arrays.append(np.frombuffer(data, dtype="<f4", count=count, offset=off))
            off += 4 * count
        net.theta[...], net.m[...], net.v[...] = arrays
        (net.step,) = struct.unpack_from("<Q", data, off)
        return net


def pack_header(descriptor: str) -> bytes:
    text = descriptor.encode("utf-8")
    return MAGIC + struct.pack("<HI", VERSION, len(text)) + text


def unpack_header(data: bytes) -> tuple[str, int]:
    if data[:len(MAGIC)] != MAGIC:
        raise CheckpointError("not a checkpoint (bad magic)")
    off = len(MAGIC)
    try:
        version, length = struct.unpack_from("<HI", data, off)
    except struct.error:
        raise CheckpointError("truncated checkpoint header") from None
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    off += 6
    try:
        descriptor = data[off:off + length].decode("utf-8")
    except UnicodeDecodeError:
        raise CheckpointError("corrupt architecture descriptor") from None
    if len(descriptor.encode()) != length:
        raise CheckpointError("truncated checkpoint header")
    return descriptor, off + length


# -- training ------------------------------------------------------------------


def _as_arrays(data):
    if isinstance(data, tuple) and len(data) == 2 and isinstance(data[0], np.ndarray):
        return data
    xs, ys = zip(*data)
    return np.stack(xs), np.asarray(ys, dtype=np.float64)


def train_step(net: Network, data, cfg: TrainConfig) -> TrainStats:
    """One pass over ``data`` in consecutive batches of ``cfg.batch_size``, one Adam step each.

    ``data`` is a list of (planes, target) pairs or an ``(X, y)`` tuple. The
    last batch holds the remainder. Returns the mean squared error measured
    before each batch's update.
    """
    x, y = _as_arrays(data)
    if len(y) == 0:
        raise ValueError("train_step needs at least one sample")
    sq = 0.0
    steps = 0
    for start in range(0, len(y), cfg.batch_size):
        xb, yb = x[start:start + cfg.batch_size], y[start:start + cfg.batch_size]
        loss, pred, grad = net.loss_and_grad(xb, yb, cfg.l2)
        if not (np.isfinite(loss) and np.all(np.isfinite(grad))):
            raise NonFiniteLoss(
                f"non-finite loss {loss} at step {net.step}: "
                f"max|theta|={float(np.max(np.abs(net.theta))):.3g}, "
                f"max|target|={float(np.max(np.abs(yb))):.3g}"
            )
        sq += float(np.sum((pred.astype(np.float64) - yb) ** 2))
        net.adam_update(grad, cfg)
        steps += 1
    return TrainStats(sq / len(y), steps, len(y))


def grad_check(net: Network, x, y, l2: float = 0.0, n_params: int = 100,
               step: float = 1e-5, seed: int = 0) -> float:
    """Max relative error between backprop and central differences.

    Runs on a float64 copy of ``net`` over a random subset of ``n_params``
    coordinates of theta.
    """
    work = net.copy(dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    _, _, grad = work.loss_and_grad(x, y, l2)
    rng = np.random.default_rng(seed)
    idx = rng.choice(work.n_params, size=min(n_params, work.n_params), replace=False)
    worst = 0.0
    for i in idx:
        orig = work.theta[i]
        work.theta[i] = orig + step
        lp, _, _ = work.loss_and_grad(x, y, l2)
        work.theta[i] = orig - step
        lm, _, _ = work.loss_and_grad(x, y, l2)
        work.theta[i] = orig
        numeric = (lp - lm) / (2 * step)
        denom = max(abs(numeric), abs(grad[i]), 1e-7)
        worst = max(worst, abs(numeric - grad[i]) / denom)
    return worst
