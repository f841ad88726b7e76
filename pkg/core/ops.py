"""Differentiable real-grid operations used by the network and its losses.

All grid ops take (..., H, W, C) inputs; the leading axes (usually the
mini-batch) pass through untouched.
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from core.autodiff import Tensor, as_tensor, record
from core.errors import ConfigError, ShapeError
from core.grid import spatial_shape
from core.rng import RngState


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _pair(a, b) -> tuple[Tensor, Tensor]:
    """Promote a plain number/array operand to the dtype of its Tensor partner."""
    if isinstance(a, Tensor) and not isinstance(b, Tensor):
        return a, Tensor(np.asarray(b, dtype=a.dtype))
    if isinstance(b, Tensor) and not isinstance(a, Tensor):
        return Tensor(np.asarray(a, dtype=b.dtype)), b
    return as_tensor(a), as_tensor(b)


def _require_grid(x: Tensor, op: str) -> None:
    if x.ndim < 3:
        raise ShapeError(f"{op}: expected input shaped (..., H, W, C), got {x.shape}")


# -- elementwise arithmetic ------------------------------------------------

def add(a, b) -> Tensor:
    a, b = _pair(a, b)
    return record(
        a.data + b.data,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)),
    )


def sub(a, b) -> Tensor:
    a, b = _pair(a, b)
    return record(
        a.data - b.data,
        (a, b),
        lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)),
    )


def mul(a, b) -> Tensor:
    a, b = _pair(a, b)
    return record(
        a.data * b.data,
        (a, b),
        lambda g: (_unbroadcast(g * np.conj(b.data), a.shape), _unbroadcast(g * np.conj(a.data), b.shape)),
    )


def div(a, b) -> Tensor:
    a, b = _pair(a, b)
    out = a.data / b.data
    return record(
        out,
        (a, b),
        lambda g: (_unbroadcast(g / b.data, a.shape), _unbroadcast(-g * out / b.data, b.shape)),
    )


def neg(x) -> Tensor:
    x = as_tensor(x)
    return record(-x.data, (x,), lambda g: (-g,))


def square(x) -> Tensor:
    x = as_tensor(x)
    return record(x.data * x.data, (x,), lambda g: (2.0 * x.data * g,))


def absolute(x) -> Tensor:
    """|x| with subgradient 0 at the origin."""
    x = as_tensor(x)
    return record(np.abs(x.data), (x,), lambda g: (np.sign(x.data) * g,))


def sqrt(x) -> Tensor:
    x = as_tensor(x)
    out = np.sqrt(x.data)
    return record(out, (x,), lambda g: (np.where(out > 0, g / (2.0 * np.where(out > 0, out, 1.0)), 0.0),))


def total(x) -> Tensor:
    x = as_tensor(x)
    return record(np.asarray(np.sum(x.data)), (x,), lambda g: (np.broadcast_to(g, x.shape).copy(),))


def mean(x) -> Tensor:
    x = as_tensor(x)
    size = x.data.size
    return record(
        np.asarray(np.mean(x.data), dtype=x.dtype),
        (x,),
        lambda g: (np.broadcast_to(g / size, x.shape).astype(x.dtype),),
    )


def reshape(x, shape: tuple[int, ...]) -> Tensor:
    x = as_tensor(x)
    return record(x.data.reshape(shape), (x,), lambda g: (g.reshape(x.shape),))


def slice_channels(x, start: int, stop: int) -> Tensor:
    x = as_tensor(x)

    def backward(g):
        full = np.zeros(x.shape, dtype=g.dtype)
        full[..., start:stop] = g
        return (full,)

    return record(x.data[..., start:stop], (x,), backward)


# -- network layers ---------------------------------------------------------

def conv2d(x, kernel, bias, padding: str = "same") -> Tensor:
    """Stride-1 cross-correlation plus bias. Kernel layout (kh, kw, c_in, c_out)."""
    x, kernel, bias = as_tensor(x), as_tensor(kernel), as_tensor(bias)
    _require_grid(x, "conv2d")
    if kernel.ndim != 4:
        raise ShapeError(f"conv2d: kernel must be (kh, kw, c_in, c_out), got {kernel.shape}")
    kh, kw, c_in, c_out = kernel.shape
    if x.shape[-1] != c_in:
        raise ShapeError(f"conv2d: kernel expects {c_in} input channels, input has {x.shape[-1]}")
    if bias.shape != (c_out,):
        raise ShapeError(f"conv2d: bias must have shape ({c_out},), got {bias.shape}")
    if padding == "same":
        if kh % 2 == 0 or kw % 2 == 0:
            raise ShapeError(f"conv2d: 'same' padding needs odd kernel sizes, got {kh}x{kw}")
        ph, pw = kh // 2, kw // 2
    elif padding == "valid":
        ph, pw = 0, 0
    else:
        raise ConfigError(f"conv2d: padding must be 'same' or 'valid', got '{padding}'")

    height, width = spatial_shape(x.data)
    out_h, out_w = height + 2 * ph - kh + 1, width + 2 * pw - kw + 1
    if out_h < 1 or out_w < 1:
        raise ShapeError(f"conv2d: {kh}x{kw} kernel does not fit a {height}x{width} input with '{padding}' padding")

    lead = x.shape[:-3]
    xp = np.pad(x.data, [(0, 0)] * len(lead) + [(ph, ph), (pw, pw), (0, 0)])
    k = kernel.data
    out = np.zeros(lead + (out_h, out_w, c_out), dtype=np.result_type(x.data, k))
    for i in range(kh):
        for j in range(kw):
            out += xp[..., i:i + out_h, j:j + out_w, :] @ k[i, j]
    out += bias.data

    def backward(g):
        gxp = np.zeros(xp.shape, dtype=g.dtype)
        gk = np.empty_like(k)
        g_rows = g.reshape(-1, c_out)
        for i in range(kh):
            for j in range(kw):
                window = xp[..., i:i + out_h, j:j + out_w, :]
                gk[i, j] = window.reshape(-1, c_in).T @ g_rows
                gxp[..., i:i + out_h, j:j + out_w, :] += g @ k[i, j].T
        gx = gxp[..., ph:ph + height, pw:pw + width, :]
        return gx, gk, g_rows.sum(axis=0)

    return record(out, (x, kernel, bias), backward)


def conv2d_transpose(x, kernel, bias) -> Tensor:
    """Stride-2 transposed convolution whose output is exactly twice the input size.

    Kernel layout (kh, kw, c_in, c_out); kernels larger than 2 are cropped
    the way 'same' transposed convolutions are.
    """
    x, kernel, bias = as_tensor(x), as_tensor(kernel), as_tensor(bias)
    _require_grid(x, "conv2d_transpose")
    if kernel.ndim != 4:
        raise ShapeError(f"conv2d_transpose: kernel must be (kh, kw, c_in, c_out), got {kernel.shape}")
    kh, kw, c_in, c_out = kernel.shape
    if x.shape[-1] != c_in:
        raise ShapeError(f"conv2d_transpose: kernel expects {c_in} input channels, input has {x.shape[-1]}")
    if bias.shape != (c_out,):
        raise ShapeError(f"conv2d_transpose: bias must have shape ({c_out},), got {bias.shape}")
    if kh < 2 or kw < 2:
        raise ShapeError(f"conv2d_transpose: kernel must be at least 2x2, got {kh}x{kw}")

    height, width = spatial_shape(x.data)
    lead = x.shape[:-3]
    full_h, full_w = 2 * (height - 1) + kh, 2 * (width - 1) + kw
    top, left = (kh - 2) // 2, (kw - 2) // 2
    k = kernel.data
    full = np.zeros(lead + (full_h, full_w, c_out), dtype=np.result_type(x.data, k))
    for a in range(kh):
        for b in range(kw):
            full[..., a:a + 2 * height - 1:2, b:b + 2 * width - 1:2, :] += x.data @ k[a, b]
    out = full[..., top:top + 2 * height, left:left + 2 * width, :] + bias.data

    def backward(g):
        g_full = np.zeros(full.shape, dtype=g.dtype)
        g_full[..., top:top + 2 * height, left:left + 2 * width, :] = g
        gx = np.zeros(x.shape, dtype=g.dtype)
        gk = np.empty_like(k)
        x_rows = x.data.reshape(-1, c_in)
        for a in range(kh):
            for b in range(kw):
                g_tap = g_full[..., a:a + 2 * height - 1:2, b:b + 2 * width - 1:2, :]
                gx += g_tap @ k[a, b].T
                gk[a, b] = x_rows.T @ g_tap.reshape(-1, c_out)
        return gx, gk, g.reshape(-1, c_out).sum(axis=0)

    return record(out, (x, kernel, bias), backward)


def maxpool2(x) -> Tensor:
    """2x2 non-overlapping max pool; ties route the gradient to the first maximum."""
    x = as_tensor(x)
    _require_grid(x, "maxpool2")
    height, width = spatial_shape(x.data)
    if height % 2 or width % 2:
        raise ShapeError(f"maxpool2: spatial dims must be even, got {height}x{width}; pad upstream")
    lead = x.shape[:-3]
    n = len(lead)
    channels = x.shape[-1]
    blocks = x.data.reshape(lead + (height // 2, 2, width // 2, 2, channels))
    blocks = np.moveaxis(blocks, [n + 1, n + 3], [-2, -1]).reshape(lead + (height // 2, width // 2, channels, 4))
    winner = np.argmax(blocks, axis=-1)[..., None]
    out = np.take_along_axis(blocks, winner, axis=-1)[..., 0]

    def backward(g):
        g_blocks = np.zeros(blocks.shape, dtype=g.dtype)
        np.put_along_axis(g_blocks, winner, g[..., None], axis=-1)
        g_blocks = g_blocks.reshape(lead + (height // 2, width // 2, channels, 2, 2))
        g_blocks = np.moveaxis(g_blocks, [-2, -1], [n + 1, n + 3])
        return (g_blocks.reshape(x.shape),)

    return record(out, (x,), backward)


def activation(x, kind: str) -> Tensor:
    x = as_tensor(x)
    if kind == "tanh":
        out = np.tanh(x.data)
        return record(out, (x,), lambda g: (g * (1.0 - out * out),))
    if kind == "relu":
        out = np.maximum(x.data, 0)
        return record(out, (x,), lambda g: (g * (x.data > 0),))
    raise ConfigError(f"Unknown activation '{kind}', expected 'tanh' or 'relu'")


def tanh(x) -> Tensor:
    return activation(x, "tanh")


def relu(x) -> Tensor:
    return activation(x, "relu")


def dropout_mask(shape: tuple[int, ...], rate: float, rng: RngState, dtype) -> np.ndarray:
    """Inverted-dropout multiplier: 0 with probability ``rate``, else 1/(1-rate)."""
    keep = rng.generator.random(shape) >= rate
    return keep.astype(dtype) / np.asarray(1.0 - rate, dtype=dtype)


def dropout(x, rate: float, rng: RngState, training: bool) -> Tensor:
    x = as_tensor(x)
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must lie in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return x
    mask = dropout_mask(x.shape, rate, rng, x.dtype)
    return record(x.data * mask, (x,), lambda g: (g * mask,))


def default_groups(channels: int, max_groups: int = 8) -> int:
    """Largest divisor of ``channels`` not above ``max_groups``."""
    for groups in range(min(max_groups, channels), 0, -1):
        if channels % groups == 0:
            return groups
    return 1


def group_norm(x, groups: int, gain, shift, eps: float = 1e-5) -> Tensor:
    x, gain, shift = as_tensor(x), as_tensor(gain), as_tensor(shift)
    _require_grid(x, "group_norm")
    channels = x.shape[-1]
    if groups < 1 or channels % groups:
        raise ShapeError(f"group_norm: {channels} channels cannot be split into {groups} groups")
    if gain.shape != (channels,) or shift.shape != (channels,):
        raise ShapeError(f"group_norm: gain/shift must have shape ({channels},), got {gain.shape}/{shift.shape}")

    lead = x.shape[:-3]
    n = len(lead)
    height, width = spatial_shape(x.data)
    grouped_shape = lead + (height, width, groups, channels // groups)
    axes = (n, n + 1, n + 3)
    xr = x.data.reshape(grouped_shape)
    centered = xr - xr.mean(axis=axes, keepdims=True)
    inv_std = 1.0 / np.sqrt((centered * centered).mean(axis=axes, keepdims=True) + eps)
    x_hat = centered * inv_std
    x_hat_flat = x_hat.reshape(x.shape)
    out = x_hat_flat * gain.data + shift.data
    count = height * width * (channels // groups)

    def backward(g):
        reduce_axes = tuple(range(g.ndim - 1))
        g_gain = (g * x_hat_flat).sum(axis=reduce_axes)
        g_shift = g.sum(axis=reduce_axes)
        d_hat = (g * gain.data).reshape(grouped_shape)
        gx = (inv_std / count) * (
            count * d_hat
            - d_hat.sum(axis=axes, keepdims=True)
            - x_hat * (d_hat * x_hat).sum(axis=axes, keepdims=True)
        )
        return gx.reshape(x.shape), g_gain, g_shift

    return record(out.astype(x.dtype, copy=False), (x, gain, shift), backward)


def concat_channels(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _require_grid(a, "concat_channels")
    _require_grid(b, "concat_channels")
    if a.shape[:-1] != b.shape[:-1]:
        raise ShapeError(f"concat_channels: spatial/batch dims differ, {a.shape} vs {b.shape}")
    split = a.shape[-1]
    return record(
        np.concatenate([a.data, b.data], axis=-1),
        (a, b),
        lambda g: (g[..., :split], g[..., split:]),
    )


def _box_sum(array: np.ndarray, window: int, axis: int) -> np.ndarray:
    return sliding_window_view(array, window, axis=axis).sum(axis=-1)


def _box_sum_adjoint(array: np.ndarray, window: int, axis: int) -> np.ndarray:
    pad = [(0, 0)] * array.ndim
    pad[axis] = (window - 1, window - 1)
    return _box_sum(np.pad(array, pad), window, axis)


def box_filter(x, window: int) -> Tensor:
    """Mean over every fully contained ``window`` x ``window`` spatial window."""
    x = as_tensor(x)
    _require_grid(x, "box_filter")
    height, width = spatial_shape(x.data)
    if window < 1 or window > min(height, width):
        raise ShapeError(f"box_filter: window {window} does not fit a {height}x{width} grid")
    scale = 1.0 / (window * window)
    out = _box_sum(_box_sum(x.data, window, -3), window, -2) * scale

    def backward(g):
        return (_box_sum_adjoint(_box_sum_adjoint(g, window, -2), window, -3) * scale,)

    return record(out.astype(x.dtype, copy=False), (x,), backward)


def softmax_channels(x) -> Tensor:
    x = as_tensor(x)
    shifted = np.exp(x.data - x.data.max(axis=-1, keepdims=True))
    out = shifted / shifted.sum(axis=-1, keepdims=True)
    return record(out, (x,), lambda g: (out * (g - (g * out).sum(axis=-1, keepdims=True)),))
