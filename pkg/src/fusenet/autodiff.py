"""Dense-tensor computation tape with reverse-mode gradients.

Every differentiable operation the models need lives here. Values are
64-bit floats throughout; numpy supplies the dense kernels, whose
reduction order is fixed, so repeated forward passes on identical inputs
are bitwise identical. Gradient formulas are checked against central
finite differences in the test suite.

Usage::

    tape = Tape()
    w = Tensor(np.zeros((4, 2)), requires_grad=True)
    y = tape.sigmoid(tape.matmul(x, w))
    loss = tape.bce_loss(y_flat, labels, mask)
    tape.backward(loss, params=[w])
    w.grad  # d loss / d w
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .errors import ShapeError

BCE_EPS = 1e-7  # clamp guard against log(0); tests rely on this exact value


class Tensor:
    """A dense float64 array plus an optional gradient slot.

    Tensors are immutable during a tape's forward pass; the optimizer
    rebinds ``data`` to a fresh array rather than mutating in place, so
    intermediates saved by the tape stay valid.
    """

    __slots__ = ("data", "requires_grad", "grad")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data, dtype=np.float64)
        self.data = arr
        self.requires_grad = requires_grad
        self.grad: Optional[np.ndarray] = None

    @property
    def shape(self) -> tuple:
        return self.data.shape

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"


@dataclass
class TapeEntry:
    """One recorded operation: ids of operands, id of the result, and the
    pull-back closure over saved forward intermediates."""

    op: str
    input_ids: tuple
    output_id: int
    backward: Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]
    inputs: tuple = field(repr=False, default=())


class Tape:
    """Ordered record of operations for one forward computation.

    Entries are appended in execution order, which is topological by
    construction; ``backward`` walks them exactly once in reverse.
    A tape is single-threaded and single-use.
    """

    def __init__(self):
        self._entries: list[TapeEntry] = []
        self._ids: dict[int, int] = {}
        self._tensors: list[Tensor] = []

    # -- bookkeeping -------------------------------------------------

    def _register(self, t: Tensor) -> int:
        key = id(t)
        node = self._ids.get(key)
        if node is None:
            node = len(self._tensors)
            self._ids[key] = node
            self._tensors.append(t)
        return node

    def _record(self, op: str, inputs: Sequence[Tensor], out: Tensor, backward) -> Tensor:
        if any(t.requires_grad for t in inputs):
            out.requires_grad = True
            entry = TapeEntry(
                op=op,
                input_ids=tuple(self._register(t) for t in inputs),
                output_id=self._register(out),
                backward=backward,
                inputs=tuple(inputs),
            )
            self._entries.append(entry)
        return out

    @property
    def entries(self) -> list[TapeEntry]:
        return self._entries

    # -- operations ----------------------------------------------------

    def matmul(self, a: Tensor, b: Tensor) -> Tensor:
        """Matrix product; dA = dC @ B.T, dB = A.T @ dC."""
        if a.data.ndim != 2 or b.data.ndim != 2 or a.data.shape[1] != b.data.shape[0]:
            raise ShapeError(
                f"matmul: incompatible shapes {a.data.shape} and {b.data.shape}"
            )
        out = Tensor(a.data @ b.data)
        a_data, b_data = a.data, b.data

        def backward(g):
            return g @ b_data.T, a_data.T @ g

        return self._record("matmul", (a, b), out, backward)

    def add(self, a: Tensor, b: Tensor) -> Tensor:
        if a.data.shape != b.data.shape:
            raise ShapeError(f"add: shape mismatch {a.data.shape} vs {b.data.shape}")
        out = Tensor(a.data + b.data)
        return self._record("add", (a, b), out, lambda g: (g, g))

    def add_bias(self, x: Tensor, b: Tensor) -> Tensor:
        """Add a length-d bias vector to every row of an N x d matrix."""
        if x.data.ndim != 2 or b.data.shape != (x.data.shape[1],):
            raise ShapeError(f"add_bias: shapes {x.data.shape} and {b.data.shape}")
        out = Tensor(x.data + b.data[None, :])

        def backward(g):
            return g, g.sum(axis=0)

        return self._record("add_bias", (x, b), out, backward)

    def scale(self, x: Tensor, c: float) -> Tensor:
        out = Tensor(x.data * c)
        return self._record("scale", (x,), out, lambda g: (g * c,))

    def scale_rows(self, x: Tensor, w: Tensor) -> Tensor:
        """Multiply row i of an E x d matrix by scalar w[i]."""
        if x.data.ndim != 2 or w.data.shape != (x.data.shape[0],):
            raise ShapeError(f"scale_rows: shapes {x.data.shape} and {w.data.shape}")
        out = Tensor(x.data * w.data[:, None])
        x_data, w_data = x.data, w.data

        def backward(g):
            return g * w_data[:, None], (g * x_data).sum(axis=1)

        return self._record("scale_rows", (x, w), out, backward)

    def gather_rows(self, x: Tensor, index: np.ndarray) -> Tensor:
        """Select rows by index; backward scatter-adds into the source."""
        idx = np.asarray(index, dtype=np.int64)
        out = Tensor(x.data[idx])
        n = x.data.shape[0]
        width = x.data.shape[1:]

        def backward(g):
            acc = np.zeros((n, *width), dtype=np.float64)
            np.add.at(acc, idx, g)
            return (acc,)

        return self._record("gather_rows", (x,), out, backward)

    def segment_sum(self, x: Tensor, segments: np.ndarray, num_segments: int) -> Tensor:
        """Sum rows of an E x d matrix into their target segments (N x d)."""
        seg = np.asarray(segments, dtype=np.int64)
        if x.data.shape[0] != seg.shape[0]:
            raise ShapeError(f"segment_sum: {x.data.shape[0]} rows vs {seg.shape[0]} segment ids")
        acc = np.zeros((num_segments, *x.data.shape[1:]), dtype=np.float64)
        np.add.at(acc, seg, x.data)
        out = Tensor(acc)

        def backward(g):
            return (g[seg],)

        return self._record("segment_sum", (x,), out, backward)

    def concat_cols(self, parts: Sequence[Tensor]) -> Tensor:
        """Concatenate N x d_k matrices along columns."""
        rows = {p.data.shape[0] for p in parts}
        if len(rows) != 1:
            raise ShapeError(f"concat_cols: row counts differ: {sorted(rows)}")
        out = Tensor(np.concatenate([p.data for p in parts], axis=1))
        widths = [p.data.shape[1] for p in parts]
        offsets = np.cumsum([0] + widths)

        def backward(g):
            return tuple(g[:, offsets[i]:offsets[i + 1]] for i in range(len(widths)))

        return self._record("concat_cols", tuple(parts), out, backward)

    def reshape(self, x: Tensor, shape: Sequence[int]) -> Tensor:
        out = Tensor(x.data.reshape(shape))
        original = x.data.shape
        return self._record("reshape", (x,), out, lambda g: (g.reshape(original),))

    def total(self, x: Tensor) -> Tensor:
        """Sum of all entries, as a scalar tensor."""
        out = Tensor(x.data.sum())
        shape = x.data.shape

        def backward(g):
            return (np.full(shape, float(g)),)

        return self._record("total", (x,), out, backward)

    def leaky_relu(self, x: Tensor, slope: float) -> Tensor:
        """x if x >= 0 else slope * x; slope must lie in (0, 1)."""
        if not 0.0 < slope < 1.0:
            raise ValueError(f"leaky_relu slope must be in (0,1), got {slope}")
        out = Tensor(np.where(x.data >= 0, x.data, slope * x.data))
        factor = np.where(x.data >= 0, 1.0, slope)
        return self._record("leaky_relu", (x,), out, lambda g: (g * factor,))

    def relu(self, x: Tensor) -> Tensor:
        out = Tensor(np.maximum(x.data, 0.0))
        mask = (x.data > 0).astype(np.float64)
        return self._record("relu", (x,), out, lambda g: (g * mask,))

    def elu(self, x: Tensor) -> Tensor:
        """x if x >= 0 else exp(x) - 1."""
        neg = x.data < 0
        vals = x.data.copy()
        vals[neg] = np.expm1(x.data[neg])
        out = Tensor(vals)
        factor = np.where(neg, vals + 1.0, 1.0)
        return self._record("elu", (x,), out, lambda g: (g * factor,))

    def sigmoid(self, x: Tensor) -> Tensor:
        """1 / (1 + exp(-x)), computed branch-wise so no exp overflows."""
        vals = _stable_sigmoid(x.data)
        out = Tensor(vals)
        factor = vals * (1.0 - vals)
        return self._record("sigmoid", (x,), out, lambda g: (g * factor,))

    def segment_softmax(self, logits: Tensor, segments: np.ndarray,
                        num_segments: Optional[int] = None) -> Tensor:
        """Softmax within each segment of a flat logit vector.

        Max-subtraction keeps exponentials bounded; the result is still
        exactly the mathematical softmax per segment.
        """
        if logits.data.ndim != 1:
            raise ShapeError(f"segment_softmax expects a vector, got {logits.data.shape}")
        seg = np.asarray(segments, dtype=np.int64)
        if seg.shape != logits.data.shape:
            raise ShapeError(f"segment ids {seg.shape} do not match logits {logits.data.shape}")
        n = int(seg.max()) + 1 if num_segments is None else num_segments
        counts = np.bincount(seg, minlength=n)
        if (counts == 0).any():
            empty = int(np.argmin(counts))
            raise ValueError(f"segment_softmax: segment {empty} is empty")
        seg_max = np.full(n, -np.inf)
        np.maximum.at(seg_max, seg, logits.data)
        e = np.exp(logits.data - seg_max[seg])
        denom = np.zeros(n)
        np.add.at(denom, seg, e)
        y = e / denom[seg]
        out = Tensor(y)

        def backward(g):
            dot = np.zeros(n)
            np.add.at(dot, seg, g * y)
            return (y * (g - dot[seg]),)

        return self._record("segment_softmax", (logits,), out, backward)

    def bce_loss(self, pred: Tensor, labels: np.ndarray, mask: np.ndarray) -> Tensor:
        """Mean binary cross-entropy over the masked nodes.

        Predictions are clamped to [eps, 1-eps] before the logs; the
        gradient is zero where the clamp saturates, matching what a
        finite-difference probe of the clamped function sees.
        """
        if pred.data.ndim != 1:
            raise ShapeError(f"bce_loss expects a probability vector, got {pred.data.shape}")
        y = np.asarray(labels, dtype=np.float64)
        if y.shape != pred.data.shape:
            raise ShapeError(f"labels {y.shape} do not match predictions {pred.data.shape}")
        idx = np.asarray(mask, dtype=np.int64)
        if idx.size == 0:
            raise ValueError("bce_loss: mask is empty")
        p_raw = pred.data[idx]
        if p_raw.min() < 0.0 or p_raw.max() > 1.0:
            raise ValueError("bce_loss: predictions outside [0, 1]")
        ym = y[idx]
        p = np.clip(p_raw, BCE_EPS, 1.0 - BCE_EPS)
        losses = -(ym * np.log(p) + (1.0 - ym) * np.log1p(-p))
        out = Tensor(losses.mean())
        inside = (p_raw > BCE_EPS) & (p_raw < 1.0 - BCE_EPS)
        n_pred = pred.data.shape[0]
        m = idx.size

        def backward(g):
            dp = np.zeros(n_pred)
            local = (-(ym / p) + (1.0 - ym) / (1.0 - p)) / m
            local[~inside] = 0.0
            np.add.at(dp, idx, local * float(g))
            return (dp,)

        return self._record("bce_loss", (pred,), out, backward)

    # -- reverse pass --------------------------------------------------

    def backward(self, loss: Tensor, params: Optional[Iterable[Tensor]] = None) -> None:
        """Populate ``grad`` on every requires_grad leaf reachable from loss.

        Leaves passed in ``params`` that the loss never touched receive an
        exact zero gradient. Each tape entry is visited once, in reverse.
        """
        if loss.data.shape != ():
            raise ValueError(f"backward: loss must be scalar, got shape {loss.data.shape}")
        grads: dict[int, np.ndarray] = {}
        loss_id = self._ids.get(id(loss))
        if loss_id is None:
            raise ValueError("backward: loss was not produced on this tape")
        grads[loss_id] = np.asarray(1.0)
        for entry in reversed(self._entries):
            g_out = grads.pop(entry.output_id, None)
            if g_out is None:
                continue
            for tid, tensor, g_in in zip(
                entry.input_ids, entry.inputs, entry.backward(g_out)
            ):
                if g_in is None or not tensor.requires_grad:
                    continue
                if tid in grads:
                    grads[tid] = grads[tid] + g_in
                else:
                    grads[tid] = g_in
        for node, t in enumerate(self._tensors):
            if t.requires_grad and node in grads:
                t.grad = np.asarray(grads[node], dtype=np.float64)
        if params is not None:
            for p in params:
                if p.requires_grad and (
                    id(p) not in self._ids or self._ids[id(p)] not in grads
                ):
                    p.grad = np.zeros_like(p.data)


def _stable_sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out
