"""Model architectures: GAT encoder, GCN baseline, fusion, and MLP head.

The graph branch sees structure only: its input is a trainable per-node
embedding table, so ablating text never leaks text signal back in
through node features.

Attention layer, per head::

    e_ij  = leaky_relu(a . [W x_i || W x_j])    for j in adj(i)
    alpha = softmax over each target neighborhood
    out_i = sum_j alpha_ij W x_j

Hidden layer: heads concatenated, ELU. Output layer: single averaged
head, identity. Fusion is the bias-free linear sum X = Z Wz + H Wh, and
the head is y = sigmoid(relu(X W1 + b1) W2 + b2).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .autodiff import Tape, Tensor
from .errors import ConfigError, DataError, ShapeError
from .graphdata import Graph
from .seeding import rng_for

VARIANTS = (
    "full",
    "no_text",
    "no_graph",
    "gcn_only",
    "gat_only",
    "text_only",
    "late_fusion",
)

# Variants whose head consumes text embeddings.
_NEEDS_TEXT = ("full", "no_graph", "text_only", "late_fusion")


@dataclass
class ModelConfig:
    d_in: int = 16        # node embedding table width
    d_hid: int = 8        # per-head hidden width, layer 1
    heads: int = 4        # attention heads, layer 1
    d: int = 32           # graph embedding width (layer-2 output)
    d_f: int = 32         # fused representation width
    d_m: int = 32         # MLP hidden width
    leaky_slope: float = 0.2

    def __post_init__(self):
        if min(self.d_in, self.d_hid, self.heads, self.d, self.d_f, self.d_m) <= 0:
            raise ConfigError("all model dimensions must be positive")
        if not 0.0 < self.leaky_slope < 1.0:
            raise ConfigError(f"leaky slope must be in (0,1), got {self.leaky_slope}")


@dataclass
class Prediction:
    probabilities: np.ndarray
    labels: np.ndarray
    threshold: float


class ParamSet:
    """Ordered name -> Tensor mapping; order fixes the checkpoint layout."""

    def __init__(self, variant: str, config: ModelConfig, seed: int):
        if variant not in VARIANTS:
            raise ConfigError(f"unknown model variant {variant!r}")
        self.variant = variant
        self.config = config
        self.seed = seed
        self.tensors: dict[str, Tensor] = {}

    def add(self, name: str, data: np.ndarray) -> Tensor:
        t = Tensor(data, requires_grad=True)
        self.tensors[name] = t
        return t

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def items(self):
        return self.tensors.items()

    def values(self):
        return self.tensors.values()

    def snapshot(self) -> dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self.tensors.items()}

    def restore(self, snap: dict[str, np.ndarray]) -> None:
        for name, data in snap.items():
            self.tensors[name].data = data.copy()


def _glorot(rng: np.random.Generator, fan_in: int, fan_out: int, shape) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def _add_mlp(params: ParamSet, rng, prefix: str, d_in: int, d_m: int) -> None:
    params.add(f"{prefix}W1", _glorot(rng, d_in, d_m, (d_in, d_m)))
    params.add(f"{prefix}b1", np.zeros(d_m))
    params.add(f"{prefix}W2", _glorot(rng, d_m, 1, (d_m, 1)))
    params.add(f"{prefix}b2", np.zeros(1))


def _add_gat_encoder(params: ParamSet, rng, prefix: str, num_nodes: int, cfg: ModelConfig):
    params.add(f"{prefix}embed_table", _glorot(rng, num_nodes, cfg.d_in, (num_nodes, cfg.d_in)))
    for h in range(cfg.heads):
        params.add(f"{prefix}gat1.h{h}.W", _glorot(rng, cfg.d_in, cfg.d_hid, (cfg.d_in, cfg.d_hid)))
        params.add(f"{prefix}gat1.h{h}.a", _glorot(rng, 2 * cfg.d_hid, 1, (2 * cfg.d_hid, 1)))
    d1 = cfg.heads * cfg.d_hid
    params.add(f"{prefix}gat2.W", _glorot(rng, d1, cfg.d, (d1, cfg.d)))
    params.add(f"{prefix}gat2.a", _glorot(rng, 2 * cfg.d, 1, (2 * cfg.d, 1)))


def _add_gcn_encoder(params: ParamSet, rng, prefix: str, num_nodes: int, cfg: ModelConfig):
    params.add(f"{prefix}embed_table", _glorot(rng, num_nodes, cfg.d_in, (num_nodes, cfg.d_in)))
    d1 = cfg.heads * cfg.d_hid
    params.add(f"{prefix}gcn1.W", _glorot(rng, cfg.d_in, d1, (cfg.d_in, d1)))
    params.add(f"{prefix}gcn2.W", _glorot(rng, d1, cfg.d, (d1, cfg.d)))


def init_params(
    variant: str,
    num_nodes: int,
    d_text: int,
    config: ModelConfig,
    seed: int,
) -> ParamSet:
    """Seeded Glorot-uniform weights, zero biases, per-variant blocks."""
    rng = rng_for(seed, "init")
    params = ParamSet(variant, config, seed)
    cfg = config
    if variant in ("full", "no_text", "no_graph"):
        _add_gat_encoder(params, rng, "", num_nodes, cfg)
        params.add("fuse_Wz", _glorot(rng, cfg.d, cfg.d_f, (cfg.d, cfg.d_f)))
        params.add("fuse_Wh", _glorot(rng, d_text, cfg.d_f, (d_text, cfg.d_f)))
        _add_mlp(params, rng, "mlp.", cfg.d_f, cfg.d_m)
    elif variant == "gat_only":
        _add_gat_encoder(params, rng, "", num_nodes, cfg)
        _add_mlp(params, rng, "mlp.", cfg.d, cfg.d_m)
    elif variant == "gcn_only":
        _add_gcn_encoder(params, rng, "", num_nodes, cfg)
        _add_mlp(params, rng, "mlp.", cfg.d, cfg.d_m)
    elif variant == "text_only":
        _add_mlp(params, rng, "mlp.", d_text, cfg.d_m)
    elif variant == "late_fusion":
        _add_gcn_encoder(params, rng, "gcn.", num_nodes, cfg)
        _add_mlp(params, rng, "gcn.mlp.", cfg.d, cfg.d_m)
        _add_mlp(params, rng, "text.mlp.", d_text, cfg.d_m)
    return params


def gat_layer(
    tape: Tape,
    x: Tensor,
    graph: Graph,
    weights: list[Tensor],
    att_vecs: list[Tensor],
    slope: float,
    concat_heads: bool,
) -> Tensor:
    """Multi-head attention layer over the self-looped neighborhoods."""
    src, dst = graph.attention_edges()
    n = graph.num_nodes
    head_outs = []
    for w, a in zip(weights, att_vecs):
        wx = tape.matmul(x, w)
        wx_dst = tape.gather_rows(wx, dst)
        wx_src = tape.gather_rows(wx, src)
        pair = tape.concat_cols([wx_dst, wx_src])
        logits = tape.reshape(tape.matmul(pair, a), (src.shape[0],))
        att = tape.segment_softmax(tape.leaky_relu(logits, slope), dst, n)
        messages = tape.scale_rows(wx_src, att)
        head_outs.append(tape.segment_sum(messages, dst, n))
    if concat_heads:
        merged = head_outs[0] if len(head_outs) == 1 else tape.concat_cols(head_outs)
        return tape.elu(merged)
    merged = head_outs[0]
    for extra in head_outs[1:]:
        merged = tape.add(merged, extra)
    if len(head_outs) > 1:
        merged = tape.scale(merged, 1.0 / len(head_outs))
    return merged


def gcn_layer(tape: Tape, x: Tensor, graph: Graph, w: Tensor, activation: str = "none") -> Tensor:
    """Symmetric-normalized aggregation: out = D^-1/2 A_hat D^-1/2 x W."""
    norm_adj = Tensor(graph.gcn_norm_adjacency())
    out = tape.matmul(tape.matmul(norm_adj, x), w)
    if activation == "relu":
        out = tape.relu(out)
    return out


def encode_graph(tape: Tape, graph: Graph, params: ParamSet, prefix: str = "") -> Tensor:
    """2-layer GAT over the trainable embedding table."""
    cfg = params.config
    w1 = [params[f"{prefix}gat1.h{h}.W"] for h in range(cfg.heads)]
    a1 = [params[f"{prefix}gat1.h{h}.a"] for h in range(cfg.heads)]
    hidden = gat_layer(
        tape, params[f"{prefix}embed_table"], graph, w1, a1, cfg.leaky_slope, concat_heads=True
    )
    return gat_layer(
        tape, hidden, graph,
        [params[f"{prefix}gat2.W"]], [params[f"{prefix}gat2.a"]],
        cfg.leaky_slope, concat_heads=False,
    )


def encode_graph_gcn(tape: Tape, graph: Graph, params: ParamSet, prefix: str = "") -> Tensor:
    hidden = gcn_layer(tape, params[f"{prefix}embed_table"], graph, params[f"{prefix}gcn1.W"], "relu")
    return gcn_layer(tape, hidden, graph, params[f"{prefix}gcn2.W"], "none")


def fuse(tape: Tape, z: Tensor, h: Tensor, wz: Tensor, wh: Tensor) -> Tensor:
    """Bias-free linear fusion: X = Z Wz + H Wh."""
    if z.data.shape[0] != h.data.shape[0]:
        raise ShapeError(
            f"fuse: row counts differ: Z {z.data.shape} vs H {h.data.shape}"
        )
    return tape.add(tape.matmul(z, wz), tape.matmul(h, wh))


def mlp_predict(tape: Tape, x: Tensor, params: ParamSet, prefix: str = "mlp.") -> Tensor:
    """y = sigmoid(relu(X W1 + b1) W2 + b2), flattened to a vector."""
    hidden = tape.relu(tape.add_bias(tape.matmul(x, params[f"{prefix}W1"]), params[f"{prefix}b1"]))
    logits = tape.add_bias(tape.matmul(hidden, params[f"{prefix}W2"]), params[f"{prefix}b2"])
    return tape.sigmoid(tape.reshape(logits, (x.data.shape[0],)))


def forward(
    tape: Tape,
    variant: str,
    graph: Graph,
    h_text: Optional[np.ndarray],
    params: ParamSet,
) -> Tensor:
    """Probability vector for one model variant.

    no_text and no_graph reuse the full architecture with the text or
    graph path replaced by an exact zero matrix, so their outputs match
    the corresponding degenerations of the full model bit for bit.
    """
    if variant in _NEEDS_TEXT:
        if h_text is None:
            raise ConfigError(f"variant {variant!r} needs text embeddings")
        h_tensor = Tensor(h_text)
    if variant in ("full", "no_text", "no_graph"):
        if variant == "no_graph":
            z = Tensor(np.zeros((graph.num_nodes, params.config.d)))
        else:
            z = encode_graph(tape, graph, params)
        if variant == "no_text":
            h_tensor = Tensor(np.zeros((graph.num_nodes, params["fuse_Wh"].data.shape[0])))
        x = fuse(tape, z, h_tensor, params["fuse_Wz"], params["fuse_Wh"])
        return mlp_predict(tape, x, params)
    if variant == "gat_only":
        return mlp_predict(tape, encode_graph(tape, graph, params), params)
    if variant == "gcn_only":
        return mlp_predict(tape, encode_graph_gcn(tape, graph, params), params)
    if variant == "text_only":
        return mlp_predict(tape, h_tensor, params)
    if variant == "late_fusion":
        y_gcn = mlp_predict(tape, encode_graph_gcn(tape, graph, params, "gcn."), params, "gcn.mlp.")
        y_text = mlp_predict(tape, h_tensor, params, "text.mlp.")
        return tape.scale(tape.add(y_gcn, y_text), 0.5)
    raise ConfigError(f"unknown model variant {variant!r}")


def late_fusion_losses(
    tape: Tape,
    graph: Graph,
    h_text: np.ndarray,
    params: ParamSet,
    labels: np.ndarray,
    mask: np.ndarray,
) -> tuple[Tensor, Tensor]:
    """Averaged prediction plus the sum of the two sub-model BCE losses.

    The sub-models share no parameters, so one backward pass through the
    summed loss is exactly independent training of each.
    """
    if h_text is None:
        raise ConfigError("variant 'late_fusion' needs text embeddings")
    y_gcn = mlp_predict(tape, encode_graph_gcn(tape, graph, params, "gcn."), params, "gcn.mlp.")
    y_text = mlp_predict(tape, Tensor(h_text), params, "text.mlp.")
    combined = tape.scale(tape.add(y_gcn, y_text), 0.5)
    loss = tape.add(
        tape.bce_loss(y_gcn, labels, mask), tape.bce_loss(y_text, labels, mask)
    )
    return combined, loss


def predict(
    variant: str,
    graph: Graph,
    h_text: Optional[np.ndarray],
    params: ParamSet,
    threshold: float = 0.5,
) -> Prediction:
    """Forward pass on a throwaway tape; threshold >= counts as positive."""
    probs = forward(Tape(), variant, graph, h_text, params).data
    return Prediction(probs, (probs >= threshold).astype(np.int64), threshold)


# -- checkpoint container ------------------------------------------------
#
# Layout: 8-byte little-endian header length, UTF-8 JSON header
# (variant, seed, config, tensor shapes in order), then each tensor as
# row-major float64 little-endian, in header order.

_MAGIC_LEN = struct.Struct("<Q")


def save_checkpoint(path: str | Path, params: ParamSet, config_hash: str = "") -> None:
    header = {
        "variant": params.variant,
        "seed": params.seed,
        "config_hash": config_hash,
        "model_config": params.config.__dict__,
        "tensors": [
            {"name": name, "shape": list(t.data.shape)} for name, t in params.items()
        ],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with Path(path).open("wb") as fh:
        fh.write(_MAGIC_LEN.pack(len(blob)))
        fh.write(blob)
        for _, t in params.items():
            fh.write(np.ascontiguousarray(t.data, dtype="<f8").tobytes())


def load_checkpoint(path: str | Path) -> tuple[ParamSet, str]:
    file = Path(path)
    if not file.exists():
        raise DataError(f"checkpoint not found: {file}")
    with file.open("rb") as fh:
        raw_len = fh.read(_MAGIC_LEN.size)
        if len(raw_len) != _MAGIC_LEN.size:
            raise DataError(f"{file}: truncated checkpoint header")
        (header_len,) = _MAGIC_LEN.unpack(raw_len)
        try:
            header = json.loads(fh.read(header_len).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise DataError(f"{file}: bad checkpoint header: {exc}") from None
        params = ParamSet(
            header["variant"], ModelConfig(**header["model_config"]), header["seed"]
        )
        for spec in header["tensors"]:
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            buf = fh.read(count * 8)
            if len(buf) != count * 8:
                raise DataError(f"{file}: truncated payload for {spec['name']}")
            params.add(spec["name"], np.frombuffer(buf, dtype="<f8").reshape(shape).copy())
    return params, header.get("config_hash", "")
