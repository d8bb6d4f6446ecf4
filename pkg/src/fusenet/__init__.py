"""Text/graph fusion engine for node-level crime likelihood prediction."""

from .autodiff import Tape, Tensor
from .graphdata import (
    Dataset,
    Graph,
    LabelSet,
    Split,
    TextCorpus,
    load_dataset,
    load_graph,
    load_labels,
    load_texts,
    split_nodes,
)
from .models import (
    ModelConfig,
    ParamSet,
    Prediction,
    forward,
    fuse,
    gat_layer,
    gcn_layer,
    init_params,
    load_checkpoint,
    mlp_predict,
    predict,
    save_checkpoint,
)
from .synthgen import SynthConfig, describe, generate, write_dataset
from .textembed import (
    EmbeddingMatrix,
    ProviderConfig,
    embed_corpus,
    hash_embed,
    remote_embed_batch,
)
from .train import (
    MetricsReport,
    TrainConfig,
    adam_step,
    evaluate,
    run_ablation,
    run_bench,
    train,
)

__version__ = "0.1.0"
