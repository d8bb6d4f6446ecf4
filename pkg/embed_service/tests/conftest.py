import socket
import threading
import time

import pytest
import requests
import uvicorn

from embed_service.app import create_app
from embed_service.backend import ServiceConfig

VOCAB_WORDS = [
    "meet", "docks", "shipment", "friday", "night", "deal", "drop",
    "corner", "cash", "warehouse", "phone", "burner", "alpha", "bravo",
    "text", "document", "number", "sweep", "at", "the", "t0", "t1",
]


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    """A small transformer in standard pretrained format, built locally.

    The sandbox has no model-hub access; the service loads any model
    directory through the same AutoModel/AutoTokenizer path it would use
    for a hub name, so the wire contract under test is identical.
    """
    import torch
    from tokenizers import Tokenizer, models, pre_tokenizers, processors
    from transformers import BertConfig, BertModel, PreTrainedTokenizerFast

    vocab = {"[PAD]": 0, "[UNK]": 1, "[CLS]": 2, "[SEP]": 3}
    for word in VOCAB_WORDS:
        vocab[word] = len(vocab)
    tok = Tokenizer(models.WordLevel(vocab, unk_token="[UNK]"))
    tok.pre_tokenizer = pre_tokenizers.Whitespace()
    tok.post_processor = processors.TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", 2), ("[SEP]", 3)],
    )
    tokenizer = PreTrainedTokenizerFast(
        tokenizer_object=tok,
        pad_token="[PAD]", unk_token="[UNK]", cls_token="[CLS]", sep_token="[SEP]",
    )
    torch.manual_seed(1234)
    model = BertModel(BertConfig(
        vocab_size=len(vocab), hidden_size=32, num_hidden_layers=2,
        num_attention_heads=2, intermediate_size=48, max_position_embeddings=512,
    ))
    out = tmp_path_factory.mktemp("tiny-model")
    tokenizer.save_pretrained(out)
    model.save_pretrained(out)
    return str(out)


def _free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


class LiveServer:
    def __init__(self, config: ServiceConfig, autoload: bool = True):
        self.config = config
        self.url = f"http://{config.host}:{config.port}"
        app = create_app(config, autoload=autoload)
        self._uv = uvicorn.Server(uvicorn.Config(app, host=config.host, port=config.port,
                                                 log_level="error"))
        self._thread = threading.Thread(target=self._uv.run, daemon=True)

    def start(self):
        self._thread.start()
        deadline = time.monotonic() + 30
        while time.monotonic() < deadline:
            try:
                requests.get(self.url + "/health", timeout=1)
                return self
            except requests.RequestException:
                time.sleep(0.05)
        raise RuntimeError("service did not start listening")

    def wait_ready(self, timeout: float = 120):
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            try:
                if requests.get(self.url + "/health", timeout=2).status_code == 200:
                    return self
            except requests.RequestException:
                pass
            time.sleep(0.1)
        raise RuntimeError("model never finished loading")

    def stop(self):
        self._uv.should_exit = True
        self._thread.join(timeout=10)


@pytest.fixture(scope="session")
def live_service(tiny_model_dir):
    config = ServiceConfig(model_name=tiny_model_dir, port=_free_port())
    server = LiveServer(config).start()
    yield server
    server.stop()
