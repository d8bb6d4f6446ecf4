"""Command-line entry point.

Subcommands: generate, embed, train, eval, bench, ablate. One JSON
config drives everything; --seed and --provider override it, and
FUSENET_EMBED_URL overrides the remote endpoint. Exit codes: 2 config,
3 data, 4 training, 5 remote provider.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

from .errors import (
    ConfigError,
    ContractError,
    DataError,
    TrainingError,
    TransportError,
)
from .graphdata import load_dataset, split_nodes
from .models import ModelConfig, load_checkpoint, save_checkpoint
from .seeding import subseed
from .synthgen import SynthConfig, describe, generate, write_dataset
from .textembed import ProviderConfig, embed_corpus, write_precomputed
from .train import (
    MetricsReport,
    TrainConfig,
    evaluate,
    format_table,
    run_ablation,
    run_bench,
    train,
)

ENV_EMBED_URL = "FUSENET_EMBED_URL"

EXIT_CODES = {
    ConfigError: 2,
    DataError: 3,
    TrainingError: 4,
    TransportError: 5,
    ContractError: 5,
}


@dataclass
class RunConfig:
    seed: int = 0
    variant: str = "full"
    dataset: dict = field(default_factory=dict)   # edges/labels/texts paths
    provider: dict = field(default_factory=lambda: {"kind": "hashing", "dim": 64})
    model: dict = field(default_factory=dict)
    train: dict = field(default_factory=dict)
    split_ratios: tuple = (0.8, 0.1, 0.1)
    synth: dict = field(default_factory=dict)
    out_dir: str = "out"

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        file = Path(path)
        if not file.exists():
            raise ConfigError(f"config file not found: {file}")
        try:
            raw = json.loads(file.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{file}: invalid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{file}: config must be a JSON object")
        known = {f.name for f in cls.__dataclass_fields__.values()}  # type: ignore[attr-defined]
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"{file}: unknown config keys: {sorted(unknown)}")
        cfg = cls(**raw)
        cfg.split_ratios = tuple(cfg.split_ratios)
        return cfg

    def provider_config(self) -> ProviderConfig:
        raw = dict(self.provider)
        kinds = [k for k in ("precomputed", "hashing", "remote") if raw.get("kind") == k]
        if len(kinds) != 1:
            raise ConfigError(f"exactly one provider kind must be set, got {raw.get('kind')!r}")
        env_url = os.environ.get(ENV_EMBED_URL)
        if env_url:
            raw["endpoint"] = env_url
        try:
            return ProviderConfig(**raw)
        except TypeError as exc:
            raise ConfigError(f"bad provider config: {exc}") from None

    def model_config(self) -> ModelConfig:
        try:
            return ModelConfig(**self.model)
        except TypeError as exc:
            raise ConfigError(f"bad model config: {exc}") from None

    def train_config(self) -> TrainConfig:
        raw = dict(self.train)
        raw["seed"] = self.seed
        try:
            return TrainConfig(**raw)
        except TypeError as exc:
            raise ConfigError(f"bad train config: {exc}") from None

    def synth_config(self) -> SynthConfig:
        raw = dict(self.synth)
        raw.setdefault("seed", subseed(self.seed, "synthgen"))
        try:
            cfg = SynthConfig(**raw)
        except TypeError as exc:
            raise ConfigError(f"bad synth config: {exc}") from None
        if isinstance(cfg.intra_p, list):
            cfg.intra_p = tuple(cfg.intra_p)
        return cfg

    def echo(self) -> dict:
        return {
            "seed": self.seed,
            "variant": self.variant,
            "dataset": dict(self.dataset),
            "provider": dict(self.provider),
            "model": dict(self.model),
            "train": dict(self.train),
            "split_ratios": list(self.split_ratios),
            "synth": dict(self.synth),
            "out_dir": self.out_dir,
        }

    def content_hash(self) -> str:
        blob = json.dumps(self.echo(), sort_keys=True).encode("utf-8")
        return hashlib.blake2b(blob, digest_size=8).hexdigest()


def _file_hash(path: Path) -> str:
    return hashlib.blake2b(path.read_bytes(), digest_size=8).hexdigest()


def _write_report(out_dir: Path, name: str, payload: dict) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {"generated_at": datetime.now(timezone.utc).isoformat(), **payload}
    path = out_dir / name
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _load_inputs(config: RunConfig):
    ds = config.dataset
    for key in ("edges", "labels", "texts"):
        if key not in ds:
            raise ConfigError(f"dataset config is missing {key!r}")
    data = load_dataset(ds["edges"], ds["labels"], ds["texts"])
    provider = config.provider_config()
    matrix = embed_corpus(data.corpus, provider, data.graph)
    split = split_nodes(data.labels, config.split_ratios, seed=subseed(config.seed, "split"))
    return data, matrix, split


def _reports_payload(config: RunConfig, reports: dict[str, MetricsReport]) -> dict:
    return {
        "config": config.echo(),
        "seed": config.seed,
        "variants": {name: rep.as_dict() for name, rep in reports.items()},
    }


def cmd_generate(config: RunConfig, out_dir: Path) -> int:
    dataset = generate(config.synth_config())
    paths = write_dataset(dataset, out_dir)
    manifest = {
        "config": config.echo(),
        "summary": describe(dataset).as_dict(),
        "files": {
            key: {"path": p.name, "hash": _file_hash(p), "bytes": p.stat().st_size}
            for key, p in paths.items()
        },
    }
    _write_report(out_dir, "manifest.json", manifest)
    print(f"wrote {len(paths)} dataset files to {out_dir}")
    return 0


def cmd_embed(config: RunConfig, out_dir: Path) -> int:
    data, matrix, _ = _load_inputs(config)
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / "embeddings.jsonl"
    write_precomputed(target, data.graph, matrix)
    print(f"wrote {matrix.rows.shape[0]} embeddings of dim {matrix.dim} to {target}")
    return 0


def _emit_table(out_dir: Path, name: str, reports: dict[str, MetricsReport]) -> None:
    table = format_table(reports)
    (out_dir / name).write_text(table + "\n", encoding="utf-8")
    print(table)


def cmd_train(config: RunConfig, out_dir: Path) -> int:
    data, matrix, split = _load_inputs(config)
    params, report = train(
        config.variant, data.graph, matrix.rows, data.labels, split,
        config.train_config(), config.model_config(),
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    save_checkpoint(out_dir / "checkpoint.bin", params, config.content_hash())
    _write_report(out_dir, "train_report.json", _reports_payload(config, {config.variant: report}))
    _emit_table(out_dir, "train_table.txt", {config.variant: report})
    return 0


def cmd_eval(config: RunConfig, out_dir: Path, checkpoint: Optional[str]) -> int:
    ckpt_path = checkpoint or str(Path(config.out_dir) / "checkpoint.bin")
    params, _ = load_checkpoint(ckpt_path)
    data, matrix, split = _load_inputs(config)
    metrics = {
        name: evaluate(
            params, params.variant, data.graph, matrix.rows, data.labels, nodes,
            config.train_config().threshold,
        )
        for name, nodes in (("train", split.train), ("val", split.val), ("test", split.test))
    }
    payload = {
        "config": config.echo(),
        "seed": config.seed,
        "checkpoint": str(ckpt_path),
        "variant": params.variant,
        "metrics": {name: m.as_dict() for name, m in metrics.items()},
    }
    _write_report(out_dir, "eval_report.json", payload)
    lines = [
        f"{params.variant} {name}: f1={m.f1:.4f} precision={m.precision:.4f} "
        f"recall={m.recall:.4f} accuracy={m.accuracy:.4f}"
        for name, m in metrics.items()
    ]
    (out_dir / "eval_table.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print("\n".join(lines))
    return 0


def cmd_bench(config: RunConfig, out_dir: Path) -> int:
    data, matrix, split = _load_inputs(config)
    reports = run_bench(
        data.graph, matrix.rows, data.labels, split,
        config.train_config(), config.model_config(),
    )
    _write_report(out_dir, "bench_report.json", _reports_payload(config, reports))
    _emit_table(out_dir, "bench_table.txt", reports)
    return 0


def cmd_ablate(config: RunConfig, out_dir: Path) -> int:
    data, matrix, split = _load_inputs(config)
    reports = run_ablation(
        data.graph, matrix.rows, data.labels, split,
        config.train_config(), config.model_config(),
    )
    _write_report(out_dir, "ablation_report.json", _reports_payload(config, reports))
    _emit_table(out_dir, "ablation_table.txt", reports)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fusenet",
        description="Text/graph fusion engine: generate, embed, train, eval, bench, ablate.",
    )
    parser.add_argument("command", choices=["generate", "embed", "train", "eval", "bench", "ablate"])
    parser.add_argument("--config", required=True, help="path to the JSON run config")
    parser.add_argument("--out", help="output directory (overrides config out_dir)")
    parser.add_argument("--seed", type=int, help="master seed (overrides config)")
    parser.add_argument(
        "--provider", choices=["precomputed", "hashing", "remote"],
        help="embedding provider kind (overrides config)",
    )
    parser.add_argument("--checkpoint", help="checkpoint path for eval")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = RunConfig.load(args.config)
        if args.seed is not None:
            config.seed = args.seed
        if args.provider:
            config.provider = {**config.provider, "kind": args.provider}
        out_dir = Path(args.out) if args.out else Path(config.out_dir)
        if args.command == "generate":
            return cmd_generate(config, out_dir)
        if args.command == "embed":
            return cmd_embed(config, out_dir)
        if args.command == "train":
            return cmd_train(config, out_dir)
        if args.command == "eval":
            return cmd_eval(config, out_dir, args.checkpoint)
        if args.command == "bench":
            return cmd_bench(config, out_dir)
        return cmd_ablate(config, out_dir)
    except (ConfigError, DataError, TrainingError, TransportError, ContractError) as exc:
        print(f"error: {exc.category}: {exc}", file=sys.stderr)
        for cls, code in EXIT_CODES.items():
            if isinstance(exc, cls):
                return code
        return 1
    except OSError as exc:
        print(f"error: io-error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
