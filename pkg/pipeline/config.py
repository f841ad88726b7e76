"""Run configuration: one validated document for every pipeline command."""
import json
from pathlib import Path

import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator

from core.errors import ConfigError
from core.rng import RngState
from network.models import NetworkConfig
from seismic.models import DatasetSpec
from seismic.sparse import BpiConfig
from training.models import TrainConfig


class IoConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    log_wall_clock: bool = Field(default=True, description="False writes 0 seconds in epoch logs for byte-identical reruns")
    export_images: bool = Field(default=True, description="Write PGM figures for inputs and predictions")
    infer_stride: int | None = Field(default=None, ge=1, description="Inference patch stride; null means the patch size")
    baseline_chi_traces: int = Field(default=16, ge=1, description="Validation traces used when baseline.chi is null")


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    dataset: DatasetSpec = Field(default_factory=DatasetSpec)
    network: NetworkConfig = Field(default_factory=NetworkConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    baseline: BpiConfig = Field(default_factory=BpiConfig)
    io: IoConfig = Field(default_factory=IoConfig)

    @model_validator(mode="after")
    def _check_patching(self) -> "RunConfig":
        if tuple(self.dataset.patch_size) != tuple(self.network.input_size):
            raise ValueError(
                f"dataset.patch_size {self.dataset.patch_size} must equal network.input_size {self.network.input_size}"
            )
        if self.network.input_channels != 1:
            raise ValueError("Sections carry one channel; network.input_channels must be 1")
        return self

    def with_root_seed(self, seed: int) -> "RunConfig":
        """Split one root seed into the dataset and training seeds."""
        root = RngState(seed)
        return self.model_copy(update={
            "dataset": self.dataset.model_copy(update={"seed": root.child_seed("dataset")}),
            "train": self.train.model_copy(update={"seed": root.child_seed("train")}),
        })

    def resolved_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def load_run_config(path: str | Path | None) -> RunConfig:
    """Parse a JSON (or .yaml/.yml) run config; None gives all defaults."""
    if path is None:
        return RunConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix.lower() in {".yaml", ".yml"}:
            data = yaml.safe_load(text) or {}
        else:
            data = json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"Cannot parse config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"Config {path} must hold a mapping at the top level")
    return RunConfig.model_validate(data)


def _walk_fields(model: type[BaseModel], prefix: str):
    for name, info in model.model_fields.items():
        key = f"{prefix}{name}"
        annotation = info.annotation
        if isinstance(annotation, type) and issubclass(annotation, BaseModel):
            yield from _walk_fields(annotation, f"{key}.")
            continue
        default = info.get_default(call_default_factory=True)
        yield key, json.dumps(default if not isinstance(default, tuple) else list(default)), info.description or ""


def config_keys() -> list[tuple[str, str, str]]:
    """(dotted key, JSON default, description) for every config field."""
    return list(_walk_fields(RunConfig, ""))


def config_help_epilog() -> str:
    lines = ["config keys (dotted path = default):"]
    for key, default, description in config_keys():
        lines.append(f"  {key} = {default}" + (f"  # {description}" if description else ""))
    return "\n".join(lines)
