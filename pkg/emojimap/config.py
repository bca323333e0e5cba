"""流水线配置：dataclass 默认值 < --config JSON < 命令行参数，以及运行清单。"""
import dataclasses
import hashlib
import json
import logging
import os
import platform
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from emojimap.analysis.sentiment_profile import AnalysisConfig
from emojimap.embedding.sgns import TrainConfig
from emojimap.errors import ConfigError
from emojimap.evaluation.harness import EvalConfig

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

PACKAGE_VERSION = "0.1.0"

# (阶段, 字段, 顶层设置)
INHERITED = (
    ("train", "seed", "seed"),
    ("analysis", "seed", "seed"),
    ("eval", "seed", "seed"),
    ("train", "deterministic", "deterministic"),
    ("train", "workers", "workers"),
)


def _default(cls, name: str) -> Any:
    return {f.name: f.default for f in dataclasses.fields(cls)}[name]


@dataclass
class PathsConfig:
    inventory: Optional[str] = None
    stopwords: Optional[str] = None
    lexicon: Optional[str] = None
    negators: Optional[str] = None
    sources: Optional[str] = None
    scorer_command: Optional[str] = None


@dataclass
class PipelineConfig:
    paths: PathsConfig = field(default_factory=PathsConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    seed: int = 1
    deterministic: bool = True
    workers: int = 1
    out: str = "out"
    mapping_partition: str = "train"
    eval_partition: str = "eval"

    def __post_init__(self):
        if self.mapping_partition == self.eval_partition:
            raise ConfigError(f"映射训练分区与评测分区不能相同: {self.mapping_partition!r}")
        if self.workers < 1:
            raise ConfigError("workers 必须 >= 1")
        for section, name, top in INHERITED:
            self._inherit(section, name, top)

    def _inherit(self, section: str, name: str, top: str) -> None:
        """阶段值仍是缺省值时继承顶层值；两边都显式设置且不同则报错。"""
        stage = getattr(self, section)
        value = getattr(stage, name)
        wanted = getattr(self, top)
        if value == _default(type(stage), name):
            setattr(stage, name, wanted)
        elif wanted != _default(PipelineConfig, top) and wanted != value:
            raise ConfigError(f"{top}={wanted!r} 与 {section}.{name}={value!r} 冲突")

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    def sha256(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


_SECTIONS = {"paths": PathsConfig, "train": TrainConfig, "analysis": AnalysisConfig, "eval": EvalConfig}


def _checked(cls, data: Dict[str, Any], where: str) -> Dict[str, Any]:
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ConfigError(f"{where}: 未知配置项 {sorted(unknown)}")
    return data


def merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = value
    return out


def config_from_dict(data: Dict[str, Any]) -> PipelineConfig:
    data = _checked(PipelineConfig, data, "config")
    kwargs: Dict[str, Any] = {}
    for key, value in data.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"config.{key} 必须是对象")
            kwargs[key] = _SECTIONS[key](**_checked(_SECTIONS[key], value, f"config.{key}"))
        else:
            kwargs[key] = value
    return PipelineConfig(**kwargs)


def load_config_file(path: PathLike) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: 不是合法 JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: 配置必须是 JSON 对象")
    return data


def resolve_config(path: Optional[PathLike] = None, overrides: Optional[Dict[str, Any]] = None) -> PipelineConfig:
    layered: Dict[str, Any] = {}
    if path is not None:
        layered = merge(layered, load_config_file(path))
    if overrides:
        layered = merge(layered, overrides)
    return config_from_dict(layered)


# ---------- 运行清单 ----------

def env_info() -> str:
    cpu = platform.processor() or "unknown CPU"
    cores = os.cpu_count() or 1
    mem = "unknown"
    try:
        import psutil
        mem = f"{round(psutil.virtual_memory().total / (1024**3), 1)} GB"
    except Exception:
        pass
    return f"CPU: {cpu}, cores: {cores}, RAM: {mem}, Python: {platform.python_version()}, OS: {platform.platform()}"


def package_versions() -> Dict[str, str]:
    import gensim
    import numpy
    import scipy
    import sklearn

    return {
        "emojimap": PACKAGE_VERSION,
        "python": platform.python_version(),
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
        "scikit-learn": sklearn.__version__,
        "gensim": gensim.__version__,
    }


def manifest_path(out_dir: PathLike, command: str) -> Path:
    return Path(out_dir) / f"{command}.manifest.json"


def write_manifest(out_dir: PathLike, command: str, config: PipelineConfig, outputs: Sequence[PathLike], inputs: Optional[Dict[str, Any]] = None) -> Path:
    """不写时间戳：确定性模式下两次运行的清单逐字节相同。"""
    out_dir = Path(out_dir)
    rel: List[str] = []
    for p in outputs:
        p = Path(p)
        try:
            rel.append(p.relative_to(out_dir).as_posix())
        except ValueError:
            rel.append(p.as_posix())
    payload = {
        "command": command,
        "inputs": inputs or {},
        "config": config.to_dict(),
        "config_sha256": config.sha256(),
        "seed": config.seed,
        "versions": package_versions(),
        "environment": env_info(),
        "outputs": sorted(rel),
    }
    path = manifest_path(out_dir, command)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")
    return path
