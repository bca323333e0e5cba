import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from emojimap.errors import ConfigError, EmojiMapError, MalformedJson, MissingField

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class Platform(str, Enum):
    ANDROID = "Android"
    IOS = "iOS"
    TWITTER = "Twitter"
    WINDOWS = "Windows"
    UNKNOWN = "Unknown"

    @classmethod
    def parse(cls, name: str) -> "Platform":
        for p in cls:
            if p.value == name:
                return p
        raise ConfigError(f"未知平台: {name}")


NAMED_PLATFORMS: Tuple[Platform, ...] = (
    Platform.ANDROID,
    Platform.IOS,
    Platform.TWITTER,
    Platform.WINDOWS,
)

# 七个客户端名称，与数据表中的分组完全一致
DEFAULT_SOURCES: Dict[str, Platform] = {
    "Twitter for Android": Platform.ANDROID,
    "Twitter for iPad": Platform.IOS,
    "Twitter for iPhone": Platform.IOS,
    "iOS": Platform.IOS,
    "Twitter Web Client": Platform.TWITTER,
    "Twitter for Windows Phone": Platform.WINDOWS,
    "Twitter for Windows": Platform.WINDOWS,
}

REQUIRED_FIELDS = ("id", "text", "source")


@dataclass(frozen=True)
class Tweet:
    id: str
    text: str
    source: str
    platform: Platform

    def to_record(self) -> dict:
        return {"id": self.id, "text": self.text, "source": self.source}


@dataclass
class PlatformCorpus:
    platform: Platform
    tweets: List[Tweet] = field(default_factory=list)
    partition: str = "default"

    def __len__(self) -> int:
        return len(self.tweets)

    def __iter__(self) -> Iterator[Tweet]:
        return iter(self.tweets)


@dataclass
class IngestResult:
    corpora: Dict[Platform, PlatformCorpus]
    counts: Dict[str, int]
    dropped: int  # 未知平台与去重跳过的记录之和
    errors: List[EmojiMapError] = field(default_factory=list)
    duplicates: int = 0

    @property
    def total(self) -> int:
        return sum(self.counts.values()) + self.dropped

    def summary(self) -> dict:
        out = {p.value: self.counts.get(p.value, 0) for p in NAMED_PLATFORMS if p.value in self.counts}
        out["dropped"] = self.dropped
        if self.duplicates:
            out["duplicates"] = self.duplicates
        return out


def load_source_table(path: Optional[PathLike] = None) -> Dict[str, Platform]:
    """默认表加上用户扩展文件 {"source string": "Platform"}。"""
    table = dict(DEFAULT_SOURCES)
    if path is None:
        return table
    with open(path, "r", encoding="utf-8") as fh:
        extra = json.load(fh)
    if not isinstance(extra, dict):
        raise ConfigError(f"{path}: 来源表必须是 JSON 对象")
    for source, name in extra.items():
        table[str(source)] = Platform.parse(str(name))
    return table


def detect_platform(source: str, table: Optional[Mapping[str, Platform]] = None) -> Platform:
    # 精确、区分大小写的匹配
    table = DEFAULT_SOURCES if table is None else table
    return table.get(source, Platform.UNKNOWN)


def parse_tweet_record(
    line: str,
    table: Optional[Mapping[str, Platform]] = None,
    line_no: Optional[int] = None,
) -> Tweet:
    try:
        obj = json.loads(line)
    except (json.JSONDecodeError, TypeError) as exc:
        raise MalformedJson(line_no or 0, str(exc)) from None
    if not isinstance(obj, dict):
        raise MalformedJson(line_no or 0, "记录不是对象")
    for name in REQUIRED_FIELDS:
        if name not in obj or obj[name] is None:
            raise MissingField(name, line_no)
    text = str(obj["text"])
    if not text.strip():
        raise MissingField("text", line_no)
    source = str(obj["source"])
    return Tweet(id=str(obj["id"]), text=text, source=source, platform=detect_platform(source, table))


def iter_records(
    lines: Iterable[str],
    table: Optional[Mapping[str, Platform]] = None,
    errors: Optional[List[EmojiMapError]] = None,
    label: str = "<stream>",
) -> Iterator[Tweet]:
    """逐行解析；坏记录记入 errors 并跳过，不中断整个流。"""
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            yield parse_tweet_record(line, table, line_no)
        except (MalformedJson, MissingField) as exc:
            logger.warning("%s: %s", label, exc)
            if errors is not None:
                errors.append(exc)


def partition_corpus(
    records: Iterable[Tweet],
    partition: str = "default",
    dedupe_by_id: bool = False,
) -> IngestResult:
    corpora: Dict[Platform, PlatformCorpus] = {}
    counts: Dict[str, int] = {}
    dropped = duplicates = 0
    seen = set()
    for tweet in records:
        if dedupe_by_id:
            if tweet.id in seen:
                duplicates += 1
                continue
            seen.add(tweet.id)
        if tweet.platform is Platform.UNKNOWN:
            dropped += 1
            continue
        corpus = corpora.get(tweet.platform)
        if corpus is None:
            corpus = corpora[tweet.platform] = PlatformCorpus(tweet.platform, [], partition)
        corpus.tweets.append(tweet)
        counts[tweet.platform.value] = counts.get(tweet.platform.value, 0) + 1
    for name, n in sorted(counts.items()):
        logger.info("平台 %s: %d 条", name, n)
    logger.info("未知平台丢弃: %d 条, 重复 id 丢弃: %d 条", dropped, duplicates)
    return IngestResult(corpora=corpora, counts=counts, dropped=dropped + duplicates, duplicates=duplicates)


def ingest_files(
    paths: Sequence[PathLike],
    table: Optional[Mapping[str, Platform]] = None,
    partition: str = "default",
    dedupe_by_id: bool = False,
) -> IngestResult:
    """按分片顺序、再按记录顺序合并，保证结果确定。"""
    errors: List[EmojiMapError] = []

    def stream() -> Iterator[Tweet]:
        for path in paths:
            with open(path, "r", encoding="utf-8") as fh:
                yield from iter_records(fh, table, errors, label=str(path))

    result = partition_corpus(stream(), partition=partition, dedupe_by_id=dedupe_by_id)
    result.errors = errors
    if errors:
        logger.warning("共 %d 条坏记录被跳过", len(errors))
    return result


# ---------- 语料文件读写 ----------

PARTITION_FILE = "partition.json"


def corpus_path(directory: PathLike, platform: Platform) -> Path:
    return Path(directory) / f"{platform.value}.jsonl"


def write_corpus(corpus: PlatformCorpus, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for tweet in corpus.tweets:
            fh.write(json.dumps(tweet.to_record(), ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def read_corpus(
    path: PathLike,
    platform: Optional[Platform] = None,
    partition: str = "default",
    table: Optional[Mapping[str, Platform]] = None,
) -> PlatformCorpus:
    """读回单平台语料文件。文件名即平台名时无需再判定来源。"""
    path = Path(path)
    if platform is None:
        platform = Platform.parse(path.stem)
    tweets: List[Tweet] = []
    with open(path, "r", encoding="utf-8") as fh:
        for tweet in iter_records(fh, table, None, label=str(path)):
            if tweet.platform is not platform:
                tweet = Tweet(tweet.id, tweet.text, tweet.source, platform)
            tweets.append(tweet)
    return PlatformCorpus(platform, tweets, partition)


def write_corpus_dir(result: IngestResult, directory: PathLike, partition: str) -> List[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for platform in NAMED_PLATFORMS:
        corpus = result.corpora.get(platform)
        if corpus is None:
            continue
        path = corpus_path(directory, platform)
        write_corpus(corpus, path)
        written.append(path)
    counts_path = directory / "counts.json"
    with open(counts_path, "w", encoding="utf-8") as fh:
        json.dump(result.summary(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(counts_path)
    written.append(write_partition_tag(directory, partition))
    return written


def write_partition_tag(directory: PathLike, partition: str) -> Path:
    path = Path(directory) / PARTITION_FILE
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"partition": partition}, fh, sort_keys=True)
        fh.write("\n")
    return path


def read_partition_tag(directory: PathLike, default: str = "default") -> str:
    path = Path(directory) / PARTITION_FILE
    if not path.exists():
        return default
    with open(path, "r", encoding="utf-8") as fh:
        return str(json.load(fh).get("partition", default))


def read_corpus_dir(directory: PathLike) -> Dict[Platform, PlatformCorpus]:
    directory = Path(directory)
    partition = read_partition_tag(directory)
    corpora: Dict[Platform, PlatformCorpus] = {}
    for platform in NAMED_PLATFORMS:
        path = corpus_path(directory, platform)
        if path.exists():
            corpora[platform] = read_corpus(path, platform, partition)
    if not corpora:
        raise ConfigError(f"{directory}: 未找到任何平台语料")
    return corpora
