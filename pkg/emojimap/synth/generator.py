"""带有预设 emoji 对应关系与情感结构的合成语料。

每个 roster emoji 在基准平台（platforms[0]）上有一个上下文词池；平台 q 上的
emoji X 使用基准 emoji correspondence[q][X] 的词池与极性。于是 q 上的 X
与 p 上的 Y 上下文相同当且仅当二者的基准 emoji 相同，这就是真值映射。
"""
import json
import logging
from dataclasses import dataclass, field
from itertools import permutations
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from emojimap.corpus.platform_corpus import DEFAULT_SOURCES, IngestResult, Platform, PlatformCorpus, Tweet, write_corpus, write_corpus_dir
from emojimap.errors import SpecInvalid
from emojimap.mapping.emoji_mapping import MappingEntry, MappingTable, save_mapping
from emojimap.sentiment.lexicon import Lexicon, save_lexicon
from emojimap.text.tokenizer import EmojiInventory, emoji_from_label, save_inventory
from emojimap.vecmath import derive_rng

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MIN_LEN, MAX_LEN = 6, 14
POLARITY_RANGE = (0.5, 0.9)
SENTIMENT_SOURCES = ("pool", "cue")

DEFAULT_ROSTER = (
    "U+1F600", "U+1F602", "U+1F60D", "U+1F622",
    "U+1F620", "U+1F631", "U+1F44D", "U+1F44E",
)


def first_source(platform: Platform) -> str:
    for source, p in DEFAULT_SOURCES.items():
        if p is platform:
            return source
    raise SpecInvalid(f"平台 {platform.value} 没有来源字符串")


@dataclass
class SynthSpec:
    vocab_size: int = 300
    tweets: Dict[str, int] = field(default_factory=lambda: {"Android": 3000, "iOS": 3000})
    roster: List[str] = field(default_factory=lambda: list(DEFAULT_ROSTER))
    pool_size: int = 20
    sentiment_words: int = 4
    pool_fraction: float = 0.6
    polarity: Dict[str, int] = field(default_factory=dict)  # 基准 emoji -> +1/-1，缺省正负交替
    correspondence: Dict[str, Dict[str, str]] = field(default_factory=dict)
    partitions: List[str] = field(default_factory=lambda: ["train", "eval"])
    seed: int = 7
    # pool: 情感词取自 emoji 的词池；cue: 每条推文带一个稀有的情感提示词，词本身几乎不携带标签
    sentiment_source: str = "pool"
    cue_words: int = 5000

    def __post_init__(self):
        if len(self.tweets) < 1:
            raise SpecInvalid("至少需要一个平台")
        for name, n in self.tweets.items():
            try:
                platform = Platform(name)
            except ValueError:
                raise SpecInvalid(f"未知平台 {name}") from None
            if platform is Platform.UNKNOWN:
                raise SpecInvalid("不能为 Unknown 平台生成语料")
            if n < 1:
                raise SpecInvalid(f"{name} 的推文数必须 >= 1")
        if len(self.roster) < 1 or len(set(self.roster)) != len(self.roster):
            raise SpecInvalid("roster 不能为空且不能重复")
        for label in self.roster:
            try:
                ok = label.startswith("U+") and bool(emoji_from_label(label))
            except ValueError:
                ok = False
            if not ok:
                raise SpecInvalid(f"非法 emoji 标签 {label}")
        if not 1 <= self.sentiment_words <= self.pool_size:
            raise SpecInvalid("sentiment_words 必须在 [1, pool_size] 内")
        if self.vocab_size < len(self.roster) * self.pool_size + 1:
            raise SpecInvalid(f"vocab_size={self.vocab_size} 放不下 {len(self.roster)} 个大小为 {self.pool_size} 的词池")
        if not 0.0 <= self.pool_fraction <= 1.0:
            raise SpecInvalid("pool_fraction 必须在 [0, 1] 内")
        roster = set(self.roster)
        for name, corr in self.correspondence.items():
            if name not in self.tweets:
                raise SpecInvalid(f"对应关系中的平台 {name} 不在 tweets 中")
            if set(corr) != roster or set(corr.values()) != roster:
                raise SpecInvalid(f"{name} 的对应关系不是 roster 上的双射")
        for label, sign in self.polarity.items():
            if label not in roster or sign not in (1, -1):
                raise SpecInvalid(f"polarity[{label}] 必须是 +1 或 -1")
        if not self.partitions or len(set(self.partitions)) != len(self.partitions):
            raise SpecInvalid("partitions 不能为空且不能重复")
        if self.sentiment_source not in SENTIMENT_SOURCES:
            raise SpecInvalid(f"sentiment_source 只能是 {'/'.join(SENTIMENT_SOURCES)}")
        if self.cue_words < 1:
            raise SpecInvalid("cue_words 必须 >= 1")

    @property
    def platforms(self) -> List[Platform]:
        return [Platform(name) for name in self.tweets]

    def base_of(self, platform: Platform, label: str) -> str:
        return self.correspondence.get(platform.value, {}).get(label, label)

    def sign_of(self, base: str) -> int:
        if base in self.polarity:
            return self.polarity[base]
        return 1 if self.roster.index(base) % 2 == 0 else -1

    @property
    def divergent(self) -> List[str]:
        return sorted({x for corr in self.correspondence.values() for x, b in corr.items() if x != b})

    @classmethod
    def from_dict(cls, data: dict) -> "SynthSpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise SpecInvalid(f"未知字段: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise SpecInvalid(str(exc)) from None

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


def load_synth_spec(path: PathLike) -> SynthSpec:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecInvalid(f"{path}: {exc}") from None
    if not isinstance(data, dict):
        raise SpecInvalid(f"{path}: 必须是 JSON 对象")
    return SynthSpec.from_dict(data)


@dataclass
class SynthResult:
    spec: SynthSpec
    corpora: Dict[str, Dict[Platform, PlatformCorpus]]  # partition -> platform -> corpus
    truth: Dict[Tuple[str, str], MappingTable]
    lexicon: Lexicon
    inventory: EmojiInventory
    pools: Dict[str, List[str]]

    def partition(self, name: str) -> Dict[Platform, PlatformCorpus]:
        return self.corpora[name]


def _build_pools(spec: SynthSpec) -> Tuple[List[str], Dict[str, List[str]], Dict[str, float]]:
    rng = derive_rng(spec.seed, "synth-pools")
    words = [f"w{i:05d}" for i in range(spec.vocab_size)]
    order = rng.permutation(spec.vocab_size)
    pools: Dict[str, List[str]] = {}
    polarities: Dict[str, float] = {}
    for i, base in enumerate(spec.roster):
        idx = order[i * spec.pool_size:(i + 1) * spec.pool_size]
        pool = [words[j] for j in idx]
        pools[base] = pool
        sign = spec.sign_of(base)
        magnitudes = rng.uniform(*POLARITY_RANGE, size=spec.sentiment_words)
        for word, mag in zip(pool[:spec.sentiment_words], magnitudes):
            polarities[word] = round(sign * float(mag), 4)
    background = [words[j] for j in order[len(spec.roster) * spec.pool_size:]]
    return background, pools, polarities


def _build_cues(spec: SynthSpec) -> Tuple[Dict[int, List[str]], Dict[str, float]]:
    """每个极性 cue_words 个提示词。语料中各自出现极少，通常低于 min_count。"""
    if spec.sentiment_source != "cue":
        return {}, {}
    rng = derive_rng(spec.seed, "synth-cues")
    cues: Dict[int, List[str]] = {}
    polarities: Dict[str, float] = {}
    for sign, prefix in ((1, "pos"), (-1, "neg")):
        cues[sign] = [f"{prefix}{i:05d}" for i in range(spec.cue_words)]
        magnitudes = rng.uniform(*POLARITY_RANGE, size=spec.cue_words)
        for word, mag in zip(cues[sign], magnitudes):
            polarities[word] = round(sign * float(mag), 4)
    return cues, polarities


def _tweet_words(
    rng: np.random.Generator,
    pool: List[str],
    background: List[str],
    spec: SynthSpec,
    cues: Optional[List[str]] = None,
) -> List[str]:
    n = int(rng.integers(MIN_LEN, MAX_LEN + 1))
    from_pool = rng.random(n) < spec.pool_fraction
    out = [
        pool[int(rng.integers(len(pool)))] if use_pool else background[int(rng.integers(len(background)))]
        for use_pool in from_pool
    ]
    # 至少一个情感词，保证阈值 0.2 下标签确定
    if cues:
        out[int(rng.integers(n))] = cues[int(rng.integers(len(cues)))]
    else:
        out[int(rng.integers(n))] = pool[int(rng.integers(spec.sentiment_words))]
    return out


def _ground_truth(spec: SynthSpec) -> Dict[Tuple[str, str], MappingTable]:
    truth = {}
    for p, q in permutations(spec.platforms, 2):
        by_base_q = {spec.base_of(q, y): y for y in spec.roster}
        entries = {x: MappingEntry(x, by_base_q[spec.base_of(p, x)], 1.0) for x in spec.roster}
        truth[(p.value, q.value)] = MappingTable(p, q, entries)
    return truth


def generate(spec: SynthSpec) -> SynthResult:
    background, pools, polarities = _build_pools(spec)
    cues, cue_polarities = _build_cues(spec)
    corpora: Dict[str, Dict[Platform, PlatformCorpus]] = {}
    for partition in spec.partitions:
        corpora[partition] = {}
        for platform in spec.platforms:
            rng = derive_rng(spec.seed, "synth", partition, platform.value)
            source = first_source(platform)
            tweets = []
            for i in range(spec.tweets[platform.value]):
                label = spec.roster[int(rng.integers(len(spec.roster)))]
                base = spec.base_of(platform, label)
                words = _tweet_words(rng, pools[base], background, spec, cues.get(spec.sign_of(base)))
                words.insert(int(rng.integers(len(words) + 1)), emoji_from_label(label))
                tweets.append(Tweet(f"{platform.value}-{partition}-{i}", " ".join(words), source, platform))
            corpora[partition][platform] = PlatformCorpus(platform, tweets, partition)
        logger.info("合成分区 %s: %s", partition, {p.value: len(c) for p, c in corpora[partition].items()})
    return SynthResult(
        spec=spec,
        corpora=corpora,
        truth=_ground_truth(spec),
        lexicon=Lexicon({**polarities, **cue_polarities}),
        inventory=EmojiInventory.from_labels(spec.roster),
        pools=pools,
    )


def truth_path(directory: PathLike, source: str, target: str) -> Path:
    return Path(directory) / f"truth_{source}__{target}.tsv"


def write_synth(result: SynthResult, directory: PathLike) -> List[Path]:
    """每个分区一个语料目录，外加混合的原始 JSONL、词典、emoji 清单与真值映射。"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    for partition, corpora in result.corpora.items():
        counts = {p.value: len(c) for p, c in corpora.items()}
        written += write_corpus_dir(IngestResult(corpora, counts, 0), directory / partition, partition)
        raw = directory / f"{partition}.jsonl"
        merged = PlatformCorpus(Platform.UNKNOWN, [t for c in corpora.values() for t in c.tweets], partition)
        write_corpus(merged, raw)
        written.append(raw)
    lexicon_path = directory / "lexicon.tsv"
    save_lexicon(result.lexicon, lexicon_path)
    inventory_path = directory / "inventory.txt"
    save_inventory(result.inventory, inventory_path)
    written += [lexicon_path, inventory_path]
    for (p, q), table in sorted(result.truth.items()):
        path = truth_path(directory, p, q)
        save_mapping(table, path)
        written.append(path)
    spec_path = directory / "synth_spec.json"
    with open(spec_path, "w", encoding="utf-8") as fh:
        json.dump(result.spec.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    written.append(spec_path)
    return written
