"""平台偏置校正后的 emoji 情感画像，以及自助法 (bootstrap) 区间。

对 n <= 10 的小样本可以精确枚举全部重采样：按多重集枚举并用多项式
概率加权，等价于 n^n 个有序重采样的均匀分布。
"""
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations_with_replacement, product
from typing import FrozenSet, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import multinomial

from emojimap.corpus.platform_corpus import PlatformCorpus
from emojimap.errors import ConfigError, EmojiAbsent, EmptyCorpus
from emojimap.mapping.emoji_mapping import PlatformName, platform_name
from emojimap.sentiment.lexicon import TweetScorer
from emojimap.text.tokenizer import label_sort_key
from emojimap.vecmath import derive_rng

logger = logging.getLogger(__name__)

CI_LEVEL = 95.0
EXACT_MAX_N = 10
BRUTE_FORCE_MAX_N = 7


@dataclass
class AnalysisConfig:
    k: int = 1000
    bootstrap: int = 100
    seed: int = 1
    min_tweets: int = 1
    method: str = "ci"
    alpha: float = 0.05
    exact_max_n: int = 0  # n 不超过该值时用精确枚举；0 为关闭

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("k 必须 >= 1")
        if self.bootstrap < 1:
            raise ConfigError("bootstrap 次数必须 >= 1")
        if self.method not in ("ci", "welch"):
            raise ConfigError(f"未知的显著性方法: {self.method}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError("alpha 必须在 (0, 1) 内")
        if not 0 <= self.exact_max_n <= EXACT_MAX_N:
            raise ConfigError(f"exact_max_n 必须在 [0, {EXACT_MAX_N}] 内")


@dataclass
class ScoredCorpus:
    """一次打分后的语料：每条推文的去 emoji 情感分与所含 emoji 集合。"""

    platform: PlatformName
    scores: np.ndarray
    emojis: List[FrozenSet[str]]
    partition: str = "default"

    def __len__(self) -> int:
        return len(self.scores)

    @property
    def name(self) -> str:
        return platform_name(self.platform)

    def emoji_counts(self) -> Counter:
        counter: Counter = Counter()
        for found in self.emojis:
            counter.update(found)
        return counter

    def emoji_scores(self, emoji: str) -> np.ndarray:
        mask = np.fromiter((emoji in found for found in self.emojis), dtype=bool, count=len(self.emojis))
        return self.scores[mask]


def score_corpus(corpus: PlatformCorpus, scorer: TweetScorer) -> ScoredCorpus:
    scores = np.asarray(scorer.score_tweets(corpus.tweets), dtype=np.float64)
    emojis = [frozenset(scorer.tokenizer.emojis_in(t.text)) for t in corpus.tweets]
    return ScoredCorpus(corpus.platform, scores, emojis, corpus.partition)


def _as_scored(corpus: Union[ScoredCorpus, PlatformCorpus], scorer: Optional[TweetScorer]) -> ScoredCorpus:
    if isinstance(corpus, ScoredCorpus):
        return corpus
    if scorer is None:
        raise ConfigError("未打分的语料需要提供 scorer")
    return score_corpus(corpus, scorer)


def platform_bias(corpus: Union[ScoredCorpus, PlatformCorpus], scorer: Optional[TweetScorer] = None) -> float:
    scored = _as_scored(corpus, scorer)
    if len(scored) == 0:
        raise EmptyCorpus(f"平台 {scored.name} 语料为空")
    return float(np.mean(scored.scores))


# ---------- bootstrap ----------

@dataclass(frozen=True)
class BootstrapResult:
    mean_of_means: float
    variance: float
    ci_low: float
    ci_high: float


def _weighted_percentiles(means: np.ndarray, weights: np.ndarray, qs: Sequence[float]) -> List[float]:
    # 与 np.percentile(method="inverted_cdf") 相同：取 CDF 首次 >= q 的值
    order = np.argsort(means, kind="stable")
    sorted_means = means[order]
    cum = np.cumsum(weights[order])
    out = []
    for q in qs:
        i = int(np.searchsorted(cum, q / 100.0 - 1e-12, side="left"))
        out.append(float(sorted_means[min(i, len(sorted_means) - 1)]))
    return out


def _summarize(means: np.ndarray, weights: np.ndarray) -> BootstrapResult:
    mu = float(np.sum(weights * means))
    var = float(np.sum(weights * (means - mu) ** 2))
    tail = (100.0 - CI_LEVEL) / 2
    lo, hi = _weighted_percentiles(means, weights, (tail, 100.0 - tail))
    return BootstrapResult(mu, var, lo, hi)


def bootstrap_means(values: Sequence[float], B: int, rng: np.random.Generator) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    idx = rng.integers(0, len(values), size=(B, len(values)))
    return values[idx].mean(axis=1)


def sampled_bootstrap(values: Sequence[float], B: int, rng: np.random.Generator) -> BootstrapResult:
    means = bootstrap_means(values, B, rng)
    tail = (100.0 - CI_LEVEL) / 2
    lo, hi = np.percentile(means, [tail, 100.0 - tail], method="inverted_cdf")
    return BootstrapResult(float(np.mean(means)), float(np.var(means)), float(lo), float(hi))


def exact_bootstrap_distribution(values: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """全部重采样均值及其概率（多重集 + 多项式权重）。"""
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    if not 1 <= n <= EXACT_MAX_N:
        raise ConfigError(f"精确枚举只支持 1 <= n <= {EXACT_MAX_N}")
    combos = np.array(list(combinations_with_replacement(range(n), n)), dtype=np.int64)
    counts = np.zeros((len(combos), n), dtype=np.int64)
    np.add.at(counts, (np.arange(len(combos))[:, None], combos), 1)
    weights = multinomial.pmf(counts, n, np.full(n, 1.0 / n))
    return counts @ values / n, np.asarray(weights, dtype=np.float64)


def brute_force_bootstrap_distribution(values: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """逐一枚举 n^n 个有序重采样，只用于交叉核对。"""
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    if not 1 <= n <= BRUTE_FORCE_MAX_N:
        raise ConfigError(f"暴力枚举只支持 1 <= n <= {BRUTE_FORCE_MAX_N}")
    idx = np.array(list(product(range(n), repeat=n)), dtype=np.int64)
    means = values[idx].mean(axis=1)
    return means, np.full(len(means), 1.0 / len(means))


def exact_bootstrap(values: Sequence[float]) -> BootstrapResult:
    return _summarize(*exact_bootstrap_distribution(values))


def brute_force_bootstrap(values: Sequence[float]) -> BootstrapResult:
    return _summarize(*brute_force_bootstrap_distribution(values))


# ---------- 画像 ----------

@dataclass(frozen=True)
class SentimentProfile:
    platform: str
    emoji: str
    mean_adjusted: float
    variance: float
    ci_low: float
    ci_high: float
    n: int

    def to_row(self) -> List[str]:
        return [
            self.platform,
            self.emoji,
            repr(self.mean_adjusted),
            repr(self.variance),
            repr(self.ci_low),
            repr(self.ci_high),
            str(self.n),
        ]


PROFILE_COLUMNS = ["platform", "emoji", "mean", "var", "ci_low", "ci_high", "n"]


def emoji_sentiment_profile(
    corpus: Union[ScoredCorpus, PlatformCorpus],
    emoji: str,
    scorer: Optional[TweetScorer] = None,
    bias: float = 0.0,
    B: int = 100,
    rng: Optional[np.random.Generator] = None,
    exact_max_n: int = 0,
) -> SentimentProfile:
    scored = _as_scored(corpus, scorer)
    values = scored.emoji_scores(emoji)
    if len(values) == 0:
        raise EmojiAbsent(f"{emoji} 没有出现在平台 {scored.name} 的语料中")
    adjusted = values - bias
    mean_adjusted = float(np.mean(adjusted))
    if len(values) <= exact_max_n:
        boot = exact_bootstrap(adjusted)
    else:
        boot = sampled_bootstrap(adjusted, B, rng if rng is not None else np.random.default_rng())
    # 百分位区间不一定覆盖样本均值，向外补齐
    return SentimentProfile(
        platform=scored.name,
        emoji=emoji,
        mean_adjusted=mean_adjusted,
        variance=boot.variance,
        ci_low=min(boot.ci_low, mean_adjusted),
        ci_high=max(boot.ci_high, mean_adjusted),
        n=int(len(values)),
    )


def profile_all(
    scored: Sequence[ScoredCorpus],
    config: Optional[AnalysisConfig] = None,
    workers: int = 1,
) -> List[SentimentProfile]:
    """每个 (平台, emoji) 独立画像；种子由 (主种子, 平台, emoji) 派生，并行与串行结果一致。"""
    config = config or AnalysisConfig()
    jobs = []
    for sc in scored:
        bias = platform_bias(sc)
        logger.info("平台 %s: %d 条推文, 情感偏置 %+.3f", sc.name, len(sc), bias)
        for emoji, count in sorted(sc.emoji_counts().items(), key=lambda kv: label_sort_key(kv[0])):
            if count >= config.min_tweets:
                jobs.append((sc, emoji, bias))

    def run(job) -> SentimentProfile:
        sc, emoji, bias = job
        rng = derive_rng(config.seed, "bootstrap", sc.name, emoji)
        return emoji_sentiment_profile(sc, emoji, bias=bias, B=config.bootstrap, rng=rng, exact_max_n=config.exact_max_n)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, jobs))
    return [run(job) for job in jobs]
