"""情感分类评测：打标签、三种推文表示、5 折交叉验证、阈值扫描与显著性。

Mapping 模式下，目标平台推文里的 emoji 先经由翻译表换成源平台上最相近的
emoji（翻译表 = build_mapping(目标集, 源集)），随后所有推文都使用源平台的
emoji 向量。
"""
import csv
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from itertools import permutations
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from emojimap.corpus.platform_corpus import PlatformCorpus
from emojimap.embedding.sgns import EmbeddingMatrix, EmojiEmbeddingSet
from emojimap.errors import (
    ConfigError,
    DegenerateSample,
    EmojiMapError,
    LeakageError,
    NoKnownWords,
    TooFewExamples,
)
from emojimap.evaluation.classifier import FoldMetrics, cross_validate
from emojimap.evaluation.significance import TTestResult, t_test
from emojimap.mapping.emoji_mapping import MappingTable, PlatformName, apply_mapping, build_mapping, platform_name
from emojimap.sentiment.lexicon import TweetScorer
from emojimap.text.tokenizer import TokenSeq
from emojimap.vecmath import derive_seed

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

DEFAULT_THRESHOLDS: Tuple[float, ...] = tuple(round(0.1 * i, 1) for i in range(1, 10))


class ReprMode(str, Enum):
    MAPPING = "Mapping"
    NO_MAPPING = "NoMapping"
    NO_EMOJIS = "NoEmojis"


@dataclass
class EvalConfig:
    folds: int = 5
    threshold: float = 0.2
    thresholds: Tuple[float, ...] = DEFAULT_THRESHOLDS
    C: float = 1.0
    epochs: int = 20
    seed: int = 1
    paired: bool = False
    alpha: float = 0.05
    no_mapping_emoji_space: str = "own"
    significance_level: str = "fold"

    def __post_init__(self):
        self.thresholds = tuple(float(t) for t in self.thresholds)
        for t in (self.threshold,) + self.thresholds:
            if not 0.0 < t < 1.0:
                raise ConfigError(f"阈值 {t} 不在 (0, 1) 内")
        if self.folds < 2:
            raise ConfigError("folds 必须 >= 2")
        if self.no_mapping_emoji_space not in ("own", "target"):
            raise ConfigError("no_mapping_emoji_space 只能是 own 或 target")
        if self.significance_level not in ("fold", "threshold"):
            raise ConfigError("significance_level 只能是 fold 或 threshold")


@dataclass(frozen=True)
class LabeledTweet:
    tokens: TokenSeq
    platform: str
    label: int
    raw_score: float


@dataclass
class ScoredPool:
    """一个平台的全部推文，已分词并打分；各阈值共用。"""

    platform: str
    tokens: List[TokenSeq]
    scores: np.ndarray
    partition: str = "default"

    def __len__(self) -> int:
        return len(self.tokens)


def score_pool(corpus: PlatformCorpus, scorer: TweetScorer) -> ScoredPool:
    tokens = [scorer.tokenizer.tokenize(t.text) for t in corpus.tweets]
    scores = np.asarray(scorer.score_tweets(corpus.tweets), dtype=np.float64)
    return ScoredPool(platform_name(corpus.platform), tokens, scores, corpus.partition)


def label_pool(pool: ScoredPool, threshold: float) -> List[LabeledTweet]:
    if not 0.0 < threshold < 1.0:
        raise ConfigError(f"阈值 {threshold} 不在 (0, 1) 内")
    out = []
    for tokens, s in zip(pool.tokens, pool.scores):
        # 开区间 (-t, t) 内删除，边界保留
        if abs(s) >= threshold:
            out.append(LabeledTweet(tokens, pool.platform, 1 if s > 0 else -1, float(s)))
    return out


def label_tweets(corpus: PlatformCorpus, scorer: TweetScorer, threshold: float) -> List[LabeledTweet]:
    return label_pool(score_pool(corpus, scorer), threshold)


@dataclass
class MappingResources:
    W: EmbeddingMatrix
    emoji_sets: Dict[str, EmojiEmbeddingSet]
    partition: str
    _tables: Dict[Tuple[str, str], MappingTable] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.emoji_sets = {platform_name(k): v for k, v in self.emoji_sets.items()}

    def translation(self, source: PlatformName, target: PlatformName) -> MappingTable:
        """目标平台 emoji -> 源平台 emoji。"""
        key = (platform_name(source), platform_name(target))
        if key not in self._tables:
            self._tables[key] = build_mapping(self.emoji_sets[key[1]], self.emoji_sets[key[0]])
        return self._tables[key]


def _emoji_set_for(
    platform: str,
    emoji_sets: Mapping[str, EmojiEmbeddingSet],
    table: Optional[MappingTable],
    mode: ReprMode,
    emoji_space: str,
) -> Optional[EmojiEmbeddingSet]:
    if mode is ReprMode.NO_EMOJIS:
        return None
    if mode is ReprMode.MAPPING:
        if table is None:
            raise ConfigError("Mapping 模式需要翻译表")
        return emoji_sets.get(table.target_name)
    if emoji_space == "target":
        if table is None:
            raise ConfigError("target 表示空间需要翻译表确定目标平台")
        return emoji_sets.get(table.source_name)
    return emoji_sets.get(platform)


def represent(
    tweet: LabeledTweet,
    W: EmbeddingMatrix,
    emoji_sets: Mapping[str, EmojiEmbeddingSet],
    table: Optional[MappingTable],
    mode: ReprMode,
    emoji_space: str = "own",
    stats: Optional[Counter] = None,
) -> np.ndarray:
    """词向量平均 + emoji 向量平均；没有 emoji 时后一项为零向量。"""
    rows = [W.vocab.word2index[t.surface] for t in tweet.tokens if t.is_word and t.surface in W.vocab]
    if not rows:
        raise NoKnownWords("推文中没有词表内的词")
    vec = W.vectors[rows].mean(axis=0)
    emojis = _emoji_set_for(tweet.platform, emoji_sets, table, mode, emoji_space)
    if emojis is None:
        return vec
    tokens = tweet.tokens
    if mode is ReprMode.MAPPING and tweet.platform == table.source_name:
        tokens = apply_mapping(tokens, table, stats)
    found = [emojis[t.surface] for t in tokens if t.is_emoji and t.surface in emojis]
    if found:
        vec = vec + np.mean(found, axis=0)
    return vec


@dataclass
class ComparisonReport:
    source: str
    target: str
    threshold: float
    metrics: Dict[ReprMode, List[FoldMetrics]]
    n_examples: int = 0
    skipped: int = 0
    significance: Dict[str, TTestResult] = field(default_factory=dict)
    significantly_better: Optional[bool] = None

    def accuracies(self, mode: ReprMode) -> List[float]:
        return [m.accuracy for m in self.metrics[mode]]

    def f1s(self, mode: ReprMode) -> List[float]:
        return [m.f1_positive for m in self.metrics[mode]]

    def mean_accuracy(self, mode: ReprMode) -> float:
        return float(np.mean(self.accuracies(mode)))

    def mean_f1(self, mode: ReprMode) -> float:
        return float(np.mean(self.f1s(mode)))

    @property
    def A1(self) -> float:
        return self.mean_accuracy(ReprMode.NO_MAPPING)

    @property
    def A2(self) -> float:
        return self.mean_accuracy(ReprMode.MAPPING)

    @property
    def delta(self) -> float:
        return self.A2 - self.A1

    @property
    def no_emojis_accuracy(self) -> float:
        return self.mean_accuracy(ReprMode.NO_EMOJIS)

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "target": self.target,
            "threshold": self.threshold,
            "n_examples": self.n_examples,
            "skipped": self.skipped,
            "A1": self.A1,
            "A2": self.A2,
            "delta": self.delta,
            "no_emojis": self.no_emojis_accuracy,
            "modes": {
                mode.value: [{"fold": m.fold, "accuracy": m.accuracy, "f1": m.f1_positive} for m in folds]
                for mode, folds in self.metrics.items()
            },
            "significance": {k: v.to_dict() for k, v in self.significance.items()},
            "significantly_better": self.significantly_better,
        }


def _pool(data: Union[ScoredPool, PlatformCorpus], scorer: Optional[TweetScorer]) -> ScoredPool:
    if isinstance(data, ScoredPool):
        return data
    if scorer is None:
        raise ConfigError("未打分的语料需要提供 scorer")
    return score_pool(data, scorer)


def _check_leakage(resources: MappingResources, *pools: ScoredPool) -> None:
    for pool in pools:
        if pool.partition == resources.partition:
            raise LeakageError(
                f"映射训练数据与评测数据来自同一分区 {pool.partition!r}，平台 {pool.platform}"
            )


def compare_pair(
    source: Union[ScoredPool, PlatformCorpus],
    target: Union[ScoredPool, PlatformCorpus],
    threshold: float,
    config: EvalConfig,
    resources: MappingResources,
    scorer: Optional[TweetScorer] = None,
) -> ComparisonReport:
    src = _pool(source, scorer)
    tgt = _pool(target, scorer)
    _check_leakage(resources, src, tgt)
    src_labeled = label_pool(src, threshold)
    tgt_labeled = label_pool(tgt, threshold)
    if not src_labeled or not tgt_labeled:
        raise TooFewExamples(f"阈值 {threshold} 下 {src.platform} 或 {tgt.platform} 没有留下推文")
    table = resources.translation(src.platform, tgt.platform)
    space = config.no_mapping_emoji_space

    kept: List[LabeledTweet] = []
    skipped = 0
    for tweet in src_labeled + tgt_labeled:
        if any(t.is_word and t.surface in resources.W.vocab for t in tweet.tokens):
            kept.append(tweet)
        else:
            skipped += 1
    if skipped:
        logger.info("阈值 %.2f: %d 条推文没有词表内的词，已跳过", threshold, skipped)
    y = np.array([t.label for t in kept])
    seed = derive_seed(config.seed, "threshold", threshold)
    stats: Counter = Counter()
    metrics: Dict[ReprMode, List[FoldMetrics]] = {}
    for mode in ReprMode:
        X = np.stack([
            represent(t, resources.W, resources.emoji_sets, table, mode, space, stats if mode is ReprMode.MAPPING else None)
            for t in kept
        ]) if kept else np.zeros((0, resources.W.K))
        metrics[mode] = cross_validate(X, y, config.folds, seed, config.C, config.epochs)
    logger.info(
        "%s -> %s @ %.2f: A1=%.3f A2=%.3f NoEmojis=%.3f (替换 %d, 未覆盖 %d)",
        src.platform, tgt.platform, threshold,
        np.mean([m.accuracy for m in metrics[ReprMode.NO_MAPPING]]),
        np.mean([m.accuracy for m in metrics[ReprMode.MAPPING]]),
        np.mean([m.accuracy for m in metrics[ReprMode.NO_EMOJIS]]),
        stats["mapped"], stats["unmapped"],
    )
    return ComparisonReport(src.platform, tgt.platform, threshold, metrics, len(kept), skipped)


@dataclass
class SweepResult:
    source: str
    target: str
    reports: List[ComparisonReport]
    errors: Dict[float, str]


def threshold_sweep(
    source: Union[ScoredPool, PlatformCorpus],
    target: Union[ScoredPool, PlatformCorpus],
    thresholds: Optional[Sequence[float]],
    config: EvalConfig,
    resources: MappingResources,
    scorer: Optional[TweetScorer] = None,
) -> SweepResult:
    src = _pool(source, scorer)
    tgt = _pool(target, scorer)
    reports, errors = [], {}
    for t in thresholds if thresholds is not None else config.thresholds:
        try:
            reports.append(compare_pair(src, tgt, t, config, resources))
        except (LeakageError, ConfigError):
            raise
        except EmojiMapError as exc:
            # 单个阈值失败不影响其余阈值
            logger.warning("阈值 %.2f 失败: %s: %s", t, type(exc).__name__, exc)
            errors[t] = f"{type(exc).__name__}: {exc}"
    return SweepResult(src.platform, tgt.platform, reports, errors)


def _samples(reports: Sequence[ComparisonReport], mode: ReprMode, metric: str, level: str) -> List[float]:
    if level == "threshold":
        fn = ComparisonReport.mean_accuracy if metric == "accuracy" else ComparisonReport.mean_f1
        return [fn(r, mode) for r in reports]
    fn = ComparisonReport.accuracies if metric == "accuracy" else ComparisonReport.f1s
    return [v for r in reports for v in fn(r, mode)]


def sweep_significance(sweep: SweepResult, config: Optional[EvalConfig] = None) -> Dict[str, Optional[TTestResult]]:
    """Mapping 对 NoMapping、Mapping 对 NoEmojis，分别在准确率与 F1 上检验。"""
    config = config or EvalConfig()
    out: Dict[str, Optional[TTestResult]] = {}
    for baseline in (ReprMode.NO_MAPPING, ReprMode.NO_EMOJIS):
        for metric in ("accuracy", "f1"):
            key = f"{ReprMode.MAPPING.value}_vs_{baseline.value}_{metric}"
            a = _samples(sweep.reports, ReprMode.MAPPING, metric, config.significance_level)
            b = _samples(sweep.reports, baseline, metric, config.significance_level)
            try:
                out[key] = t_test(a, b, paired=config.paired)
            except DegenerateSample as exc:
                logger.warning("%s 无法检验: %s", key, exc)
                out[key] = None
    return out


def _better(report: ComparisonReport, baseline: ReprMode, config: EvalConfig) -> Tuple[Optional[TTestResult], bool]:
    a, b = report.accuracies(ReprMode.MAPPING), report.accuracies(baseline)
    try:
        res = t_test(a, b, paired=config.paired)
    except DegenerateSample:
        return None, False
    return res, res.significant(config.alpha) and np.mean(a) > np.mean(b)


def evaluate_all_pairs(
    pools: Mapping[PlatformName, ScoredPool],
    resources: MappingResources,
    config: EvalConfig,
) -> List[ComparisonReport]:
    """所有有序平台对，在 config.threshold 处比较并标记 Mapping 是否显著优于两个基线。"""
    names = sorted(platform_name(p) for p in pools if platform_name(p) in resources.emoji_sets)
    by_name = {platform_name(p): pool for p, pool in pools.items()}
    reports = []
    for s, t in permutations(names, 2):
        try:
            report = compare_pair(by_name[s], by_name[t], config.threshold, config, resources)
        except TooFewExamples as exc:
            logger.warning("%s -> %s 跳过: %s", s, t, exc)
            continue
        verdicts = []
        for baseline in (ReprMode.NO_MAPPING, ReprMode.NO_EMOJIS):
            res, ok = _better(report, baseline, config)
            if res is not None:
                report.significance[f"{ReprMode.MAPPING.value}_vs_{baseline.value}"] = res
            verdicts.append(ok)
        report.significantly_better = all(verdicts)
        reports.append(report)
    return reports


# ---------- 报告 ----------

REPORT_COLUMNS = ["source", "target", "threshold", "mode", "fold", "accuracy", "f1"]


def write_reports_json(reports: Sequence[ComparisonReport], path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([r.to_dict() for r in reports], fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_reports_csv(reports: Sequence[ComparisonReport], path: PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(REPORT_COLUMNS)
        for r in reports:
            for mode, folds in r.metrics.items():
                for m in folds:
                    writer.writerow([r.source, r.target, repr(r.threshold), mode.value, m.fold, repr(m.accuracy), repr(m.f1_positive)])


def write_significance_json(sweep: SweepResult, results: Mapping[str, Optional[TTestResult]], path: PathLike) -> None:
    payload = {
        "source": sweep.source,
        "target": sweep.target,
        "thresholds": [r.threshold for r in sweep.reports],
        "errors": {repr(k): v for k, v in sweep.errors.items()},
        "tests": {k: (v.to_dict() if v is not None else None) for k, v in results.items()},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
