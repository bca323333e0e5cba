import csv
import json
import logging
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from emojimap.analysis.sentiment_profile import PROFILE_COLUMNS, ScoredCorpus, SentimentProfile
from emojimap.errors import ConfigError, DegenerateSample
from emojimap.evaluation.significance import t_test
from emojimap.text.tokenizer import label_sort_key

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


@dataclass
class DivergenceReport:
    method: str
    flags: Dict[str, Dict[str, bool]]  # emoji -> "p|q" -> 是否显著
    profiled_emojis: List[str]
    divergent_emojis: List[str]
    emoji_divergent_fraction: float
    tweet_affected_fraction: float
    emoji_tweet_fraction: Optional[float] = None
    global_sample_fraction: Optional[float] = None
    affected_among_emoji_tweets: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "flags": self.flags,
            "profiled_emojis": self.profiled_emojis,
            "divergent_emojis": self.divergent_emojis,
            "divergent_fraction": self.emoji_divergent_fraction,
            "tweet_fraction": self.tweet_affected_fraction,
            "emoji_tweet_fraction": self.emoji_tweet_fraction,
            "sample_fraction": self.global_sample_fraction,
            "affected_among_emoji_tweets": self.affected_among_emoji_tweets,
        }


def _pair_key(p: str, q: str) -> str:
    return f"{p}|{q}"


def cis_disjoint(a: SentimentProfile, b: SentimentProfile) -> bool:
    return a.ci_high < b.ci_low or b.ci_high < a.ci_low


def _welch_flag(sa: ScoredCorpus, sb: ScoredCorpus, emoji: str, alpha: float) -> bool:
    try:
        return t_test(sa.emoji_scores(emoji), sb.emoji_scores(emoji)).significant(alpha)
    except DegenerateSample:
        return False


def _affected(emoji_sets: Iterable[FrozenSet[str]], flagged: FrozenSet[str]) -> Tuple[int, int, int]:
    total = with_emoji = hit = 0
    for found in emoji_sets:
        total += 1
        if found:
            with_emoji += 1
            if found & flagged:
                hit += 1
    return total, with_emoji, hit


def divergence_report(
    profiles: Sequence[SentimentProfile],
    corpora: Sequence[ScoredCorpus],
    method: str = "ci",
    alpha: float = 0.05,
    background: Optional[Sequence[FrozenSet[str]]] = None,
) -> DivergenceReport:
    """emoji 在某对平台上显著不同即记为分歧；比较只在两边都有画像时进行。"""
    if method not in ("ci", "welch"):
        raise ConfigError(f"未知的显著性方法: {method}")
    by_platform = {sc.name: sc for sc in corpora}
    if len({p.platform for p in profiles}) < 2:
        raise ConfigError("至少需要两个平台的画像")
    missing = sorted({p.platform for p in profiles} - set(by_platform))
    if method == "welch" and missing:
        raise ConfigError(f"welch 方法需要这些平台的打分语料: {missing}")
    table: Dict[str, Dict[str, SentimentProfile]] = {}
    for prof in profiles:
        table.setdefault(prof.emoji, {})[prof.platform] = prof

    flags: Dict[str, Dict[str, bool]] = {}
    for emoji in sorted(table, key=label_sort_key):
        per = table[emoji]
        for p, q in combinations(sorted(per), 2):
            if method == "ci":
                flag = cis_disjoint(per[p], per[q])
            else:
                flag = _welch_flag(by_platform[p], by_platform[q], emoji, alpha)
            flags.setdefault(emoji, {})[_pair_key(p, q)] = flag

    compared = sorted(flags, key=label_sort_key)
    divergent = [e for e in compared if any(flags[e].values())]
    flagged = frozenset(divergent)
    total, _, hit = _affected((f for sc in corpora for f in sc.emojis), flagged)
    report = DivergenceReport(
        method=method,
        flags=flags,
        profiled_emojis=compared,
        divergent_emojis=divergent,
        emoji_divergent_fraction=len(divergent) / len(compared) if compared else 0.0,
        tweet_affected_fraction=hit / total if total else 0.0,
    )
    if background is not None:
        b_total, b_emoji, b_hit = _affected(background, flagged)
        if b_total:
            report.emoji_tweet_fraction = b_emoji / b_total
            report.global_sample_fraction = b_hit / b_total
            report.affected_among_emoji_tweets = b_hit / b_emoji if b_emoji else 0.0
    logger.info(
        "分歧 emoji %d/%d (%.1f%%)，受影响推文 %.1f%%",
        len(divergent), len(compared), 100 * report.emoji_divergent_fraction, 100 * report.tweet_affected_fraction,
    )
    return report


def write_profiles_csv(profiles: Sequence[SentimentProfile], path: PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(PROFILE_COLUMNS)
        for prof in profiles:
            writer.writerow(prof.to_row())


def write_divergence_json(report: DivergenceReport, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")
