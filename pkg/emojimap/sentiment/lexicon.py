"""基于词典的句子情感打分。分数在 [-1, 1]，0 为中性。"""
import json
import logging
import shlex
import subprocess
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Protocol, Sequence, Union

from emojimap.corpus.platform_corpus import Tweet
from emojimap.errors import ParseError, PolarityOutOfRange
from emojimap.text.tokenizer import Token, Tokenizer, TokenSeq, strip_emojis

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

NEGATION_WINDOW = 3

DEFAULT_NEGATORS: FrozenSet[str] = frozenset(
    """
    not no never nor none nobody nothing neither cannot without n't
    dont don't doesnt doesn't didnt didn't isnt isn't wasnt wasn't arent aren't
    werent weren't cant can't couldnt couldn't wont won't wouldnt wouldn't
    shouldnt shouldn't aint ain't hasnt hasn't havent haven't
    """.split()
)

SentimentScore = float


@dataclass(frozen=True)
class Lexicon:
    polarities: Mapping[str, float]
    negators: FrozenSet[str] = field(default=DEFAULT_NEGATORS)

    def __post_init__(self):
        for word, value in self.polarities.items():
            if not -1.0 <= value <= 1.0:
                raise PolarityOutOfRange(f"{word} 的极性 {value} 超出 [-1, 1]")

    def __len__(self) -> int:
        return len(self.polarities)

    def is_negator(self, word: str) -> bool:
        return word in self.negators


def load_lexicon(path: PathLike, negators: Optional[FrozenSet[str]] = None) -> Lexicon:
    """TSV: word<TAB>polarity。"""
    polarities: Dict[str, float] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(f"期望 word<TAB>polarity，得到 {line!r}", line_no)
            word = parts[0].strip().lower()
            try:
                value = float(parts[1])
            except ValueError:
                raise ParseError(f"极性不是数字: {parts[1]!r}", line_no) from None
            if not -1.0 <= value <= 1.0:
                raise PolarityOutOfRange(f"{word} 的极性 {value} 超出 [-1, 1]", line_no)
            polarities[word] = value
    return Lexicon(polarities, DEFAULT_NEGATORS if negators is None else negators)


def save_lexicon(lexicon: Lexicon, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for word in sorted(lexicon.polarities):
            fh.write(f"{word}\t{lexicon.polarities[word]!r}\n")


def load_negators(path: PathLike) -> FrozenSet[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return frozenset(w.strip().lower() for w in fh if w.strip() and not w.startswith("#"))


def score(seq: Iterable[Token], lexicon: Lexicon) -> SentimentScore:
    # emoji 一律忽略，故添加 emoji 不会改变分数
    tokens = strip_emojis(seq)
    total = 0.0
    matched = 0
    for i, tok in enumerate(tokens):
        if not tok.is_word:
            continue
        polarity = lexicon.polarities.get(tok.surface)
        if polarity is None:
            continue
        lo = max(0, i - NEGATION_WINDOW)
        if any(t.is_word and lexicon.is_negator(t.surface) for t in tokens[lo:i]):
            polarity = -polarity
        total += polarity
        matched += 1
    if matched == 0:
        return 0.0
    return min(1.0, max(-1.0, total / matched))


# ---------- 推文级打分器 ----------

class TweetScorer(Protocol):
    tokenizer: Tokenizer

    def score_tweets(self, tweets: Sequence[Tweet]) -> List[float]:
        ...


class LexiconScorer:
    """分词、去掉 emoji、再用词典打分。"""

    def __init__(self, lexicon: Lexicon, tokenizer: Tokenizer):
        self.lexicon = lexicon
        self.tokenizer = tokenizer

    def score_tokens(self, seq: TokenSeq) -> float:
        return score(seq, self.lexicon)

    def score_tweets(self, tweets: Sequence[Tweet]) -> List[float]:
        return [score(self.tokenizer.tokenize(t.text), self.lexicon) for t in tweets]


class ExternalScorer:
    """外部可执行程序：stdin 每行一个 {"text": ...}，stdout 每行一个小数。"""

    def __init__(self, command: str, tokenizer: Tokenizer, timeout: Optional[float] = None):
        self.argv = shlex.split(command)
        self.tokenizer = tokenizer
        self.timeout = timeout

    def score_texts(self, texts: Sequence[str]) -> List[float]:
        if not texts:
            return []
        payload = "".join(json.dumps({"text": t}, ensure_ascii=False) + "\n" for t in texts)
        proc = subprocess.run(
            self.argv,
            input=payload,
            capture_output=True,
            text=True,
            encoding="utf-8",
            timeout=self.timeout,
            check=True,
        )
        lines = [ln for ln in proc.stdout.splitlines() if ln.strip()]
        if len(lines) != len(texts):
            raise ParseError(f"外部打分器返回 {len(lines)} 行，期望 {len(texts)} 行")
        scores = []
        for line_no, line in enumerate(lines, start=1):
            try:
                value = float(line)
            except ValueError:
                raise ParseError(f"外部打分器输出不是数字: {line!r}", line_no) from None
            scores.append(min(1.0, max(-1.0, value)))
        return scores

    def score_tweets(self, tweets: Sequence[Tweet]) -> List[float]:
        return self.score_texts([self.tokenizer.strip_text(t.text) for t in tweets])
