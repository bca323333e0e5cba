from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Union

import numpy as np

from emojimap.errors import ConfigError, EmptyVocab
from emojimap.text.tokenizer import Token


@dataclass
class Vocab:
    index2word: List[str]
    counts: np.ndarray
    word2index: Dict[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if len(self.counts) != len(self.index2word):
            raise ValueError("词表与词频长度不一致")
        self.word2index = {w: i for i, w in enumerate(self.index2word)}
        if len(self.word2index) != len(self.index2word):
            raise ValueError("词表中存在重复词")

    @property
    def N(self) -> int:
        return len(self.index2word)

    def __len__(self) -> int:
        return len(self.index2word)

    def __contains__(self, word: str) -> bool:
        return word in self.word2index

    def count(self, word: str) -> int:
        return int(self.counts[self.word2index[word]])

    def frequencies(self) -> Dict[str, int]:
        return {w: int(c) for w, c in zip(self.index2word, self.counts)}


def _surfaces(seq: Iterable[Union[Token, str]]) -> Iterable[str]:
    for tok in seq:
        if isinstance(tok, Token):
            if tok.is_word:
                yield tok.surface
        else:
            yield tok


def count_words(corpus: Iterable[Sequence[Union[Token, str]]]) -> Counter:
    counter: Counter = Counter()
    for seq in corpus:
        counter.update(_surfaces(seq))
    return counter


def vocab_from_counts(counts: Dict[str, int], min_count: int = 1) -> Vocab:
    if min_count < 1:
        raise ConfigError("min_count 必须 >= 1")
    kept = [(w, c) for w, c in counts.items() if c >= min_count]
    if not kept:
        raise EmptyVocab(f"没有词达到 min_count={min_count}")
    # 词频降序，同频按字典序
    kept.sort(key=lambda wc: (-wc[1], wc[0]))
    return Vocab([w for w, _ in kept], np.array([c for _, c in kept], dtype=np.int64))


def build_vocab(corpus: Iterable[Sequence[Union[Token, str]]], min_count: int = 1) -> Vocab:
    """只统计 Word 记号；占位符与 emoji 不进入词表。"""
    return vocab_from_counts(count_words(corpus), min_count)
