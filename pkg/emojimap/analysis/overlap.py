import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import AbstractSet, Dict, List, Mapping, Tuple, Union

import numpy as np

from emojimap.embedding.sgns import EmbeddingMatrix, EmojiEmbeddingSet
from emojimap.errors import BothEmpty, ConfigError, EmptyIntersection
from emojimap.mapping.emoji_mapping import PlatformName, nearest_words, platform_name
from emojimap.text.tokenizer import label_sort_key

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def jaccard(a: AbstractSet[str], b: AbstractSet[str]) -> float:
    a, b = set(a), set(b)
    union = a | b
    if not union:
        raise BothEmpty("两个集合都为空")
    return len(a & b) / len(union)


@dataclass
class OverlapMatrix:
    labels: List[str]
    cells: np.ndarray

    def cell(self, p: PlatformName, q: PlatformName) -> float:
        i = self.labels.index(platform_name(p))
        j = self.labels.index(platform_name(q))
        return float(self.cells[i, j])

    def rows(self) -> List[List[str]]:
        out = [[""] + self.labels]
        for label, row in zip(self.labels, self.cells):
            out.append([label] + [f"{v:.3f}" for v in row])
        return out


def neighbor_overlap_matrix(
    sets: Mapping[PlatformName, EmojiEmbeddingSet],
    W: EmbeddingMatrix,
    k: int = 1000,
) -> OverlapMatrix:
    """格 (p,q) 为共有 emoji 上 top-k 近邻词集合 Jaccard 系数的平均。"""
    keys = list(sets)
    if len(keys) < 2:
        raise ConfigError("至少需要两个平台")
    if k > W.N:
        raise ConfigError(f"k={k} 大于词表大小 {W.N}")
    labels = [platform_name(p) for p in keys]
    cache: Dict[Tuple[int, str], frozenset] = {}

    def neighbors(i: int, emoji: str) -> frozenset:
        key = (i, emoji)
        if key not in cache:
            cache[key] = frozenset(nearest_words(sets[keys[i]][emoji], W, k))
        return cache[key]

    n = len(keys)
    cells = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            shared = sorted(set(sets[keys[i]].vectors) & set(sets[keys[j]].vectors), key=label_sort_key)
            if not shared:
                raise EmptyIntersection(f"{labels[i]} 与 {labels[j]} 没有共有 emoji")
            value = float(np.mean([jaccard(neighbors(i, e), neighbors(j, e)) for e in shared]))
            cells[i, j] = cells[j, i] = value
            logger.info("Jaccard %s/%s = %.3f (%d 个共有 emoji)", labels[i], labels[j], value, len(shared))
    return OverlapMatrix(labels, cells)


def write_overlap_csv(matrix: OverlapMatrix, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(matrix.rows())
