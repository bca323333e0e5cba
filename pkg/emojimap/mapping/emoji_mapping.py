"""有向的跨平台 emoji 映射：源平台每个共有 emoji 取目标平台余弦最近的 emoji。"""
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from itertools import permutations
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from emojimap.corpus.platform_corpus import Platform
from emojimap.embedding.sgns import EmbeddingMatrix, EmojiEmbeddingSet
from emojimap.errors import ConfigError, EmptyIntersection, ParseError
from emojimap.text.tokenizer import Token, TokenSeq, emoji_from_label, is_emoji_label, label_sort_key
from emojimap.vecmath import cosine, cosine_against_rows, unit_rows

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
PlatformName = Union[Platform, str]


def platform_name(p: PlatformName) -> str:
    return p.value if isinstance(p, Platform) else str(p)


def cosine_similarity(a, b) -> float:
    return cosine(a, b)


def nearest_words(v, W: EmbeddingMatrix, k: int) -> List[str]:
    """余弦降序的前 k 个词，相同分数按字典序。"""
    if not 1 <= k <= W.N:
        raise ConfigError(f"k={k} 超出词表大小 {W.N}")
    sims = cosine_against_rows(v, W.vectors)
    words = np.asarray(W.vocab.index2word)
    order = np.lexsort((words, -sims))
    out: List[str] = []
    for i in order:
        word = words[i]
        if is_emoji_label(word):
            continue
        out.append(str(word))
        if len(out) == k:
            break
    return out


@dataclass(frozen=True)
class MappingEntry:
    source_emoji: str
    target_emoji: str
    similarity: float


@dataclass
class MappingTable:
    source_platform: PlatformName
    target_platform: PlatformName
    entries: Dict[str, MappingEntry]
    excluded_source: Tuple[str, ...] = ()
    excluded_target: Tuple[str, ...] = ()

    @property
    def E(self) -> List[str]:
        return sorted(self.entries, key=label_sort_key)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, label: str) -> bool:
        return label in self.entries

    def __getitem__(self, label: str) -> str:
        return self.entries[label].target_emoji

    def as_dict(self) -> Dict[str, str]:
        return {src: e.target_emoji for src, e in self.entries.items()}

    @property
    def source_name(self) -> str:
        return platform_name(self.source_platform)

    @property
    def target_name(self) -> str:
        return platform_name(self.target_platform)

    @classmethod
    def identity(cls, source: PlatformName, target: PlatformName, labels: Iterable[str]) -> "MappingTable":
        entries = {lbl: MappingEntry(lbl, lbl, 1.0) for lbl in sorted(labels, key=label_sort_key)}
        return cls(source, target, entries)


def build_mapping(source: EmojiEmbeddingSet, target: EmojiEmbeddingSet) -> MappingTable:
    shared = sorted(set(source.vectors) & set(target.vectors), key=label_sort_key)
    if not shared:
        raise EmptyIntersection(f"{source.name} 与 {target.name} 没有共有 emoji")
    S = unit_rows(source.matrix(shared))
    T = unit_rows(target.matrix(shared))
    sims = np.clip(S @ T.T, -1.0, 1.0)
    # 候选按码位升序排列，argmax 取首个最大值即最小码位
    best = np.argmax(sims, axis=1)
    entries = {
        lbl: MappingEntry(lbl, shared[j], float(sims[i, j]))
        for i, (lbl, j) in enumerate(zip(shared, best))
    }
    excluded_s = tuple(sorted(set(source.vectors) - set(shared), key=label_sort_key))
    excluded_t = tuple(sorted(set(target.vectors) - set(shared), key=label_sort_key))
    if excluded_s or excluded_t:
        logger.info(
            "%s -> %s: 只在一侧出现的 emoji %d / %d 个，已排除",
            source.name, target.name, len(excluded_s), len(excluded_t),
        )
    return MappingTable(source.platform, target.platform, entries, excluded_s, excluded_t)


def build_all_mappings(sets: Mapping[PlatformName, EmojiEmbeddingSet]) -> Dict[Tuple[str, str], MappingTable]:
    names = sorted(sets, key=platform_name)
    return {
        (platform_name(p), platform_name(q)): build_mapping(sets[p], sets[q])
        for p, q in permutations(names, 2)
    }


def apply_mapping(seq: Sequence[Token], table: MappingTable, stats: Optional[Counter] = None) -> TokenSeq:
    out = []
    for tok in seq:
        if tok.is_emoji:
            entry = table.entries.get(tok.surface)
            if entry is None:
                if stats is not None:
                    stats["unmapped"] += 1
            else:
                if stats is not None:
                    stats["mapped"] += 1
                tok = Token.emoji(entry.target_emoji)
        out.append(tok)
    return tuple(out)


def mapping_accuracy(table: MappingTable, truth: Union[MappingTable, Mapping[str, str]]) -> Tuple[int, int]:
    """(命中数, 可比数)：只统计两张表都覆盖的源 emoji。"""
    expected = truth.as_dict() if isinstance(truth, MappingTable) else dict(truth)
    common = [lbl for lbl in table.entries if lbl in expected]
    hits = sum(1 for lbl in common if table[lbl] == expected[lbl])
    return hits, len(common)


# ---------- 文件读写 ----------

def _excluded_path(path: PathLike) -> Path:
    p = Path(path)
    return p.with_name(p.name + ".excluded.json")


def save_mapping(table: MappingTable, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#source={table.source_name} target={table.target_name}\n")
        for lbl in table.E:
            e = table.entries[lbl]
            fh.write(f"{e.source_emoji}\t{e.target_emoji}\t{float(e.similarity)!r}\n")
    with open(_excluded_path(path), "w", encoding="utf-8") as fh:
        json.dump(
            {"source_only": list(table.excluded_source), "target_only": list(table.excluded_target)},
            fh, indent=2, sort_keys=True,
        )
        fh.write("\n")


def _parse_platform(name: str) -> PlatformName:
    try:
        return Platform(name)
    except ValueError:
        return name


def _check_label(label: str, line_no: int) -> str:
    if not is_emoji_label(label):
        raise ParseError(f"不是 U+XXXX 形式的 emoji: {label!r}", line_no)
    emoji_from_label(label)
    return label


def load_mapping(path: PathLike, target_emojis: Optional[Iterable[str]] = None) -> MappingTable:
    """target_emojis 缺省时取表中的源 emoji 集合，即构建时的共有 emoji。"""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [(no, raw.rstrip("\n")) for no, raw in enumerate(fh, start=1)]
    if not lines or not lines[0][1].startswith("#"):
        raise ParseError("缺少 #source=... target=... 表头", 1)
    header = dict(part.split("=", 1) for part in lines[0][1][1:].split() if "=" in part)
    if "source" not in header or "target" not in header:
        raise ParseError(f"表头格式错误: {lines[0][1]!r}", 1)
    entries: Dict[str, MappingEntry] = {}
    where: Dict[str, int] = {}
    for line_no, line in lines[1:]:
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ParseError(f"期望 3 列，得到 {len(parts)} 列", line_no)
        src = _check_label(parts[0], line_no)
        dst = _check_label(parts[1], line_no)
        if src in entries:
            raise ParseError(f"源 emoji {src} 重复", line_no)
        try:
            sim = float(parts[2])
        except ValueError:
            raise ParseError(f"相似度不是数字: {parts[2]!r}", line_no) from None
        if not -1.0 <= sim <= 1.0:
            raise ParseError(f"相似度 {sim} 超出 [-1, 1]", line_no)
        entries[src] = MappingEntry(src, dst, sim)
        where[src] = line_no
    allowed = set(entries) if target_emojis is None else set(target_emojis)
    for src, entry in entries.items():
        if entry.target_emoji not in allowed:
            raise ParseError(f"目标 emoji {entry.target_emoji} 不在目标 emoji 集合中", where[src])
    excluded_s: Tuple[str, ...] = ()
    excluded_t: Tuple[str, ...] = ()
    side = _excluded_path(path)
    if side.exists():
        with open(side, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        excluded_s = tuple(data.get("source_only", []))
        excluded_t = tuple(data.get("target_only", []))
    return MappingTable(
        _parse_platform(header["source"]),
        _parse_platform(header["target"]),
        entries,
        excluded_s,
        excluded_t,
    )
