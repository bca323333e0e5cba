"""word2vec 文本格式的向量文件读写，底层交给 gensim 的 KeyedVectors。

    N K
    token v1 v2 ... vK

emoji 文件首行多一行 "#platform: <name>"。向量以 float64 保存，读回逐位一致。
词频写在同名的 .vocab / .counts 旁路文件中（即 gensim 的 fvocab）。
"""
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from gensim.models import KeyedVectors

from emojimap.corpus.platform_corpus import Platform
from emojimap.embedding.sgns import EmbeddingMatrix, EmojiEmbeddingSet
from emojimap.embedding.vocab import Vocab
from emojimap.errors import ParseError

PathLike = Union[str, Path]

PLATFORM_TAG = "#platform:"


def _sidecar(path: PathLike, suffix: str) -> Path:
    p = Path(path)
    return p.with_name(p.name + suffix)


def _keyed_vectors(tokens: Sequence[str], mat: np.ndarray, counts: Sequence[int]) -> KeyedVectors:
    kv = KeyedVectors(mat.shape[1], count=0, dtype=np.float64)
    kv.add_vectors(list(tokens), np.asarray(mat, dtype=np.float64))
    for tok, c in zip(tokens, counts):
        kv.set_vecattr(tok, "count", int(c))
    return kv


def _locate_error(lines: List[str], offset: int) -> Tuple[str, int]:
    """gensim 只报“格式不对”，这里找出第一处出错的行号。"""
    if not lines:
        return "缺少 \"N K\" 表头", offset + 1
    try:
        n, k = (int(x) for x in lines[0].split())
    except ValueError:
        return f"表头应为 \"N K\"，得到 {lines[0].rstrip()!r}", offset + 1
    body = [line for line in lines[1:] if line.strip()]
    if len(body) < n:
        return f"表头声明 {n} 行，实际 {len(body)} 行", offset + 1
    for i, line in enumerate(lines[1:], start=2):
        parts = line.rstrip("\n").split(" ")
        if len(parts) != k + 1:
            return f"期望 1 个记号加 {k} 个数，得到 {len(parts)} 项", offset + i
        try:
            [float(x) for x in parts[1:]]
        except ValueError:
            return "向量中有非数字项", offset + i
    return "无法解析的向量文件", offset + 1


def _load(path: Path, skip_first: bool, fvocab: Optional[Path]) -> KeyedVectors:
    try:
        with open(path, "rb") as fh:
            if skip_first:
                fh.readline()
            return KeyedVectors.load_word2vec_format(
                fh, fvocab=str(fvocab) if fvocab else None, binary=False, datatype=np.float64,
            )
    except (ValueError, EOFError):
        pass
    # gensim 在自己的 with 块里已关闭文件句柄，重新读一遍定位行号
    lines = path.read_text(encoding="utf-8").splitlines()
    if skip_first:
        lines = lines[1:]
    message, line_no = _locate_error(lines, 1 if skip_first else 0)
    raise ParseError(message, line_no)


def _existing(path: Path) -> Optional[Path]:
    return path if path.exists() else None


def save_word_embedding(W: EmbeddingMatrix, path: PathLike) -> None:
    kv = _keyed_vectors(W.vocab.index2word, W.vectors, W.vocab.counts)
    kv.save_word2vec_format(str(path), fvocab=str(_sidecar(path, ".vocab")), binary=False)


def load_word_embedding(path: PathLike) -> EmbeddingMatrix:
    path = Path(path)
    fvocab = _existing(_sidecar(path, ".vocab"))
    kv = _load(path, skip_first=False, fvocab=fvocab)
    tokens = list(kv.index_to_key)
    counts = [kv.get_vecattr(t, "count") if fvocab else 1 for t in tokens]
    return EmbeddingMatrix(np.asarray(kv.vectors, dtype=np.float64), Vocab(tokens, np.array(counts, dtype=np.int64)))


def save_emoji_embedding(emojis: EmojiEmbeddingSet, path: PathLike) -> None:
    labels = emojis.labels
    counts = [emojis.counts.get(label, 0) for label in labels]
    fvocab = _sidecar(path, ".counts")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{PLATFORM_TAG} {emojis.name}\n")
    # 追加模式下 fvocab 也按追加打开，先清掉旧文件
    fvocab.unlink(missing_ok=True)
    kv = _keyed_vectors(labels, emojis.matrix(labels), counts)
    kv.save_word2vec_format(str(path), fvocab=str(fvocab), binary=False, append=True)


def load_emoji_embedding(path: PathLike) -> EmojiEmbeddingSet:
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
    if not first.startswith(PLATFORM_TAG):
        raise ParseError(f"emoji 向量文件必须以 {PLATFORM_TAG} 开头", 1)
    name = first[len(PLATFORM_TAG):].strip()
    try:
        platform: Union[Platform, str] = Platform(name)
    except ValueError:
        platform = name  # 例如随机对照集 "Random"
    fvocab = _existing(_sidecar(path, ".counts"))
    kv = _load(path, skip_first=True, fvocab=fvocab)
    counts: Dict[str, int] = {}
    if fvocab:
        counts = {t: int(kv.get_vecattr(t, "count")) for t in kv.index_to_key}
    return EmojiEmbeddingSet(
        platform=platform,
        vectors={t: np.asarray(kv[t], dtype=np.float64).copy() for t in kv.index_to_key},
        counts=counts,
    )
