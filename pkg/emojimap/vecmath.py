import hashlib
from typing import Sequence, Union

import numpy as np
from scipy.special import expit, log_expit

from emojimap.errors import ZeroVector

Vector = np.ndarray  # 形状 (K,)
Matrix = np.ndarray  # 形状 (行数, K)
SeedTag = Union[int, str, float]


def sigmoid(x):
    return expit(x)


def log_sigmoid(x):
    # log σ(x)，对极大/极小 x 均不溢出
    return log_expit(x)


def norm(vec: Sequence[float]) -> float:
    return float(np.linalg.norm(np.asarray(vec, dtype=np.float64)))


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ZeroVector("余弦相似度要求非零向量")
    val = float(np.dot(a, b) / (na * nb))
    return min(1.0, max(-1.0, val))


def unit_rows(mat: Matrix) -> Matrix:
    """逐行单位化；存在零行时抛出 ZeroVector。"""
    mat = np.asarray(mat, dtype=np.float64)
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise ZeroVector("矩阵中存在零向量")
    return mat / norms


def cosine_against_rows(vec: Vector, mat: Matrix) -> np.ndarray:
    v = np.asarray(vec, dtype=np.float64)
    nv = np.linalg.norm(v)
    if nv == 0.0:
        raise ZeroVector("查询向量为零向量")
    mat = np.asarray(mat, dtype=np.float64)
    norms = np.linalg.norm(mat, axis=1)
    safe = np.where(norms == 0.0, 1.0, norms)
    sims = (mat @ v) / (safe * nv)
    # 零行与任何向量都不相似
    sims[norms == 0.0] = -1.0
    return np.clip(sims, -1.0, 1.0)


def _tag_to_int(tag: SeedTag) -> int:
    if isinstance(tag, (int, np.integer)) and not isinstance(tag, bool):
        return int(tag) & 0xFFFFFFFF
    # 字符串/浮点用 sha256 取稳定整数；内置 hash() 每个进程不同
    digest = hashlib.sha256(repr(tag).encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little")


def derive_rng(seed: int, *tags: SeedTag) -> np.random.Generator:
    """由主种子和若干标签派生独立的随机数发生器。"""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [_tag_to_int(t) for t in tags]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def derive_seed(seed: int, *tags: SeedTag) -> int:
    return int(derive_rng(seed, *tags).integers(0, 2**31 - 1))
