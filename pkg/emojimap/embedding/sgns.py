"""跳字模型 + 负采样：共享词向量训练，以及冻结词向量后的平台 emoji 向量训练。

词向量交给 gensim 的 Word2Vec；gensim 无法冻结词矩阵只学新向量，所以 emoji
向量由这里的小批量训练器完成：上下文对切成小批量，用 np.add.at 做散射更新，
批内顺序固定，单线程时结果逐位可复现。全词表负项模式只用于 emoji 训练。
"""
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from gensim.models import Word2Vec

from emojimap.corpus.platform_corpus import Platform, PlatformCorpus, Tweet
from emojimap.embedding.vocab import Vocab, build_vocab
from emojimap.errors import ConfigError, NoEmojis
from emojimap.text.tokenizer import Token, Tokenizer, TokenSeq, label_sort_key, strip_emojis
from emojimap.vecmath import derive_rng, log_sigmoid, sigmoid

logger = logging.getLogger(__name__)

FULL_VOCAB_LIMIT = 1000
NEGATIVE_MODES = ("sampled", "full")


@dataclass
class TrainConfig:
    dim: int = 20
    window: int = 5
    negative: int = 5
    epochs: int = 5
    alpha: float = 0.025
    min_alpha: float = 0.0001
    min_count: int = 5
    emoji_min_count: int = 50
    seed: int = 1
    deterministic: bool = True
    workers: int = 1
    negative_mode: str = "sampled"
    ns_exponent: float = 0.75
    sample: float = 0.0  # 高频词下采样阈值，0 为关闭
    emoji_batch_size: int = 32

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigError("dim (K) 必须 >= 1")
        if self.window < 1:
            raise ConfigError("window 必须 >= 1")
        if self.negative < 1:
            raise ConfigError("negative (n) 必须 >= 1")
        if self.epochs < 0:
            raise ConfigError("epochs 不能为负")
        if self.min_count < 1 or self.emoji_min_count < 1:
            raise ConfigError("min_count 必须 >= 1")
        if self.negative_mode not in NEGATIVE_MODES:
            raise ConfigError(f"negative_mode 只能是 {NEGATIVE_MODES}")
        if self.emoji_batch_size < 1:
            raise ConfigError("emoji_batch_size 必须 >= 1")
        if self.workers < 1:
            raise ConfigError("workers 必须 >= 1")

    @property
    def K(self) -> int:
        return self.dim

    @property
    def n(self) -> int:
        return self.negative

    @property
    def effective_workers(self) -> int:
        # 确定性模式强制单线程
        return 1 if self.deterministic else self.workers


@dataclass
class EmbeddingMatrix:
    vectors: np.ndarray
    vocab: Vocab

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float64)
        if self.vectors.ndim != 2 or self.vectors.shape[0] != self.vocab.N or self.vectors.shape[1] < 1:
            raise ValueError(f"词向量形状 {self.vectors.shape} 与词表大小 {self.vocab.N} 不符")
        if not np.all(np.isfinite(self.vectors)):
            raise ValueError("词向量中存在非有限值")

    @property
    def K(self) -> int:
        return int(self.vectors.shape[1])

    @property
    def N(self) -> int:
        return self.vocab.N

    def __contains__(self, word: str) -> bool:
        return word in self.vocab

    def vector(self, word: str) -> np.ndarray:
        return self.vectors[self.vocab.word2index[word]]


@dataclass(frozen=True)
class ContextPair:
    emoji: str  # "U+XXXX"
    word: int  # 词表下标


@dataclass
class EmojiEmbeddingSet:
    platform: Union[Platform, str]
    vectors: Dict[str, np.ndarray]
    counts: Dict[str, int] = field(default_factory=dict)

    @property
    def labels(self) -> List[str]:
        return sorted(self.vectors, key=label_sort_key)

    @property
    def dim(self) -> int:
        first = next(iter(self.vectors.values()))
        return int(first.shape[0])

    def matrix(self, labels: Sequence[str]) -> np.ndarray:
        return np.stack([self.vectors[lbl] for lbl in labels])

    def __contains__(self, label: str) -> bool:
        return label in self.vectors

    def __getitem__(self, label: str) -> np.ndarray:
        return self.vectors[label]

    def __len__(self) -> int:
        return len(self.vectors)

    @property
    def name(self) -> str:
        return self.platform.value if isinstance(self.platform, Platform) else str(self.platform)


# ---------- 目标函数与梯度 ----------

def _neg_matrix(negatives, dim: int) -> np.ndarray:
    neg = np.asarray(negatives, dtype=np.float64)
    if neg.size == 0:
        return np.zeros((0, dim))
    return neg.reshape(-1, dim)


def sgns_objective(e, positive, negatives) -> float:
    """log σ(w_j·e) + Σ_k log σ(-w_k·e)。"""
    e = np.asarray(e, dtype=np.float64)
    pos = np.asarray(positive, dtype=np.float64)
    neg = _neg_matrix(negatives, e.shape[0])
    return float(log_sigmoid(pos @ e) + np.sum(log_sigmoid(-(neg @ e))))


def sgns_gradient(e, positive, negatives) -> np.ndarray:
    """目标函数对 e 的上升梯度（词向量视为常量）。"""
    e = np.asarray(e, dtype=np.float64)
    pos = np.asarray(positive, dtype=np.float64)
    neg = _neg_matrix(negatives, e.shape[0])
    grad = (1.0 - sigmoid(pos @ e)) * pos
    if len(neg):
        grad = grad - sigmoid(neg @ e) @ neg
    return grad


# ---------- 负采样 ----------

class NegativeSampler:
    """unigram^power 的累积分布表，searchsorted 抽样。"""

    def __init__(self, counts: Sequence[int], power: float = 0.75):
        weights = np.asarray(counts, dtype=np.float64) ** power
        if weights.size == 0 or weights.sum() <= 0:
            raise ConfigError("负采样需要非空词频")
        self.probs = weights / weights.sum()
        self.cum = np.cumsum(self.probs)
        self.cum[-1] = 1.0

    def draw(self, rng: np.random.Generator, size) -> np.ndarray:
        idx = np.searchsorted(self.cum, rng.random(size), side="right")
        return np.minimum(idx, len(self.cum) - 1)


def negative_sample(vocab: Vocab, n: int, rng: np.random.Generator, power: float = 0.75) -> np.ndarray:
    if n < 1:
        raise ConfigError("n 必须 >= 1")
    return NegativeSampler(vocab.counts, power).draw(rng, n)


# ---------- 公共工具 ----------

def _alpha(config: TrainConfig, done: int, total: int) -> float:
    if total <= 0:
        return config.alpha
    a = config.alpha - (config.alpha - config.min_alpha) * (done / total)
    return max(config.min_alpha, a)


def _split(items: Sequence, parts: int) -> List[Sequence]:
    parts = max(1, min(parts, len(items))) if len(items) else 1
    bounds = np.linspace(0, len(items), parts + 1).astype(int)
    return [items[bounds[i]:bounds[i + 1]] for i in range(parts)]


def _run_shards(fn: Callable[[int, Sequence], None], shards: List[Sequence]) -> None:
    if len(shards) == 1:
        fn(0, shards[0])
        return
    # 各线程无锁地更新同一矩阵 (hogwild)，结果不保证确定
    with ThreadPoolExecutor(max_workers=len(shards)) as pool:
        for fut in [pool.submit(fn, i, s) for i, s in enumerate(shards)]:
            fut.result()


def tokenize_corpus(corpus: Iterable[Tweet], tokenizer: Tokenizer) -> List[TokenSeq]:
    return [tokenizer.tokenize(t.text) for t in corpus]


def stripped_union(corpora: Mapping[Platform, PlatformCorpus], tokenizer: Tokenizer) -> List[TokenSeq]:
    """T̃：各平台去 emoji 后按平台顺序拼接。"""
    union: List[TokenSeq] = []
    for platform in sorted(corpora, key=lambda p: p.value):
        union.extend(strip_emojis(seq) for seq in tokenize_corpus(corpora[platform], tokenizer))
    return union


# ---------- 共享词向量 ----------

def _sentences(corpus: Sequence[Sequence[Union[Token, str]]]) -> List[List[str]]:
    out = []
    for seq in corpus:
        words = [tok.surface if isinstance(tok, Token) else tok for tok in seq if not isinstance(tok, Token) or tok.is_word]
        if words:
            out.append(words)
    return out


def _word2vec(vocab: Vocab, config: TrainConfig, corpus_count: int) -> Word2Vec:
    # 词表由 build_vocab 决定，gensim 只负责训练；min_count 已在词表里生效
    model = Word2Vec(
        vector_size=config.dim,
        window=config.window,
        min_count=1,
        sg=1,
        hs=0,
        negative=config.negative,
        ns_exponent=config.ns_exponent,
        alpha=config.alpha,
        min_alpha=config.min_alpha,
        sample=config.sample,
        seed=config.seed,
        workers=config.effective_workers,
        epochs=config.epochs,
        shrink_windows=False,
    )
    model.build_vocab_from_freq(vocab.frequencies(), corpus_count=corpus_count)
    return model


def _published(model: Word2Vec, vocab: Vocab) -> EmbeddingMatrix:
    # gensim 同频词的顺序不定，按 Vocab 的下标重排
    return EmbeddingMatrix(np.asarray(model.wv[vocab.index2word], dtype=np.float64), vocab)


def initial_word_vectors(vocab: Vocab, config: TrainConfig) -> EmbeddingMatrix:
    """未经训练的输入矩阵，由 config.seed 决定。"""
    return _published(_word2vec(vocab, config, 0), vocab)


def train_word_embedding(
    union_corpus: Iterable[Sequence[Union[Token, str]]],
    config: TrainConfig,
    vocab: Optional[Vocab] = None,
) -> EmbeddingMatrix:
    """在去 emoji 的合并语料上用 gensim Word2Vec (sg=1, 负采样) 训练，发布输入矩阵作为 W。"""
    corpus = list(union_corpus)
    for seq in corpus:
        if any(isinstance(tok, Token) and tok.is_emoji for tok in seq):
            raise ConfigError("训练共享词向量前必须去掉 emoji")
    if vocab is None:
        vocab = build_vocab(corpus, config.min_count)
    sentences = _sentences(corpus)
    model = _word2vec(vocab, config, len(sentences))
    logger.info("词表 %d 个词, 句子 %d, K=%d, window=%d, epochs=%d", vocab.N, len(sentences), config.dim, config.window, config.epochs)
    if config.epochs > 0:
        model.train(sentences, total_examples=len(sentences), epochs=config.epochs)
    return _published(model, vocab)


# ---------- 平台 emoji 向量 ----------

def _iter_context_pairs(corpus: Iterable[TokenSeq], vocab: Vocab, window: int) -> Iterator[Tuple[str, int]]:
    for seq in corpus:
        for i, tok in enumerate(seq):
            if not tok.is_emoji:
                continue
            for j in range(max(0, i - window), min(len(seq), i + window + 1)):
                if j == i:
                    continue
                other = seq[j]
                if other.is_word:
                    idx = vocab.word2index.get(other.surface)
                    if idx is not None:
                        yield tok.surface, idx


def extract_context_pairs(corpus: Iterable[TokenSeq], vocab: Vocab, window: int) -> List[ContextPair]:
    """每次 emoji 出现与窗口内的在表词配对；位置按原分词序列计数，占位符也占位。"""
    if window < 1:
        raise ConfigError("window 必须 >= 1")
    return [ContextPair(e, w) for e, w in _iter_context_pairs(corpus, vocab, window)]


def initial_emoji_vector(label: str, dim: int, seed: int) -> np.ndarray:
    # 只由 (种子, 码位) 决定，不同平台同一 emoji 起点相同
    rng = derive_rng(seed, "emoji-init", label)
    return rng.uniform(-0.5 / dim, 0.5 / dim, dim)


def _emoji_batch(E, Wv, e_idx, w_idx, negs, lr: float) -> None:
    x = E[e_idx]
    pos = Wv[w_idx]
    grad = (1.0 - sigmoid(np.einsum("bk,bk->b", x, pos)))[:, None] * pos
    if negs is None:
        grad -= sigmoid(x @ Wv.T) @ Wv
    else:
        neg = Wv[negs]
        grad -= np.einsum("bn,bnk->bk", sigmoid(np.einsum("bk,bnk->bn", x, neg)), neg)
    np.add.at(E, e_idx, lr * grad)


def train_emoji_vectors_from_tokens(
    corpus: Sequence[TokenSeq],
    W: EmbeddingMatrix,
    config: TrainConfig,
    platform: Union[Platform, str],
) -> EmojiEmbeddingSet:
    corpus = list(corpus)
    full = config.negative_mode == "full"
    if full and W.N > FULL_VOCAB_LIMIT:
        raise ConfigError(f"全词表负项模式要求词表 <= {FULL_VOCAB_LIMIT}，当前 {W.N}")
    if W.K != config.dim:
        raise ConfigError(f"词向量维度 {W.K} 与配置 dim={config.dim} 不一致")
    counts = Counter(tok.surface for seq in corpus for tok in seq if tok.is_emoji)
    kept = sorted((lbl for lbl, c in counts.items() if c >= config.emoji_min_count), key=label_sort_key)
    if not kept:
        raise NoEmojis(f"平台 {platform}: 没有 emoji 出现次数 >= {config.emoji_min_count}")
    index = {lbl: i for i, lbl in enumerate(kept)}
    e_list, w_list = [], []
    for lbl, widx in _iter_context_pairs(corpus, W.vocab, config.window):
        i = index.get(lbl)
        if i is not None:
            e_list.append(i)
            w_list.append(widx)
    e_all = np.asarray(e_list, dtype=np.int64)
    w_all = np.asarray(w_list, dtype=np.int64)
    logger.info("平台 %s: %d 个 emoji, %d 个上下文对", platform, len(kept), len(e_all))

    E = np.stack([initial_emoji_vector(lbl, config.dim, config.seed) for lbl in kept])
    # W 只读：任何写入都会直接报错
    Wv = W.vectors.view()
    Wv.flags.writeable = False
    sampler = NegativeSampler(W.vocab.counts, config.ns_exponent)
    shards = _split(np.arange(len(e_all)), config.effective_workers)

    def run(shard_id: int, positions: np.ndarray) -> None:
        rng = derive_rng(config.seed, "emoji-neg", shard_id)
        total = len(positions) * config.epochs
        done = 0
        bs = config.emoji_batch_size
        for _ in range(config.epochs):
            for lo in range(0, len(positions), bs):
                sel = positions[lo:lo + bs]
                negs = None if full else sampler.draw(rng, (len(sel), config.negative))
                _emoji_batch(E, Wv, e_all[sel], w_all[sel], negs, _alpha(config, done, total))
                done += len(sel)

    _run_shards(run, shards)
    if not np.all(np.isfinite(E)):
        raise ValueError("emoji 向量出现非有限值")
    return EmojiEmbeddingSet(
        platform=platform,
        vectors={lbl: E[i].copy() for lbl, i in index.items()},
        counts={lbl: int(counts[lbl]) for lbl in kept},
    )


def train_emoji_vectors(
    platform_corpus: PlatformCorpus,
    W: EmbeddingMatrix,
    config: TrainConfig,
    tokenizer: Optional[Tokenizer] = None,
    label: Optional[str] = None,
) -> EmojiEmbeddingSet:
    tokenizer = tokenizer or Tokenizer()
    platform = label if label is not None else platform_corpus.platform
    return train_emoji_vectors_from_tokens(tokenize_corpus(platform_corpus, tokenizer), W, config, platform)


def random_baseline_corpus(
    corpora: Mapping[Platform, PlatformCorpus],
    rng: np.random.Generator,
    size: Optional[int] = None,
) -> PlatformCorpus:
    """跨平台均匀抽样，默认与最大的平台语料等量，用作与平台无关的对照。"""
    pool: List[Tweet] = []
    for platform in sorted(corpora, key=lambda p: p.value):
        pool.extend(corpora[platform].tweets)
    if size is None:
        size = max(len(c) for c in corpora.values())
    size = min(size, len(pool))
    picked = np.sort(rng.choice(len(pool), size=size, replace=False))
    partition = next(iter(corpora.values())).partition if corpora else "default"
    return PlatformCorpus(Platform.UNKNOWN, [pool[i] for i in picked], partition)
