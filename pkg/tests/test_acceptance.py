"""端到端验收：大规模合成语料上的映射恢复与确定性。pytest -m slow 运行。"""
import numpy as np
import pytest

from emojimap.embedding.sgns import TrainConfig, stripped_union, train_emoji_vectors, train_word_embedding
from emojimap.evaluation.harness import EvalConfig, MappingResources, compare_pair, score_pool, sweep_significance, threshold_sweep
from emojimap.mapping.emoji_mapping import build_mapping, mapping_accuracy
from emojimap.sentiment.lexicon import LexiconScorer
from emojimap.synth.generator import SynthSpec, generate
from emojimap.text.tokenizer import Tokenizer

pytestmark = pytest.mark.slow

ROSTER = [f"U+{cp:X}" for cp in range(0x1F600, 0x1F614)]


def _permuted_spec(tweets):
    rng = np.random.default_rng(21)
    shuffled = [str(x) for x in rng.permutation(ROSTER)]
    return SynthSpec(
        vocab_size=5000,
        tweets={"Android": tweets, "iOS": tweets},
        roster=ROSTER,
        correspondence={"iOS": dict(zip(ROSTER, shuffled))},
        partitions=["train"],
        seed=21,
    )


def _train(result, config):
    corpora = result.partition("train")
    tok = Tokenizer(inventory=result.inventory)
    W = train_word_embedding(stripped_union(corpora, tok), config)
    sets = {p.value: train_emoji_vectors(c, W, config, tok) for p, c in corpora.items()}
    return W, sets


def test_planted_permutation_is_recovered():
    result = generate(_permuted_spec(100_000))
    W, sets = _train(result, TrainConfig())
    before = W.vectors.copy()
    table = build_mapping(sets["Android"], sets["iOS"])
    hits, total = mapping_accuracy(table, result.truth[("Android", "iOS")])
    assert total == 20
    assert hits >= 19
    assert np.array_equal(W.vectors, before)
    self_map = build_mapping(sets["iOS"], sets["iOS"])
    assert all(e.source_emoji == e.target_emoji and abs(e.similarity - 1.0) < 1e-9 for e in self_map.entries.values())


def test_pipeline_is_deterministic():
    result = generate(_permuted_spec(5_000))
    config = TrainConfig(min_count=2, emoji_min_count=20)
    W1, sets1 = _train(result, config)
    W2, sets2 = _train(generate(_permuted_spec(5_000)), config)
    assert np.array_equal(W1.vectors, W2.vectors)
    for name in sets1:
        assert sets1[name].labels == sets2[name].labels
        for label in sets1[name].labels:
            assert np.array_equal(sets1[name][label], sets2[name][label])
    assert build_mapping(sets1["Android"], sets1["iOS"]).as_dict() == build_mapping(sets2["Android"], sets2["iOS"]).as_dict()


# ---------- 评测：合成语料上从训练到比较的完整流程 ----------

DIVERGENT_ROSTER = [
    "U+1F600", "U+1F602", "U+1F60D", "U+1F622",
    "U+1F620", "U+1F631", "U+1F44D", "U+1F44E",
]


def _divergent_spec():
    # iOS 上相邻的正负 emoji 两两互换，每个 emoji 的情感都与 Android 相反
    swapped = {}
    for a, b in zip(DIVERGENT_ROSTER[::2], DIVERGENT_ROSTER[1::2]):
        swapped[a], swapped[b] = b, a
    return SynthSpec(
        vocab_size=400,
        tweets={"Android": 2500, "iOS": 2500},
        roster=DIVERGENT_ROSTER,
        pool_fraction=0.15,
        correspondence={"iOS": swapped},
        sentiment_source="cue",
        seed=11,
    )


@pytest.fixture(scope="module")
def divergent_pipeline():
    result = generate(_divergent_spec())
    tok = Tokenizer(inventory=result.inventory)
    config = TrainConfig(emoji_min_count=20)
    W, sets = _train(result, config)
    scorer = LexiconScorer(result.lexicon, tok)
    pools = {p.value: score_pool(c, scorer) for p, c in result.partition("eval").items()}
    return result, MappingResources(W, sets, "train"), pools


def test_divergent_mapping_is_recovered(divergent_pipeline):
    result, resources, _ = divergent_pipeline
    table = build_mapping(resources.emoji_sets["Android"], resources.emoji_sets["iOS"])
    hits, total = mapping_accuracy(table, result.truth[("Android", "iOS")])
    assert total == 8
    assert hits >= 7


def test_mapping_beats_no_emojis_in_own_space(divergent_pipeline):
    _, resources, pools = divergent_pipeline
    report = compare_pair(pools["Android"], pools["iOS"], 0.2, EvalConfig(), resources)
    assert report.A2 >= report.no_emojis_accuracy + 0.02
    # 各平台 emoji 向量都由本平台语境训练得到，映射恢复后两种表示几乎重合
    assert report.A2 >= report.A1 - 0.02


def test_mapping_beats_both_baselines_in_target_space(divergent_pipeline):
    _, resources, pools = divergent_pipeline
    config = EvalConfig(no_mapping_emoji_space="target")
    report = compare_pair(pools["Android"], pools["iOS"], 0.2, config, resources)
    assert report.A2 >= report.A1 + 0.02
    assert report.A2 >= report.no_emojis_accuracy + 0.02
    sweep = threshold_sweep(pools["Android"], pools["iOS"], None, config, resources)
    assert len(sweep.reports) >= 5
    res = sweep_significance(sweep, config)["Mapping_vs_NoMapping_accuracy"]
    assert res is not None and res.t_statistic > 0 and res.p_value < 0.05
