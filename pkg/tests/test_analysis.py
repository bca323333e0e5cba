import json

import numpy as np
import pytest

from emojimap.analysis.divergence import cis_disjoint, divergence_report, write_divergence_json, write_profiles_csv
from emojimap.analysis.overlap import jaccard, neighbor_overlap_matrix, write_overlap_csv
from emojimap.analysis.sentiment_profile import (
    AnalysisConfig,
    ScoredCorpus,
    SentimentProfile,
    brute_force_bootstrap,
    emoji_sentiment_profile,
    exact_bootstrap,
    platform_bias,
    profile_all,
    sampled_bootstrap,
    score_corpus,
)
from emojimap.corpus.platform_corpus import Platform
from emojimap.embedding.sgns import EmbeddingMatrix, EmojiEmbeddingSet
from emojimap.embedding.vocab import Vocab
from emojimap.errors import BothEmpty, ConfigError, EmojiAbsent, EmptyCorpus, EmptyIntersection
from emojimap.sentiment.lexicon import Lexicon, LexiconScorer

from conftest import make_corpus

A, B, C = "U+1F600", "U+1F602", "U+1F60D"


# ---------- Jaccard ----------

def test_jaccard_values():
    assert jaccard({"a", "b"}, {"b", "c"}) == pytest.approx(1 / 3)
    assert jaccard({"a"}, set()) == 0.0
    assert jaccard({"a"}, {"a"}) == 1.0
    with pytest.raises(BothEmpty):
        jaccard(set(), set())


def _random_W(n, dim, seed):
    rng = np.random.default_rng(seed)
    return EmbeddingMatrix(rng.normal(size=(n, dim)), Vocab([f"w{i}" for i in range(n)], np.ones(n, dtype=int)))


def test_identical_sets_give_full_overlap(tmp_path):
    W = _random_W(200, 8, 0)
    rng = np.random.default_rng(1)
    vectors = {lbl: rng.normal(size=8) for lbl in (A, B, C)}
    sets = {
        Platform.ANDROID: EmojiEmbeddingSet(Platform.ANDROID, vectors),
        Platform.IOS: EmojiEmbeddingSet(Platform.IOS, dict(vectors)),
        Platform.WINDOWS: EmojiEmbeddingSet(Platform.WINDOWS, {A: -vectors[A]}),
    }
    m = neighbor_overlap_matrix(sets, W, k=20)
    assert np.array_equal(np.diag(m.cells), np.ones(3))
    assert np.array_equal(m.cells, m.cells.T)
    assert m.cell("Android", "iOS") == 1.0
    assert m.cell(Platform.ANDROID, Platform.WINDOWS) == 0.0
    path = tmp_path / "overlap.csv"
    write_overlap_csv(m, path)
    assert path.read_text(encoding="utf-8").splitlines()[0] == ",Android,iOS,Windows"


def test_independent_random_vectors_barely_overlap():
    W = _random_W(10_000, 20, 2)
    rng = np.random.default_rng(3)
    labels = [f"U+{cp:X}" for cp in range(0x1F600, 0x1F605)]
    sets = {
        name: EmojiEmbeddingSet(name, {lbl: rng.normal(size=20) for lbl in labels})
        for name in ("Android", "iOS")
    }
    m = neighbor_overlap_matrix(sets, W, k=100)
    assert m.cell("Android", "iOS") <= 0.05


def test_overlap_errors():
    W = _random_W(10, 2, 0)
    one = {"Android": EmojiEmbeddingSet("Android", {A: np.ones(2)})}
    with pytest.raises(ConfigError):
        neighbor_overlap_matrix(one, W, k=5)
    two = dict(one, iOS=EmojiEmbeddingSet("iOS", {B: np.ones(2)}))
    with pytest.raises(EmptyIntersection):
        neighbor_overlap_matrix(two, W, k=5)
    with pytest.raises(ConfigError):
        neighbor_overlap_matrix(dict(one, iOS=EmojiEmbeddingSet("iOS", {A: np.ones(2)})), W, k=11)


# ---------- bootstrap ----------

@pytest.mark.parametrize("values", [
    [0.1, 0.5, -0.3, 0.9, 0.2],
    [0.25, -0.5, 0.75, 0.0, 1.0, -1.0],
    [0.3],
])
def test_exact_enumeration_matches_brute_force(values):
    exact = exact_bootstrap(values)
    brute = brute_force_bootstrap(values)
    assert exact.mean_of_means == pytest.approx(brute.mean_of_means, abs=1e-12)
    assert exact.variance == pytest.approx(brute.variance, abs=1e-12)
    assert exact.ci_low == pytest.approx(brute.ci_low, abs=1e-12)
    assert exact.ci_high == pytest.approx(brute.ci_high, abs=1e-12)
    # 自助均值的方差 = 总体方差 / n
    assert exact.variance == pytest.approx(np.var(values) / len(values), abs=1e-12)
    assert exact.mean_of_means == pytest.approx(np.mean(values), abs=1e-12)


def test_exact_bootstrap_handles_ten_values():
    values = np.linspace(-1, 1, 10)
    assert exact_bootstrap(values).variance == pytest.approx(np.var(values) / 10, abs=1e-12)
    with pytest.raises(ConfigError):
        exact_bootstrap(np.zeros(11))


def test_constant_sample_has_zero_width_interval():
    res = sampled_bootstrap([0.4] * 7, 50, np.random.default_rng(0))
    assert res.ci_low == res.ci_high == pytest.approx(0.4)
    assert exact_bootstrap([0.4] * 4).variance == pytest.approx(0.0, abs=1e-15)


def _scored(platform, rows):
    scores = np.array([s for s, _ in rows], dtype=float)
    return ScoredCorpus(platform, scores, [frozenset(e) for _, e in rows])


def test_bias_shift_is_exact():
    rows = [(0.25, {A}), (0.5, {A}), (-0.75, {A}), (1.0, {A}), (0.0, set())]
    bias = 0.5
    shifted = [(s - bias, e) for s, e in rows]
    p1 = emoji_sentiment_profile(_scored(Platform.IOS, rows), A, bias=bias, B=200, rng=np.random.default_rng(8))
    p2 = emoji_sentiment_profile(_scored(Platform.IOS, shifted), A, bias=0.0, B=200, rng=np.random.default_rng(8))
    assert p1 == p2
    assert p1.mean_adjusted == 0.25 - bias
    assert p1.n == 4


def test_profile_interval_contains_mean_and_absent_emoji_raises():
    sc = _scored(Platform.ANDROID, [(0.1, {A}), (0.9, {A, B}), (-0.2, {A})])
    prof = emoji_sentiment_profile(sc, A, B=30, rng=np.random.default_rng(1), exact_max_n=3)
    assert prof.ci_low <= prof.mean_adjusted <= prof.ci_high
    assert prof.variance == pytest.approx(np.var([0.1, 0.9, -0.2]) / 3, abs=1e-12)
    with pytest.raises(EmojiAbsent):
        emoji_sentiment_profile(sc, C)


def test_platform_bias_and_empty_corpus(toy_tokenizer):
    scorer = LexiconScorer(Lexicon({"good": 0.5, "bad": -1.0}), toy_tokenizer)
    corpus = make_corpus(Platform.IOS, ["good \U0001F600", "bad", "meh \U0001F600"])
    scored = score_corpus(corpus, scorer)
    assert scored.emojis[0] == frozenset({A})
    assert platform_bias(corpus, scorer) == pytest.approx(-0.5 / 3)
    with pytest.raises(EmptyCorpus):
        platform_bias(make_corpus(Platform.IOS, []), scorer)


def test_profile_all_is_seeded_per_platform_and_emoji():
    sc = _scored(Platform.ANDROID, [(0.1 * i, {A} if i % 2 else {B}) for i in range(12)])
    config = AnalysisConfig(bootstrap=40, seed=3)
    serial = profile_all([sc], config)
    threaded = profile_all([sc], config, workers=4)
    assert serial == threaded
    assert [p.emoji for p in serial] == [A, B]


# ---------- 分歧 ----------

def _profile(platform, emoji, lo, hi, n=10):
    return SentimentProfile(platform, emoji, (lo + hi) / 2, 0.01, lo, hi, n)


def test_cis_disjoint():
    assert cis_disjoint(_profile("a", A, 0.0, 0.1), _profile("b", A, 0.2, 0.3))
    assert not cis_disjoint(_profile("a", A, 0.0, 0.2), _profile("b", A, 0.2, 0.3))


def test_divergence_report_fractions(tmp_path):
    android = _scored(Platform.ANDROID, [(0.1, {A}), (0.2, {B}), (0.0, set()), (0.3, {C})])
    ios = _scored(Platform.IOS, [(0.1, {A}), (0.2, {B, A}), (0.0, set()), (0.5, set())])
    profiles = [
        _profile("Android", A, 0.0, 0.1), _profile("iOS", A, 0.5, 0.6),
        _profile("Android", B, 0.0, 0.3), _profile("iOS", B, 0.2, 0.4),
        _profile("Android", C, 0.0, 0.3),
    ]
    background = [frozenset({A}), frozenset(), frozenset({B}), frozenset(), frozenset({A, C})]
    report = divergence_report(profiles, [android, ios], background=background)
    assert report.profiled_emojis == [A, B]
    assert report.divergent_emojis == [A]
    assert report.flags[A] == {"Android|iOS": True}
    assert report.emoji_divergent_fraction == 0.5
    assert report.tweet_affected_fraction == pytest.approx(3 / 8)
    assert report.emoji_tweet_fraction == pytest.approx(3 / 5)
    assert report.global_sample_fraction == pytest.approx(2 / 5)
    assert report.affected_among_emoji_tweets == pytest.approx(2 / 3)
    write_profiles_csv(profiles, tmp_path / "profiles.csv")
    write_divergence_json(report, tmp_path / "divergence.json")
    data = json.loads((tmp_path / "divergence.json").read_text(encoding="utf-8"))
    assert data["divergent_emojis"] == [A]
    assert (tmp_path / "profiles.csv").read_text(encoding="utf-8").startswith("platform,emoji,mean,var,ci_low,ci_high,n\n")


def test_divergence_welch_method_skips_degenerate_samples():
    android = _scored(Platform.ANDROID, [(0.9, {A}), (0.8, {A}), (0.85, {A}), (0.2, {B})])
    ios = _scored(Platform.IOS, [(-0.9, {A}), (-0.8, {A}), (-0.85, {A}), (0.1, {B})])
    profiles = [
        _profile("Android", A, 0.8, 0.9), _profile("iOS", A, -0.9, -0.8),
        _profile("Android", B, 0.2, 0.2), _profile("iOS", B, 0.1, 0.1),
    ]
    report = divergence_report(profiles, [android, ios], method="welch")
    assert report.flags[A]["Android|iOS"] is True
    assert report.flags[B]["Android|iOS"] is False
    with pytest.raises(ConfigError):
        divergence_report(profiles, [android, ios], method="bayes")


def test_welch_method_requires_every_profiled_platform_corpus():
    android = _scored(Platform.ANDROID, [(0.9, {A}), (0.8, {A}), (0.1, {A})])
    profiles = [_profile("Android", A, 0.1, 0.9), _profile("iOS", A, -0.9, -0.1)]
    with pytest.raises(ConfigError, match="iOS"):
        divergence_report(profiles, [android], method="welch")
    # ci 方法只用语料统计推文比例
    assert divergence_report(profiles, [android]).profiled_emojis == [A]
