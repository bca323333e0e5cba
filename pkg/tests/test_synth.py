import json

import pytest

from emojimap.corpus.platform_corpus import Platform, read_corpus_dir
from emojimap.errors import SpecInvalid
from emojimap.mapping.emoji_mapping import load_mapping
from emojimap.sentiment.lexicon import LexiconScorer, load_lexicon
from emojimap.synth.generator import MAX_LEN, MIN_LEN, SynthSpec, generate, load_synth_spec, truth_path, write_synth
from emojimap.text.tokenizer import Tokenizer, emoji_labels, word_surfaces


@pytest.mark.parametrize("kwargs", [
    {"tweets": {"BlackBerry": 10}},
    {"tweets": {"Unknown": 10}},
    {"roster": []},
    {"roster": ["U+1F600", "U+1F600"]},
    {"roster": ["smile"]},
    {"vocab_size": 10},
    {"sentiment_words": 0},
    {"correspondence": {"iOS": {"U+1F600": "U+1F602"}}},
    {"partitions": ["train", "train"]},
    {"sentiment_source": "emoji"},
    {"sentiment_source": "cue", "cue_words": 0},
])
def test_invalid_specs(kwargs):
    with pytest.raises(SpecInvalid):
        SynthSpec(**kwargs)


def test_spec_file_rejects_unknown_fields(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps({"vocab_size": 300, "colour": "red"}), encoding="utf-8")
    with pytest.raises(SpecInvalid):
        load_synth_spec(path)
    path.write_text(json.dumps(SynthSpec().to_dict()), encoding="utf-8")
    assert load_synth_spec(path) == SynthSpec()


def test_tweets_carry_one_roster_emoji_and_signed_sentiment(small_synth):
    spec = small_synth.spec
    tok = Tokenizer(inventory=small_synth.inventory)
    scorer = LexiconScorer(small_synth.lexicon, tok)
    for platform, corpus in small_synth.partition("train").items():
        scores = scorer.score_tweets(corpus.tweets)
        for tweet, s in zip(corpus.tweets, scores):
            seq = tok.tokenize(tweet.text)
            (label,) = emoji_labels(seq)
            assert label in spec.roster
            assert MIN_LEN <= len(word_surfaces(seq)) <= MAX_LEN
            base = spec.base_of(platform, label)
            assert (s > 0) == (spec.sign_of(base) > 0)
            assert abs(s) >= 0.5
        assert corpus.tweets[0].id == f"{platform.value}-train-0"


def test_ground_truth_follows_correspondence(small_synth):
    truth = small_synth.truth[("Android", "iOS")]
    assert truth.as_dict() == {"U+1F600": "U+1F602", "U+1F602": "U+1F600", "U+1F60D": "U+1F60D", "U+1F622": "U+1F622"}
    assert small_synth.truth[("iOS", "Android")].as_dict() == truth.as_dict()
    assert small_synth.spec.divergent == ["U+1F600", "U+1F602"]


def test_pools_are_disjoint(small_synth):
    pools = list(small_synth.pools.values())
    seen = set()
    for pool in pools:
        assert not seen & set(pool)
        seen |= set(pool)


def test_generation_is_deterministic(small_synth):
    again = generate(small_synth.spec)
    for partition in ("train", "eval"):
        for platform in (Platform.ANDROID, Platform.IOS):
            a = [t.text for t in small_synth.partition(partition)[platform]]
            b = [t.text for t in again.partition(partition)[platform]]
            assert a == b
    assert [t.text for t in small_synth.partition("train")[Platform.IOS]][:5] != \
        [t.text for t in small_synth.partition("eval")[Platform.IOS]][:5]


def test_write_synth_layout(small_synth, tmp_path):
    write_synth(small_synth, tmp_path)
    train = read_corpus_dir(tmp_path / "train")
    assert train[Platform.ANDROID].partition == "train"
    assert len(train[Platform.IOS]) == 400
    assert read_corpus_dir(tmp_path / "eval")[Platform.ANDROID].partition == "eval"
    assert load_mapping(truth_path(tmp_path, "Android", "iOS")).as_dict() == small_synth.truth[("Android", "iOS")].as_dict()
    assert dict(load_lexicon(tmp_path / "lexicon.tsv").polarities) == dict(small_synth.lexicon.polarities)
    assert (tmp_path / "train.jsonl").exists()
    assert json.loads((tmp_path / "synth_spec.json").read_text(encoding="utf-8"))["seed"] == 3


def test_cue_words_carry_the_label_instead_of_the_pool(small_synth):
    spec = SynthSpec(**{**small_synth.spec.to_dict(), "sentiment_source": "cue", "cue_words": 50, "pool_fraction": 0.0})
    result = generate(spec)
    tok = Tokenizer(inventory=result.inventory)
    scorer = LexiconScorer(result.lexicon, tok)
    assert sum(1 for w in result.lexicon.polarities if w.startswith("pos")) == 50
    pool_words = {w for pool in result.pools.values() for w in pool}
    for platform, corpus in result.partition("train").items():
        scores = scorer.score_tweets(corpus.tweets)
        for tweet, s in zip(corpus.tweets, scores):
            seq = tok.tokenize(tweet.text)
            (label,) = emoji_labels(seq)
            words = word_surfaces(seq)
            cues = [w for w in words if w.startswith(("pos", "neg"))]
            assert len(cues) == 1
            assert not pool_words & set(words)
            sign = spec.sign_of(spec.base_of(platform, label))
            assert cues[0].startswith("pos" if sign > 0 else "neg")
            assert (s > 0) == (sign > 0) and abs(s) >= 0.5


def test_pool_mode_output_does_not_depend_on_cue_settings(small_synth):
    again = generate(SynthSpec(**{**small_synth.spec.to_dict(), "cue_words": 9}))
    a = [t.text for t in small_synth.partition("train")[Platform.IOS]]
    assert a == [t.text for t in again.partition("train")[Platform.IOS]]
