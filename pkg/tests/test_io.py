import numpy as np
import pytest

from emojimap.corpus.platform_corpus import Platform
from emojimap.embedding.io import load_emoji_embedding, load_word_embedding, save_emoji_embedding, save_word_embedding
from emojimap.embedding.sgns import EmbeddingMatrix, EmojiEmbeddingSet
from emojimap.embedding.vocab import Vocab
from emojimap.errors import ParseError


def test_word_embedding_roundtrip_is_exact(tmp_path):
    rng = np.random.default_rng(4)
    W = EmbeddingMatrix(rng.normal(size=(3, 4)) / 7, Vocab(["good", "day", "sun"], np.array([9, 4, 2])))
    path = tmp_path / "words.vec"
    save_word_embedding(W, path)
    back = load_word_embedding(path)
    assert back.vocab.index2word == ["good", "day", "sun"]
    assert back.vocab.counts.tolist() == [9, 4, 2]
    assert np.array_equal(back.vectors, W.vectors)
    assert path.read_text(encoding="utf-8").splitlines()[0] == "3 4"


def test_missing_vocab_sidecar_defaults_counts(tmp_path):
    path = tmp_path / "w.vec"
    path.write_text("2 2\na 0.1 0.2\nb 0.3 0.4\n", encoding="utf-8")
    assert load_word_embedding(path).vocab.counts.tolist() == [1, 1]


def test_emoji_embedding_roundtrip_keeps_platform_and_counts(tmp_path):
    s = EmojiEmbeddingSet(
        Platform.IOS,
        {"U+1F602": np.array([0.1, -0.2]), "U+1F600": np.array([1 / 3, 2 / 3])},
        {"U+1F602": 12, "U+1F600": 50},
    )
    path = tmp_path / "emoji_iOS.vec"
    save_emoji_embedding(s, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "#platform: iOS"
    assert lines[2].startswith("U+1F600 ")
    back = load_emoji_embedding(path)
    assert back.platform is Platform.IOS
    assert back.counts == s.counts
    for label in s.labels:
        assert np.array_equal(back[label], s[label])


def test_non_platform_names_stay_strings(tmp_path):
    s = EmojiEmbeddingSet("Random", {"U+1F600": np.array([1.0])})
    path = tmp_path / "emoji_Random.vec"
    save_emoji_embedding(s, path)
    assert load_emoji_embedding(path).name == "Random"


@pytest.mark.parametrize("content, line_no", [
    ("3 2\na 1 2\nb 1 2\n", 1),
    ("2 2\na 1 2\nb 1\n", 3),
    ("2 2\na 1 2\nb 1 x\n", 3),
    ("two 2\n", 1),
])
def test_malformed_files_report_line(tmp_path, content, line_no):
    path = tmp_path / "bad.vec"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(ParseError) as info:
        load_word_embedding(path)
    assert info.value.line_no == line_no


def test_emoji_file_requires_platform_header(tmp_path):
    path = tmp_path / "e.vec"
    path.write_text("1 1\nU+1F600 0.5\n", encoding="utf-8")
    with pytest.raises(ParseError):
        load_emoji_embedding(path)
