from collections import Counter

import numpy as np
import pytest

from emojimap.corpus.platform_corpus import Platform
from emojimap.embedding.sgns import EmbeddingMatrix, EmojiEmbeddingSet
from emojimap.embedding.vocab import Vocab
from emojimap.errors import ConfigError, EmptyIntersection, ParseError, ZeroVector
from emojimap.mapping.emoji_mapping import (
    MappingEntry,
    MappingTable,
    apply_mapping,
    build_all_mappings,
    build_mapping,
    cosine_similarity,
    load_mapping,
    mapping_accuracy,
    nearest_words,
    save_mapping,
)
from emojimap.text.tokenizer import Token


def _set(platform, vectors):
    return EmojiEmbeddingSet(platform, {k: np.asarray(v, dtype=float) for k, v in vectors.items()})


def test_self_mapping_is_identity():
    rng = np.random.default_rng(2)
    labels = [f"U+{cp:X}" for cp in range(0x1F600, 0x1F60A)]
    s = _set(Platform.ANDROID, {lbl: rng.normal(size=8) for lbl in labels})
    table = build_mapping(s, s)
    assert table.as_dict() == {lbl: lbl for lbl in labels}
    assert all(abs(e.similarity - 1.0) < 1e-9 for e in table.entries.values())


def test_swapped_vectors_are_recovered():
    a = _set(Platform.ANDROID, {"U+1F600": [1, 0, 0], "U+1F602": [0, 1, 0], "U+1F60D": [0, 0, 1]})
    b = _set(Platform.IOS, {"U+1F600": [0, 1, 0], "U+1F602": [1, 0.1, 0], "U+1F60D": [0, 0, 2]})
    table = build_mapping(a, b)
    assert table.as_dict() == {"U+1F600": "U+1F602", "U+1F602": "U+1F600", "U+1F60D": "U+1F60D"}
    assert table["U+1F60D"] == "U+1F60D"
    assert table.entries["U+1F60D"].similarity == pytest.approx(1.0)


def test_ties_go_to_lowest_codepoint():
    a = _set(Platform.ANDROID, {"U+1F600": [1, 0], "U+1F602": [0, 1], "U+1F60D": [1, 1]})
    b = _set(Platform.IOS, {"U+1F600": [0, 1], "U+1F602": [1, 0], "U+1F60D": [0, 1]})
    # U+1F600 与 U+1F60D 在 b 中方向相同
    assert build_mapping(a, b)["U+1F602"] == "U+1F600"


def test_only_shared_emojis_are_mapped():
    a = _set(Platform.ANDROID, {"U+1F600": [1, 0], "U+1F602": [0, 1]})
    b = _set(Platform.IOS, {"U+1F600": [1, 0], "U+1F60D": [0, 1]})
    table = build_mapping(a, b)
    assert table.E == ["U+1F600"]
    assert table.excluded_source == ("U+1F602",)
    assert table.excluded_target == ("U+1F60D",)
    with pytest.raises(EmptyIntersection):
        build_mapping(_set(Platform.ANDROID, {"U+1F600": [1]}), _set(Platform.IOS, {"U+1F602": [1]}))


def test_zero_vector_is_rejected():
    a = _set(Platform.ANDROID, {"U+1F600": [0, 0]})
    with pytest.raises(ZeroVector):
        build_mapping(a, _set(Platform.IOS, {"U+1F600": [1, 0]}))


def test_build_all_mappings_covers_ordered_pairs():
    v = {"U+1F600": [1, 0], "U+1F602": [0, 1]}
    tables = build_all_mappings({Platform.IOS: _set(Platform.IOS, v), Platform.ANDROID: _set(Platform.ANDROID, v)})
    assert sorted(tables) == [("Android", "iOS"), ("iOS", "Android")]
    assert tables[("iOS", "Android")].source_name == "iOS"


def test_apply_mapping_rewrites_emojis_and_counts():
    table = MappingTable(Platform.IOS, Platform.ANDROID, {"U+1F600": MappingEntry("U+1F600", "U+1F602", 0.9)})
    stats = Counter()
    seq = (Token.word("hi"), Token.emoji("U+1F600"), Token.emoji("U+1F60D"))
    out = apply_mapping(seq, table, stats)
    assert out == (Token.word("hi"), Token.emoji("U+1F602"), Token.emoji("U+1F60D"))
    assert stats == Counter(mapped=1, unmapped=1)


def test_mapping_accuracy_counts_common_sources():
    a = _set(Platform.ANDROID, {"U+1F600": [1, 0], "U+1F602": [0, 1]})
    table = build_mapping(a, a)
    assert mapping_accuracy(table, {"U+1F600": "U+1F600", "U+1F602": "U+1F600", "U+1F60D": "U+1F60D"}) == (1, 2)


def test_nearest_words_order_and_ties():
    W = EmbeddingMatrix(
        np.array([[1.0, 0.0], [0.0, 1.0], [2.0, 0.0], [1.0, 1.0]]),
        Vocab(["zeta", "beta", "alpha", "gamma"], np.array([4, 3, 2, 1])),
    )
    assert nearest_words([1.0, 0.0], W, 3) == ["alpha", "zeta", "gamma"]
    with pytest.raises(ConfigError):
        nearest_words([1.0, 0.0], W, 5)
    with pytest.raises(ConfigError):
        nearest_words([1.0, 0.0], W, 0)


def test_mapping_file_roundtrip(tmp_path):
    a = _set(Platform.ANDROID, {"U+1F600": [1, 0], "U+1F602": [0.6, 0.8], "U+1F60D": [1, 1]})
    b = _set(Platform.IOS, {"U+1F600": [0, 1], "U+1F602": [1, 0], "U+2764": [1, 0]})
    table = build_mapping(a, b)
    path = tmp_path / "map.tsv"
    save_mapping(table, path)
    assert path.read_text(encoding="utf-8").splitlines()[0] == "#source=Android target=iOS"
    back = load_mapping(path)
    assert back.source_platform is Platform.ANDROID
    assert back.as_dict() == table.as_dict()
    assert back.excluded_source == ("U+1F60D",)
    for lbl in table.E:
        assert back.entries[lbl].similarity == table.entries[lbl].similarity
    again = tmp_path / "again.tsv"
    save_mapping(back, again)
    assert again.read_bytes() == path.read_bytes()


@pytest.mark.parametrize("body", [
    "U+1F600\tU+1F602\t0.5\nU+1F600\tU+1F600\t0.4\n",
    "U+1F600\tU+1F602\t1.5\n",
    "smile\tU+1F602\t0.5\n",
    "U+1F600\tU+1F602\n",
    "U+1F600\tU+1F602\t0.5\n",
])
def test_malformed_mapping_files(tmp_path, body):
    path = tmp_path / "bad.tsv"
    path.write_text("#source=Android target=iOS\n" + body, encoding="utf-8")
    with pytest.raises(ParseError):
        load_mapping(path)


def test_cosine_similarity_bounds_and_zero_vector():
    assert cosine_similarity([1.0, 0.0], [2.0, 0.0]) == pytest.approx(1.0)
    assert cosine_similarity([1.0, 0.0], [-3.0, 0.0]) == pytest.approx(-1.0)
    assert cosine_similarity([1.0, 0.0], [0.0, 5.0]) == pytest.approx(0.0)
    with pytest.raises(ZeroVector):
        cosine_similarity([0.0, 0.0], [1.0, 1.0])


def test_mapping_file_keeps_full_precision_and_checks_targets(tmp_path):
    path = tmp_path / "map.tsv"
    sim = 0.1 + 0.2
    table = MappingTable(Platform.ANDROID, Platform.IOS, {
        "U+1F600": MappingEntry("U+1F600", "U+1F602", sim),
        "U+1F602": MappingEntry("U+1F602", "U+1F600", -1 / 3),
    })
    save_mapping(table, path)
    assert load_mapping(path).entries["U+1F600"].similarity == sim
    assert load_mapping(path).entries["U+1F602"].similarity == -1 / 3
    with pytest.raises(ParseError) as exc:
        load_mapping(path, target_emojis=["U+1F600"])
    assert exc.value.line_no == 2
