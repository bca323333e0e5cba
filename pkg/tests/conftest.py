import os
import sys

import pytest

# 便于直接在仓库根目录运行 pytest
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from emojimap.corpus.platform_corpus import Platform, PlatformCorpus, Tweet  # noqa: E402
from emojimap.synth.generator import SynthSpec, generate  # noqa: E402
from emojimap.text.tokenizer import EmojiInventory, TokenizeConfig, Tokenizer  # noqa: E402

GRIN = "\U0001F600"
JOY = "\U0001F602"
HEART_EYES = "\U0001F60D"


def make_corpus(platform, texts, partition="default"):
    tweets = [Tweet(f"{platform.value}-{i}", text, "test", platform) for i, text in enumerate(texts)]
    return PlatformCorpus(platform, tweets, partition)


@pytest.fixture
def toy_inventory():
    return EmojiInventory.from_labels(["U+1F600", "U+1F602", "U+1F60D"])


@pytest.fixture
def toy_tokenizer(toy_inventory):
    return Tokenizer(TokenizeConfig(stopwords=frozenset({"the", "a", "is"})), toy_inventory)


@pytest.fixture(scope="session")
def small_synth():
    spec = SynthSpec(
        vocab_size=120,
        tweets={"Android": 400, "iOS": 400},
        roster=["U+1F600", "U+1F602", "U+1F60D", "U+1F622"],
        pool_size=15,
        correspondence={"iOS": {"U+1F600": "U+1F602", "U+1F602": "U+1F600", "U+1F60D": "U+1F60D", "U+1F622": "U+1F622"}},
        seed=3,
    )
    return generate(spec)


@pytest.fixture
def android_ios():
    return Platform.ANDROID, Platform.IOS
