import sys
import os

# 便于直接运行
sys.path.append(os.path.dirname(__file__))
from emojimap.embedding.sgns import TrainConfig, stripped_union, train_emoji_vectors, train_word_embedding  # noqa: E402
from emojimap.mapping.emoji_mapping import build_mapping, mapping_accuracy  # noqa: E402
from emojimap.synth.generator import SynthSpec, generate  # noqa: E402
from emojimap.text.tokenizer import Tokenizer  # noqa: E402


def main():
    roster = ["U+1F600", "U+1F602", "U+1F60D", "U+1F622", "U+1F620", "U+1F631"]
    # iOS 上前两个 emoji 的上下文互换
    swapped = {lbl: lbl for lbl in roster}
    swapped["U+1F600"], swapped["U+1F602"] = "U+1F602", "U+1F600"
    spec = SynthSpec(
        vocab_size=200,
        tweets={"Android": 1500, "iOS": 1500},
        roster=roster,
        correspondence={"iOS": swapped},
        partitions=["train"],
    )
    result = generate(spec)
    corpora = result.partition("train")
    tokenizer = Tokenizer(inventory=result.inventory)
    config = TrainConfig(min_count=2, emoji_min_count=20)

    W = train_word_embedding(stripped_union(corpora, tokenizer), config)
    sets = {p.value: train_emoji_vectors(c, W, config, tokenizer) for p, c in corpora.items()}
    table = build_mapping(sets["Android"], sets["iOS"])
    hits, total = mapping_accuracy(table, result.truth[("Android", "iOS")])
    print("Synth demo -> 词表:", W.N, "映射命中:", f"{hits}/{total}", "全部正确:", hits == total)


if __name__ == "__main__":
    main()
