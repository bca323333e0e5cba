import os
import sys
import statistics
import time

# 尝试导入 matplotlib，如果失败则只打印文本提示
try:
    import matplotlib.pyplot as plt
    HAS_MATPLOTLIB = True
except ImportError:
    HAS_MATPLOTLIB = False
    print("[提示] 未检测到 matplotlib，将跳过图表生成。建议安装: pip install matplotlib")

sys.path.append(os.path.dirname(__file__))
from emojimap.config import env_info  # noqa: E402
from emojimap.embedding.sgns import TrainConfig, stripped_union, train_emoji_vectors, train_word_embedding  # noqa: E402
from emojimap.evaluation.harness import EvalConfig, MappingResources, ReprMode, score_pool, threshold_sweep  # noqa: E402
from emojimap.mapping.emoji_mapping import build_mapping, mapping_accuracy  # noqa: E402
from emojimap.sentiment.lexicon import LexiconScorer  # noqa: E402
from emojimap.synth.generator import SynthSpec, generate  # noqa: E402
from emojimap.text.tokenizer import Tokenizer  # noqa: E402

STAGES = ["generate", "train_words", "train_emoji", "build_map"]


def swapped_spec(vocab_size: int, tweets: int, roster_size: int, seed: int) -> SynthSpec:
    """iOS 上相邻的 emoji 两两交换上下文。"""
    roster = [f"U+{cp:04X}" for cp in range(0x1F600, 0x1F600 + roster_size)]
    corr = {lbl: lbl for lbl in roster}
    for a, b in zip(roster[0::2], roster[1::2]):
        corr[a], corr[b] = b, a
    return SynthSpec(
        vocab_size=vocab_size,
        tweets={"Android": tweets, "iOS": tweets},
        roster=roster,
        pool_size=max(10, vocab_size // (2 * roster_size)),
        correspondence={"iOS": corr},
        seed=seed,
    )


def plot_results(results, sweep):
    """
    绘制基准测试结果图表
    """
    if not HAS_MATPLOTLIB:
        return

    names = [r["name"] for r in results]
    fig, axs = plt.subplots(2, 2, figsize=(14, 10))
    fig.suptitle('Emoji Mapping Pipeline Benchmark', fontsize=16)

    # 子图1: 各阶段耗时
    ax = axs[0, 0]
    x = range(len(names))
    width = 0.2
    for i, stage in enumerate(STAGES):
        ax.bar([j + (i - 1.5) * width for j in x],
               [r[f"{stage}_avg_ms"] for r in results], width,
               yerr=[r[f"{stage}_std_ms"] for r in results], capsize=5, label=stage)
    ax.set_ylabel('Time (ms)')
    ax.set_title('Stage Latency (Mean & Std Dev)')
    ax.set_xticks(list(x))
    ax.set_xticklabels(names, rotation=15)
    ax.legend()
    ax.grid(axis='y', linestyle='--', alpha=0.7)

    # 子图2: 映射恢复率
    ax = axs[0, 1]
    ax.bar(list(x), [r["recovery"] * 100 for r in results], 0.4, color='#2ca02c')
    ax.set_ylabel('Recovered Pairs (%)')
    ax.set_ylim(0, 110)
    ax.set_title('Planted Mapping Recovery')
    ax.set_xticks(list(x))
    ax.set_xticklabels(names, rotation=15)

    # 子图3/4: 阈值扫描的准确率与 F1
    thresholds = [rep.threshold for rep in sweep.reports]
    for ax, metric, title in ((axs[1, 0], "accuracy", "Accuracy"), (axs[1, 1], "f1", "F1 (positive)")):
        for mode in ReprMode:
            if metric == "accuracy":
                ys = [rep.mean_accuracy(mode) for rep in sweep.reports]
            else:
                ys = [rep.mean_f1(mode) for rep in sweep.reports]
            ax.plot(thresholds, ys, '-o', label=mode.value)
        ax.set_xlabel('Sentiment Threshold')
        ax.set_ylabel(title)
        ax.set_title(f'Threshold Sweep: {title}')
        ax.legend()
        ax.grid(linestyle='--', alpha=0.7)

    plt.tight_layout()
    plt.savefig('benchmark_results.png')
    print(f"\n[Info] 图表已保存至: {os.path.abspath('benchmark_results.png')}")


def run_once(spec: SynthSpec, config: TrainConfig):
    times = {}
    t0 = time.perf_counter()
    result = generate(spec)
    times["generate"] = time.perf_counter() - t0

    corpora = result.partition("train")
    tokenizer = Tokenizer(inventory=result.inventory)
    t1 = time.perf_counter()
    W = train_word_embedding(stripped_union(corpora, tokenizer), config)
    times["train_words"] = time.perf_counter() - t1

    t2 = time.perf_counter()
    sets = {p.value: train_emoji_vectors(c, W, config, tokenizer) for p, c in corpora.items()}
    times["train_emoji"] = time.perf_counter() - t2

    t3 = time.perf_counter()
    table = build_mapping(sets["Android"], sets["iOS"])
    times["build_map"] = time.perf_counter() - t3

    hits, total = mapping_accuracy(table, result.truth[("Android", "iOS")])
    return times, hits, total, (result, W, sets, tokenizer)


def measure(name, spec: SynthSpec, config: TrainConfig, trials: int):
    samples = {stage: [] for stage in STAGES}
    recovered = 0
    compared = 0
    for _ in range(trials):
        times, hits, total, artifacts = run_once(spec, config)
        for stage in STAGES:
            samples[stage].append(times[stage])
        recovered += hits
        compared += total

    def stat(xs):
        return (statistics.mean(xs), statistics.pstdev(xs))

    print(f"\n=== {name} ===")
    print(f"参数: vocab={spec.vocab_size}, 每平台推文={spec.tweets['Android']}, emoji={len(spec.roster)}, K={config.dim}")
    out = {"name": name, "recovery": recovered / compared if compared else 0.0}
    for stage in STAGES:
        avg, std = stat(samples[stage])
        out[f"{stage}_avg_ms"] = avg * 1000
        out[f"{stage}_std_ms"] = std * 1000
        print(f"{stage}: 均值 {avg*1000:.2f} ms, 标准差 {std*1000:.2f} ms")
    print(f"映射恢复: {recovered}/{compared} = {out['recovery']*100:.2f}%")
    return out, artifacts


def main():
    trials = 3
    print("测试环境:", env_info())
    config = TrainConfig(min_count=2, emoji_min_count=20)

    results = []
    small, _ = measure("small (2x2k)", swapped_spec(200, 2000, 6, seed=11), config, trials)
    results.append(small)
    medium, artifacts = measure("medium (2x10k)", swapped_spec(1000, 10000, 12, seed=12), config, trials)
    results.append(medium)

    # 用最后一次 medium 运行的产物做阈值扫描
    result, W, sets, tokenizer = artifacts
    scorer = LexiconScorer(result.lexicon, tokenizer)
    pools = {p.value: score_pool(c, scorer) for p, c in result.partition("eval").items()}
    resources = MappingResources(W, sets, "train")
    eval_config = EvalConfig(no_mapping_emoji_space="target")
    sweep = threshold_sweep(pools["Android"], pools["iOS"], None, eval_config, resources)
    for rep in sweep.reports:
        print(f"阈值 {rep.threshold:.1f}: A1={rep.A1:.3f} A2={rep.A2:.3f} NoEmojis={rep.no_emojis_accuracy:.3f}")

    # 在最后统一生成图表
    plot_results(results, sweep)


if __name__ == "__main__":
    main()
