"""命令行入口：ingest → train-words → train-emoji → build-map / jaccard / profile / scale / evaluate / sweep。

每个子命令把产物写进 --out 目录，并附带一份 <子命令>.manifest.json。
领域错误、文件与外部打分器错误都以单行 "error: <类名>: <信息>" 输出到 stderr，退出码 2。
"""
import argparse
import json
import logging
import subprocess
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from emojimap.analysis.divergence import divergence_report, write_divergence_json, write_profiles_csv
from emojimap.analysis.overlap import neighbor_overlap_matrix, write_overlap_csv
from emojimap.analysis.sentiment_profile import platform_bias, profile_all, score_corpus
from emojimap.config import PipelineConfig, resolve_config, write_manifest
from emojimap.corpus.platform_corpus import (
    ingest_files,
    iter_records,
    load_source_table,
    read_corpus_dir,
    read_partition_tag,
    write_corpus_dir,
    write_partition_tag,
)
from emojimap.embedding.io import load_emoji_embedding, load_word_embedding, save_emoji_embedding, save_word_embedding
from emojimap.embedding.sgns import (
    EmojiEmbeddingSet,
    random_baseline_corpus,
    stripped_union,
    train_emoji_vectors,
    train_word_embedding,
)
from emojimap.errors import ConfigError, EmojiMapError, NoEmojis
from emojimap.evaluation.harness import (
    MappingResources,
    evaluate_all_pairs,
    score_pool,
    sweep_significance,
    threshold_sweep,
    write_reports_csv,
    write_reports_json,
    write_significance_json,
)
from emojimap.mapping.emoji_mapping import build_all_mappings, load_mapping, mapping_accuracy, save_mapping
from emojimap.sentiment.lexicon import (
    DEFAULT_NEGATORS,
    ExternalScorer,
    LexiconScorer,
    TweetScorer,
    load_lexicon,
    load_negators,
)
from emojimap.synth.generator import SynthSpec, generate, load_synth_spec, truth_path, write_synth
from emojimap.text.tokenizer import DEFAULT_INVENTORY, TokenizeConfig, Tokenizer, load_inventory, load_stopwords
from emojimap.text.stopwords import ENGLISH_STOPWORDS
from emojimap.vecmath import derive_rng

logger = logging.getLogger("emojimap")

RANDOM_LABEL = "Random"
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

Outputs = Tuple[List[Path], Dict[str, Any]]


# ---------- 由配置构造组件 ----------

def build_tokenizer(config: PipelineConfig) -> Tokenizer:
    paths = config.paths
    stopwords = load_stopwords(paths.stopwords) if paths.stopwords else ENGLISH_STOPWORDS
    inventory = load_inventory(paths.inventory) if paths.inventory else DEFAULT_INVENTORY
    return Tokenizer(TokenizeConfig(stopwords=stopwords), inventory)


def build_scorer(config: PipelineConfig, tokenizer: Tokenizer) -> TweetScorer:
    paths = config.paths
    if paths.scorer_command:
        return ExternalScorer(paths.scorer_command, tokenizer)
    if not paths.lexicon:
        raise ConfigError("需要 --lexicon 或 --scorer-command")
    negators = load_negators(paths.negators) if paths.negators else DEFAULT_NEGATORS
    return LexiconScorer(load_lexicon(paths.lexicon, negators), tokenizer)


def emoji_file(out: Path, name: str) -> Path:
    return out / f"emoji_{name}.vec"


def map_file(out: Path, source: str, target: str) -> Path:
    return out / f"map_{source}__{target}.tsv"


def _load_sets(paths: Sequence[str]) -> Dict[str, EmojiEmbeddingSet]:
    sets = {}
    for p in paths:
        s = load_emoji_embedding(p)
        sets[s.name] = s
    return sets


# ---------- 子命令 ----------

def cmd_ingest(args, config: PipelineConfig, out: Path) -> Outputs:
    table = load_source_table(config.paths.sources)
    result = ingest_files(args.files, table, args.partition, args.dedupe_by_id)
    written = write_corpus_dir(result, out, args.partition)
    return written, {"files": list(args.files), "partition": args.partition}


def cmd_train_words(args, config: PipelineConfig, out: Path) -> Outputs:
    tokenizer = build_tokenizer(config)
    union = []
    for directory in args.corpus:
        union.extend(stripped_union(read_corpus_dir(directory), tokenizer))
    W = train_word_embedding(union, config.train)
    path = out / "words.vec"
    save_word_embedding(W, path)
    return [path, path.with_name(path.name + ".vocab")], {"corpus": list(args.corpus)}


def cmd_train_emoji(args, config: PipelineConfig, out: Path) -> Outputs:
    tokenizer = build_tokenizer(config)
    corpora = read_corpus_dir(args.corpus)
    W = load_word_embedding(args.words)
    written: List[Path] = []
    jobs = [(p.value, c) for p, c in sorted(corpora.items(), key=lambda kv: kv[0].value)]
    if args.random_baseline:
        rng = derive_rng(config.seed, "random-baseline")
        jobs.append((RANDOM_LABEL, random_baseline_corpus(corpora, rng)))
    for name, corpus in jobs:
        try:
            emojis = train_emoji_vectors(corpus, W, config.train, tokenizer, label=name if name == RANDOM_LABEL else None)
        except NoEmojis as exc:
            logger.warning("跳过 %s: %s", name, exc)
            continue
        path = emoji_file(out, name)
        save_emoji_embedding(emojis, path)
        written += [path, path.with_name(path.name + ".counts")]
    if not written:
        raise NoEmojis("没有任何平台得到 emoji 向量")
    partition = read_partition_tag(args.corpus, config.mapping_partition)
    written.append(write_partition_tag(out, partition))
    return written, {"corpus": args.corpus, "words": args.words, "partition": partition}


def cmd_build_map(args, config: PipelineConfig, out: Path) -> Outputs:
    sets = _load_sets(args.emoji)
    if len(sets) < 2:
        raise ConfigError("build-map 至少需要两个平台的 emoji 向量")
    written: List[Path] = []
    recovery: Dict[str, Dict[str, int]] = {}
    for (s, t), table in sorted(build_all_mappings(sets).items()):
        path = map_file(out, s, t)
        save_mapping(table, path)
        written += [path, path.with_name(path.name + ".excluded.json")]
        if args.truth:
            truth = truth_path(args.truth, s, t)
            if truth.exists():
                hits, total = mapping_accuracy(table, load_mapping(truth))
                recovery[f"{s}__{t}"] = {"hits": hits, "total": total}
                logger.info("%s -> %s: 真值命中 %d/%d", s, t, hits, total)
    if recovery:
        path = out / "recovery.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(recovery, fh, indent=2, sort_keys=True)
            fh.write("\n")
        written.append(path)
    return written, {"emoji": list(args.emoji), "truth": args.truth}


def cmd_jaccard(args, config: PipelineConfig, out: Path) -> Outputs:
    W = load_word_embedding(args.words)
    matrix = neighbor_overlap_matrix(_load_sets(args.emoji), W, config.analysis.k)
    path = out / "overlap.csv"
    write_overlap_csv(matrix, path)
    return [path], {"words": args.words, "emoji": list(args.emoji)}


def _scored(args, config: PipelineConfig):
    tokenizer = build_tokenizer(config)
    scorer = build_scorer(config, tokenizer)
    corpora = read_corpus_dir(args.corpus)
    scored = [score_corpus(corpora[p], scorer) for p in sorted(corpora, key=lambda p: p.value)]
    return tokenizer, scored


def _write_profiles(scored, config: PipelineConfig, out: Path):
    profiles = profile_all(scored, config.analysis, workers=1 if config.deterministic else config.workers)
    path = out / "profiles.csv"
    write_profiles_csv(profiles, path)
    bias_path = out / "bias.json"
    with open(bias_path, "w", encoding="utf-8") as fh:
        json.dump({sc.name: platform_bias(sc) for sc in scored}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return profiles, [path, bias_path]


def cmd_profile(args, config: PipelineConfig, out: Path) -> Outputs:
    _, scored = _scored(args, config)
    _, written = _write_profiles(scored, config, out)
    return written, {"corpus": args.corpus}


def cmd_scale(args, config: PipelineConfig, out: Path) -> Outputs:
    tokenizer, scored = _scored(args, config)
    profiles, written = _write_profiles(scored, config, out)
    background = None
    if args.background:
        with open(args.background, "r", encoding="utf-8") as fh:
            background = [frozenset(tokenizer.emojis_in(t.text)) for t in iter_records(fh, label=args.background)]
    report = divergence_report(profiles, scored, config.analysis.method, config.analysis.alpha, background)
    path = out / "divergence.json"
    write_divergence_json(report, path)
    return written + [path], {"corpus": args.corpus, "background": args.background}


def _resources(args, config: PipelineConfig) -> MappingResources:
    sets = _load_sets(args.emoji)
    sets.pop(RANDOM_LABEL, None)
    partition = read_partition_tag(Path(args.emoji[0]).parent, config.mapping_partition)
    return MappingResources(load_word_embedding(args.words), sets, partition)


def _pools(args, config: PipelineConfig):
    tokenizer = build_tokenizer(config)
    scorer = build_scorer(config, tokenizer)
    corpora = read_corpus_dir(args.corpus)
    return {p.value: score_pool(c, scorer) for p, c in corpora.items()}


def cmd_evaluate(args, config: PipelineConfig, out: Path) -> Outputs:
    resources = _resources(args, config)
    reports = evaluate_all_pairs(_pools(args, config), resources, config.eval)
    json_path, csv_path = out / "evaluation.json", out / "evaluation.csv"
    write_reports_json(reports, json_path)
    write_reports_csv(reports, csv_path)
    return [json_path, csv_path], {"corpus": args.corpus, "words": args.words, "emoji": list(args.emoji)}


def cmd_sweep(args, config: PipelineConfig, out: Path) -> Outputs:
    resources = _resources(args, config)
    pools = _pools(args, config)
    names = sorted(n for n in pools if n in resources.emoji_sets)
    source = args.source or (names[0] if names else None)
    target = args.target or next((n for n in names if n != source), None)
    if source not in pools or target not in pools or source == target:
        raise ConfigError(f"无法确定源/目标平台: {source} / {target}")
    sweep = threshold_sweep(pools[source], pools[target], config.eval.thresholds, config.eval, resources)
    tests = sweep_significance(sweep, config.eval)
    paths = [out / "sweep.json", out / "sweep.csv", out / "significance.json"]
    write_reports_json(sweep.reports, paths[0])
    write_reports_csv(sweep.reports, paths[1])
    write_significance_json(sweep, tests, paths[2])
    return paths, {"corpus": args.corpus, "source": source, "target": target}


def cmd_synth(args, config: PipelineConfig, out: Path) -> Outputs:
    spec = load_synth_spec(args.spec) if args.spec else SynthSpec(seed=config.seed)
    written = write_synth(generate(spec), out)
    return written, {"spec": args.spec}


COMMANDS: Dict[str, Callable[..., Outputs]] = {
    "ingest": cmd_ingest,
    "train-words": cmd_train_words,
    "train-emoji": cmd_train_emoji,
    "build-map": cmd_build_map,
    "jaccard": cmd_jaccard,
    "profile": cmd_profile,
    "scale": cmd_scale,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "synth": cmd_synth,
}


# ---------- 参数解析 ----------

def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("通用参数")
    g.add_argument("--config", help="JSON 配置文件")
    g.add_argument("--seed", type=int, help="主随机种子")
    g.add_argument("--deterministic", action=argparse.BooleanOptionalAction, default=None, help="单线程、逐位可复现")
    g.add_argument("--workers", type=int, help="训练线程数（确定性模式下忽略）")
    g.add_argument("--out", help="输出目录")
    g.add_argument("--verbose", action="store_true", help="DEBUG 日志")
    g.add_argument("--quiet", action="store_true", help="只输出 WARNING 及以上")
    g.add_argument("--inventory", help="emoji 清单文件")
    g.add_argument("--stopwords", help="停用词文件")
    g.add_argument("--lexicon", help="情感词典 TSV")
    g.add_argument("--negators", help="否定词文件")
    g.add_argument("--scorer-command", help="外部打分程序（JSONL 进，小数出）")
    g.add_argument("--sources", help="来源 → 平台的扩展 JSON")
    g.add_argument("--dim", type=int, help="向量维度 K")
    g.add_argument("--window", type=int)
    g.add_argument("--negative", type=int)
    g.add_argument("--epochs", type=int)
    g.add_argument("--min-count", type=int)
    g.add_argument("--emoji-min-count", type=int)
    g.add_argument("--negative-mode", choices=["sampled", "full"])
    g.add_argument("--k", type=int, help="近邻词个数")
    g.add_argument("--bootstrap", type=int, help="bootstrap 次数")
    g.add_argument("--method", choices=["ci", "welch"], help="分歧判定方法")
    g.add_argument("--threshold", type=float, help="evaluate 使用的情感阈值")
    g.add_argument("--thresholds", type=float, nargs="+", help="sweep 使用的阈值列表")
    g.add_argument("--no-mapping-space", choices=["own", "target"], help="NoMapping 使用的 emoji 向量空间")
    g.add_argument("--paired", action="store_true", default=None, help="配对 t 检验")
    return common


def create_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="emojimap", description="跨平台 emoji 向量、映射与情感分歧分析")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="JSONL 推文按平台拆分")
    p.add_argument("files", nargs="+")
    p.add_argument("--partition", default="default")
    p.add_argument("--dedupe-by-id", action="store_true")

    p = sub.add_parser("train-words", parents=[common], help="在去 emoji 的合并语料上训练共享词向量")
    p.add_argument("--corpus", nargs="+", required=True, help="一个或多个语料目录")

    p = sub.add_parser("train-emoji", parents=[common], help="冻结词向量，训练各平台 emoji 向量")
    p.add_argument("--corpus", required=True)
    p.add_argument("--words", required=True)
    p.add_argument("--random-baseline", action="store_true", help="额外训练平台无关的随机对照集")

    p = sub.add_parser("build-map", parents=[common], help="所有有序平台对的 emoji 映射")
    p.add_argument("--emoji", nargs="+", required=True)
    p.add_argument("--truth", help="含 truth_<S>__<T>.tsv 的目录，用于统计命中")

    p = sub.add_parser("jaccard", parents=[common], help="近邻词 Jaccard 矩阵")
    p.add_argument("--words", required=True)
    p.add_argument("--emoji", nargs="+", required=True)

    p = sub.add_parser("profile", parents=[common], help="偏置校正后的 emoji 情感画像")
    p.add_argument("--corpus", required=True)

    p = sub.add_parser("scale", parents=[common], help="误读规模统计")
    p.add_argument("--corpus", required=True)
    p.add_argument("--background", help="背景样本 JSONL")

    for name, text in (("evaluate", "所有平台对的三种表示比较"), ("sweep", "阈值扫描与显著性检验")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("--corpus", required=True, help="评测分区的语料目录")
        p.add_argument("--words", required=True)
        p.add_argument("--emoji", nargs="+", required=True)
        if name == "sweep":
            p.add_argument("--source")
            p.add_argument("--target")

    p = sub.add_parser("synth", parents=[common], help="生成带真值的合成语料")
    p.add_argument("--spec", help="SynthSpec JSON")
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    flat = {
        ("seed",): args.seed,
        ("deterministic",): args.deterministic,
        ("workers",): args.workers,
        ("out",): args.out,
        ("paths", "inventory"): args.inventory,
        ("paths", "stopwords"): args.stopwords,
        ("paths", "lexicon"): args.lexicon,
        ("paths", "negators"): args.negators,
        ("paths", "scorer_command"): args.scorer_command,
        ("paths", "sources"): args.sources,
        ("train", "dim"): args.dim,
        ("train", "window"): args.window,
        ("train", "negative"): args.negative,
        ("train", "epochs"): args.epochs,
        ("train", "min_count"): args.min_count,
        ("train", "emoji_min_count"): args.emoji_min_count,
        ("train", "negative_mode"): args.negative_mode,
        ("analysis", "k"): args.k,
        ("analysis", "bootstrap"): args.bootstrap,
        ("analysis", "method"): args.method,
        ("eval", "threshold"): args.threshold,
        ("eval", "thresholds"): args.thresholds,
        ("eval", "no_mapping_emoji_space"): args.no_mapping_space,
        ("eval", "paired"): args.paired,
    }
    out: Dict[str, Any] = {}
    for keys, value in flat.items():
        if value is None:
            continue
        node = out
        for k in keys[:-1]:
            node = node.setdefault(k, {})
        node[keys[-1]] = value
    return out


def _configure_logging(args: argparse.Namespace) -> None:
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format=LOG_FORMAT)


def run(args: argparse.Namespace) -> int:
    config = resolve_config(args.config, overrides_from_args(args))
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    logger.info("%s: 输出目录 %s, 种子 %d, deterministic=%s", args.command, out, config.seed, config.deterministic)
    written, inputs = COMMANDS[args.command](args, config, out)
    manifest = write_manifest(out, args.command, config, written, inputs)
    logger.info("%s 完成，共 %d 个产物，清单 %s", args.command, len(written), manifest)
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = create_parser().parse_args(argv)
    _configure_logging(args)
    try:
        return run(args)
    except (EmojiMapError, OSError, ValueError, subprocess.SubprocessError) as exc:
        logger.debug("%s 失败", args.command, exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
