import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import FrozenSet, Iterable, List, Optional, Tuple, Union

from emojimap.errors import ConfigError, ParseError
from emojimap.text.stopwords import ENGLISH_STOPWORDS

PathLike = Union[str, Path]


class TokenKind(str, Enum):
    WORD = "Word"
    EMOJI = "Emoji"
    URL = "UrlPlaceholder"
    MENTION = "MentionPlaceholder"


URL_SURFACE = "<url>"
MENTION_SURFACE = "<user>"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    surface: str

    @classmethod
    def word(cls, surface: str) -> "Token":
        return cls(TokenKind.WORD, surface)

    @classmethod
    def emoji(cls, label: str) -> "Token":
        return cls(TokenKind.EMOJI, label)

    @property
    def is_emoji(self) -> bool:
        return self.kind is TokenKind.EMOJI

    @property
    def is_word(self) -> bool:
        return self.kind is TokenKind.WORD


TokenSeq = Tuple[Token, ...]


# ---------- emoji 标签 ----------

def emoji_label(seq: str) -> str:
    """"😂" -> "U+1F602"；多码位序列用下划线连接。"""
    if not seq:
        raise ValueError("空 emoji 序列")
    return "_".join(f"U+{ord(ch):04X}" for ch in seq)


def emoji_from_label(label: str) -> str:
    try:
        return "".join(chr(int(part[2:], 16)) for part in label.split("_") if part.upper().startswith("U+"))
    except ValueError:
        raise ParseError(f"无法解析 emoji 标签 {label!r}") from None


def label_sort_key(label: str) -> Tuple[int, ...]:
    return tuple(ord(ch) for ch in emoji_from_label(label))


def is_emoji_label(surface: str) -> bool:
    return surface.startswith("U+")


# ---------- emoji 清单 ----------

def _range(lo: int, hi: int) -> List[str]:
    return [chr(cp) for cp in range(lo, hi + 1)]


# 人脸/手势/情绪类 emoji，作为可替换的默认配置
_DEFAULT_ENTRIES = (
    _range(0x1F600, 0x1F64F)  # 表情符号区块
    + _range(0x1F910, 0x1F92F)
    + _range(0x1F970, 0x1F976)
    + [chr(cp) for cp in (0x1F97A, 0x1F9D0, 0x263A, 0x2639, 0x2764)]
    + [chr(cp) for cp in (0x1F44A, 0x1F44B, 0x1F44C, 0x1F44D, 0x1F44E, 0x1F44F, 0x1F450, 0x270C, 0x270B, 0x1F91D)]
    + [chr(cp) for cp in (0x1F494, 0x1F495, 0x1F496, 0x1F497, 0x1F498, 0x1F499, 0x1F49A, 0x1F49B, 0x1F49C)]
    + [chr(cp) for cp in (0x1F382, 0x1F389, 0x1F388, 0x1F381, 0x1F525, 0x1F480, 0x1F4AF, 0x1F4A9, 0x1F440)]
)


@dataclass(frozen=True)
class EmojiInventory:
    entries: FrozenSet[str]

    def __post_init__(self):
        if not self.entries:
            raise ConfigError("emoji 清单不能为空")
        for seq in self.entries:
            if not seq or any(0xD800 <= ord(ch) <= 0xDFFF for ch in seq):
                raise ConfigError(f"非法 Unicode 标量: {seq!r}")

    @property
    def codepoints(self) -> FrozenSet[int]:
        return frozenset(ord(s) for s in self.entries if len(s) == 1)

    @property
    def labels(self) -> List[str]:
        return sorted((emoji_label(s) for s in self.entries), key=label_sort_key)

    def __contains__(self, item) -> bool:
        if isinstance(item, int):
            item = chr(item)
        return item in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    @classmethod
    def from_labels(cls, labels: Iterable[str]) -> "EmojiInventory":
        return cls(frozenset(emoji_from_label(lbl) for lbl in labels))


DEFAULT_INVENTORY = EmojiInventory(frozenset(_DEFAULT_ENTRIES))


def load_inventory(path: PathLike) -> EmojiInventory:
    """每行一个 "U+1F628"；多码位序列写成空格分隔；'#' 之后为注释。"""
    entries = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            try:
                seq = "".join(chr(int(p[2:], 16)) for p in parts if p.upper().startswith("U+"))
            except ValueError:
                raise ParseError(f"无法解析码位 {line!r}", line_no) from None
            if len(seq) != len(parts):
                raise ParseError(f"码位必须写成 U+XXXX: {line!r}", line_no)
            entries.add(seq)
    return EmojiInventory(frozenset(entries))


def save_inventory(inventory: EmojiInventory, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for label in inventory.labels:
            fh.write(label.replace("_", " ") + "\n")


def load_stopwords(path: PathLike) -> FrozenSet[str]:
    words = set()
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            word = raw.strip().lower()
            if word and not word.startswith("#"):
                words.add(word)
    return frozenset(words)


# ---------- 分词 ----------

@dataclass(frozen=True)
class TokenizeConfig:
    stopwords: FrozenSet[str] = field(default=ENGLISH_STOPWORDS)
    lowercase: bool = True
    keep_placeholders: bool = True


_WORD = r"(?:[^\W_]|')+"
_MENTION = r"@\w+"


class Tokenizer:
    """编译一次正则，之后可在任意线程中复用。"""

    def __init__(self, config: Optional[TokenizeConfig] = None, inventory: EmojiInventory = DEFAULT_INVENTORY):
        self.config = config or TokenizeConfig()
        self.inventory = inventory
        # 多码位序列按长度优先匹配
        ordered = sorted(inventory.entries, key=lambda s: (-len(s), s))
        emoji_alt = "|".join(re.escape(s) for s in ordered)
        self._emoji_re = re.compile(emoji_alt)
        url = rf"https?://(?:(?!{emoji_alt})\S)+"
        self._pattern = re.compile(
            rf"(?P<url>{url})|(?P<emoji>{emoji_alt})|(?P<mention>{_MENTION})|(?P<word>{_WORD})",
            re.IGNORECASE,
        )

    def tokenize(self, text: str) -> TokenSeq:
        if not text:
            return ()
        if self.config.lowercase:
            text = text.lower()
        out: List[Token] = []
        stop = self.config.stopwords
        for m in self._pattern.finditer(text):
            kind = m.lastgroup
            if kind == "emoji":
                out.append(Token.emoji(emoji_label(m.group())))
            elif kind == "url":
                if self.config.keep_placeholders:
                    out.append(Token(TokenKind.URL, URL_SURFACE))
            elif kind == "mention":
                if self.config.keep_placeholders:
                    out.append(Token(TokenKind.MENTION, MENTION_SURFACE))
            else:
                word = m.group().strip("'")
                if word and word not in stop:
                    out.append(Token.word(word))
        return tuple(out)

    def strip_text(self, text: str) -> str:
        return self._emoji_re.sub(" ", text)

    def emojis_in(self, text: str) -> List[str]:
        return [emoji_label(s) for s in self._emoji_re.findall(text)]


def tokenize(text: str, config: Optional[TokenizeConfig] = None, inventory: EmojiInventory = DEFAULT_INVENTORY) -> TokenSeq:
    return Tokenizer(config, inventory).tokenize(text)


def is_emoji(codepoint: Union[int, str], inventory: EmojiInventory = DEFAULT_INVENTORY) -> bool:
    return codepoint in inventory


def strip_emojis(seq: Iterable[Token]) -> TokenSeq:
    return tuple(tok for tok in seq if not tok.is_emoji)


def strip_emoji_text(text: str, inventory: EmojiInventory = DEFAULT_INVENTORY) -> str:
    return Tokenizer(inventory=inventory).strip_text(text)


def emoji_labels(seq: Iterable[Token]) -> List[str]:
    return [tok.surface for tok in seq if tok.is_emoji]


def word_surfaces(seq: Iterable[Token]) -> List[str]:
    return [tok.surface for tok in seq if tok.is_word]
