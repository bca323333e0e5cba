"""emojimap 的统一异常。所有领域错误都继承 ValueError。"""
from typing import Optional


class EmojiMapError(ValueError):
    pass


class ConfigError(EmojiMapError):
    pass


# ---- corpus ----
class MalformedJson(EmojiMapError):
    def __init__(self, line_no: int, detail: str = ""):
        self.line_no = line_no
        super().__init__(f"第 {line_no} 行不是合法 JSON: {detail}".rstrip(": "))


class MissingField(EmojiMapError):
    def __init__(self, name: str, line_no: Optional[int] = None):
        self.name = name
        self.line_no = line_no
        where = f"第 {line_no} 行" if line_no is not None else "记录"
        super().__init__(f"{where}缺少字段 {name}")


# ---- embedding ----
class EmptyVocab(EmojiMapError):
    pass


class NoEmojis(EmojiMapError):
    pass


# ---- mapping ----
class ZeroVector(EmojiMapError):
    pass


class EmptyIntersection(EmojiMapError):
    pass


class ParseError(EmojiMapError):
    def __init__(self, message: str, line_no: Optional[int] = None):
        self.line_no = line_no
        prefix = f"第 {line_no} 行: " if line_no is not None else ""
        super().__init__(prefix + message)


# ---- sentiment ----
class PolarityOutOfRange(ParseError):
    pass


# ---- analysis ----
class BothEmpty(EmojiMapError):
    pass


class EmptyCorpus(EmojiMapError):
    pass


class EmojiAbsent(EmojiMapError):
    pass


# ---- evaluation ----
class NoKnownWords(EmojiMapError):
    pass


class SingleClass(EmojiMapError):
    pass


class TooFewExamples(EmojiMapError):
    pass


class LengthMismatch(EmojiMapError):
    pass


class DegenerateSample(EmojiMapError):
    pass


class LeakageError(EmojiMapError):
    pass


# ---- synth ----
class SpecInvalid(EmojiMapError):
    pass
