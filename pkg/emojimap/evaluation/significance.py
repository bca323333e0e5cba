from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from emojimap.errors import DegenerateSample, LengthMismatch


@dataclass(frozen=True)
class TTestResult:
    t_statistic: float
    p_value: float
    dof: float

    def significant(self, alpha: float = 0.05) -> bool:
        return self.p_value < alpha

    def to_dict(self) -> dict:
        return {"t": self.t_statistic, "p": self.p_value, "dof": self.dof}


def welch_dof(a: np.ndarray, b: np.ndarray) -> float:
    """Welch–Satterthwaite 自由度。"""
    sa = np.var(a, ddof=1) / len(a)
    sb = np.var(b, ddof=1) / len(b)
    return float((sa + sb) ** 2 / (sa ** 2 / (len(a) - 1) + sb ** 2 / (len(b) - 1)))


def t_test(sample_a: Sequence[float], sample_b: Sequence[float], paired: bool = False) -> TTestResult:
    """双侧检验，默认 Welch（不等方差）；paired=True 时按位置配对。"""
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if len(a) < 2 or len(b) < 2:
        raise DegenerateSample("每组样本至少需要 2 个值")
    if paired:
        if len(a) != len(b):
            raise LengthMismatch(f"配对检验两组长度不同: {len(a)} vs {len(b)}")
        if np.var(a - b) == 0.0:
            raise DegenerateSample("配对差值方差为 0")
        res = stats.ttest_rel(a, b)
        dof = float(len(a) - 1)
    else:
        if np.var(a) == 0.0 and np.var(b) == 0.0:
            raise DegenerateSample("两组样本方差均为 0")
        res = stats.ttest_ind(a, b, equal_var=False)
        dof = welch_dof(a, b)
    p = float(np.clip(res.pvalue, 0.0, 1.0))
    return TTestResult(float(res.statistic), p, dof)
