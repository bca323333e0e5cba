"""线性 hinge 分类器、分层 k 折与混淆矩阵指标。"""
import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from sklearn.linear_model import SGDClassifier
from sklearn.metrics import confusion_matrix
from sklearn.model_selection import StratifiedKFold

from emojimap.errors import ConfigError, LengthMismatch, SingleClass, TooFewExamples
from emojimap.vecmath import derive_seed

logger = logging.getLogger(__name__)

LABELS = (-1, 1)


@dataclass(frozen=True)
class FoldMetrics:
    fold: int
    accuracy: float
    f1_positive: float


@dataclass
class LinearModel:
    coef: np.ndarray
    intercept: float

    def decision_function(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ self.coef + self.intercept

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision_function(X) >= 0.0, 1, -1)


def train_linear_classifier(X, y, C: float = 1.0, epochs: int = 20, seed: int = 0) -> LinearModel:
    """L2 正则的 hinge 损失，随机次梯度下降；alpha = 1 / (C * n)。"""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if C <= 0:
        raise ConfigError("C 必须 > 0")
    if len(np.unique(y)) < 2:
        raise SingleClass("训练数据只有一个类别")
    clf = SGDClassifier(
        loss="hinge",
        penalty="l2",
        alpha=1.0 / (C * len(y)),
        max_iter=epochs,
        tol=None,
        shuffle=True,
        random_state=seed,
    )
    clf.fit(X, y)
    # 二分类时 coef_ 对应 classes_[1]，即 +1 类
    return LinearModel(clf.coef_[0].copy(), float(clf.intercept_[0]))


def compute_metrics(predictions: Sequence[int], labels: Sequence[int]) -> Tuple[float, float]:
    """(accuracy, 正类 F1)；P 或 R 无定义时 F1 = 0。"""
    pred = np.asarray(predictions)
    gold = np.asarray(labels)
    if len(pred) != len(gold):
        raise LengthMismatch(f"预测 {len(pred)} 条，标签 {len(gold)} 条")
    if len(gold) == 0:
        raise LengthMismatch("预测与标签不能为空")
    (tn, fp), (fn, tp) = confusion_matrix(gold, pred, labels=list(LABELS))
    accuracy = (tp + tn) / len(gold)
    if tp == 0:
        return float(accuracy), 0.0
    return float(accuracy), float(2 * tp / (2 * tp + fp + fn))


def stratified_folds(y: Sequence[int], folds: int = 5, seed: int = 0) -> np.ndarray:
    """每个样本的折编号。"""
    y = np.asarray(y)
    if folds < 2:
        raise ConfigError("folds 必须 >= 2")
    for label in LABELS:
        count = int(np.sum(y == label))
        if count < folds:
            raise TooFewExamples(f"类别 {label:+d} 只有 {count} 条，少于 {folds} 折")
    assignment = np.empty(len(y), dtype=np.int64)
    splitter = StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed)
    for i, (_, test_idx) in enumerate(splitter.split(np.zeros(len(y)), y)):
        assignment[test_idx] = i
    return assignment


def cross_validate(
    X,
    y,
    folds: int = 5,
    seed: int = 0,
    C: float = 1.0,
    epochs: int = 20,
) -> List[FoldMetrics]:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    assignment = stratified_folds(y, folds, seed)
    out = []
    for k in range(folds):
        test = assignment == k
        model = train_linear_classifier(X[~test], y[~test], C, epochs, derive_seed(seed, "fold", k))
        accuracy, f1 = compute_metrics(model.predict(X[test]), y[test])
        out.append(FoldMetrics(k, accuracy, f1))
    return out
