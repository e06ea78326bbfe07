"""Native baseline classifier: multinomial logistic regression over hashed
text/hashtag features, with the three input conditions (text only, hashtags
only, both) as feature modes.

Feature hashing uses a stable 64-bit hash (blake2b) masked to a power-of-two
dimension, so featurization is identical across runs and platforms without any
fit-time vocabulary state. Training is plain mini-batch gradient descent on
the softmax cross-entropy with L2, deterministic for a fixed seed, with early
stopping on dev macro-F1 (best weights kept, not last).
"""

from __future__ import annotations

import hashlib
import json
import re
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Protocol, Sequence

import numpy as np
import scipy.sparse as sp

from .annotation import COARSE_ORDER, LabelCoarse
from .augment import LabeledDataset
from .corpus import Tweet
from .metrics import ConfusionMatrix, macro_f1

# Tokens are runs of unicode letters/digits/underscore; a '#' sticks to the
# following run as a prefix, marking a hashtag token.
_TOKEN_RE = re.compile(r"#\w+|\w+")


class FeatureMode(str, Enum):
    TEXT_ONLY = "text"
    HASHTAGS_ONLY = "hashtags"
    TEXT_AND_HASHTAGS = "text+hashtags"


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class SparseVector:
    """Hashed feature vector: index -> weight, indices below `dim` (a power of
    two), zero entries never stored."""

    dim: int
    weights: dict[int, float]


def _stable_hash(token: str) -> int:
    return int.from_bytes(hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest(), "big")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def _ngram_terms(tokens: Sequence[str]) -> Iterable[str]:
    yield from tokens
    for a, b in zip(tokens, tokens[1:]):
        yield f"{a} {b}"


def feature_terms(tweet: Tweet, mode: FeatureMode) -> list[str]:
    """The string terms a tweet contributes under a feature mode, before
    hashing. Text modes use unigrams plus adjacent bigrams; the hashtags-only
    mode uses the '#tag' tokens alone."""
    tokens = tokenize(tweet.text)
    if mode is FeatureMode.TEXT_ONLY:
        return list(_ngram_terms([t for t in tokens if not t.startswith("#")]))
    if mode is FeatureMode.HASHTAGS_ONLY:
        return [t for t in tokens if t.startswith("#")]
    return list(_ngram_terms(tokens))


def featurize(tweet: Tweet, mode: FeatureMode, dim: int) -> SparseVector:
    """Hash a tweet's feature terms into a sparse vector; colliding terms sum."""
    if dim <= 0 or dim & (dim - 1):
        raise ModelError(f"dim must be a power of two, got {dim}")
    mask = dim - 1
    weights: dict[int, float] = {}
    for term in feature_terms(tweet, mode):
        idx = _stable_hash(term) & mask
        weights[idx] = weights.get(idx, 0.0) + 1.0
    return SparseVector(dim=dim, weights=weights)


def _to_csr(vectors: Sequence[SparseVector], dim: int) -> sp.csr_matrix:
    data, indices, indptr = [], [], [0]
    for vec in vectors:
        for idx, val in vec.weights.items():
            indices.append(idx)
            data.append(val)
        indptr.append(len(indices))
    return sp.csr_matrix(
        (np.asarray(data), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(vectors), dim),
    )


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def loss_and_grad(
    weights: np.ndarray,
    bias: np.ndarray,
    x: sp.csr_matrix,
    y: np.ndarray,
    l2: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean softmax cross-entropy plus 0.5 * l2 * ||W||^2, with its analytic
    gradient. Bias is not regularized."""
    n = x.shape[0]
    probs = _softmax(x @ weights.T + bias)
    nll = -np.log(np.clip(probs[np.arange(n), y], 1e-300, None))
    loss = float(nll.mean() + 0.5 * l2 * np.sum(weights**2))

    delta = probs
    delta[np.arange(n), y] -= 1.0
    grad_w = np.asarray((delta.T @ x) / n) + l2 * weights
    grad_b = delta.mean(axis=0)
    return loss, grad_w, grad_b


@dataclass
class TrainConfig:
    lr: float = 0.5
    l2: float = 1e-4
    epochs: int = 50
    batch: int = 32
    patience: int = 5
    seed: int = 0
    dim: int = 2**18
    mode: FeatureMode = FeatureMode.TEXT_AND_HASHTAGS

    def to_dict(self) -> dict:
        return {
            "lr": self.lr,
            "l2": self.l2,
            "epochs": self.epochs,
            "batch": self.batch,
            "patience": self.patience,
            "seed": self.seed,
            "dim": self.dim,
            "mode": self.mode.value,
        }


MODEL_FORMAT_VERSION = 1


@dataclass
class BaselineModel:
    """Trained multinomial logistic regression over hashed features. Weights
    are a dense 3 x dim matrix in fixed class order S, A, O."""

    weights: np.ndarray = field(repr=False)
    bias: np.ndarray = field(repr=False)
    feature_mode: FeatureMode
    dim: int
    metadata: dict = field(default_factory=dict)

    def predict_proba(self, tweet: Tweet) -> np.ndarray:
        vec = featurize(tweet, self.feature_mode, self.dim)
        logits = self.bias.copy()
        for idx, val in vec.weights.items():
            logits += self.weights[:, idx] * val
        return _softmax(logits)

    def save(self, path) -> None:
        meta = {
            "format_version": MODEL_FORMAT_VERSION,
            "dim": self.dim,
            "mode": self.feature_mode.value,
            "metadata": self.metadata,
        }
        # write through a handle so numpy cannot append an extension
        with open(path, "wb") as f:
            np.savez(f, weights=self.weights, bias=self.bias, meta=json.dumps(meta))

    @classmethod
    def load(cls, path) -> "BaselineModel":
        try:
            with np.load(path, allow_pickle=False) as data:
                meta = json.loads(str(data["meta"]))
                if meta.get("format_version") != MODEL_FORMAT_VERSION:
                    raise ModelError(f"unsupported model format {meta.get('format_version')!r}")
                return cls(
                    weights=data["weights"],
                    bias=data["bias"],
                    feature_mode=FeatureMode(meta["mode"]),
                    dim=int(meta["dim"]),
                    metadata=meta.get("metadata", {}),
                )
        except (EOFError, KeyError, OSError, ValueError) as exc:
            if isinstance(exc, ModelError):
                raise
            raise ModelError(f"cannot load model from {path}: {exc}") from exc


def _dataset_arrays(dataset: LabeledDataset, mode: FeatureMode, dim: int) -> tuple[sp.csr_matrix, np.ndarray]:
    vectors = [featurize(ex.tweet, mode, dim) for ex in dataset]
    y = np.array([ex.label.index for ex in dataset], dtype=np.int64)
    return _to_csr(vectors, dim), y


def _dev_macro_f1(weights: np.ndarray, bias: np.ndarray, x: sp.csr_matrix, y: np.ndarray) -> float:
    pred = np.argmax(x @ weights.T + bias, axis=1)
    counts = np.zeros((3, 3), dtype=np.int64)
    np.add.at(counts, (y, pred), 1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # dev slices may miss a class
        return macro_f1(ConfusionMatrix(labels=COARSE_ORDER, counts=counts)).macro_f1


def train_baseline(train: LabeledDataset, dev: LabeledDataset, cfg: TrainConfig) -> BaselineModel:
    """Train the baseline with mini-batch gradient descent and early stopping.

    Each epoch shuffles with a permutation stream seeded by `cfg.seed` and is
    followed by a dev macro-F1 evaluation; the best-scoring weights are kept
    and training stops once `patience` consecutive epochs bring no improvement.
    Deterministic: the same config and data give bit-identical weights.
    """
    if len(train) == 0 or len(dev) == 0:
        raise ModelError("train and dev sets must be non-empty")
    if len({ex.label for ex in train}) < 2:
        raise ModelError("refusing to train on a single-class training set")

    x_train, y_train = _dataset_arrays(train, cfg.mode, cfg.dim)
    x_dev, y_dev = _dataset_arrays(dev, cfg.mode, cfg.dim)

    rng = np.random.default_rng(cfg.seed)
    weights = np.zeros((3, cfg.dim))
    bias = np.zeros(3)

    best_w, best_b = weights.copy(), bias.copy()
    best_score = -1.0
    best_epoch = 0
    epochs_run = 0

    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(x_train.shape[0])
        for start in range(0, len(order), cfg.batch):
            batch = order[start : start + cfg.batch]
            loss, grad_w, grad_b = loss_and_grad(weights, bias, x_train[batch], y_train[batch], cfg.l2)
            if not np.isfinite(loss):
                raise ModelError(
                    f"training diverged at epoch {epoch} (loss={loss}); lower lr or raise l2"
                )
            weights -= cfg.lr * grad_w
            bias -= cfg.lr * grad_b
        epochs_run = epoch

        score = _dev_macro_f1(weights, bias, x_dev, y_dev)
        if score > best_score:
            best_score = score
            best_epoch = epoch
            best_w, best_b = weights.copy(), bias.copy()
        elif epoch - best_epoch > cfg.patience:
            break

    return BaselineModel(
        weights=best_w,
        bias=best_b,
        feature_mode=cfg.mode,
        dim=cfg.dim,
        metadata={
            "seed": cfg.seed,
            "epochs_run": epochs_run,
            "best_epoch": best_epoch,
            "dev_macro_f1": best_score,
            "train_config": cfg.to_dict(),
        },
    )


class Classifier(Protocol):
    """Uniform predict surface over the native baseline and external models."""

    def predict_proba(self, tweet: Tweet) -> np.ndarray: ...


@dataclass
class ClassifierHandle:
    """Pool member: a classifier plus its id and dev-set score."""

    id: str
    classifier: Classifier
    dev_score: float | None = None


def predict(handle: ClassifierHandle | Classifier, tweet: Tweet) -> np.ndarray:
    """Probability distribution over (S, A, O); entries are non-negative and
    sum to 1 within 1e-9."""
    classifier = handle.classifier if isinstance(handle, ClassifierHandle) else handle
    probs = np.asarray(classifier.predict_proba(tweet), dtype=np.float64)
    if probs.shape != (3,) or not np.isfinite(probs).all():
        raise ModelError(f"classifier returned a bad distribution: {probs!r}")
    return probs


def predict_label(handle: ClassifierHandle | Classifier, tweet: Tweet) -> LabelCoarse:
    return COARSE_ORDER[int(np.argmax(predict(handle, tweet)))]
