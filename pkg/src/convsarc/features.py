"""Discrete features and the linear SVM baseline.

Feature families: binary bag-of-ngrams (1/2/3-grams), lexicon category
booleans and sentiment counts, a context/reply sentiment-incongruity flag,
and surface sarcasm indicators (interjections, tag questions, punctuation,
all-caps words, quotes, emoticons, superlatives, intensifiers).

Feature vectors are sparse {name: value} maps with no zero entries.
Context-side names carry a "c|" prefix, reply-side names "r|". The SVM is
trained by deterministic epoch-wise subgradient descent on the
class-weighted hinge loss with an L2 penalty.
"""
from __future__ import annotations

import base64
import json
import re
from collections import Counter
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .data import (ConversationInstance, EMOTICONS, context_sentence_texts,
                   load_resource_list, segment_instance)
from .errors import ConfigError, DomainError, ParseError
from .nn import new_rng

FeatureVector = dict[str, float]

TASKS = ("reply_only", "context_and_reply")
NGRAM_PREFIXES = ("ng1:", "ng2:", "ng3:")

INTERJECTIONS = frozenset(load_resource_list("interjections.txt"))
INTENSIFIERS = frozenset(load_resource_list("intensifiers.txt"))
SUPERLATIVES = frozenset(load_resource_list("superlatives.txt"))
TAG_QUESTION_PATTERNS = tuple(
    tuple(p.split()) for p in load_resource_list("tag_questions.txt"))

_ALPHA_WORD_RE = re.compile(r"[^\W\d_]+", re.UNICODE)


@dataclass
class LexiconSet:
    """LIWC-style categories plus sentiment and negation word lists."""

    categories: dict[str, frozenset[str]]
    positive: frozenset[str]
    negative: frozenset[str]
    negations: frozenset[str]


def _read_token_file(path) -> frozenset[str]:
    tokens = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                tokens.add(line.lower())
    if not tokens:
        raise ConfigError(f"{path}: lexicon file is empty")
    return frozenset(tokens)


def load_lexicons(categories_path, positive_path, negative_path,
                  negations_path) -> LexiconSet:
    """categories file: "category<TAB>token" lines; others: one token per line."""
    cats: dict[str, set[str]] = {}
    with open(categories_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            if "\t" not in line:
                raise ParseError(
                    f"{categories_path}: line {lineno}: expected 'category<TAB>token'")
            name, token = line.split("\t", 1)
            name, token = name.strip(), token.strip().lower()
            if not name or not token:
                raise ParseError(
                    f"{categories_path}: line {lineno}: empty category or token")
            cats.setdefault(name, set()).add(token)
    if not cats:
        raise ConfigError(f"{categories_path}: no categories loaded")
    return LexiconSet(
        categories={k: frozenset(v) for k, v in cats.items()},
        positive=_read_token_file(positive_path),
        negative=_read_token_file(negative_path),
        negations=_read_token_file(negations_path))


def ngram_features(tokens: Sequence[str]) -> FeatureVector:
    """Binary presence of all unigrams, bigrams, and trigrams."""
    fv: FeatureVector = {}
    for n, prefix in ((1, "ng1:"), (2, "ng2:"), (3, "ng3:")):
        for i in range(len(tokens) - n + 1):
            fv[prefix + "_".join(tokens[i:i + n])] = 1.0
    return fv


def lexicon_features(tokens: Sequence[str], side: str,
                     lex: LexiconSet) -> FeatureVector:
    """Category booleans plus positive/negative/negation counts; the reply
    side also gets a both-polarities flag."""
    lowered = [t.lower() for t in tokens]
    fv: FeatureVector = {}
    for name, words in sorted(lex.categories.items()):
        if any(t in words for t in lowered):
            fv[f"cat:{name}"] = 1.0
    pos = sum(1 for t in lowered if t in lex.positive)
    neg = sum(1 for t in lowered if t in lex.negative)
    negation = sum(1 for t in lowered if t in lex.negations)
    if pos:
        fv["pos_count"] = float(pos)
    if neg:
        fv["neg_count"] = float(neg)
    if negation:
        fv["negation_count"] = float(negation)
    if side == "reply" and pos > 0 and neg > 0:
        fv["both_polarities"] = 1.0
    return fv


def _net_polarity(tokens: Sequence[str], lex: LexiconSet) -> int:
    lowered = [t.lower() for t in tokens]
    return (sum(1 for t in lowered if t in lex.positive)
            - sum(1 for t in lowered if t in lex.negative))


def sentiment_incongruity(context_tokens: Sequence[str],
                          reply_tokens: Sequence[str],
                          lex: LexiconSet) -> bool:
    """True iff both sides have nonzero net polarity with opposite signs."""
    c = _net_polarity(context_tokens, lex)
    r = _net_polarity(reply_tokens, lex)
    return c * r < 0


def _count_tag_questions(lowered: Sequence[str]) -> int:
    count = 0
    i = 0
    n = len(lowered)
    while i < n:
        matched = 0
        for pat in TAG_QUESTION_PATTERNS:
            if lowered[i:i + len(pat)] == list(pat):
                matched = max(matched, len(pat))
        if matched:
            count += 1
            i += matched
        else:
            i += 1
    return count


def indicator_features(tokens: Sequence[str], raw_text: str) -> FeatureVector:
    """Surface sarcasm indicator counts. tokens are the casefolded token
    list; raw_text is the pre-casefold original so capitalization and
    punctuation survive."""
    lowered = [t.lower() for t in tokens]
    counts = {
        "ind:interjection": sum(1 for t in lowered if t in INTERJECTIONS),
        "ind:tag_question": _count_tag_questions(lowered),
        "ind:exclamation": raw_text.count("!"),
        "ind:question": raw_text.count("?"),
        "ind:allcaps": sum(1 for w in _ALPHA_WORD_RE.findall(raw_text)
                           if len(w) >= 2 and w.isupper()),
        "ind:quote_pairs": raw_text.count('"') // 2
                           + min(raw_text.count("“"), raw_text.count("”")),
        "ind:emoticon": sum(1 for t in tokens if t in EMOTICONS),
        "ind:superlative": sum(1 for t in lowered
                               if t in SUPERLATIVES
                               or (t.isalpha() and len(t) >= 5 and t.endswith("est"))),
        "ind:intensifier": sum(1 for t in lowered if t in INTENSIFIERS),
    }
    return {k: float(v) for k, v in counts.items() if v}


def _namespace(prefix: str, fv: FeatureVector) -> FeatureVector:
    return {f"{prefix}|{k}": v for k, v in fv.items()}


def assemble(inst: ConversationInstance, mode: str, lex: LexiconSet,
             max_context: int | None = None) -> FeatureVector:
    """Full feature vector for one instance. reply_only uses reply-side
    features; context_and_reply adds namespaced context-side features and
    the incongruity flag."""
    if mode not in TASKS:
        raise DomainError(f"unknown task mode '{mode}'")
    seg = segment_instance(inst, max_context)
    reply_tokens = [t for s in seg.reply_sentences for t in s]
    fv: FeatureVector = {}
    fv.update(_namespace("r", ngram_features(reply_tokens)))
    fv.update(_namespace("r", lexicon_features(reply_tokens, "reply", lex)))
    fv.update(_namespace("r", indicator_features(reply_tokens, inst.reply)))
    if mode == "context_and_reply":
        context_tokens = [t for s in seg.context_sentences for t in s]
        context_raw = " ".join(context_sentence_texts(inst, max_context))
        fv.update(_namespace("c", ngram_features(context_tokens)))
        fv.update(_namespace("c", lexicon_features(context_tokens, "context", lex)))
        fv.update(_namespace("c", indicator_features(context_tokens, context_raw)))
        if sentiment_incongruity(context_tokens, reply_tokens, lex):
            fv["incongruity"] = 1.0
    return fv


class FeatureRegistry:
    """Stable feature-name to id mapping shared across instances."""

    def __init__(self, names: Iterable[str] = ()):
        self._ids: dict[str, int] = {}
        self._names: list[str] = []
        for name in names:
            self.add(name)

    def add(self, name: str) -> int:
        fid = self._ids.get(name)
        if fid is None:
            fid = len(self._names)
            self._ids[name] = fid
            self._names.append(name)
        return fid

    def id_of(self, name: str) -> int | None:
        return self._ids.get(name)

    @property
    def names(self) -> list[str]:
        return list(self._names)

    def __len__(self) -> int:
        return len(self._names)

    @classmethod
    def build(cls, vectors: Iterable[FeatureVector],
              min_ngram_count: int = 2) -> "FeatureRegistry":
        """Single-threaded pre-pass over the training vectors. N-gram
        features must appear in at least min_ngram_count instances; the
        other families are always kept."""
        vectors = list(vectors)
        counts: Counter[str] = Counter()
        for fv in vectors:
            counts.update(fv.keys())
        reg = cls()
        for fv in vectors:
            for name in fv:
                if _is_ngram(name) and counts[name] < min_ngram_count:
                    continue
                reg.add(name)
        return reg


def _is_ngram(name: str) -> bool:
    bare = name.split("|", 1)[-1]
    return bare.startswith(NGRAM_PREFIXES)


def vectorize(fv: FeatureVector, registry: FeatureRegistry) -> dict[int, float]:
    out: dict[int, float] = {}
    for name, value in fv.items():
        fid = registry.id_of(name)
        if fid is not None:
            out[fid] = value
    return out


@dataclass
class SvmConfig:
    epochs: int = 50
    l2: float = 1e-4
    lr: float | None = None  # None: 1 / (l2 + max ||x||^2), the stable bound
    seed: int = 0
    min_ngram_count: int = 2


@dataclass
class SvmModel:
    registry: FeatureRegistry
    weights: np.ndarray  # indexed by feature id
    bias: float
    class_weights: dict[str, Fraction]
    objective_history: list[float] = field(default_factory=list)


def _sparse_dot(w: np.ndarray, x: dict[int, float]) -> float:
    return sum(w[fid] * val for fid, val in x.items())


def hinge_objective(weights: np.ndarray, bias: float,
                    data: Sequence[tuple[dict[int, float], float, float]],
                    l2: float) -> float:
    """(l2/2)||w||^2 + mean_i cw_i * max(0, 1 - y_i (w.x_i + b))."""
    penalty = 0.5 * l2 * float(weights @ weights)
    loss = 0.0
    for x, y, cw in data:
        loss += cw * max(0.0, 1.0 - y * (_sparse_dot(weights, x) + bias))
    return penalty + loss / len(data)


def class_weight_map(labels: Iterable[str]) -> dict[str, Fraction]:
    """Weights inversely proportional to class size: N_total / (2 N_k).
    Exact rationals, so weight ratios are exact (e.g. sizes 100/300 give
    exactly 3:1); the trainer converts to float once."""
    counts = Counter(labels)
    if len(counts) < 2:
        raise ConfigError(
            f"training data contains a single class {sorted(counts)}; need both S and NS")
    total = sum(counts.values())
    return {k: Fraction(total, 2 * n) for k, n in counts.items()}


def svm_train(train: Sequence[tuple[FeatureVector, str]],
              config: SvmConfig | None = None) -> SvmModel:
    """Class-weighted primal hinge-loss SVM via seeded epoch-wise
    subgradient descent. The bias is not regularized."""
    config = config or SvmConfig()
    if not train:
        raise ConfigError("empty training set")
    registry = FeatureRegistry.build((fv for fv, _ in train),
                                     config.min_ngram_count)
    class_weights = class_weight_map(label for _, label in train)
    data = [(vectorize(fv, registry), 1.0 if label == "S" else -1.0,
             float(class_weights[label])) for fv, label in train]
    max_norm2 = max((sum(v * v for v in x.values()) for x, _, _ in data),
                    default=0.0)
    lr = config.lr if config.lr is not None else 1.0 / (config.l2 + max(max_norm2, 1e-12))
    w = np.zeros(len(registry))
    b = 0.0
    rng = new_rng(config.seed)
    history = []
    for _ in range(config.epochs):
        for idx in rng.permutation(len(data)):
            x, y, cw = data[idx]
            margin = y * (_sparse_dot(w, x) + b)
            w *= 1.0 - lr * config.l2
            if margin < 1.0:
                for fid, val in x.items():
                    w[fid] += lr * cw * y * val
                b += lr * cw * y
        history.append(hinge_objective(w, b, data, config.l2))
    return SvmModel(registry, w, b, class_weights, history)


def svm_predict(model: SvmModel, fv: FeatureVector) -> tuple[str, float]:
    """Sign of w.x + b; a score of exactly 0 resolves to NS."""
    score = _sparse_dot(model.weights, vectorize(fv, model.registry)) + model.bias
    return ("S" if score > 0.0 else "NS"), score


SVM_CHECKPOINT_VERSION = 1


def save_svm_checkpoint(model: SvmModel, task: str, max_context: int | None,
                        path) -> None:
    doc = {
        "format_version": SVM_CHECKPOINT_VERSION,
        "kind": "svm",
        "task": task,
        "max_context": max_context,
        "features": model.registry.names,
        "weights": base64.b64encode(
            np.ascontiguousarray(model.weights, dtype="<f8").tobytes()).decode("ascii"),
        "bias": model.bias,
        "class_weights": {k: float(v) for k, v in model.class_weights.items()},
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def load_svm_checkpoint(path) -> tuple[SvmModel, str, int | None]:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format_version") != SVM_CHECKPOINT_VERSION:
        raise ConfigError(
            f"{path}: checkpoint format_version {doc.get('format_version')} "
            f"not supported (expected {SVM_CHECKPOINT_VERSION})")
    if doc.get("kind") != "svm":
        raise ConfigError(f"{path}: not an svm checkpoint")
    weights = np.frombuffer(base64.b64decode(doc["weights"]), dtype="<f8").astype(np.float64)
    model = SvmModel(FeatureRegistry(doc["features"]), weights,
                     float(doc["bias"]),
                     {k: Fraction(v) for k, v in doc["class_weights"].items()})
    return model, doc["task"], doc["max_context"]
