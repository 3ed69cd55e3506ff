"""Corpus ingestion and preprocessing.

Covers the whole path from raw records to model-ready token sequences:
rule-based tokenization and sentence splitting, selective casefolding
(all-caps words keep their case), Twitter self-labeling filters, context
truncation, stratified splitting, and the line-delimited corpus format.

Corpus records are one JSON object per line with fields: id, platform
("forum" | "twitter"), context (array of strings, oldest first), reply,
label ("S" | "NS"), and optional human_triggers (0-based indices of the
segmented context sentences flagged as provoking the reply).
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, ParseError, ValidationError

RESOURCE_DIR = Path(__file__).parent / "resources"

PLATFORMS = ("forum", "twitter")
LABELS = ("S", "NS")
SARCASM_HASHTAGS = frozenset({"#sarcasm", "#sarcastic", "#irony"})
FORUM_CONTEXT_CUTOFF = 10  # sentences
TWITTER_CONTEXT_CUTOFF = 5  # tweets
SPLIT_FRACTIONS = (0.8, 0.1, 0.1)  # train / dev / test

_TERMINAL_PUNCT = ".,!?;:"
_SENTENCE_ENDS = ".!?"
_QUOTE_CHARS = "\"'“”‘’«»"
_URL_RE = re.compile(r"^(?:https?://|www\.)", re.IGNORECASE)


def load_resource_list(name: str) -> tuple[str, ...]:
    """Lines of a bundled resource file, comments and blanks dropped."""
    out = []
    with open(RESOURCE_DIR / name, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                out.append(line)
    return tuple(out)


EMOTICONS = frozenset(load_resource_list("emoticons.txt"))
ABBREVIATIONS = frozenset(load_resource_list("abbreviations.txt"))


@dataclass
class ConversationInstance:
    """One labeled (context, reply) pair with provenance."""

    id: str
    platform: str
    context: list[str]
    reply: str
    label: str
    human_triggers: list[int] | None = None


@dataclass
class SegmentedInstance:
    """Tokenized view of an instance: one token list per sentence."""

    context_sentences: list[list[str]]
    reply_sentences: list[list[str]]
    label: str


@dataclass
class LabeledTweet:
    """A tweet that survived the self-labeling filters."""

    id: str
    text: str
    label: str
    reply_to: str | None


def tokenize(text: str, platform: str = "twitter") -> list[str]:
    """Whitespace splitting plus minimal rules shared by both platforms:
    terminal punctuation (.,!?;:) becomes its own token; hashtags, mentions,
    URLs, and emoticons survive whole; internal apostrophes are kept.
    """
    tokens: list[str] = []
    for chunk in text.split():
        tokens.extend(_split_chunk(chunk))
    return tokens


def _split_chunk(chunk: str) -> list[str]:
    if _URL_RE.match(chunk):
        return [chunk]
    trail: list[str] = []
    body = chunk
    while len(body) > 1 and body[-1] in _TERMINAL_PUNCT and body not in EMOTICONS:
        trail.append(body[-1])
        body = body[:-1]
    tokens = [body] if body else []
    tokens.extend(reversed(trail))
    return tokens


def split_sentences(text: str) -> list[str]:
    """Rule-based sentence boundaries: a run of .!? followed by whitespace
    and an uppercase letter, digit, or quote ends a sentence, unless the
    preceding word is a known abbreviation. Never splits inside a token.
    """
    sentences: list[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] not in _SENTENCE_ENDS:
            i += 1
            continue
        run_end = i
        while run_end + 1 < n and text[run_end + 1] in _SENTENCE_ENDS:
            run_end += 1
        nxt = run_end + 1
        if nxt < n and text[nxt].isspace():
            m = nxt
            while m < n and text[m].isspace():
                m += 1
            if m < n and (text[m].isupper() or text[m].isdigit() or text[m] in _QUOTE_CHARS) \
                    and not _is_abbreviation(text, start, i):
                piece = text[start:run_end + 1].strip()
                if piece:
                    sentences.append(piece)
                start = m
                i = m
                continue
        i = run_end + 1
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


def _is_abbreviation(text: str, start: int, dot_pos: int) -> bool:
    w_start = dot_pos
    while w_start > start and not text[w_start - 1].isspace():
        w_start -= 1
    return text[w_start:dot_pos + 1].lower() in ABBREVIATIONS


def casefold_selective(tokens: Sequence[str]) -> list[str]:
    """Lowercase every token except those whose alphabetic characters are
    all uppercase; tokens with no alphabetic characters pass through."""
    out = []
    for t in tokens:
        alpha = [c for c in t if c.isalpha()]
        if not alpha:
            out.append(t)
        elif all(c.isupper() for c in alpha):
            out.append(t)
        else:
            out.append(t.lower())
    return out


def _normalize_ws(text: str) -> str:
    return " ".join(text.split())


def _validate_tweet_record(rec, pos: int) -> tuple[str, str, bool, bool, str | None]:
    if not isinstance(rec, dict):
        raise ParseError(f"tweet record {pos}: expected an object")
    rid = rec.get("id")
    label = rid if isinstance(rid, str) and rid else f"record {pos}"
    if not isinstance(rid, str) or not rid:
        raise ParseError(f"tweet {label}: field 'id' must be a nonempty string")
    text = rec.get("text")
    if not isinstance(text, str) or not text.strip():
        raise ParseError(f"tweet {rid}: field 'text' must be a nonempty string")
    retweet = rec.get("retweet", False)
    quote = rec.get("quote", False)
    if not isinstance(retweet, bool) or not isinstance(quote, bool):
        raise ParseError(f"tweet {rid}: fields 'retweet'/'quote' must be booleans")
    reply_to = rec.get("reply_to")
    if reply_to is not None and not isinstance(reply_to, str):
        raise ParseError(f"tweet {rid}: field 'reply_to' must be a string or null")
    return rid, text, retweet, quote, reply_to


def twitter_filter(records: Iterable[dict]) -> list[LabeledTweet]:
    """Apply the self-labeling rules to raw tweet records.

    Rejects retweets, quotes, exact duplicates (after whitespace
    normalization), and tweets with fewer than three non-hashtag non-URL
    tokens. A tweet is sarcastic only if a sarcasm hashtag (#sarcasm,
    #sarcastic, #irony) is its final token; tweets with a sarcasm hashtag
    anywhere else are dropped. Label hashtags are stripped from the stored
    text; non-sarcastic tweets keep any other hashtag (#happy, #love, ...).
    """
    seen: set[str] = set()
    accepted: list[LabeledTweet] = []
    for pos, rec in enumerate(records):
        rid, text, retweet, quote, reply_to = _validate_tweet_record(rec, pos)
        if retweet or quote:
            continue
        norm = _normalize_ws(text)
        if norm in seen:
            continue
        seen.add(norm)
        tokens = tokenize(norm, "twitter")
        content = [t for t in tokens
                   if not t.startswith("#") and not _URL_RE.match(t)]
        if len(content) < 3:
            continue
        lowered = [t.lower() for t in tokens]
        tag_positions = [i for i, t in enumerate(lowered) if t in SARCASM_HASHTAGS]
        if tag_positions:
            if tag_positions[-1] != len(tokens) - 1:
                continue
            run_start = len(tokens)
            while run_start > 0 and lowered[run_start - 1] in SARCASM_HASHTAGS:
                run_start -= 1
            if any(p < run_start for p in tag_positions):
                continue
            accepted.append(LabeledTweet(rid, _strip_trailing_tags(norm), "S", reply_to))
        else:
            accepted.append(LabeledTweet(rid, norm, "NS", reply_to))
    return accepted


def _strip_trailing_tags(norm: str) -> str:
    while True:
        head, _, last = norm.rpartition(" ")
        if last.lower() in SARCASM_HASHTAGS:
            norm = head
        else:
            return norm


def build_twitter_instances(records: Sequence[dict]) -> list[ConversationInstance]:
    """Filter raw tweets and assemble conversation context along reply-to
    chains. Context tweets are taken verbatim from the raw set (they need
    not pass the label filter themselves); tweets without any resolvable
    context are dropped, matching a conversation-only corpus.
    """
    by_id: dict[str, tuple[str, str | None]] = {}
    for pos, rec in enumerate(records):
        rid, text, _, _, reply_to = _validate_tweet_record(rec, pos)
        by_id[rid] = (_normalize_ws(text), reply_to)
    instances = []
    for tweet in twitter_filter(records):
        chain: list[str] = []
        visited = {tweet.id}
        cur = tweet.reply_to
        while cur is not None and cur in by_id and cur not in visited:
            visited.add(cur)
            text, parent = by_id[cur]
            chain.append(text)
            cur = parent
        if not chain:
            continue
        chain.reverse()  # oldest first
        instances.append(ConversationInstance(
            id=tweet.id, platform="twitter", context=chain,
            reply=tweet.text, label=tweet.label))
    return instances


def _sentence_units(text: str, platform: str) -> list[tuple[str, list[str]]]:
    """(raw sentence, casefolded tokens) pairs; token-less units are dropped.
    Each tweet is a single sentence; forum text is split by rule."""
    units = [text] if platform == "twitter" else split_sentences(text)
    out = []
    for u in units:
        toks = casefold_selective(tokenize(u, platform))
        if toks:
            out.append((u, toks))
    return out


def _context_units(inst: ConversationInstance) -> list[tuple[str, list[str]]]:
    units: list[tuple[str, list[str]]] = []
    for utterance in inst.context:
        units.extend(_sentence_units(utterance, inst.platform))
    return units


def context_cutoff(platform: str, max_context: int | None = None) -> int:
    if max_context is not None:
        return max_context
    return FORUM_CONTEXT_CUTOFF if platform == "forum" else TWITTER_CONTEXT_CUTOFF


def truncate_context(seg: SegmentedInstance, platform: str,
                     max_context: int | None = None) -> SegmentedInstance:
    """Keep only the most recent context sentences (10 forum / 5 twitter by
    default); the reply is never truncated."""
    cutoff = context_cutoff(platform, max_context)
    return SegmentedInstance(
        context_sentences=seg.context_sentences[-cutoff:] if cutoff else [],
        reply_sentences=seg.reply_sentences,
        label=seg.label)


def segment_instance(inst: ConversationInstance,
                     max_context: int | None = None,
                     truncate: bool = True) -> SegmentedInstance:
    """Tokenized, casefolded, (optionally) truncated view of an instance."""
    seg = SegmentedInstance(
        context_sentences=[toks for _, toks in _context_units(inst)],
        reply_sentences=[toks for _, toks in _sentence_units(inst.reply, inst.platform)],
        label=inst.label)
    if truncate:
        seg = truncate_context(seg, inst.platform, max_context)
    return seg


def context_sentence_texts(inst: ConversationInstance,
                           max_context: int | None = None,
                           truncate: bool = True) -> list[str]:
    """Raw context sentences aligned 1:1 with the segmented token lists."""
    texts = [raw for raw, _ in _context_units(inst)]
    if truncate:
        cutoff = context_cutoff(inst.platform, max_context)
        texts = texts[-cutoff:] if cutoff else []
    return texts


def effective_triggers(inst: ConversationInstance,
                       max_context: int | None = None) -> list[int] | None:
    """human_triggers re-indexed into the truncated context window; None when
    the instance has no annotation or no trigger survives truncation."""
    if inst.human_triggers is None:
        return None
    total = len(_context_units(inst))
    kept = min(total, context_cutoff(inst.platform, max_context))
    dropped = total - kept
    shifted = [t - dropped for t in inst.human_triggers if t >= dropped]
    return shifted or None


def _field_error(path, lineno: int, field: str, message: str) -> ParseError:
    return ParseError(f"{path}: line {lineno}: field '{field}' {message}")


def load_corpus(path) -> list[ConversationInstance]:
    """Read and validate a line-delimited corpus file."""
    instances: list[ConversationInstance] = []
    seen_ids: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise ParseError(f"{path}: line {lineno}: invalid JSON ({e.msg})") from None
            if not isinstance(obj, dict):
                raise ParseError(f"{path}: line {lineno}: record must be an object")
            inst = _parse_record(obj, path, lineno)
            if inst.id in seen_ids:
                raise ParseError(f"{path}: line {lineno}: duplicate id '{inst.id}'")
            seen_ids.add(inst.id)
            if inst.human_triggers is not None:
                n_sent = len(_context_units(inst))
                bad = [t for t in inst.human_triggers if t >= n_sent]
                if bad:
                    raise ValidationError(
                        f"{path}: line {lineno}: human_triggers {bad} out of range "
                        f"for {n_sent} context sentences (id '{inst.id}')")
            instances.append(inst)
    return instances


def _parse_record(obj: dict, path, lineno: int) -> ConversationInstance:
    rid = obj.get("id")
    if not isinstance(rid, str) or not rid:
        raise _field_error(path, lineno, "id", "must be a nonempty string")
    platform = obj.get("platform")
    if platform not in PLATFORMS:
        raise _field_error(path, lineno, "platform", f"must be one of {PLATFORMS}")
    context = obj.get("context")
    if not isinstance(context, list) or any(not isinstance(c, str) for c in context):
        raise _field_error(path, lineno, "context", "must be an array of strings")
    reply = obj.get("reply")
    if not isinstance(reply, str) or not reply.strip():
        raise _field_error(path, lineno, "reply", "must be a nonempty string")
    label = obj.get("label")
    if label not in LABELS:
        raise _field_error(path, lineno, "label", f"must be one of {LABELS}")
    triggers = obj.get("human_triggers")
    if triggers is not None:
        if (not isinstance(triggers, list) or not triggers
                or any(not isinstance(t, int) or isinstance(t, bool) or t < 0
                       for t in triggers)):
            raise _field_error(path, lineno, "human_triggers",
                               "must be a nonempty array of nonnegative integers")
    return ConversationInstance(rid, platform, list(context), reply, label,
                                list(triggers) if triggers is not None else None)


def save_corpus(instances: Sequence[ConversationInstance], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for inst in instances:
            rec = {"id": inst.id, "platform": inst.platform, "context": inst.context,
                   "reply": inst.reply, "label": inst.label}
            if inst.human_triggers is not None:
                rec["human_triggers"] = inst.human_triggers
            fh.write(json.dumps(rec, sort_keys=True, ensure_ascii=False) + "\n")


def largest_remainder_counts(n: int, fractions: Sequence[float]) -> list[int]:
    """Integer allocation of n by the given fractions; leftovers go to the
    largest fractional parts, earlier buckets winning ties."""
    ideals = [f * n for f in fractions]
    base = [int(x) for x in ideals]
    rem = n - sum(base)
    order = sorted(range(len(fractions)), key=lambda i: (-(ideals[i] - base[i]), i))
    for i in order[:rem]:
        base[i] += 1
    return base


def stratified_split(instances: Sequence[ConversationInstance], seed: int
                     ) -> tuple[list[ConversationInstance],
                                list[ConversationInstance],
                                list[ConversationInstance]]:
    """Per-class seeded shuffle, then an 80/10/10 largest-remainder split.
    The three parts are disjoint and exhaustive."""
    by_label: dict[str, list[ConversationInstance]] = {lab: [] for lab in LABELS}
    for inst in instances:
        by_label[inst.label].append(inst)
    for lab in LABELS:
        if len(by_label[lab]) < 10:
            raise ConfigError(
                f"class {lab} has {len(by_label[lab])} instances; "
                "at least 10 per class are required to split")
    rng = np.random.default_rng(seed)
    train: list[ConversationInstance] = []
    dev: list[ConversationInstance] = []
    test: list[ConversationInstance] = []
    for lab in LABELS:
        group = by_label[lab]
        order = rng.permutation(len(group))
        shuffled = [group[i] for i in order]
        n_train, n_dev, _ = largest_remainder_counts(len(group), SPLIT_FRACTIONS)
        train.extend(shuffled[:n_train])
        dev.extend(shuffled[n_train:n_train + n_dev])
        test.extend(shuffled[n_train + n_dev:])
    return train, dev, test
