import json

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from convsarc.data import (ConversationInstance, SegmentedInstance,
                           build_twitter_instances, casefold_selective,
                           context_sentence_texts, effective_triggers,
                           largest_remainder_counts, load_corpus,
                           save_corpus, segment_instance, split_sentences,
                           stratified_split, tokenize, truncate_context,
                           twitter_filter)
from convsarc.errors import ConfigError, ParseError, ValidationError

# -- tokenize ---------------------------------------------------------------


def test_tokenize_apostrophe_and_question():
    assert tokenize("don't they?") == ["don't", "they", "?"]


def test_tokenize_hashtag_preserved():
    assert tokenize("hooray for gerrymandering #sarcasm") == \
        ["hooray", "for", "gerrymandering", "#sarcasm"]


def test_tokenize_emoticon_preserved():
    assert tokenize("great :)") == ["great", ":)"]


def test_tokenize_mention_and_url():
    assert tokenize("@user see http://x.example/a.b?q=1 now") == \
        ["@user", "see", "http://x.example/a.b?q=1", "now"]


def test_tokenize_terminal_punct_cluster():
    assert tokenize("are you kidding me?!") == ["are", "you", "kidding", "me", "?", "!"]


def test_tokenize_multiple_exclamations():
    assert tokenize("day!!!") == ["day", "!", "!", "!"]


def test_tokenize_emoticon_then_period():
    assert tokenize("nice :p.") == ["nice", ":p", "."]


def test_tokenize_whitespace_only():
    assert tokenize("   \t ") == []


# -- split_sentences --------------------------------------------------------


def test_split_two_sentences_with_punct_run():
    out = split_sentences("Are you kidding me?! You think that is fine.")
    assert out == ["Are you kidding me?!", "You think that is fine."]


def test_split_abbreviation_guard():
    assert split_sentences("i.e. this stays together") == ["i.e. this stays together"]
    assert split_sentences("Ask Dr. Smith about it.") == ["Ask Dr. Smith about it."]


def test_split_no_terminator_single_sentence():
    assert split_sentences("no boundary here at all") == ["no boundary here at all"]


def test_split_before_quote_and_digit():
    assert split_sentences('He left. "Why?" she asked.') == \
        ['He left.', '"Why?" she asked.']
    assert split_sentences("It rained. 40 days straight.") == \
        ["It rained.", "40 days straight."]


def test_split_lowercase_continuation_not_split():
    assert split_sentences("version 2.0 shipped today") == ["version 2.0 shipped today"]


# -- casefold_selective ------------------------------------------------------


def test_casefold_keeps_allcaps():
    toks = ["GREAT", "i'm", "SO", "happy"]
    assert casefold_selective(toks) == toks


def test_casefold_lowers_mixed_case():
    assert casefold_selective(["Hello"]) == ["hello"]


def test_casefold_passes_non_alphabetic():
    assert casefold_selective(["!!"]) == ["!!"]


@given(st.lists(st.text(
    alphabet="abcDEF!?# '", min_size=1, max_size=12).filter(str.split),
    min_size=0, max_size=8))
@settings(max_examples=80, deadline=None)
def test_tokenize_casefold_idempotent_on_own_output(chunks):
    text = " ".join(chunks)
    first = casefold_selective(tokenize(text))
    second = casefold_selective(tokenize(" ".join(first)))
    assert first == second


# -- twitter_filter ----------------------------------------------------------


def tweet(tid, text, retweet=False, quote=False, reply_to=None):
    return {"id": tid, "text": text, "retweet": retweet, "quote": quote,
            "reply_to": reply_to}


def test_filter_rejects_leading_hashtag():
    out = twitter_filter([tweet("1", "#sarcasm is something that I love")])
    assert out == []


def test_filter_accepts_and_strips_terminal_hashtag():
    out = twitter_filter([tweet("1", "one more reason to feel really great #sarcasm")])
    assert len(out) == 1
    assert out[0].label == "S"
    assert out[0].text == "one more reason to feel really great"
    assert "#sarcasm" not in out[0].text


def test_filter_rejects_retweets_and_quotes():
    assert twitter_filter([tweet("1", "some perfectly fine text", retweet=True)]) == []
    assert twitter_filter([tweet("1", "some perfectly fine text", quote=True)]) == []


def test_filter_rejects_duplicates_after_whitespace_normalization():
    out = twitter_filter([tweet("1", "same   text here"),
                          tweet("2", "same text  here")])
    assert [t.id for t in out] == ["1"]


def test_filter_rejects_short_or_hashtag_only():
    assert twitter_filter([tweet("1", "#wow #such http://u.example")]) == []
    assert twitter_filter([tweet("2", "too short #happy")]) == []


def test_filter_keeps_sentiment_hashtags_for_ns():
    out = twitter_filter([tweet("1", "what a lovely sunny morning #happy")])
    assert len(out) == 1
    assert out[0].label == "NS"
    assert "#happy" in out[0].text


def test_filter_strips_trailing_tag_run():
    out = twitter_filter([tweet("1", "thanks for all the help #irony #sarcasm")])
    assert len(out) == 1
    assert out[0].label == "S"
    assert out[0].text == "thanks for all the help"


def test_filter_parse_error_names_record():
    with pytest.raises(ParseError, match="t9"):
        twitter_filter([{"id": "t9", "text": 5}])


@given(st.lists(st.tuples(
    st.sampled_from(["clear skies ahead today", "more rain again today",
                     "what a great plan #sarcasm", "so #sarcasm goes here",
                     "lovely #irony", "fine day #happy or not"]),
    st.booleans()), min_size=0, max_size=12))
@settings(max_examples=60, deadline=None)
def test_filter_output_invariant_no_sarcasm_tags_survive(rows):
    records = [tweet(str(i), text, retweet=rt) for i, (text, rt) in enumerate(rows)]
    for out in twitter_filter(records):
        lowered = out.text.lower()
        for tag in ("#sarcasm", "#sarcastic", "#irony"):
            assert tag not in lowered
        if out.label == "S":
            src = next(r for r in records if r["id"] == out.id)
            last = src["text"].split()[-1].lower()
            assert last in ("#sarcasm", "#sarcastic", "#irony")


# -- thread assembly ---------------------------------------------------------


def test_build_twitter_instances_walks_reply_chain():
    records = [
        tweet("a", "the oldest message in this thread"),
        tweet("b", "a middle message replying first", reply_to="a"),
        tweet("c", "one more reason to feel really great #sarcasm", reply_to="b"),
        tweet("d", "floating tweet with no parent link #happy"),
    ]
    out = build_twitter_instances(records)
    # b is a legitimate NS reply; a and d have no parent and drop out
    assert [i.id for i in out] == ["b", "c"]
    inst = out[1]
    assert inst.context == ["the oldest message in this thread",
                            "a middle message replying first"]
    assert inst.label == "S"
    assert inst.reply == "one more reason to feel really great"


def test_build_twitter_instances_survives_cycles():
    records = [
        tweet("a", "first message going around", reply_to="b"),
        tweet("b", "second message going around", reply_to="a"),
    ]
    out = build_twitter_instances(records)
    assert {i.id for i in out} == {"a", "b"}
    assert all(len(i.context) == 1 for i in out)


# -- truncation ---------------------------------------------------------------


def seg_with_context(n):
    return SegmentedInstance(
        context_sentences=[[f"tok{i}"] for i in range(n)],
        reply_sentences=[["hi", "there"]], label="NS")


def test_truncate_forum_keeps_last_ten():
    out = truncate_context(seg_with_context(12), "forum")
    assert len(out.context_sentences) == 10
    assert out.context_sentences[0] == ["tok2"]
    assert out.reply_sentences == [["hi", "there"]]


def test_truncate_twitter_keeps_last_five():
    out = truncate_context(seg_with_context(7), "twitter")
    assert len(out.context_sentences) == 5
    assert out.context_sentences[0] == ["tok2"]


def test_truncate_short_context_unchanged():
    out = truncate_context(seg_with_context(3), "forum")
    assert len(out.context_sentences) == 3


def test_segment_instance_forum_splits_and_truncates(forum_instance):
    seg = segment_instance(forum_instance)
    assert seg.context_sentences[0][0] == "the"
    assert len(seg.context_sentences) == 3  # two sentences + one sentence
    assert seg.reply_sentences[0][0] == "GREAT"
    texts = context_sentence_texts(forum_instance)
    assert len(texts) == len(seg.context_sentences)
    assert texts[0] == "The weather was terrible today."


def test_effective_triggers_shift_with_truncation():
    inst = ConversationInstance(
        id="x", platform="twitter",
        context=[f"tweet number {i} here" for i in range(7)],
        reply="a reply", label="S", human_triggers=[1, 6])
    # 7 tweets truncate to the last 5: index 6 -> 4, index 1 drops out
    assert effective_triggers(inst) == [4]
    assert effective_triggers(inst, max_context=7) == [1, 6]


# -- stratified splitting ------------------------------------------------------


def make_instances(n_s, n_ns):
    out = []
    for i in range(n_s):
        out.append(ConversationInstance(f"s{i}", "forum", [], f"reply {i}", "S"))
    for i in range(n_ns):
        out.append(ConversationInstance(f"n{i}", "forum", [], f"reply {i}", "NS"))
    return out


def count_labels(instances):
    return (sum(1 for i in instances if i.label == "S"),
            sum(1 for i in instances if i.label == "NS"))


def test_split_50_50_gives_40_5_5():
    train, dev, test = stratified_split(make_instances(50, 50), seed=0)
    assert count_labels(train) == (40, 40)
    assert count_labels(dev) == (5, 5)
    assert count_labels(test) == (5, 5)


def test_split_deterministic_for_seed():
    insts = make_instances(30, 40)
    a = stratified_split(insts, seed=3)
    b = stratified_split(insts, seed=3)
    assert [i.id for i in a[0]] == [i.id for i in b[0]]
    assert [i.id for i in a[2]] == [i.id for i in b[2]]


def test_split_corpus_scale_counts_match_largest_remainder():
    assert largest_remainder_counts(12_215, (0.8, 0.1, 0.1)) == [9772, 1222, 1221]
    assert largest_remainder_counts(13_776, (0.8, 0.1, 0.1)) == [11021, 1378, 1377]


def test_split_rejects_small_class():
    with pytest.raises(ConfigError):
        stratified_split(make_instances(9, 50), seed=0)


@given(st.integers(10, 120), st.integers(10, 120), st.integers(0, 1000))
@settings(max_examples=40, deadline=None)
def test_split_partitions_exactly(n_s, n_ns, seed):
    insts = make_instances(n_s, n_ns)
    train, dev, test = stratified_split(insts, seed)
    ids = [i.id for part in (train, dev, test) for i in part]
    assert sorted(ids) == sorted(i.id for i in insts)
    for count, part in ((n_s, 0), (n_ns, 1)):
        got = (count_labels(train)[part], count_labels(dev)[part],
               count_labels(test)[part])
        ideal = (0.8 * count, 0.1 * count, 0.1 * count)
        assert all(abs(g - i) <= 1.0 for g, i in zip(got, ideal))


# -- corpus io ----------------------------------------------------------------


def write_lines(tmp_path, lines):
    p = tmp_path / "corpus.jsonl"
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return p


def record(rid="r1", **kw):
    rec = {"id": rid, "platform": "forum", "context": ["Some context here."],
           "reply": "a reply", "label": "NS"}
    rec.update(kw)
    return json.dumps(rec)


def test_load_corpus_valid_two_lines(tmp_path):
    p = write_lines(tmp_path, [record("a"), record("b", label="S")])
    out = load_corpus(p)
    assert [i.id for i in out] == ["a", "b"]
    assert out[1].label == "S"


def test_load_corpus_missing_label_names_field(tmp_path):
    rec = json.loads(record())
    del rec["label"]
    with pytest.raises(ParseError, match="'label'"):
        load_corpus(write_lines(tmp_path, [json.dumps(rec)]))


def test_load_corpus_duplicate_id(tmp_path):
    with pytest.raises(ParseError, match="duplicate"):
        load_corpus(write_lines(tmp_path, [record("a"), record("a")]))


def test_load_corpus_trigger_out_of_range(tmp_path):
    bad = record("a", human_triggers=[5])
    with pytest.raises(ValidationError, match="human_triggers"):
        load_corpus(write_lines(tmp_path, [bad]))


def test_load_corpus_reports_line_number(tmp_path):
    with pytest.raises(ParseError, match="line 2"):
        load_corpus(write_lines(tmp_path, [record("a"), "{broken"]))


def test_save_load_roundtrip(tmp_path):
    insts = [ConversationInstance("a", "twitter", ["ctx tweet one"],
                                  "reply text", "S", [0])]
    p = tmp_path / "c.jsonl"
    save_corpus(insts, p)
    out = load_corpus(p)
    assert out == insts
