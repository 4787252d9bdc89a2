import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from slothbench import lexicon as lexicon_words
from slothbench.errors import ContractError, UnsupportedCharacterError
from slothbench.tokenizer import (
    CHARSET,
    FORMAT_LINE,
    OTHER,
    SPECIALS,
    CharSet,
    PosLexicon,
    Vocabulary,
    detokenize,
    from_ids,
    pos_tags,
    tokenize,
)

from .conftest import random_sentence


@pytest.fixture
def abc():
    return Vocabulary(list(SPECIALS) + ["a", "b", "ab"])


def test_longest_match(abc):
    assert [abc[i] for i in tokenize("ab", abc).tokens] == ["ab"]
    assert [abc[i] for i in tokenize("ba", abc).tokens] == ["b", "a"]


def test_insertion_changes_segmentation(vocab):
    assert "who" in vocab.id_of
    who = tokenize("who", vocab).tokens
    whoo = tokenize("whoo", vocab).tokens
    assert who != whoo
    assert len(who) == 1 and len(whoo) == 2


def test_unsupported_character_reports_offset(vocab):
    with pytest.raises(UnsupportedCharacterError) as err:
        tokenize("the caté", vocab)
    assert err.value.offset == 7


def test_tab_is_unsupported(vocab):
    with pytest.raises(UnsupportedCharacterError):
        tokenize("a\tb", vocab)


def test_detokenize_edge_cases(vocab):
    assert detokenize([], vocab) == ""
    assert detokenize([vocab.eos_id], vocab) == ""
    with pytest.raises(IndexError):
        detokenize([len(vocab)], vocab)
    with pytest.raises(ContractError):
        detokenize([vocab.sos_id, 5], vocab)


def test_shipped_vocabulary_layout(vocab):
    assert [vocab[i] for i in range(3)] == list(SPECIALS)
    assert vocab.eos_id == 2
    assert all(c in vocab.id_of for c in CHARSET)
    assert " " in vocab.id_of
    multi = [e for e in vocab.entries if len(e) > 1 and e not in SPECIALS]
    assert len(multi) == 64
    assert len(vocab) == 3 + 62 + 1 + 6 + 64
    assert sorted(vocab.id_of.values()) == list(range(len(vocab)))


def test_charset():
    assert len(CHARSET) == 62
    assert CHARSET.characters[:3] == ("a", "b", "c")
    assert CHARSET.characters[26] == "A" and CHARSET.characters[52] == "0"
    with pytest.raises(ContractError):
        CharSet(("a", "a"))


def test_round_trip_1000_random_sentences(vocab):
    rng = np.random.default_rng(0)
    for _ in range(1000):
        s = random_sentence(rng)
        seq = tokenize(s, vocab)
        assert detokenize(seq.tokens, vocab) == s
        assert from_ids(seq.tokens, vocab) == seq


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="".join(CHARSET.characters) + " .,?!'-", max_size=60))
def test_round_trip_and_spans(vocab, text):
    seq = tokenize(text, vocab)
    assert detokenize(seq.tokens, vocab) == text
    pos = 0
    for (start, end), tok in zip(seq.spans, seq.tokens):
        assert start == pos and end > start
        assert text[start:end] == vocab[tok]
        pos = end
    assert pos == len(text)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from(lexicon_words.content_words()), min_size=1, max_size=12))
def test_content_words_are_single_tokens(vocab, words):
    seq = tokenize(" ".join(words), vocab)
    assert len(seq.tokens) == 2 * len(words) - 1


def test_word_of_token(vocab):
    seq = tokenize("the  cat", vocab)
    mapping = seq.word_of_token()
    assert mapping[0] == 0 and mapping[-1] == 1
    assert mapping.count(None) == 2


def test_vocabulary_file_round_trip(tmp_path, vocab):
    path = tmp_path / "v.txt"
    vocab.save(path)
    assert path.read_text().splitlines()[0] == FORMAT_LINE
    assert Vocabulary.load(path) == vocab


def test_vocabulary_requires_header(tmp_path):
    path = tmp_path / "v.txt"
    path.write_text("a\nb\n")
    with pytest.raises(ContractError):
        Vocabulary.load(path)


def test_vocabulary_rejects_duplicates():
    with pytest.raises(ContractError):
        Vocabulary(list(SPECIALS) + ["a", "a"])


def test_lexicon_covers_vocabulary(vocab, lexicon):
    assert lexicon.covers(vocab)
    assert 190 <= len(lexicon) <= 220
    tagged = [w for bucket in lexicon.buckets.values() for w in bucket]
    assert sorted(tagged) == sorted(lexicon.tag_of)


def test_lexicon_file_round_trip(tmp_path, lexicon):
    path = tmp_path / "lex.tsv"
    lexicon.save(path)
    again = PosLexicon.load(path)
    assert again.tag_of == lexicon.tag_of


def test_pos_tags(vocab, lexicon):
    assert pos_tags(tokenize("", vocab), lexicon) == []
    noun = lexicon.buckets["NOUN"][0]
    tags = pos_tags(tokenize(f"x {noun} zzzq", vocab), lexicon)
    assert tags == [OTHER, "NOUN", OTHER]


def test_same_bucket_substitution_keeps_tags(vocab, lexicon):
    a, b = lexicon.buckets["VERB"][:2]
    before = pos_tags(tokenize(f"you {a} who", vocab), lexicon)
    after = pos_tags(tokenize(f"you {b} who", vocab), lexicon)
    assert before == after


def test_remember_and_know_are_verbs(lexicon):
    assert lexicon.tag("know") == lexicon.tag("remember") == "VERB"
