"""Word lists behind the synthetic translation task and the POS lexicon.

``CONTENT_WORDS`` are the 64 in-vocabulary subwords the toy translator is
trained on. ``EXTRA_WORDS`` only exist in the POS lexicon; they give the
structure-level mutator same-tag substitutes that the tokenizer has to break
into smaller pieces.
"""

TAGS = ("NOUN", "VERB", "ADJ", "ADV", "PRON", "DET", "ADP", "CONJ", "NUM", "OTHER")

CONTENT_WORDS = {
    "NOUN": [
        "time", "year", "people", "way", "day", "man", "thing", "woman", "life",
        "child", "world", "school", "family", "student", "country", "problem",
        "hand", "water",
    ],
    "VERB": [
        "know", "remember", "see", "make", "go", "take", "come", "think", "look",
        "want", "give", "find", "tell", "work",
    ],
    "ADJ": ["good", "new", "first", "last", "long", "great", "little", "old", "big", "high"],
    "ADV": ["up", "so", "out", "just", "now", "then"],
    "PRON": ["you", "who", "what", "they", "she", "we"],
    "DET": ["the", "this", "that"],
    "ADP": ["of", "in", "for"],
    "CONJ": ["and", "but"],
    "NUM": ["one", "two"],
}

EXTRA_WORDS = {
    "NOUN": [
        "house", "car", "book", "city", "night", "point", "home", "room", "mother",
        "area", "money", "story", "fact", "month", "lot", "right", "study", "job",
        "word", "business", "issue", "side", "kind", "head", "service", "friend",
        "father", "power", "hour", "game", "line", "end", "member", "law", "market",
        "door", "office", "health", "person", "art",
    ],
    "VERB": [
        "say", "get", "use", "feel", "try", "leave", "call", "ask", "need", "become",
        "seem", "keep", "let", "begin", "help", "talk", "turn", "start", "show",
        "hear", "play", "run", "move", "like", "live", "believe", "hold", "bring",
        "happen", "write",
    ],
    "ADJ": [
        "own", "other", "young", "important", "few", "public", "bad", "same", "able",
        "late", "hard", "major", "better", "early", "small", "large", "next", "real",
        "best", "free", "whole", "clear", "sure", "strong", "true",
    ],
    "ADV": [
        "also", "very", "well", "even", "back", "still", "never", "here", "only",
        "really", "almost", "often", "always", "again", "soon",
    ],
    "PRON": ["he", "it", "me", "him", "her", "them", "us", "which"],
    "DET": ["an", "these", "those", "each", "every"],
    "ADP": ["on", "with", "at", "by", "from", "about", "into", "over"],
    "CONJ": ["or", "yet", "nor"],
    "NUM": ["three", "four", "five", "six", "ten", "hundred"],
}


def content_words() -> list:
    """In-vocabulary content words in canonical (vocabulary) order."""
    return [w for tag in TAGS if tag in CONTENT_WORDS for w in CONTENT_WORDS[tag]]


def tagged_words() -> list:
    """All (word, tag) pairs of the POS lexicon, content words first."""
    pairs = [(w, tag) for tag in TAGS if tag in CONTENT_WORDS for w in CONTENT_WORDS[tag]]
    pairs += [(w, tag) for tag in TAGS if tag in EXTRA_WORDS for w in EXTRA_WORDS[tag]]
    return pairs
