"""Narration stripping, URL repair, the shipped corpus, idempotence."""
import json
from importlib import resources
from urllib.parse import urlsplit

import pytest

from collection_explorer.postprocess import (postprocess, repair_urls,
                                             strip_narration)


def corpus():
    raw = resources.files("collection_explorer.data").joinpath(
        "postprocess_corpus.json").read_text(encoding="utf-8")
    return json.loads(raw)


class TestSpecExamples:
    def test_clean_reply_unchanged(self):
        text = ("I found 23 frog specimens near Castle Hill, NSW. The collection "
                "includes Green Tree Frogs (Litoria caerulea), Peron's Tree Frogs "
                "(Litoria peronii), and Common Eastern Froglets (Crinia signifera). "
                "Most were collected between 1985 and 2005.")
        assert postprocess(text) == text

    def test_leading_narration_dropped(self):
        assert postprocess("I will now call search_specimens. I found 5 records.") \
            == "I found 5 records."

    def test_trailing_url_junk_removed(self):
        text = "See https://biocache.ala.org.au/occurrences/search?q=*:*)."
        repaired = postprocess(text)
        assert repaired == "See https://biocache.ala.org.au/occurrences/search?q=*:*"
        url = repaired.split("See ", 1)[1]
        parts = urlsplit(url)
        assert parts.scheme == "https" and parts.netloc and " " not in url

    def test_doubled_scheme_collapsed(self):
        assert postprocess("Link: https://https://example.org/a") == \
            "Link: https://example.org/a"

    def test_spaces_inside_bracketed_query_encoded(self):
        text = ("Try https://biocache.ala.org.au/occurrences/search"
                "?q=*:*&fq=year:[1980 TO 1989] for that decade.")
        repaired = postprocess(text)
        assert "year:[1980%20TO%201989]" in repaired
        url = repaired.split()[1]
        assert " " not in url
        assert urlsplit(url).netloc == "biocache.ala.org.au"

    def test_balanced_parenthesis_kept(self):
        text = "See https://en.wikipedia.org/wiki/Frog_(disambiguation) for more."
        assert postprocess(text) == text


class TestCorpus:
    def test_corpus_has_200_cases(self):
        assert len(corpus()) == 200

    @pytest.mark.parametrize("case", corpus(),
                             ids=lambda c: c["input"][:40].replace(" ", "_"))
    def test_case(self, case):
        assert postprocess(case["input"]) == case["expected"]

    def test_idempotent_on_all_cases(self):
        for case in corpus():
            once = postprocess(case["input"])
            assert postprocess(once) == once


class TestPieces:
    def test_strip_narration_keeps_spacing(self):
        text = "First fact. Calling the tool now. Second fact."
        assert strip_narration(text) == "First fact. Second fact."

    def test_strip_narration_handles_question_sentences(self):
        text = "Would you like more detail? Fetching the records now."
        assert strip_narration(text) == "Would you like more detail?"

    def test_repair_ignores_non_urls(self):
        assert repair_urls("no links here (honest).") == "no links here (honest)."

    def test_multiple_urls_in_one_text(self):
        text = ("A https://https://a.example/x). Then B "
                "https://b.example/y].")
        assert repair_urls(text) == "A https://a.example/x Then B https://b.example/y"

    def test_abbreviations_do_not_split_sentences(self):
        text = "Catalogue number M.40213 belongs to a sugar glider."
        assert postprocess(text) == text
