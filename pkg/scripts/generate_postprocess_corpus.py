#!/usr/bin/env python3
"""Compose the post-processing corpus.

Each case is an (input, expected) pair built from templates: clean texts
pass through unchanged, narration sentences are dropped, URL defects are
repaired. Expected outputs are constructed by the templates themselves
so the corpus stays an independent statement of intended behaviour.

Run from the repo root:  python scripts/generate_postprocess_corpus.py
"""
import json
import random
from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "collection_explorer" / "data" / "postprocess_corpus.json"

CLEAN_SENTENCES = [
    "I found 23 frog specimens near Castle Hill, NSW.",
    "The collection holds 47 kangaroo records from the 1980s.",
    "Most of these specimens were collected between 1985 and 2005.",
    "The earliest record dates from 1912 and was collected near Broken Hill.",
    "Three species dominate: Litoria caerulea, Litoria peronii and Crinia signifera.",
    "Catalogue number M.40213 belongs to a sugar glider from Victoria.",
    "Eight of the records carry specimen photographs.",
    "New South Wales accounts for 61 of the matching records.",
    "The specimen was identified to genus level only.",
    "You can narrow the search by adding a year range.",
    "No records matched that combination of filters.",
    "The family Scarabaeidae covers the beetles you asked about.",
    "This seahorse species is listed as endangered in its range.",
    "Five of the top results include images you can open.",
    "Two distinct localities share that place name, one in each state.",
    "The dataset is updated regularly by the museum's digitisation team.",
    "Collector E. Troughton registered many of the early mammal records.",
    "There are 12 matching records with valid coordinates.",
    "A single specimen from 1923 matches your description.",
    "The nearest record lies about 4 kilometres from the town centre.",
    "Would you like the results restricted to a particular decade?",
    "Zooming in on the map reveals individual collection sites.",
    "That vernacular name maps to the scientific name Petaurus breviceps.",
    "Each result links back to the source record for verification.",
    "The statistics cover all digitised records, not only those with images.",
]

NARRATION_SENTENCES = [
    "I will now call search_specimens.",
    "I'll use the get_specimen_statistics function.",
    "Let me query the collection database.",
    "Calling the search_specimens tool now.",
    "Invoking the function get_specimen_by_id.",
    "Using the search_specimens tool to find records.",
    "One moment while I fetch the records.",
    "Fetching the data from the collection now.",
    "Retrieving records for your query.",
    "Tool call completed successfully.",
    "The function returned the following data.",
    "Executing the query against the API.",
    "Now I need to call the statistics function.",
    "Running the search now.",
    "I am going to invoke the specimen search.",
]

URLS = [
    "https://biocache.ala.org.au/occurrences/search?q=*:*",
    "https://biocache.ala.org.au/occurrences/search?q=*:*&fq=stateProvince:%22Queensland%22",
    "https://collections.example.org/records/12345",
    "https://biocache.ala.org.au/occurrences/search?q=*:*&fq=vernacularName:*glider*",
    "https://media.example.org/specimens/ab12cd34/0.jpg",
]


def main():
    rng = random.Random(7)
    cases = []

    def clean(n=1):
        return " ".join(rng.choice(CLEAN_SENTENCES) for _ in range(n))

    # 1. clean pass-through (80)
    for i in range(80):
        text = clean(1 + i % 3)
        cases.append({"input": text, "expected": text})

    # 2. narration stripped (50)
    for i in range(50):
        body = clean(1 + i % 2)
        narration = rng.choice(NARRATION_SENTENCES)
        kind = i % 3
        if kind == 0:  # leading narration
            cases.append({"input": f"{narration} {body}", "expected": body})
        elif kind == 1:  # trailing narration
            cases.append({"input": f"{body} {narration}", "expected": body})
        else:  # sandwiched narration
            tail = clean(1)
            cases.append({"input": f"{body} {narration} {tail}",
                          "expected": f"{body} {tail}"})

    # 3. URL repair (50)
    for i in range(50):
        url = rng.choice(URLS)
        kind = i % 5
        if kind == 0:  # trailing ")." junk
            cases.append({"input": f"See {url}).",
                          "expected": f"See {url}"})
        elif kind == 1:  # trailing "]" and comma
            cases.append({"input": f"Source: {url}],",
                          "expected": f"Source: {url}"})
        elif kind == 2:  # doubled scheme
            bare = url.split("://", 1)[1]
            cases.append({"input": f"Details at https://https://{bare} for each record.",
                          "expected": f"Details at https://{bare} for each record."})
        elif kind == 3:  # literal spaces inside a bracketed range
            lo = 1900 + (i * 7) % 90
            hi = lo + 9
            base = "https://biocache.ala.org.au/occurrences/search"
            cases.append({
                "input": f"Try {base}?q=*:*&fq=year:[{lo} TO {hi}] for the decade.",
                "expected": f"Try {base}?q=*:*&fq=year:[{lo}%20TO%20{hi}] for the decade.",
            })
        else:  # sentence-final period after the link
            cases.append({"input": f"More at {url}.",
                          "expected": f"More at {url}"})

    # 4. combined narration + URL defects (20)
    for i in range(20):
        narration = rng.choice(NARRATION_SENTENCES)
        body = clean(1)
        url = rng.choice(URLS)
        cases.append({
            "input": f"{narration} {body} Verify: {url}).",
            "expected": f"{body} Verify: {url}",
        })

    assert len(cases) == 200
    OUT.write_text(json.dumps(cases, ensure_ascii=False, indent=1) + "\n",
                   encoding="utf-8")
    print(f"wrote {len(cases)} cases to {OUT}")


if __name__ == "__main__":
    main()
