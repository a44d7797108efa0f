"""Regenerates crafted.json: references, token offsets and the expected
field token spans, computed here independently of the C++ code."""
import json
import random

ORDER = ["title", "authors", "venue", "year", "doi"]
TAGS = {"title": "TITLE", "authors": "AUTHORS", "venue": "VENUE", "year": "YEAR", "doi": "DOI"}


def serialize(ref):
    text, spans = "", {}
    for i, f in enumerate(ORDER):
        if i:
            text += "\n"
        text += "<" + TAGS[f] + "> "
        start = len(text)
        if f == "authors":
            value = " | ".join(ref["authors"])
        elif f == "year":
            value = str(ref["year"])
        elif f == "doi":
            value = ref.get("doi") or ""
        else:
            value = ref[f]
        text += value
        spans[f] = (start, len(text))
        text += " </" + TAGS[f] + ">"
    return text, spans


def tokenize(text, rng, mode):
    out, pos, n = [], 0, len(text)
    if mode == "special":
        out.append((0, 0))
    while pos < n:
        if mode == "words":
            end = pos + 1
            while end < n and not text[end].isspace() and text[end] not in "<>":
                end += 1
            if text[pos].isspace():
                while end < n and text[end] == " ":
                    end += 1
        else:
            end = min(n, pos + rng.randint(1, 6 if mode == "wide" else 3))
        out.append((pos, end))
        pos = end
    if mode == "special":
        out.append((n, n))
    return out


def expected(spans, offsets):
    res = {}
    for f, (s, e) in spans.items():
        hits = [k for k, (a, b) in enumerate(offsets) if a < e and s < b]
        res[f] = None if s == e else [hits[0], hits[-1] + 1]
    return res


WORDS = ["Sparse", "probing", "of", "café", "naïve", "模型", "注意力", "Łódź", "😀", "graph",
         "retrieval", "Übersicht", "x|y", "long-range", "Σ-delta", "テスト"]

rng = random.Random(20240607)
cases = []
for i in range(20):
    ref = {
        "title": " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 6))),
        "authors": [" ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 3)))
                    for _ in range(rng.randint(1, 4))],
        "venue": " ".join(rng.choice(WORDS) for _ in range(rng.randint(1, 4))),
        "year": rng.randint(1950, 2030),
        "doi": None if i % 5 == 4 else "10.%d/%s" % (rng.randint(1000, 9999), rng.choice(WORDS)),
    }
    text, spans = serialize(ref)
    mode = ["words", "narrow", "wide", "special"][i % 4]
    offsets = tokenize(text, rng, mode)
    cases.append({
        "reference": ref,
        "text": text,
        "offsets": offsets,
        "expected": expected(spans, offsets),
    })

with open("crafted.json", "w", encoding="utf-8") as fh:
    json.dump(cases, fh, ensure_ascii=False, indent=1)
