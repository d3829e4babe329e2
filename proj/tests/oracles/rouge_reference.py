"""Offline ROUGE reference for the files in tests/fixtures/rouge.

Independent of the C++ code: its own tokenizer (same rules), Counter-based
n-gram overlap and a full LCS table. Prints macro means with 17 significant
digits for freezing into test_rouge.cpp.

Usage: python3 rouge_reference.py <fixture-dir>
"""

import collections
import pathlib
import string
import sys

PLACEHOLDERS = {"MATH", "CITE", "REF", "NUM"}
PUNCT = set(string.punctuation)


def tokenize(text):
    out = []
    for chunk in text.split():
        lead = 0
        while lead < len(chunk) and chunk[lead] in PUNCT:
            lead += 1
        trail = len(chunk)
        while trail > lead and chunk[trail - 1] in PUNCT:
            trail -= 1
        out.extend(chunk[:lead])
        core = chunk[lead:trail]
        if core:
            if core in PLACEHOLDERS:
                out.append(core)
            elif any(c.isdigit() and c.isascii() for c in core) and not any(
                (c.isascii() and c.isalpha()) or ord(c) >= 0x80 for c in core
            ):
                out.append("NUM")
            else:
                out.append("".join(c.lower() if c.isascii() else c for c in core))
        out.extend(chunk[trail:])
    return out


def prf(hits, ref_total, cand_total):
    r = hits / ref_total if ref_total else 0.0
    p = hits / cand_total if cand_total else 0.0
    f = 2 * r * p / (r + p) if r + p else 0.0
    return r, p, f


def rouge_n(cand, ref, n):
    grams = lambda t: collections.Counter(tuple(t[i : i + n]) for i in range(len(t) - n + 1))
    c, r = grams(cand), grams(ref)
    hits = sum(min(v, r[g]) for g, v in c.items())
    return prf(hits, max(len(ref) - n + 1, 0), max(len(cand) - n + 1, 0))


def rouge_l(cand, ref):
    t = [[0] * (len(ref) + 1) for _ in range(len(cand) + 1)]
    for i in range(1, len(cand) + 1):
        for j in range(1, len(ref) + 1):
            t[i][j] = t[i - 1][j - 1] + 1 if cand[i - 1] == ref[j - 1] else max(t[i - 1][j], t[i][j - 1])
    return prf(t[-1][-1], len(ref), len(cand))


def main(root):
    root = pathlib.Path(root)
    rows = []
    for gold in sorted((root / "gold").glob("*.txt")):
        ref = tokenize(gold.read_text())
        lines = [l for l in (root / "generated" / gold.name).read_text().splitlines() if l.strip()]
        cand = tokenize(" ".join(lines))
        rows.append((rouge_n(cand, ref, 1), rouge_n(cand, ref, 2), rouge_l(cand, ref)))
    for k, name in enumerate(["rouge1", "rouge2", "rougeL"]):
        means = [sum(r[k][m] for r in rows) / len(rows) for m in range(3)]
        print(name, " ".join(f"{v:.17g}" for v in means))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else pathlib.Path(__file__).resolve().parent.parent / "fixtures" / "rouge")
