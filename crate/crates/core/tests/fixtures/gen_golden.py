"""Regenerates the golden preprocessing outputs from golden/raw.tsv.

This is a standalone reference implementation of the cleaning stages; it
shares only the resource tables with the Rust code. Run from this directory:

    python3 gen_golden.py
"""

from pathlib import Path

HERE = Path(__file__).resolve().parent
RES = HERE.parent.parent / "resources"
GOLDEN = HERE / "golden"


def data_lines(path):
    for line in path.read_text(encoding="utf-8").splitlines():
        if line.strip():
            yield line


STOPWORDS = {w.strip() for w in data_lines(RES / "stopwords_en.txt")}
LEMMAS = dict(line.split("\t") for line in data_lines(RES / "lemma_exceptions.tsv"))
EMOJI = {}
for line in data_lines(RES / "emoji_lexicon.tsv"):
    codes, name = line.split("\t")
    EMOJI["".join(chr(int(c, 16)) for c in codes.split(" "))] = name.strip()
EMOJI_MAX = max(len(k) for k in EMOJI)


def squash(text):
    return " ".join(text.split())


def remove_token(text, token):
    return squash(text.replace(token, " "))


def compress_repeats(text):
    out = []
    for c in text:
        if len(out) >= 2 and out[-1] == c and out[-2] == c:
            continue
        out.append(c)
    return squash("".join(out))


def emoji_to_words(text):
    out = []
    i = 0
    while i < len(text):
        for n in range(min(EMOJI_MAX, len(text) - i), 0, -1):
            name = EMOJI.get(text[i : i + n])
            if name is not None:
                out.append(" " + name + " ")
                i += n
                break
        else:
            out.append(text[i])
            i += 1
    return squash("".join(out))


def remove_non_alnum(text):
    return squash("".join(c if c.isalnum() else " " if c.isspace() else "" for c in text))


def remove_stopwords(text):
    return " ".join(t for t in text.split() if t.lower() not in STOPWORDS)


def suffix_rule(tok):
    if tok.endswith("ies"):
        return tok[:-3] + "y"
    if tok.endswith("sses"):
        return tok[:-4] + "ss"
    if len(tok) > 3 and tok.endswith("s") and not tok.endswith(("ss", "us", "is")):
        return tok[:-1]
    if tok.endswith("ing") and len(tok) - 3 >= 3:
        return tok[:-3]
    if tok.endswith("ed") and len(tok) - 2 >= 3:
        return tok[:-2]
    return None


def lemma(tok):
    for _ in range(32):
        if tok in LEMMAS:
            nxt = LEMMAS[tok] if LEMMAS[tok] != tok else None
        else:
            nxt = suffix_rule(tok)
        if nxt is None:
            break
        tok = nxt
    return tok


def lemmatize(text):
    return " ".join(t for t in (lemma(t) for t in text.split()) if t)


STAGES = {
    "remove_user_tokens": lambda t: remove_token(t, "@USER"),
    "remove_url_tokens": lambda t: remove_token(t, "HTTPURL"),
    "remove_hash_char": lambda t: remove_token(t, "#"),
    "compress_repeats": compress_repeats,
    "emoji_to_words": emoji_to_words,
    "remove_non_alnum": remove_non_alnum,
    "remove_stopwords": remove_stopwords,
    "lemmatize": lemmatize,
    "lowercase": lambda t: squash(t.lower()),
}

OP = [
    "remove_user_tokens",
    "remove_url_tokens",
    "remove_hash_char",
    "emoji_to_words",
    "compress_repeats",
]


def main():
    rows = [line.split("\t") for line in (GOLDEN / "raw.tsv").read_text(encoding="utf-8").splitlines()]
    outputs = {name: [fn] for name, fn in STAGES.items()}
    outputs["op"] = [STAGES[s] for s in OP]
    for name, fns in outputs.items():
        lines = []
        for tid, text, label in rows:
            for fn in fns:
                text = fn(text)
            lines.append(f"{tid}\t{text}\t{label}\n")
        (GOLDEN / f"{name}.tsv").write_text("".join(lines), encoding="utf-8", newline="\n")


if __name__ == "__main__":
    main()
