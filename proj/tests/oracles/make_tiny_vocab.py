"""Writes the hand-designed test vocabulary. Scores are small dyadic values
so every sum is exact and ties are real ties."""
import os
from common import DATA

SINGLE = list("abcdefghijklmnopqrstuvwxyz") + list("ABCDEFGHIJKLMNOPQRSTUVWXYZ") + \
    list("0123456789") + list("()[]{}:;=+-*/.,_#'\"<>!?%&|^~@\\")
MULTI = {
    "de": -6.0, "def": -7.0, "re": -6.0, "ret": -7.0, "turn": -8.0, "urn": -7.0,
    "return": -9.0, "in": -5.0, "int": -7.0, "pr": -6.0, "print": -8.0, "se": -6.0,
    "lf": -6.0, "self": -8.0, "xy": -8.0, "pq": -6.0, "qr": -6.0, "the": -6.5,
    "an": -5.5, "and": -6.5, "for": -6.5, "if": -5.0, "el": -6.0, "else": -7.0,
    "Ω": -4.0,
}

SPECIALS = ["<pad>", "</s>", "<unk>", "<SEP>", "<|removed|>", "<space*1>", "<space*2>",
            "<space*4>", "<tab>", "<newline>"] + ["<extra_id_%d>" % k for k in range(100)]


def escape(s):
    return s.replace("\\", "\\\\").replace("\n", "\\n").replace("\t", "\\t")


def main():
    lines = ["ECVOCAB 1"]
    for ch in SINGLE:
        lines.append("%s\t%s" % (escape(ch), "-4"))
    for piece, score in MULTI.items():
        lines.append("%s\t%r" % (escape(piece), score))
    lines.append("[special]")
    lines.extend(SPECIALS)
    path = os.path.join(DATA, "vocab", "tiny.vocab")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
    print("wrote vocab/tiny.vocab")


if __name__ == "__main__":
    main()
